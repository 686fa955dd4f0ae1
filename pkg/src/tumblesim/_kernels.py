"""Compiled inner loops for the chain kinematics, dynamics and contact.

Generalized coordinates are ordered ``q = [q_b (m), p_H (3), q_H (3)]`` with
``q_H = (q_x, q_y, q_z)`` the head's Z-Y-X Euler angles. All arrays are
world frame unless the name says otherwise. Public wrappers with argument
checking live in the ``kinematics``, ``dynamics`` and ``contact`` modules.
"""
import math

import numpy as np
from numba import njit

# Module frame -> head frame. The head x axis is the joint pitch axis, so
# tumbling about the loop normal is the innermost Euler angle q_x and never
# meets the q_y = +-pi/2 singularity.
HEAD_MOUNT = np.array([[0.0, 1.0, 0.0],
                       [-1.0, 0.0, 0.0],
                       [0.0, 0.0, 1.0]])


@njit(cache=True)
def cross(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@njit(cache=True)
def cross_t(ax, ay, az, bx, by, bz):
    return ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx


@njit(cache=True)
def matmul3(A, B):
    C = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            C[i, j] = A[i, 0] * B[0, j] + A[i, 1] * B[1, j] + A[i, 2] * B[2, j]
    return C


@njit(cache=True)
def euler_zyx(qx, qy, qz):
    cx, sx = math.cos(qx), math.sin(qx)
    cy, sy = math.cos(qy), math.sin(qy)
    cz, sz = math.cos(qz), math.sin(qz)
    R = np.empty((3, 3))
    R[0, 0] = cz * cy
    R[0, 1] = cz * sy * sx - sz * cx
    R[0, 2] = cz * sy * cx + sz * sx
    R[1, 0] = sz * cy
    R[1, 1] = sz * sy * sx + cz * cx
    R[1, 2] = sz * sy * cx - cz * sx
    R[2, 0] = -sy
    R[2, 1] = cy * sx
    R[2, 2] = cy * cx
    return R


@njit(cache=True)
def euler_rate_matrix(qx, qy, qz):
    """E with omega_world = E @ (qdot_x, qdot_y, qdot_z)."""
    cy, sy = math.cos(qy), math.sin(qy)
    cz, sz = math.cos(qz), math.sin(qz)
    E = np.zeros((3, 3))
    E[0, 0] = cz * cy
    E[1, 0] = sz * cy
    E[2, 0] = -sy
    E[0, 1] = -sz
    E[1, 1] = cz
    E[2, 2] = 1.0
    return E


@njit(cache=True)
def axis_angle(axis, angle):
    c, s = math.cos(angle), math.sin(angle)
    x, y, z = axis[0], axis[1], axis[2]
    t = 1.0 - c
    R = np.empty((3, 3))
    R[0, 0] = c + x * x * t
    R[0, 1] = x * y * t - z * s
    R[0, 2] = x * z * t + y * s
    R[1, 0] = y * x * t + z * s
    R[1, 1] = c + y * y * t
    R[1, 2] = y * z * t - x * s
    R[2, 0] = z * x * t - y * s
    R[2, 1] = z * y * t + x * s
    R[2, 2] = c + z * z * t
    return R


@njit(cache=True)
def chain_pose(q, lengths, com, junction_joint, axes):
    """Module rotations R (N,3,3), frame origins d (N,3) and CoMs p (N,3)."""
    N = lengths.shape[0]
    m = axes.shape[0]
    R = np.empty((N, 3, 3))
    d = np.empty((N, 3))
    p = np.empty((N, 3))
    R[0] = matmul3(euler_zyx(q[m + 3], q[m + 4], q[m + 5]), HEAD_MOUNT)
    d[0] = q[m:m + 3]
    for k in range(N):
        if k > 0:
            d[k] = d[k - 1] + R[k - 1][:, 0] * lengths[k - 1]
            j = junction_joint[k - 1]
            if j >= 0:
                R[k] = matmul3(R[k - 1], axis_angle(axes[j], q[j]))
            else:
                R[k] = R[k - 1]
        for i in range(3):
            p[k, i] = R[k, i, 0] * com[k, 0] + R[k, i, 1] * com[k, 1] + R[k, i, 2] * com[k, 2] + d[k, i]
    return R, d, p


@njit(cache=True)
def joint_frames(R, d, junction_joint, axes):
    """World joint axes z (m,3), joint origins o (m,3), and the first distal module."""
    m = axes.shape[0]
    z = np.zeros((m, 3))
    o = np.zeros((m, 3))
    child = np.zeros(m, dtype=np.int64)
    for k in range(1, d.shape[0]):
        j = junction_joint[k - 1]
        if j >= 0:
            z[j] = R[k - 1] @ axes[j]
            o[j] = d[k]
            child[j] = k
    return z, o, child


@njit(cache=True)
def point_jacobian(q, k, x, R, d, junction_joint, axes):
    """Linear-velocity Jacobian (3,n) of the material point at ``x`` on module k."""
    m = axes.shape[0]
    n = m + 6
    J = np.zeros((3, n))
    E = euler_rate_matrix(q[m + 3], q[m + 4], q[m + 5])
    r = x - d[0]
    for c in range(3):
        J[c, m + c] = 1.0
        col = cross(E[:, c], r)
        J[0, m + 3 + c] = col[0]
        J[1, m + 3 + c] = col[1]
        J[2, m + 3 + c] = col[2]
    for kk in range(1, k + 1):
        j = junction_joint[kk - 1]
        if j >= 0:
            zj = R[kk - 1] @ axes[j]
            col = cross(zj, x - d[kk])
            J[0, j] = col[0]
            J[1, j] = col[1]
            J[2, j] = col[2]
    return J


@njit(cache=True)
def chain_jacobians(q, R, d, p, junction_joint, axes):
    """CoM Jacobians Jv (N,3,n) and angular-velocity Jacobians Jw (N,3,n)."""
    m = axes.shape[0]
    E = euler_rate_matrix(q[m + 3], q[m + 4], q[m + 5])
    z, o, child = joint_frames(R, d, junction_joint, axes)
    return chain_jacobians_from(E, z, o, child, d[0], p)


@njit(cache=True)
def chain_jacobians_from(E, z, o, child, base, p):
    N = p.shape[0]
    m = z.shape[0]
    n = m + 6
    Jv = np.zeros((N, 3, n))
    Jw = np.zeros((N, 3, n))
    for k in range(N):
        rx, ry, rz = p[k, 0] - base[0], p[k, 1] - base[1], p[k, 2] - base[2]
        for c in range(3):
            Jv[k, c, m + c] = 1.0
            ex, ey, ez = E[0, c], E[1, c], E[2, c]
            Jv[k, 0, m + 3 + c] = ey * rz - ez * ry
            Jv[k, 1, m + 3 + c] = ez * rx - ex * rz
            Jv[k, 2, m + 3 + c] = ex * ry - ey * rx
            Jw[k, 0, m + 3 + c] = ex
            Jw[k, 1, m + 3 + c] = ey
            Jw[k, 2, m + 3 + c] = ez
        for j in range(m):
            if child[j] <= k:
                sx, sy, sz = p[k, 0] - o[j, 0], p[k, 1] - o[j, 1], p[k, 2] - o[j, 2]
                zx, zy, zz = z[j, 0], z[j, 1], z[j, 2]
                Jv[k, 0, j] = zy * sz - zz * sy
                Jv[k, 1, j] = zz * sx - zx * sz
                Jv[k, 2, j] = zx * sy - zy * sx
                Jw[k, 0, j] = zx
                Jw[k, 1, j] = zy
                Jw[k, 2, j] = zz
    return Jv, Jw


@njit(cache=True)
def world_inertias(R, inertia):
    N = R.shape[0]
    I = np.empty((N, 3, 3))
    for k in range(N):
        Rk = R[k]
        I[k] = (Rk * inertia[k]) @ Rk.T
    return I


@njit(cache=True)
def mass_matrix(masses, Iw, Jv, Jw):
    N, _, n = Jv.shape
    Jv2 = Jv.reshape(3 * N, n)
    Jw2 = Jw.reshape(3 * N, n)
    mJv = np.empty((3 * N, n))
    IJw = np.empty((3 * N, n))
    for k in range(N):
        mJv[3 * k:3 * k + 3] = masses[k] * Jv[k]
        IJw[3 * k:3 * k + 3] = Iw[k] @ Jw[k]
    D = Jv2.T @ mJv + Jw2.T @ IJw
    # symmetrize away round-off
    return 0.5 * (D + D.T)


@njit(cache=True)
def velocity_recursion(q, qd, R, d, p, junction_joint, axes):
    """Propagate velocities and velocity-product accelerations along the chain.

    Returns module angular velocities w, CoM velocities v, the bias
    accelerations alpha, a (angular, CoM linear) obtained with qdd = 0, and
    the module frame-origin velocities vo.
    """
    N = p.shape[0]
    m = axes.shape[0]
    dqx, dqy, dqz = qd[m + 3], qd[m + 4], qd[m + 5]
    E = euler_rate_matrix(q[m + 3], q[m + 4], q[m + 5])
    w = np.empty((N, 3))
    alpha = np.empty((N, 3))
    vo = np.empty((N, 3))
    ao = np.empty((N, 3))
    v = np.empty((N, 3))
    a = np.empty((N, 3))
    for i in range(3):
        w[0, i] = dqx * E[i, 0] + dqy * E[i, 1] + dqz * E[i, 2]
        vo[0, i] = qd[m + i]
        ao[0, i] = 0.0
    # head: d/dt of the Euler-rate columns at fixed rates
    wz = (dqy * E[0, 1], dqy * E[1, 1], dqy * E[2, 1] + dqz)
    c1 = cross_t(wz[0], wz[1], wz[2], E[0, 0], E[1, 0], E[2, 0])
    c2 = cross_t(0.0, 0.0, dqz, E[0, 1], E[1, 1], E[2, 1])
    for i in range(3):
        alpha[0, i] = dqx * c1[i] + dqy * c2[i]
    for k in range(1, N):
        rx, ry, rz = d[k, 0] - d[k - 1, 0], d[k, 1] - d[k - 1, 1], d[k, 2] - d[k - 1, 2]
        wx, wy, wzz = w[k - 1, 0], w[k - 1, 1], w[k - 1, 2]
        wr = cross_t(wx, wy, wzz, rx, ry, rz)
        ar = cross_t(alpha[k - 1, 0], alpha[k - 1, 1], alpha[k - 1, 2], rx, ry, rz)
        wwr = cross_t(wx, wy, wzz, wr[0], wr[1], wr[2])
        for i in range(3):
            vo[k, i] = vo[k - 1, i] + wr[i]
            ao[k, i] = ao[k - 1, i] + ar[i] + wwr[i]
        j = junction_joint[k - 1]
        if j >= 0:
            ax = axes[j]
            Rp = R[k - 1]
            zx = (Rp[0, 0] * ax[0] + Rp[0, 1] * ax[1] + Rp[0, 2] * ax[2]) * qd[j]
            zy = (Rp[1, 0] * ax[0] + Rp[1, 1] * ax[1] + Rp[1, 2] * ax[2]) * qd[j]
            zz = (Rp[2, 0] * ax[0] + Rp[2, 1] * ax[1] + Rp[2, 2] * ax[2]) * qd[j]
            wz_ = cross_t(wx, wy, wzz, zx, zy, zz)
            w[k, 0], w[k, 1], w[k, 2] = wx + zx, wy + zy, wzz + zz
            for i in range(3):
                alpha[k, i] = alpha[k - 1, i] + wz_[i]
        else:
            for i in range(3):
                w[k, i] = w[k - 1, i]
                alpha[k, i] = alpha[k - 1, i]
    for k in range(N):
        rx, ry, rz = p[k, 0] - d[k, 0], p[k, 1] - d[k, 1], p[k, 2] - d[k, 2]
        wr = cross_t(w[k, 0], w[k, 1], w[k, 2], rx, ry, rz)
        ar = cross_t(alpha[k, 0], alpha[k, 1], alpha[k, 2], rx, ry, rz)
        wwr = cross_t(w[k, 0], w[k, 1], w[k, 2], wr[0], wr[1], wr[2])
        for i in range(3):
            v[k, i] = vo[k, i] + wr[i]
            a[k, i] = ao[k, i] + ar[i] + wwr[i]
    return w, v, alpha, a, vo


@njit(cache=True)
def bias_forces(masses, Iw, Jv, Jw, w, alpha, a, gravity):
    """H = Coriolis/centrifugal + gravity terms, projected through the Jacobians."""
    N, _, n = Jv.shape
    lin = np.empty(3 * N)
    ang = np.empty(3 * N)
    for k in range(N):
        Iwk = Iw[k] @ w[k]
        lin[3 * k:3 * k + 3] = masses[k] * (a[k] - gravity)
        ang[3 * k:3 * k + 3] = Iw[k] @ alpha[k] + cross(w[k], Iwk)
    return Jv.reshape(3 * N, n).T @ lin + Jw.reshape(3 * N, n).T @ ang


@njit(cache=True)
def ground_force(pz, vx, vy, vz, k1, k2, mu_c, mu_s, mu_v, v_s, width, slip):
    """Contact force in ground-frame components (tangent x, tangent y, normal).

    ``pz`` is the signed height of the contact point above the plane.
    """
    out = np.zeros(3)
    if pz > 0.0:
        return out
    ramp = min(1.0, -pz / width)
    fz = -k1 * pz - k2 * vz * ramp
    if fz < 0.0:
        fz = 0.0
    out[2] = fz
    for i in range(2):
        v = vx if i == 0 else vy
        s = mu_c - (mu_c - mu_s) * math.exp(-(v * v) / (v_s * v_s))
        sg = v / slip
        if sg > 1.0:
            sg = 1.0
        elif sg < -1.0:
            sg = -1.0
        out[i] = -s * fz * sg - mu_v * v
    return out


@njit(cache=True)
def contact_candidates(R, d, lengths, diameters, normal):
    """Lowest points of both end spheres of every module, (2N,3)."""
    N = lengths.shape[0]
    pts = np.empty((2 * N, 3))
    for k in range(N):
        r = 0.5 * diameters[k]
        pts[2 * k] = d[k] - r * normal
        pts[2 * k + 1] = d[k] + R[k][:, 0] * lengths[k] - r * normal
    return pts


@njit(cache=True)
def contact_generalized(R, d, w, vo, E, z, o, child, lengths, diameters, frame, gparams):
    """Generalized contact force and per-candidate ground-frame forces.

    Point velocities come from the module twists (w, vo); forces are mapped
    to joint torques by ``z_j . ((x - o_j) x f)`` rather than by building
    point Jacobians. ``frame`` rows are (origin, tangent x, tangent y,
    normal); ``gparams`` is (k1, k2, mu_c, mu_s, mu_v, v_s, smoothing_width,
    slip_velocity).
    """
    m = z.shape[0]
    n = m + 6
    origin, tx, ty, nrm = frame[0], frame[1], frame[2], frame[3]
    pts = contact_candidates(R, d, lengths, diameters, nrm)
    nc = pts.shape[0]
    forces = np.zeros((nc, 3))
    Q = np.zeros(n)
    for c in range(nc):
        x = pts[c]
        pz = (x[0] - origin[0]) * nrm[0] + (x[1] - origin[1]) * nrm[1] + (x[2] - origin[2]) * nrm[2]
        if pz >= 0.0:
            continue
        k = c // 2
        vel = vo[k] + cross(w[k], x - d[k])
        f = ground_force(pz, np.dot(tx, vel), np.dot(ty, vel), np.dot(nrm, vel),
                         gparams[0], gparams[1], gparams[2], gparams[3], gparams[4],
                         gparams[5], gparams[6], gparams[7])
        forces[c] = f
        fw = f[0] * tx + f[1] * ty + f[2] * nrm
        for i in range(3):
            Q[m + i] += fw[i]
        tau = cross(x - d[0], fw)
        for i in range(3):
            Q[m + 3 + i] += E[0, i] * tau[0] + E[1, i] * tau[1] + E[2, i] * tau[2]
        for j in range(m):
            if child[j] <= k:
                tj = cross(x - o[j], fw)
                Q[j] += z[j, 0] * tj[0] + z[j, 1] * tj[1] + z[j, 2] * tj[2]
    return Q, forces


@njit(cache=True)
def posture_torque(q, qd, target, kp, kd, limit):
    m = target.shape[0]
    u = np.empty(m)
    for j in range(m):
        t = kp * (target[j] - q[j]) - kd * qd[j]
        u[j] = min(max(t, -limit), limit)
    return u


@njit(cache=True)
def cholesky_solve(D, b):
    """Solve D x = b for symmetric positive definite D; also returns diag(L)."""
    L = np.linalg.cholesky(D)
    n = b.shape[0]
    y = np.empty(n)
    for i in range(n):
        s = b[i]
        for k in range(i):
            s -= L[i, k] * y[k]
        y[i] = s / L[i, i]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, n):
            s -= L[k, i] * x[k]
        x[i] = s / L[i, i]
    diag = np.empty(n)
    for i in range(n):
        diag[i] = L[i, i]
    return x, diag


@njit(cache=True)
def state_derivative(y, masses, lengths, diameters, com, inertia, junction_joint, axes,
                     target, gains, gravity, frame, gparams, with_contact):
    """dy/dt for y = [q, qd] under posture control and ground contact."""
    m = axes.shape[0]
    n = m + 6
    q = y[:n]
    qd = y[n:]
    R, d, p = chain_pose(q, lengths, com, junction_joint, axes)
    E = euler_rate_matrix(q[m + 3], q[m + 4], q[m + 5])
    z, o, child = joint_frames(R, d, junction_joint, axes)
    Jv, Jw = chain_jacobians_from(E, z, o, child, d[0], p)
    Iw = world_inertias(R, inertia)
    D = mass_matrix(masses, Iw, Jv, Jw)
    w, v, alpha, a, vo = velocity_recursion(q, qd, R, d, p, junction_joint, axes)
    H = bias_forces(masses, Iw, Jv, Jw, w, alpha, a, gravity)
    rhs = -H
    u = posture_torque(q, qd, target, gains[0], gains[1], gains[2])
    rhs[:m] += u
    if with_contact:
        Q, _ = contact_generalized(R, d, w, vo, E, z, o, child, lengths, diameters,
                                   frame, gparams)
        rhs += Q
    qdd, diag = cholesky_solve(D, rhs)
    out = np.empty(2 * n)
    out[:n] = qd
    out[n:] = qdd
    return out


@njit(cache=True)
def contact_outputs(y, lengths, com, junction_joint, axes, diameters, frame, gparams):
    m = axes.shape[0]
    n = m + 6
    q = y[:n]
    qd = y[n:]
    R, d, p = chain_pose(q, lengths, com, junction_joint, axes)
    E = euler_rate_matrix(q[m + 3], q[m + 4], q[m + 5])
    z, o, child = joint_frames(R, d, junction_joint, axes)
    w, v, alpha, a, vo = velocity_recursion(q, qd, R, d, p, junction_joint, axes)
    Q, forces = contact_generalized(R, d, w, vo, E, z, o, child, lengths, diameters,
                                    frame, gparams)
    return forces
