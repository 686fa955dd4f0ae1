"""Multibody simulator for an articulated loop robot tumbling down compliant slopes."""
__version__ = "0.1.0"
