"""Homogeneous distributed observers for quasilinear plants.

Finite-time, fixed-time and linear distributed observers over directed
sensor networks, with LMI-based gain tuning and fixed-step simulation.
"""

__version__ = "0.1.0"
