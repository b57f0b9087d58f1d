"""Wavepacket and potential reconstruction from simulated heterodyne CARS signals."""

__version__ = "0.1.0"
