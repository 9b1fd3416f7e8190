"""Simulated satellite proximity scenarios, RF/kinematic features and threat classification."""

__version__ = "0.1.0"
