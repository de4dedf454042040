"""Deterministic simulation of a speech- and gaze-driven robot interaction loop."""

__version__ = "0.1.0"
