"""Feedback-engineered gain on a qubit ground state and PT-symmetric dynamics."""

__version__ = "0.1.0"
