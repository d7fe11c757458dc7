"""Randomized ICA: blind source separation with random-Fourier-feature contrasts."""

__version__ = "0.1.0"
