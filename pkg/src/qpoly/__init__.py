"""Tsallis q-entropy correlation measures and strong-polygamy checks."""

__version__ = "0.1.0"
