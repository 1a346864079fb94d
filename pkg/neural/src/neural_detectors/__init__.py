"""Trainable omission-detection frameworks."""

__version__ = "0.1.0"
