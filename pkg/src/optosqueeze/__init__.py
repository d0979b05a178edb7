"""Mechanically mediated two-mode squeezing in a three-mode optomechanical system."""

__version__ = "0.1.0"
