"""Construction, verification and entropic analysis of quantum maskers."""

__version__ = "0.1.0"
