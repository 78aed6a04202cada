"""Search for and evaluate quantum circuits that estimate state overlaps."""

__version__ = "0.1.0"
