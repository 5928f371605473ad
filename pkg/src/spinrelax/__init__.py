"""Strong-coupling relaxation analysis of a biased two-level system in an Ohmic bath."""

__version__ = "0.1.0"
