"""sflab: spectral flow vs. the odd Chern character, computed independently."""

__version__ = "0.1.0"
