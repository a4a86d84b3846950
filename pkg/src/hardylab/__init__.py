"""Maximal functions, Musielak-Orlicz functionals and Hardy-space membership experiments."""

__version__ = "0.1.0"
