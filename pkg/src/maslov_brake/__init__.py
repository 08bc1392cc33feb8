"""Maslov-type L0-index numerics and brake-orbit solving."""

__version__ = "0.1.0"
