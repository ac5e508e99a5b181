"""Everlasting-option liquidity-provider simulation."""

__version__ = "0.1.0"
