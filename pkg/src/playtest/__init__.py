"""Demonstration-driven automated game playtesting."""

__version__ = "0.1.0"
