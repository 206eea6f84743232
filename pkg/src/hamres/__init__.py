"""Constructive Hamilton cycles in pseudorandom and random digraphs, with exact checkers."""

__version__ = "0.1.0"
