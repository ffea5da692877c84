"""Exact verification toolkit for finite models of hyperkaehler cohomology."""

__version__ = "0.1.0"
