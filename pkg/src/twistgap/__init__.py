"""Twisted-boundary free energies and mass-gap bounds in solvable lattice models."""

__version__ = "0.1.0"
