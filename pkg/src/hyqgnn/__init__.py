"""Hybrid quantum-classical graph neural network for ABO3 formation energies."""

__version__ = "0.1.0"
