"""Thermodynamic characterization of one-shot classical communication on finite classical systems."""

__version__ = "0.1.0"
