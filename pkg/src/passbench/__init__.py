"""Workbench for building, operating, and attacking PassPoints-style
graphical password systems."""

__version__ = "0.1.0"
