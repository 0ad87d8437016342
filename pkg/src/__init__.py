"""Laser-assisted radiative recombination with leading-order nondipole corrections."""

__version__ = "1.0.0"
