"""Pseudo-transient ADI solver for the nonlinear (field-dependent dielectric) Poisson equation."""

__version__ = "0.1.0"
