"""Adsorption kinetics under mixed barrier-diffusion control."""

__version__ = "0.1.0"
