"""Solver output container."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scaling import DimensionlessParams

__all__ = ["Trajectory"]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled adsorption history with the parameters that produced it.

    Attributes
    ----------
    t_star, t_tilde : numpy.ndarray
        Sample times on the adsorption and diffusion time scales.  ``t_star``
        is NaN throughout for diffusion control (``Ba = 0``), where the
        adsorption time scale vanishes.
    gamma_star : numpy.ndarray
        Adsorption normalized by its equilibrium value.
    coverage : numpy.ndarray
        ``gamma_star / Gamma*_inf``.
    pressure : numpy.ndarray
        Dimensionless surface pressure at each sample.
    params : DimensionlessParams
    mesh_hash : str
        Digest of the mesh definition the run used.
    formulation : str
        ``"wt"`` or ``"exp"``.
    clamp_count : int
        Number of samples whose coverage had to be clamped below 1.
    """

    t_star: np.ndarray
    t_tilde: np.ndarray
    gamma_star: np.ndarray
    coverage: np.ndarray
    pressure: np.ndarray
    params: DimensionlessParams
    mesh_hash: str = ""
    formulation: str = ""
    clamp_count: int = 0

    def __post_init__(self):
        n = len(self.t_tilde)
        for name in ("t_star", "t_tilde", "gamma_star", "coverage", "pressure"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.t_tilde)
