"""Time stepping for the adsorption integral equations."""

from .kernels import Kernel
from .mesh import DEFAULT_REGIONS, DIFFUSION_DEFAULT_REGIONS, Mesh, build_mesh
from .pece import select_formulation, solve, step_exp, step_hybrid, step_wt, time_factor, weights

__all__ = [
    "Kernel",
    "Mesh",
    "DEFAULT_REGIONS",
    "DIFFUSION_DEFAULT_REGIONS",
    "build_mesh",
    "solve",
    "step_wt",
    "step_exp",
    "step_hybrid",
    "weights",
    "select_formulation",
    "time_factor",
]
