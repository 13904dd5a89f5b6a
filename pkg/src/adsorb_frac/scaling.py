"""Dimensional groups, time scales and conversion back to physical units.

The physical problem is described by ``PhysicalParams``.  Everything the
solvers need collapses into three numbers:

* ``Ba = D / (K_a Gamma_inf K)``, the weight of the interfacial barrier,
* ``f_e = K c_e``, the equilibrium desorption level,
* ``beta_tilde = 2 beta Gamma_inf / kT``, carried by the isotherm.

Times are measured either on the diffusion scale ``T_d = (K Gamma_inf)^2/D``
(``t_tilde``), on the adsorption scale ``T_a = Gamma_e / (K_a c_e)``
(``t_star``), or on the diffusion scale stretched by ``Ba*``
(``t_tilde_star``).

Only the products ``K c_e`` and ``K Gamma_inf`` enter, so the library never
checks units; any consistent system works.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .errors import DomainError, ModelValidityError, ProvenanceError, SingularPointError
from .isotherms import Isotherm, IsothermKind, equilibrium_coverage, f_iso, phi

if TYPE_CHECKING:
    from .trajectory import Trajectory

__all__ = [
    "PhysicalParams",
    "DimensionlessParams",
    "TimeScale",
    "Regime",
    "CharacteristicTimes",
    "DimensionalSeries",
    "to_dimensionless",
    "convert_time",
    "characteristic_times",
    "regime_bounds",
    "classify_regime",
    "redimensionalize",
    "subsurface_ratio",
    "subsurface_concentration",
]

MIXED_LOWER = 1e-2
MIXED_UPPER = 1e2


@dataclass(frozen=True)
class PhysicalParams:
    """Material constants of an adsorption experiment (consistent units)."""

    D: float
    K_a: float
    K: float
    Gamma_inf: float
    c_e: float
    beta: float = 0.0
    kT: float = 1.0
    sigma0: float = 0.0

    def __post_init__(self):
        for name in ("D", "K_a", "K", "Gamma_inf", "c_e", "kT"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ModelValidityError(f"{name} must be positive and finite, got {v!r}")
        if not (math.isfinite(self.beta) and self.beta >= 0.0):
            raise ModelValidityError(f"beta must be nonnegative, got {self.beta!r}")
        if not (math.isfinite(self.sigma0) and self.sigma0 >= 0.0):
            raise ModelValidityError(f"sigma0 must be nonnegative, got {self.sigma0!r}")

    @property
    def A(self) -> float:
        """Kernel parameter ``sqrt(D)/K_a`` in units of sqrt(time)."""
        return math.sqrt(self.D) / self.K_a


@dataclass(frozen=True)
class DimensionlessParams:
    """The groups ``Ba``, ``f_e`` and the isotherm, plus derived equilibrium data.

    ``g_e``, ``gamma_star_inf = 1/g_e`` and ``Ba_star = Ba Gamma*_inf f_e``
    are computed on construction.
    """

    Ba: float
    f_e: float
    iso: Isotherm
    g_e: float = field(init=False)
    gamma_star_inf: float = field(init=False)
    Ba_star: float = field(init=False)

    def __post_init__(self):
        Ba, f_e = float(self.Ba), float(self.f_e)
        if not (math.isfinite(Ba) and Ba >= 0.0):
            raise ModelValidityError(f"Ba must be nonnegative and finite, got {self.Ba!r}")
        if not (math.isfinite(f_e) and f_e > 0.0):
            raise ModelValidityError(f"f_e must be positive and finite, got {self.f_e!r}")
        iso = self.iso if isinstance(self.iso, Isotherm) else Isotherm(self.iso)
        eq = equilibrium_coverage(iso, f_e)
        object.__setattr__(self, "Ba", Ba)
        object.__setattr__(self, "f_e", f_e)
        object.__setattr__(self, "iso", iso)
        object.__setattr__(self, "g_e", eq.g_e)
        object.__setattr__(self, "gamma_star_inf", eq.gamma_star_inf)
        object.__setattr__(self, "Ba_star", Ba * eq.gamma_star_inf * f_e)

    @property
    def prefactor(self) -> float:
        """``Gamma*_inf * f_e``, the initial adsorption rate on the diffusion scale."""
        return self.gamma_star_inf * self.f_e

    def groups(self) -> dict:
        """All groups as a flat mapping, for provenance records."""
        return {
            "isotherm": self.iso.kind.value,
            "beta_tilde": self.iso.beta_tilde,
            "Ba": self.Ba,
            "f_e": self.f_e,
            "g_e": self.g_e,
            "gamma_star_inf": self.gamma_star_inf,
            "Ba_star": self.Ba_star,
        }


class TimeScale(str, Enum):
    T_TILDE = "t_tilde"
    T_STAR = "t_star"
    T_TILDE_STAR = "t_tilde_star"


class Regime(str, Enum):
    DIFFUSION_CONTROLLED = "diffusion_controlled"
    MIXED = "mixed"
    BARRIER_CONTROLLED = "barrier_controlled"


class CharacteristicTimes(NamedTuple):
    T_d: float
    T_a: float
    ratio: float


class DimensionalSeries(NamedTuple):
    t: np.ndarray
    Gamma: np.ndarray
    Pi: np.ndarray
    sigma: np.ndarray


def to_dimensionless(p: PhysicalParams, iso_kind) -> DimensionlessParams:
    """Reduce physical parameters to ``(Ba, f_e, beta_tilde)`` for a model."""
    kind = IsothermKind.parse(iso_kind)
    beta_tilde = 2.0 * p.beta * p.Gamma_inf / p.kT
    iso = Isotherm(kind, beta_tilde)
    Ba = p.D / (p.K_a * p.Gamma_inf * p.K)
    return DimensionlessParams(Ba=Ba, f_e=p.K * p.c_e, iso=iso)


def diffusion_time(p: PhysicalParams) -> float:
    """``T_d = (K Gamma_inf)^2 / D``."""
    return (p.K * p.Gamma_inf) ** 2 / p.D


def _factor_to_tilde(scale: TimeScale, dp: DimensionlessParams) -> float:
    if scale is TimeScale.T_TILDE:
        return 1.0
    if dp.Ba == 0.0:
        raise DomainError(f"the {scale.value} scale is undefined for Ba = 0")
    if scale is TimeScale.T_STAR:
        return dp.Ba / dp.prefactor
    return dp.Ba_star


def convert_time(values, source, target, dp: DimensionlessParams):
    """Convert times between ``t_tilde``, ``t_star`` and ``t_tilde_star``.

    ``t_star = t_tilde Gamma*_inf f_e / Ba`` and
    ``t_tilde = t_tilde_star Ba Gamma*_inf f_e``.
    """
    source, target = TimeScale(source), TimeScale(target)
    arr = np.asarray(values, dtype=float)
    if source is target:
        out = arr.copy()
    else:
        out = arr * (_factor_to_tilde(source, dp) / _factor_to_tilde(target, dp))
    return float(out) if out.ndim == 0 else out


def characteristic_times(dp: DimensionlessParams, p: PhysicalParams) -> CharacteristicTimes:
    """Diffusion and adsorption times and their ratio ``T_d/T_a = Gamma*_inf f_e / Ba``."""
    T_d = diffusion_time(p)
    Gamma_e = dp.g_e * p.Gamma_inf
    T_a = Gamma_e / (p.K_a * p.c_e)
    return CharacteristicTimes(T_d, T_a, T_d / T_a)


def regime_bounds(p: PhysicalParams, Er: float) -> tuple[float, float]:
    """Time limits of barrier- and diffusion-controlled behaviour.

    For times below ``T_BC = Er^2 sqrt(pi)/2 * D/K_a^2`` the kernel deviates
    from its barrier limit by less than ``Er``; above
    ``T_DC = D / (2 Er K_a^2)`` it deviates from its diffusion limit by less
    than ``Er``.
    """
    if not 0.0 < Er < 1.0:
        raise DomainError(f"Er must lie in (0, 1), got {Er!r}")
    scale = p.D / p.K_a**2
    return Er * Er * math.sqrt(math.pi) / 2.0 * scale, scale / (2.0 * Er)


def classify_regime(
    dp: DimensionlessParams, lower: float = MIXED_LOWER, upper: float = MIXED_UPPER
) -> Regime:
    """Mixed control when ``lower <= Ba* <= upper``."""
    if dp.Ba_star < lower:
        return Regime.DIFFUSION_CONTROLLED
    if dp.Ba_star > upper:
        return Regime.BARRIER_CONTROLLED
    return Regime.MIXED


def _check_provenance(dp: DimensionlessParams, p: PhysicalParams) -> DimensionlessParams:
    ref = to_dimensionless(p, dp.iso.kind)
    pairs = (("Ba", ref.Ba, dp.Ba), ("f_e", ref.f_e, dp.f_e),
             ("beta_tilde", ref.iso.beta_tilde, dp.iso.beta_tilde))
    for name, a, b in pairs:
        if not math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-300):
            raise ProvenanceError(
                f"{name} of the data ({b!r}) does not match the physical parameters ({a!r})"
            )
    return ref


def redimensionalize(traj: "Trajectory", p: PhysicalParams) -> DimensionalSeries:
    """Physical time, adsorption, surface pressure and tension of a trajectory."""
    dp = traj.params
    _check_provenance(dp, p)
    t = diffusion_time(p) * traj.t_tilde
    Gamma = dp.g_e * p.Gamma_inf * traj.gamma_star
    Pi = p.kT * p.Gamma_inf * traj.pressure
    return DimensionalSeries(t, Gamma, Pi, p.sigma0 - Pi)


def subsurface_ratio(traj: "Trajectory") -> np.ndarray:
    """Subsurface concentration relative to the bulk, ``c_s / c_e``.

    Inverts the interfacial flux balance:
    ``c_s/c_e = f(g)/f_e + Ba/(Gamma*_inf f_e) * (dGamma*/dt_tilde) / Phi(g)``.
    The derivative uses second-order finite differences on the sample grid.

    Raises
    ------
    SingularPointError
        If ``Phi`` vanishes at a sample while the rate term is needed.
    """
    dp = traj.params
    g = traj.coverage
    ph = np.asarray(phi(dp.iso, g))
    if dp.Ba > 0.0 and np.any(ph == 0.0):
        raise SingularPointError("Phi vanishes at full coverage")
    ratio = np.asarray(f_iso(dp.iso, g)) / dp.f_e
    if dp.Ba == 0.0 or len(traj) < 3:
        return ratio
    rate = np.gradient(traj.gamma_star, traj.t_tilde, edge_order=2)
    return ratio + dp.Ba / dp.prefactor * rate / ph


def subsurface_concentration(traj: "Trajectory", dp: DimensionlessParams, p: PhysicalParams) -> np.ndarray:
    """Subsurface concentration ``c_s(t)`` in the units of ``c_e``."""
    if dp is not traj.params and dp != traj.params:
        raise ProvenanceError("the trajectory was produced with different dimensionless parameters")
    _check_provenance(dp, p)
    return p.c_e * subsurface_ratio(traj)
