"""Small-coverage asymptotes for adsorption and surface pressure.

Replacing the desorption term ``f`` by its small-coverage expansion turns
each nonlinear model into a linear one:

* first order: desorption neglected, so ``Gamma*`` is the kernel integral
  ``Gamma*_inf f_e I1(t)`` (the classical short-time asymptote);
* second order: ``f(g) ~ g``, so every model reduces to a rescaled henry
  problem and the asymptotes are built from ``Gamma*_H(t)``.

For the models with ``Phi = 1 - g`` (langmuir, frumkin) the same
approximations are fed through the exponential transform
``Gamma* = Gamma*_inf (1 - exp(-F/Gamma*_inf))``.  The first-order form is
used with the decaying exponential ``exp(-f_e I1)``; a growing exponential
would make the asymptote unbounded and inconsistent with its own
``Gamma*_inf -> inf`` limit.

``Gamma*_H`` depends on ``Ba`` only, so evaluations on a time grid are
memoized and shared by every asymptote that asks for the same grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .analytic import henry_mixed
from .errors import DomainError, ProvenanceError, RangeError
from .isotherms import Isotherm, IsothermKind, equilibrium_coverage, q_constant
from .scaling import PhysicalParams, diffusion_time, to_dimensionless
from .solver.kernels import Kernel

__all__ = [
    "AsymptoteOrder",
    "ErrorEstimates",
    "henry_reference",
    "clear_henry_cache",
    "first_order",
    "first_order_langmuir",
    "second_order_volmer",
    "second_order_langmuir",
    "coverage_asymptote",
    "pressure_asymptote",
    "universal_pressure",
    "dimensional_asymptotes",
    "error_estimates",
]

_DEFINED = {
    ("first", "adsorption_star"),
    ("first", "pressure"),
    ("second", "adsorption_star"),
    ("second", "coverage"),
    ("second", "pressure"),
    ("second", "tension"),
}


@dataclass(frozen=True)
class AsymptoteOrder:
    """Which asymptote is meant: its order and the quantity it approximates."""

    order: str
    target: str

    def __post_init__(self):
        if (self.order, self.target) not in _DEFINED:
            raise DomainError(f"no {self.order}-order asymptote is defined for {self.target}")


class ErrorEstimates(NamedTuple):
    er1: object
    er2: object


def _ret(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _times(t_tilde):
    t = np.asarray(t_tilde, dtype=float)
    if np.any(np.isnan(t)) or np.any(t < 0.0):
        raise DomainError("t_tilde must be nonnegative")
    return t


def _check_Ba(Ba):
    Ba = float(Ba)
    if not (math.isfinite(Ba) and Ba >= 0.0):
        raise DomainError("Ba must be nonnegative and finite")
    return Ba


@lru_cache(maxsize=32)
def _henry_cached(Ba, raw, shape):
    t = np.frombuffer(raw, dtype=float).reshape(shape)
    out = np.asarray(henry_mixed(t, Ba), dtype=float).reshape(shape)
    out.setflags(write=False)
    return out


def henry_reference(t_tilde, Ba: float):
    """``Gamma*_H(t_tilde)`` for the given ``Ba``, memoized per time grid.

    Array results are read-only and shared between callers.
    """
    Ba = _check_Ba(Ba)
    t = _times(t_tilde)
    if t.ndim == 0:
        return henry_mixed(float(t), Ba)
    t = np.ascontiguousarray(t)
    return _henry_cached(Ba, t.tobytes(), t.shape)


def clear_henry_cache() -> None:
    """Drop memoized henry grids, e.g. between unrelated sweeps."""
    _henry_cached.cache_clear()


def _kernel_integral(t, Ba):
    kernel = Kernel.mixed(Ba) if Ba > 0.0 else Kernel.diffusion()
    return np.asarray(kernel.I1(t), dtype=float)


def first_order(t_tilde, Ba: float, prefactor: float):
    """Short-time asymptote ``Gamma*_inf f_e int_0^t xi_Ba``.

    Equals ``prefactor (2 sqrt(t/pi) + Ba erfcx(sqrt(t)/Ba) - Ba)`` and
    reduces to ``2 prefactor sqrt(t/pi)`` at ``Ba = 0``.
    """
    Ba = _check_Ba(Ba)
    t = _times(t_tilde)
    return _ret(prefactor * _kernel_integral(t, Ba))


def first_order_langmuir(t_tilde, Ba: float, f_e: float, gamma_star_inf: float):
    """Short-time asymptote passed through the exponential transform."""
    Ba = _check_Ba(Ba)
    t = _times(t_tilde)
    return _ret(-gamma_star_inf * np.expm1(-f_e * _kernel_integral(t, Ba)))


def second_order_volmer(t_tilde, Ba: float, prefactor: float):
    """``Gamma*_inf f_e Gamma*_H``; exact for henry when ``prefactor = 1``."""
    return _ret(prefactor * np.asarray(henry_reference(t_tilde, Ba)))


def second_order_langmuir(t_tilde, Ba: float, f_e: float, gamma_star_inf: float):
    """``Gamma*_inf (1 - exp(-f_e Gamma*_H))``."""
    h = np.asarray(henry_reference(t_tilde, Ba))
    return _ret(-gamma_star_inf * np.expm1(-f_e * h))


def _group(kind) -> str:
    if isinstance(kind, Isotherm):
        kind = kind.kind
    if isinstance(kind, str) and kind.lower() in ("v", "l"):
        return "langmuir" if kind.lower() == "l" else "volmer"
    kind = IsothermKind.parse(kind)
    if kind in (IsothermKind.LANGMUIR, IsothermKind.FRUMKIN):
        return "langmuir"
    return "volmer"


def coverage_asymptote(kind, t_tilde, Ba: float, f_e: float):
    """Second-order coverage ``g = Gamma/Gamma_inf``.

    ``kind`` is an isotherm (or its name); henry, volmer and van der Waals
    share ``f_e Gamma*_H``, langmuir and frumkin use
    ``1 - exp(-f_e Gamma*_H)``.  No equilibrium data is needed.
    """
    h = np.asarray(henry_reference(t_tilde, Ba))
    if _group(kind) == "langmuir":
        return _ret(-np.expm1(-f_e * h))
    return _ret(f_e * h)


def universal_pressure(t_tilde, Ba: float, f_e: float):
    """``f_e Gamma*_H``: first-order pressure for every model, exact for henry."""
    return _ret(f_e * np.asarray(henry_reference(t_tilde, Ba)))


def pressure_asymptote(iso: Isotherm, t_tilde, Ba: float, f_e: float):
    """Second-order dimensionless surface pressure.

    Raises
    ------
    RangeError
        For the volmer forms when ``f_e Gamma*_H`` reaches 1, where the
        equation of state diverges.
    """
    if not isinstance(iso, Isotherm):
        iso = Isotherm(iso)
    gh = f_e * np.asarray(henry_reference(t_tilde, Ba))
    beta = iso.beta_tilde
    if iso.kind is IsothermKind.HENRY:
        return _ret(gh)
    if _group(iso) == "langmuir":
        return _ret(gh - 0.5 * beta * np.expm1(-gh) ** 2)
    if np.any(gh >= 1.0):
        raise RangeError("the henry coverage f_e Gamma*_H reaches 1; the volmer pressure diverges")
    return _ret(gh / (1.0 - gh) - 0.5 * beta * gh**2)


def dimensional_asymptotes(p: PhysicalParams, iso, t):
    """Second-order adsorption ``Gamma(t)`` and surface tension ``sigma(t)``.

    ``iso`` is an isotherm name or :class:`Isotherm`; the interaction
    strength is taken from ``p.beta``.
    """
    kind = iso.kind if isinstance(iso, Isotherm) else IsothermKind.parse(iso)
    dp = to_dimensionless(p, kind)
    if isinstance(iso, Isotherm) and not math.isclose(
        iso.beta_tilde, dp.iso.beta_tilde, rel_tol=1e-9, abs_tol=1e-15
    ):
        raise ProvenanceError(
            f"isotherm beta_tilde {iso.beta_tilde!r} differs from the physical value {dp.iso.beta_tilde!r}"
        )
    t = np.asarray(t, dtype=float)
    if np.any(np.isnan(t)) or np.any(t < 0.0):
        raise DomainError("t must be nonnegative")
    t_tilde = t / diffusion_time(p)
    g = np.asarray(coverage_asymptote(dp.iso, t_tilde, dp.Ba, dp.f_e))
    pi = np.asarray(pressure_asymptote(dp.iso, t_tilde, dp.Ba, dp.f_e))
    Gamma = p.Gamma_inf * g
    sigma = p.sigma0 - p.kT * p.Gamma_inf * pi
    return _ret(Gamma), _ret(sigma)


def error_estimates(iso: Isotherm, g, f_e: float) -> ErrorEstimates:
    """Leading relative errors of the first- and second-order approximations.

    With ``G = Gamma*`` for coverage ``g``:
    ``Er1 = G / (Gamma*_inf f_e)`` and
    ``Er2 = |Q - beta_tilde| G^2 / (Gamma*_inf^2 f_e - G)``.
    ``Er2`` vanishes when the interaction cancels the quadratic term of
    ``f`` (``beta_tilde = Q``) and for henry.

    Raises
    ------
    DomainError
        If ``g`` is negative or not below its equilibrium value.
    RangeError
        If the ``Er2`` denominator is not positive.
    """
    if not isinstance(iso, Isotherm):
        iso = Isotherm(iso)
    eq = equilibrium_coverage(iso, f_e)
    garr = np.asarray(g, dtype=float)
    if np.any(np.isnan(garr)) or np.any(garr < 0.0):
        raise DomainError("coverage must be nonnegative")
    if np.any(garr > eq.g_e):
        raise DomainError(f"coverage must not exceed its equilibrium value {eq.g_e:g}")
    gsi = eq.gamma_star_inf
    G = garr * gsi
    er1 = G / (gsi * f_e)
    denom = gsi * gsi * f_e - G
    if np.any(denom <= 0.0):
        raise RangeError("the second-order error estimate has a nonpositive denominator")
    er2 = abs(q_constant(iso) - iso.beta_tilde) * G * G / denom
    return ErrorEstimates(_ret(er1), _ret(er2))
