"""Kinetic adsorption models in coverage form.

Each model closes the interfacial flux balance with a surface function
``Phi(g)`` and a desorption function ``f(g)`` of the coverage ``g = Gamma /
Gamma_inf``, and supplies a dimensionless surface pressure ``Pi(g)``:

=========  ==========================================  ======  ============================
model      f(g)                                        Phi     Pi(g)
=========  ==========================================  ======  ============================
henry      g                                           1       g
langmuir   g/(1-g)                                     1-g     -ln(1-g)
frumkin    g/(1-g) exp(-b g)                           1-g     -ln(1-g) - b g^2/2
volmer     g/(1-g) exp(g/(1-g))                        1       g/(1-g)
vdw        g/(1-g) exp(g/(1-g) - b g)                  1       g/(1-g) - b g^2/2
=========  ==========================================  ======  ============================

``b`` is the reduced interaction parameter ``beta_tilde = 2 beta Gamma_inf /
kT``.  The equilibrium is unique only for ``b < 4`` (frumkin) and
``b < 6.75`` (vdw); larger values are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numba
import numpy as np
from scipy import optimize

from .errors import DomainError, ModelValidityError

__all__ = [
    "IsothermKind",
    "Isotherm",
    "Equilibrium",
    "phi",
    "f_iso",
    "surface_pressure_j",
    "q_constant",
    "taylor_f2",
    "equilibrium_coverage",
    "coverage_for_product",
]

# Largest coverage at which f and Pi are evaluated.
G_MAX = 1.0 - 1e-9


class IsothermKind(str, Enum):
    HENRY = "henry"
    LANGMUIR = "langmuir"
    FRUMKIN = "frumkin"
    VOLMER = "volmer"
    VDW = "vdw"

    @classmethod
    def parse(cls, name) -> "IsothermKind":
        """Case-insensitive lookup from the configuration spelling."""
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ModelValidityError(f"unknown isotherm {name!r}; expected one of {valid}") from None

    @property
    def code(self) -> int:
        """Integer tag understood by the compiled solver kernels."""
        return _CODES[self]


_CODES = {
    IsothermKind.HENRY: 0,
    IsothermKind.LANGMUIR: 1,
    IsothermKind.FRUMKIN: 2,
    IsothermKind.VOLMER: 3,
    IsothermKind.VDW: 4,
}

# Upper bounds on beta_tilde that keep the equilibrium unique.
_BETA_LIMIT = {IsothermKind.FRUMKIN: 4.0, IsothermKind.VDW: 6.75}
_Q = {
    IsothermKind.HENRY: 0,
    IsothermKind.LANGMUIR: 1,
    IsothermKind.FRUMKIN: 1,
    IsothermKind.VOLMER: 2,
    IsothermKind.VDW: 2,
}


@dataclass(frozen=True)
class Isotherm:
    """A kinetic model together with its reduced interaction parameter."""

    kind: IsothermKind
    beta_tilde: float = 0.0

    def __post_init__(self):
        kind = IsothermKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        beta = float(self.beta_tilde)
        object.__setattr__(self, "beta_tilde", beta)
        if not math.isfinite(beta) or beta < 0.0:
            raise ModelValidityError(f"beta_tilde must be finite and nonnegative, got {beta!r}")
        limit = _BETA_LIMIT.get(kind)
        if limit is None and beta != 0.0:
            raise ModelValidityError(f"the {kind.value} model has no interaction term; beta_tilde must be 0")
        if limit is not None and beta >= limit:
            raise ModelValidityError(
                f"{kind.value} with beta_tilde={beta} >= {limit} has no unique equilibrium"
            )

    @property
    def has_phi(self) -> bool:
        """True when ``Phi(g) = 1 - g`` rather than identically one."""
        return self.kind in (IsothermKind.LANGMUIR, IsothermKind.FRUMKIN)


class Equilibrium(NamedTuple):
    g_e: float
    gamma_star_inf: float


# ---------------------------------------------------------------------------
# compiled scalar forms used inside the time-stepping loops


@numba.njit(cache=True, nogil=True)
def f_scalar(code, beta, g):
    if code == 0:
        return g
    u = g / (1.0 - g)
    if code == 1:
        return u
    if code == 2:
        return u * math.exp(-beta * g)
    if code == 3:
        return u * math.exp(u)
    return u * math.exp(u - beta * g)


@numba.njit(cache=True, nogil=True)
def pressure_scalar(code, beta, g):
    if code == 0:
        return g
    if code == 1:
        return -math.log1p(-g)
    if code == 2:
        return -math.log1p(-g) - 0.5 * beta * g * g
    u = g / (1.0 - g)
    if code == 3:
        return u
    return u - 0.5 * beta * g * g


# ---------------------------------------------------------------------------


def _coverage(g, *, allow_one=False, unbounded=False):
    arr = np.asarray(g, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise DomainError("coverage must be nonnegative")
    if unbounded:
        return arr
    if allow_one:
        if np.any(arr > 1.0):
            raise DomainError("coverage must not exceed 1")
    elif np.any(arr >= 1.0):
        raise DomainError("f and Pi are undefined at full coverage g >= 1")
    return arr


def _ret(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def phi(iso: Isotherm, g):
    """Surface function: ``1 - g`` for langmuir/frumkin, otherwise 1."""
    arr = _coverage(g, allow_one=True)
    out = 1.0 - arr if iso.has_phi else np.ones_like(arr)
    return _ret(out)


def f_iso(iso: Isotherm, g):
    """Dimensionless desorption function ``f(g)``.

    The henry law is linear and accepts any ``g >= 0``.

    Raises
    ------
    DomainError
        For ``g >= 1`` in the saturating models, and for the volmer-type
        models also for ``g > 1 - 1e-9`` where ``exp(g/(1-g))`` overflows.
    """
    kind, b = iso.kind, iso.beta_tilde
    arr = _coverage(g, unbounded=kind is IsothermKind.HENRY)
    if kind in (IsothermKind.VOLMER, IsothermKind.VDW) and np.any(arr > G_MAX):
        raise DomainError("coverage too close to 1 for the volmer-type models")
    if kind is IsothermKind.HENRY:
        out = arr.copy()
    else:
        u = arr / (1.0 - arr)
        if kind is IsothermKind.LANGMUIR:
            out = u
        elif kind is IsothermKind.FRUMKIN:
            out = u * np.exp(-b * arr)
        elif kind is IsothermKind.VOLMER:
            out = u * np.exp(u)
        else:
            out = u * np.exp(u - b * arr)
    return _ret(out)


def surface_pressure_j(iso: Isotherm, g):
    """Dimensionless surface pressure ``Pi = J(g Gamma_inf) / Gamma_inf``."""
    kind, b = iso.kind, iso.beta_tilde
    arr = _coverage(g, unbounded=kind is IsothermKind.HENRY)
    if kind is IsothermKind.HENRY:
        out = arr.copy()
    elif kind in (IsothermKind.LANGMUIR, IsothermKind.FRUMKIN):
        out = -np.log1p(-arr) - 0.5 * b * arr**2
    else:
        out = arr / (1.0 - arr) - 0.5 * b * arr**2
    return _ret(out)


def q_constant(iso: Isotherm) -> int:
    """Second Taylor coefficient of ``f`` without interaction: 0, 1 or 2."""
    return _Q[iso.kind]


def taylor_f2(iso: Isotherm, g):
    """Two-term expansion ``g + (Q - beta_tilde) g^2`` of ``f`` at small coverage."""
    arr = _coverage(g, unbounded=iso.kind is IsothermKind.HENRY)
    return _ret(arr + (q_constant(iso) - iso.beta_tilde) * arr**2)


def _solve_coverage(residual, lo, hi):
    g = optimize.brentq(residual, lo, hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=500)
    return float(g)


def equilibrium_coverage(iso: Isotherm, f_e: float) -> Equilibrium:
    """Coverage ``g_e`` with ``f(g_e) = f_e``, and ``Gamma*_inf = 1/g_e``.

    ``f`` is strictly increasing under the interaction limits and diverges as
    ``g -> 1``, so the root is bracketed in ``(0, 1)`` and unique.
    """
    f_e = float(f_e)
    if not (f_e > 0.0 and math.isfinite(f_e)):
        raise DomainError(f"f_e must be positive and finite, got {f_e!r}")
    if iso.kind is IsothermKind.HENRY:
        # No saturation: the linear law holds for any f_e.
        return Equilibrium(f_e, 1.0 / f_e)
    if iso.kind is IsothermKind.LANGMUIR:
        g = f_e / (1.0 + f_e)
        return Equilibrium(g, 1.0 / g)
    # Work with log f, which stays finite on the whole bracket.
    log_fe = math.log(f_e)
    code, b = iso.kind.code, iso.beta_tilde

    def residual(g):
        return _log_f(code, b, g) - log_fe

    hi = G_MAX
    if residual(hi) < 0.0:
        raise ModelValidityError(f"f_e={f_e} requires coverage above {G_MAX}")
    g = _solve_coverage(residual, 1e-300, hi)
    return Equilibrium(g, 1.0 / g)


def _log_f(code, b, g):
    log_u = math.log(g) - math.log1p(-g)
    u = g / (1.0 - g)
    if code == 2:
        return log_u - b * g
    if code == 3:
        return log_u + u
    return log_u + u - b * g


def coverage_for_product(iso: Isotherm, product: float) -> Equilibrium:
    """Equilibrium state for a prescribed value of ``Gamma*_inf * f_e``.

    Because ``Gamma*_inf = 1/g_e`` this solves ``f(g)/g = product``.  Where
    the equation has more than one root (possible only when
    ``beta_tilde > Q`` and ``product < 1``) the largest root is returned.
    The matching ``f_e`` is ``product * g_e``.
    """
    product = float(product)
    if not product > 0.0:
        raise DomainError("product must be positive")
    kind = iso.kind
    if kind is IsothermKind.HENRY:
        raise ModelValidityError("for the henry model Gamma*_inf f_e is identically 1 and does not fix g_e")
    target = math.log(product)
    code, b = kind.code, iso.beta_tilde

    def residual(g):
        # log(f(g)/g) written so that g -> 0 is exact.
        if code in (1, 2):
            v = -math.log1p(-g)
        else:
            v = -math.log1p(-g) + g / (1.0 - g)
        if code in (2, 4):
            v -= b * g
        return v - target

    if residual(G_MAX) < 0.0:
        raise ModelValidityError(f"product {product} requires coverage above {G_MAX}")
    # Scan downward from full coverage to isolate the largest sign change.
    grid = np.linspace(G_MAX, 0.0, 4097)
    vals = np.array([residual(g) for g in grid])
    idx = np.nonzero(vals <= 0.0)[0]
    if idx.size == 0:
        raise ModelValidityError(f"no coverage gives Gamma*_inf f_e = {product}")
    k = idx[0]
    if vals[k] == 0.0:
        g = float(grid[k])
    else:
        g = _solve_coverage(residual, float(grid[k]), float(grid[k - 1]))
    if g <= 0.0:
        raise ModelValidityError(f"no positive coverage gives Gamma*_inf f_e = {product}")
    return Equilibrium(g, 1.0 / g)
