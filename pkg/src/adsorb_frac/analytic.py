"""Exact solutions of the linear (henry) adsorption problem.

With ``f(g) = g`` the adsorption equation is linear and has closed-form
solutions on the diffusion time scale ``t``:

* diffusion control: ``1 - erfcx(sqrt(t))``;
* barrier control (in adsorption time): ``1 - exp(-t_star)``;
* mixed control: the integral representation

      Gamma*_H(t) = (2/pi) int_0^inf (1 - exp(-r^2 t)) / ((Ba r^2 - 1)^2 + r^2) dr,

  which is the complement of the usual form because the kernel integrates
  to ``pi/2``.  The complementary form has no cancellation at small ``t``.

The power series in ``sqrt(t)`` uses ``U_n = (l+^n - l-^n)/(l+ - l-)`` for
the roots ``l+-`` of ``Ba x^2 + x + 1 = 0``.  ``U_n`` obeys the real
recurrence ``U_{n+1} = -(U_n + U_{n-1})/Ba``, so no complex arithmetic is
needed even when the roots are complex.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numba
import numpy as np
from numba import types
from scipy import LowLevelCallable

from .errors import DomainError, RangeError
from .specfun import SQRT_PI, erfc_scaled, integrate_semi_infinite

__all__ = [
    "RootPair",
    "henry_dc",
    "lambda_roots",
    "henry_mixed",
    "henry_mixed_series",
    "henry_mixed_double_series",
    "henry_mixed_expansion",
    "barrier_control",
    "volmer_barrier_envelope",
    "lambda_series_value",
]


class RootPair(NamedTuple):
    lambda_plus: complex
    lambda_minus: complex
    real: bool


def _nonneg(x, name="t_tilde"):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise DomainError(f"{name} must be nonnegative")
    return arr


def _ret(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def henry_dc(t_tilde):
    """Diffusion-controlled henry solution ``1 - erfcx(sqrt(t))``."""
    t = _nonneg(t_tilde)
    return _ret(1.0 - np.asarray(erfc_scaled(np.sqrt(t))))


def lambda_roots(Ba: float) -> RootPair:
    """Roots of ``Ba x^2 + x + 1 = 0``.

    Real roots are formed without cancellation from
    ``q = -(1 + sqrt(1 - 4 Ba))/2`` as ``q/Ba`` and ``1/q``.
    """
    if not Ba > 0.0:
        raise DomainError("the root pair degenerates at Ba = 0; use the diffusion-controlled solution")
    disc = 1.0 - 4.0 * Ba
    if disc >= 0.0:
        q = -0.5 * (1.0 + math.sqrt(disc))
        return RootPair(complex(1.0 / q), complex(q / Ba), True)
    im = math.sqrt(-disc) / (2.0 * Ba)
    re = -1.0 / (2.0 * Ba)
    return RootPair(complex(re, im), complex(re, -im), False)


@numba.cfunc(types.double(types.intc, types.CPointer(types.double)), cache=True)
def _henry_integrand(n, xx):
    r = xx[0]
    t = xx[1]
    Ba = xx[2]
    r2 = r * r
    u = Ba * r2 - 1.0
    return -math.expm1(-r2 * t) / (u * u + r2)


@numba.cfunc(types.double(types.intc, types.CPointer(types.double)), cache=True)
def _henry_tail_integrand(n, xx):
    # Same integrand after r = L/u, including the Jacobian L/u^2.
    u = xx[0]
    if u == 0.0:
        return 0.0
    length = xx[3]
    t = xx[1]
    Ba = xx[2]
    r = length / u
    # u^2 ((Ba r^2 - 1)^2 + r^2) written without overflow as u -> 0.
    v = Ba * length * r - u
    return -math.expm1(-r * r * t) * length / (v * v + length * length)


_HENRY_INTEGRAND = LowLevelCallable(_henry_integrand.ctypes)
_HENRY_TAIL = LowLevelCallable(_henry_tail_integrand.ctypes)


_NEGLIGIBLE_BA = 1e-17
_SHORT_TIME = 1e-12


def _henry_breakpoints(t, Ba):
    """Scales where the integrand changes character, with decades filled in.

    ``1/sqrt(t)`` is where the exponential switches off.  For ``Ba < 1/4``
    the denominator changes regime near ``r = 1`` and ``r = 1/Ba``; for
    larger ``Ba`` it has a sharp minimum of half-width ``1/(2 Ba)`` at
    ``r = 1/sqrt(Ba)``.
    """
    pts = [1.0 / math.sqrt(t)]
    if Ba < 0.25:
        pts.append(1.0)
        if Ba > 0.0:
            pts.append(1.0 / Ba)
    else:
        r0 = 1.0 / math.sqrt(Ba)
        w = 1.0 / (2.0 * Ba)
        if 4.0 * w < r0:
            pts += [r0 - 4.0 * w, r0 - w, r0, r0 + w, r0 + 4.0 * w]
        else:
            pts += [r0 / 2.0, r0, 2.0 * r0]
    lo, hi = min(pts), max(pts)
    fill = lo * 10.0 ** np.arange(1, int(math.log10(hi / lo)) + 1)
    return sorted(set(pts) | set(fill.tolist()))


def _henry_mixed_scalar(t, Ba):
    if t == 0.0:
        return 0.0
    if Ba < _NEGLIGIBLE_BA:
        # The gap to diffusion control is about Ba, below roundoff here,
        # and 1/Ba would overflow the breakpoint list.
        Ba = 0.0
    if Ba == 0.0 and t < _SHORT_TIME:
        # Short-time series of 1 - erfcx(sqrt(t)); the integral's breakpoints
        # span too many decades here.  Truncation error is O(t^2).
        rt = math.sqrt(t)
        return 2.0 * rt / SQRT_PI - t + 4.0 * t * rt / (3.0 * SQRT_PI)
    pts = _henry_breakpoints(t, Ba)
    scale = max(pts)
    value = integrate_semi_infinite(
        _HENRY_INTEGRAND, scale, args=(t, Ba), breakpoints=pts, tail_integrand=_HENRY_TAIL
    )
    return 2.0 / math.pi * value


def henry_mixed(t_tilde, Ba: float):
    """Mixed-control henry solution from its integral representation.

    Accurate to about 1e-10 relative for all ``t_tilde >= 0`` and
    ``Ba >= 0``; raises :class:`AccuracyError` if the quadrature cannot
    certify that.
    """
    Ba = float(Ba)
    if not (math.isfinite(Ba) and Ba >= 0.0):
        raise DomainError("Ba must be nonnegative and finite")
    t = _nonneg(t_tilde)
    if t.ndim == 0:
        return _henry_mixed_scalar(float(t), Ba)
    flat = t.reshape(-1)
    out = np.array([_henry_mixed_scalar(float(v), Ba) for v in flat])
    return out.reshape(t.shape)


def _series_terms(t, Ba, n_terms):
    """Terms ``U_n t^{(n+1)/2} / (Ba Gamma((n+3)/2))`` for ``n = 1..n_terms``."""
    terms = np.empty(n_terms)
    rt = math.sqrt(t)
    u_prev, u = 0.0, 1.0
    # t^{(n+1)/2} / Gamma((n+3)/2), advanced by one half-order per term.
    coef_odd = t / math.gamma(2.0)
    coef_even = t * rt / math.gamma(2.5)
    for n in range(1, n_terms + 1):
        c = coef_odd if n % 2 == 1 else coef_even
        terms[n - 1] = u * c / Ba
        if n % 2 == 1:
            coef_odd *= t / ((n + 3) / 2.0)
        else:
            coef_even *= t / ((n + 3) / 2.0)
        u_prev, u = u, -(u + u_prev) / Ba
    return terms


def henry_mixed_series(t_tilde: float, Ba: float, n_terms: int = 30) -> float:
    """Partial sum of the power series of the mixed henry solution in ``sqrt(t)``.

    Converges for every ``t`` but loses accuracy to cancellation once
    ``t/Ba`` is of order one or larger.

    Raises
    ------
    RangeError
        When the last terms are still growing or cancellation has destroyed
        more than eight digits.
    """
    if not Ba > 0.0:
        raise DomainError("the series requires Ba > 0")
    if n_terms < 1:
        raise DomainError("n_terms must be at least 1")
    t = float(t_tilde)
    if t < 0.0:
        raise DomainError("t_tilde must be nonnegative")
    if t == 0.0:
        return 0.0
    terms = _series_terms(t, Ba, n_terms)
    total = float(math.fsum(terms))
    mags = np.abs(terms)
    # U_n can vanish periodically, so compare windows of three terms.
    if n_terms >= 6 and mags[-3:].max() > mags[-6:-3].max():
        raise RangeError(f"series terms still growing after {n_terms} terms at t/Ba = {t / Ba:g}")
    if mags.max() > 1e8 * abs(total):
        raise RangeError(f"series cancellation too severe at t/Ba = {t / Ba:g}")
    return total


def henry_mixed_double_series(t_tilde: float, Ba: float, max_order: int) -> float:
    """Binomial double-sum form of the same series.

    Sums ``C(n+m, n) (-1)^(n+m) t^(n+m/2+1) / (Ba^(n+m+1) Gamma(n+m/2+2))``
    over all ``n, m >= 0`` whose power of ``sqrt(t)`` is at most
    ``max_order + 1``, i.e. ``2n + m + 1 <= max_order``.  With this ordering
    it matches :func:`henry_mixed_series` with ``n_terms = max_order`` term
    for term.
    """
    if not Ba > 0.0:
        raise DomainError("the series requires Ba > 0")
    t = float(t_tilde)
    if t < 0.0:
        raise DomainError("t_tilde must be nonnegative")
    if t == 0.0:
        return 0.0
    parts = []
    for n in range(0, max_order // 2 + 1):
        for m in range(0, max_order - 2 * n):
            k = n + m
            expo = n + 0.5 * m + 1.0
            log_mag = (math.log(math.comb(k, n)) + expo * math.log(t)
                       - (k + 1) * math.log(Ba) - math.lgamma(expo + 1.0))
            parts.append((-1.0) ** k * math.exp(log_mag))
    return float(math.fsum(parts))


def henry_mixed_expansion(t_tilde, Ba: float):
    """Four-term small-time expansion of the mixed henry solution.

    ``(1/Ba)[t - 4 t^1.5/(3 sqrt(pi) Ba) + (t^2/2)(1/Ba^2 - 1/Ba)
    + 8 t^2.5/(15 sqrt(pi)) (2/Ba^2 - 1/Ba^3)]``, with error
    ``O((t/Ba)^3)``.  Validity is not enforced.
    """
    if not Ba > 0.0:
        raise DomainError("the expansion requires Ba > 0")
    t = _nonneg(t_tilde)
    out = (
        t
        - 4.0 * t**1.5 / (3.0 * SQRT_PI * Ba)
        + 0.5 * t**2 * (1.0 / Ba**2 - 1.0 / Ba)
        + 8.0 * t**2.5 / (15.0 * SQRT_PI) * (2.0 / Ba**2 - 1.0 / Ba**3)
    ) / Ba
    return _ret(out)


def barrier_control(t_star):
    """Barrier-controlled henry solution ``1 - exp(-t_star)``."""
    t = _nonneg(t_star, "t_star")
    return _ret(-np.expm1(-t))


def volmer_barrier_envelope(t_star):
    """Barrier-controlled volmer limit for large ``f_e``: ``min(t_star, 1)``."""
    t = _nonneg(t_star, "t_star")
    return _ret(np.minimum(t, 1.0))


def lambda_series_value(t_tilde: float, Ba: float, n_terms: int) -> complex:
    """Series partial sum using powers of the complex root pair directly.

    Used to cross-check the real recurrence; the imaginary part is rounding
    noise.
    """
    pair = lambda_roots(Ba)
    lp, lm = pair.lambda_plus, pair.lambda_minus
    t = float(t_tilde)
    total = 0j
    if lp == lm:
        for n in range(1, n_terms + 1):
            u = n * lp ** (n - 1)
            total += u * t ** ((n + 1) / 2) / (Ba * math.gamma((n + 3) / 2))
        return total
    for n in range(1, n_terms + 1):
        u = (lp**n - lm**n) / (lp - lm)
        total += u * t ** ((n + 1) / 2) / (Ba * math.gamma((n + 3) / 2))
    return total
