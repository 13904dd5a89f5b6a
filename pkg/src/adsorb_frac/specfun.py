"""Special functions for half-order relaxation problems.

The central object is the exponentially scaled complementary error function
``erfcx(x) = exp(x**2) * erfc(x)``, which is also the Mittag-Leffler function
``E_{1/2}(-x)``.  It is evaluated with its power series for small arguments,
a table of local Taylor expansions at moderate arguments and the asymptotic
series for large ones, so it never overflows.  The Laplace continued fraction
seeds the table and serves as an independent check.

The scalar kernels are compiled with numba so the time-stepping loops in
:mod:`adsorb_frac.solver` can call them without Python overhead.
"""

from __future__ import annotations

import math
import warnings

import numba
import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError, SingularPointError

__all__ = [
    "gamma_fn",
    "erfc_scaled",
    "mittag_leffler_half",
    "mittag_leffler_half_series",
    "kernel_xi",
    "kernel_xi_small_t",
    "kernel_xi_large_t",
    "integrate_semi_infinite",
]

SQRT_PI = math.sqrt(math.pi)
INV_SQRT_PI = 1.0 / SQRT_PI

# Below _SERIES_LIMIT the alternating power series is summed directly.  On
# [_SERIES_LIMIT, _TABLE_LIMIT) a table of local Taylor expansions is used,
# and beyond it the asymptotic series, whose smallest term is ~exp(-144).
_SERIES_LIMIT = 0.25
_TABLE_LIMIT = 12.0
_TABLE_STEP = 0.125
_TABLE_ORDER = 15
# Beyond this argument the first correction 1/(2x^2) is below rounding.
_LEADING_LIMIT = 1e8


def _reciprocal_gamma_half_table(n_max: int) -> np.ndarray:
    """Return ``1/Gamma(n/2 + 1)`` for ``n = 0..n_max`` by upward recurrence."""
    c = np.empty(n_max + 1)
    c[0] = 1.0
    c[1] = 2.0 * INV_SQRT_PI
    for n in range(2, n_max + 1):
        c[n] = c[n - 2] / (0.5 * n)
    return c


_RGAMMA_HALF = _reciprocal_gamma_half_table(400)


@numba.njit(cache=True, nogil=True)
def _erfcx_direct(x):
    """Series or continued fraction, without the Taylor table."""
    if x < 1.5:
        total = 0.0
        power = 1.0
        for n in range(_RGAMMA_HALF.shape[0]):
            term = power * _RGAMMA_HALF[n]
            if n % 2 == 0:
                total += term
            else:
                total -= term
            if term < 1e-17:
                break
            power *= x
        return total
    if x > _LEADING_LIMIT:
        return INV_SQRT_PI / x
    # Modified Lentz evaluation of x + (1/2)/(x + 1/(x + (3/2)/(x + ...))).
    tiny = 1e-300
    f = x
    c = x
    d = 0.0
    for n in range(1, 2000):
        a = 0.5 * n
        d = x + a * d
        if d == 0.0:
            d = tiny
        d = 1.0 / d
        c = x + a / c
        if c == 0.0:
            c = tiny
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 2e-16:
            break
    return INV_SQRT_PI / f


def _taylor_table() -> np.ndarray:
    """Taylor coefficients of erfcx about the centers ``k * _TABLE_STEP``.

    With ``y = erfcx`` the coefficients follow from ``y' = 2xy - 2/sqrt(pi)``:
    ``(k+1) a[k+1] = 2c a[k] + 2 a[k-1]``.  The growing companion solution
    ``exp(x^2)`` amplifies the error of ``a[0]`` only by ``exp(2c|d|)``, which
    stays below ``e^1.5`` for offsets ``|d| <= _TABLE_STEP / 2``.
    """
    n_centers = int(round(_TABLE_LIMIT / _TABLE_STEP)) + 1
    table = np.empty((n_centers, _TABLE_ORDER))
    for i in range(n_centers):
        c = i * _TABLE_STEP
        a = table[i]
        a[0] = _erfcx_direct(c)
        a[1] = 2.0 * c * a[0] - 2.0 * INV_SQRT_PI
        for k in range(1, _TABLE_ORDER - 1):
            a[k + 1] = (2.0 * c * a[k] + 2.0 * a[k - 1]) / (k + 1)
    return table


_TAYLOR = _taylor_table()


@numba.njit(cache=True, nogil=True)
def erfcx_scalar(x):
    """exp(x^2) erfc(x) for a finite ``x >= 0`` (no argument checking)."""
    if x < _SERIES_LIMIT:
        return _erfcx_direct(x)
    if x >= _TABLE_LIMIT:
        if x > _LEADING_LIMIT:
            return INV_SQRT_PI / x
        inv2x2 = 0.5 / (x * x)
        total = 1.0
        term = 1.0
        for k in range(1, 40):
            term *= -(2 * k - 1) * inv2x2
            total += term
            if abs(term) < 1e-17:
                break
        return INV_SQRT_PI * total / x
    i = int(x / _TABLE_STEP + 0.5)
    d = x - i * _TABLE_STEP
    v = 0.0
    for k in range(_TABLE_ORDER - 1, -1, -1):
        v = v * d + _TAYLOR[i, k]
    return v


@numba.njit(cache=True, nogil=True)
def _erfcx_array(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out.flat[i] = erfcx_scalar(x.flat[i])
    return out


def gamma_fn(x: float) -> float:
    """Gamma function for positive real arguments.

    Raises
    ------
    DomainError
        If ``x <= 0``.
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"gamma_fn requires x > 0, got {x!r}")
    return math.gamma(x)


def _as_nonnegative(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise DomainError(f"{name} must be a nonnegative real number")
    return arr


def erfc_scaled(x):
    """Exponentially scaled complementary error function ``exp(x^2) erfc(x)``.

    Parameters
    ----------
    x : float or array_like
        Nonnegative argument(s).  ``inf`` maps to 0.

    Returns
    -------
    float or numpy.ndarray
        Values in ``(0, 1]``, matching the shape of ``x``.
    """
    arr = _as_nonnegative(x, "x")
    if arr.ndim == 0:
        v = float(arr)
        return 0.0 if math.isinf(v) else erfcx_scalar(v)
    finite = np.where(np.isinf(arr), 0.0, arr)
    out = _erfcx_array(np.ascontiguousarray(finite))
    out[np.isinf(arr)] = 0.0
    return out


def mittag_leffler_half(z):
    """Mittag-Leffler function of order one half at a nonpositive argument.

    Returns ``E_{1/2}(-z)`` for ``z >= 0``, which equals ``erfc_scaled(z)``.
    """
    return erfc_scaled(z)


def mittag_leffler_half_series(z: float, n_terms: int) -> float:
    """Partial sum of the defining power series of ``E_{1/2}(-z)``.

    Intended as a reference for small ``z``; the alternating terms cancel
    badly once ``z`` exceeds about 3.
    """
    if z < 0.0:
        raise DomainError("z must be nonnegative")
    if n_terms > _RGAMMA_HALF.shape[0]:
        raise DomainError(f"at most {_RGAMMA_HALF.shape[0]} terms are tabulated")
    total = 0.0
    for n in range(n_terms):
        total += (-z) ** n * _RGAMMA_HALF[n]
    return total


def kernel_xi(A: float, t):
    """Relaxation kernel of the mixed barrier-diffusion operator.

    ``xi_A(t) = erfc_scaled(sqrt(t)/A) / A`` for ``A > 0`` and the diffusion
    kernel ``1/sqrt(pi t)`` for ``A = 0``.

    Raises
    ------
    SingularPointError
        If ``A == 0`` and any ``t == 0``.
    """
    if not A >= 0.0:
        raise DomainError(f"A must be nonnegative, got {A!r}")
    tt = _as_nonnegative(t, "t")
    if A == 0.0:
        if np.any(tt == 0.0):
            raise SingularPointError("the diffusion kernel diverges at t = 0")
        out = 1.0 / np.sqrt(math.pi * tt)
    else:
        rt = np.atleast_1d(np.sqrt(tt))
        # Far from the barrier regime sqrt(t)/A can overflow; there
        # erfcx(x)/A = (1 - 1/(2x^2))/sqrt(pi t) to double precision.
        far = rt > 1e8 * A
        out = np.empty_like(rt)
        out[~far] = np.atleast_1d(erfc_scaled(rt[~far] / A)) / A
        y = A / rt[far]
        out[far] = (1.0 - 0.5 * y * y) / (math.sqrt(math.pi) * rt[far])
        out = out.reshape(np.shape(tt))
    return float(out) if np.ndim(out) == 0 else out


def kernel_xi_small_t(A: float, t):
    """Two-term small-time expansion ``1/A - 2 sqrt(t) / (A^2 sqrt(pi))``."""
    if not A > 0.0:
        raise DomainError("the small-time expansion requires A > 0")
    tt = _as_nonnegative(t, "t")
    out = 1.0 / A - 2.0 * np.sqrt(tt) / (A * A * SQRT_PI)
    return float(out) if np.ndim(out) == 0 else out


def kernel_xi_large_t(A: float, t):
    """Two-term large-time expansion ``1/sqrt(pi t) - A^2 / (2 sqrt(pi) t^1.5)``."""
    if not A > 0.0:
        raise DomainError("the large-time expansion requires A > 0")
    tt = _as_nonnegative(t, "t")
    if np.any(tt == 0.0):
        raise DomainError("the large-time expansion requires t > 0")
    out = 1.0 / np.sqrt(math.pi * tt) - A * A / (2.0 * SQRT_PI * tt**1.5)
    return float(out) if np.ndim(out) == 0 else out


def integrate_semi_infinite(
    integrand,
    decay_scale: float,
    *,
    args: tuple = (),
    breakpoints=(),
    rtol: float = 1e-10,
    limit: int = 400,
    tail_integrand=None,
) -> float:
    """Integrate ``integrand`` over ``(0, inf)`` to a relative tolerance.

    The range is cut at ``L = 8 * decay_scale`` (or twice the last
    breakpoint).  ``[0, L]`` is handled by adaptive Gauss-Kronrod with the
    breakpoints as forced subdivision points.  The tail ``[L, inf)`` is
    mapped onto ``(0, 1]`` by ``r = L/u``, which turns algebraic decay
    ``r^-k`` into the regular factor ``u^(k-2)``.

    Parameters
    ----------
    integrand : callable or scipy.LowLevelCallable
        ``integrand(r, *args)``.
    decay_scale : float
        Length over which the integrand decays appreciably.
    args : tuple
        Extra arguments passed to ``integrand``.
    breakpoints : sequence of float
        Interior points where the integrand changes rapidly.
    rtol : float
        Required relative accuracy of the result.
    tail_integrand : callable or scipy.LowLevelCallable, optional
        ``tail_integrand(u, *args, L)`` returning
        ``integrand(L/u, *args) * L/u**2``.  Needed only when ``integrand``
        is a compiled callable; for Python callables it is built here.

    Raises
    ------
    AccuracyError
        If the combined error estimate exceeds ``rtol`` times the result.
    """
    if not decay_scale > 0.0:
        raise DomainError("decay_scale must be positive")
    pts = sorted(float(p) for p in breakpoints if p > 0.0 and math.isfinite(p))
    cut = 8.0 * decay_scale
    if pts:
        cut = max(cut, 2.0 * pts[-1])
    if tail_integrand is None:
        if not callable(integrand):
            raise DomainError("compiled integrands need an explicit tail_integrand")

        def tail_integrand(u, *a):
            *inner_args, length = a
            return integrand(length / u, *inner_args) * length / (u * u) if u > 0.0 else 0.0

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head, head_err = integrate.quad(
            integrand, 0.0, cut, args=args, points=pts or None,
            epsabs=0.0, epsrel=rtol * 1e-2, limit=limit,
        )
        tail, tail_err = integrate.quad(
            tail_integrand, 0.0, 1.0, args=tuple(args) + (cut,),
            epsabs=0.0, epsrel=rtol * 1e-2, limit=limit,
        )
    total = head + tail
    err = head_err + tail_err
    if not err <= rtol * abs(total) + 1e-300:
        raise AccuracyError(
            f"semi-infinite quadrature did not converge: estimate {total!r}, "
            f"error bound {err!r}",
            estimate=total,
            error_bound=err,
        )
    return total
