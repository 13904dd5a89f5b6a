"""Convolution kernels and their exact panel integrals.

Three kernels appear in the integral equations, all functions of the lag
``s = t_n - tau``:

* ``unit``: the constant 1 (ordinary integration),
* ``diffusion``: ``1/sqrt(pi s)`` (half-order integration),
* ``mixed``: ``xi_Ba(s) = erfcx(sqrt(s)/Ba)/Ba``.

Product-integration weights need the first two antiderivatives ``I1`` and
``I2`` (both vanishing at ``s = 0``).  For the mixed kernel, with
``x = sqrt(s)/Ba``,

    I1 = 2 sqrt(s/pi) + Ba (erfcx(x) - 1)                      = Ba   R_2(x)
    I2 = (4/3) s^(3/2)/sqrt(pi) + Ba^2 I1 - Ba s                = Ba^3 R_4(x)

where ``R_m(x) = sum_{n>=m} (-x)^n / Gamma(n/2 + 1)`` is a tail of the
erfcx power series.  The tail form is used for ``x <= 1`` where the closed
form cancels.

A panel ``[a, a + h]`` in lag contributes two moments, ``M0 = int K`` and
``D = (1/h) int (s - c) K`` with ``c`` the panel midpoint.  Differences of
antiderivatives lose about ``log10((a/h)^2)`` digits in ``D``, so panels with
``a >= FAR_RATIO * h`` use a midpoint Taylor expansion of the kernel instead;
its truncation error is below 1e-14 relative there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from ..errors import DomainError, SingularPointError
from ..specfun import _RGAMMA_HALF, INV_SQRT_PI, erfcx_scalar

__all__ = ["Kernel", "UNIT", "DIFFUSION", "MIXED", "FAR_RATIO"]

UNIT = 0
DIFFUSION = 1
MIXED = 2

FAR_RATIO = 64.0
# Above this value of sqrt(s)/Ba the mixed kernel and its derivatives are
# summed from the large-argument expansion of erfcx.
_ASYMPTOTIC_X = 8.0


@numba.njit(cache=True, nogil=True)
def _series_tail(x, m):
    """``sum_{n>=m} (-x)^n / Gamma(n/2+1)`` for ``0 <= x <= 1``."""
    total = 0.0
    power = x**m
    for n in range(m, _RGAMMA_HALF.shape[0]):
        term = power * _RGAMMA_HALF[n]
        if n % 2 == 0:
            total += term
        else:
            total -= term
        if term < 1e-18 * abs(total):
            break
        power *= x
    return total


@numba.njit(cache=True, nogil=True)
def kernel_value(kind, Ba, s):
    if kind == UNIT:
        return 1.0
    if kind == DIFFUSION:
        return INV_SQRT_PI / math.sqrt(s)
    return erfcx_scalar(math.sqrt(s) / Ba) / Ba


@numba.njit(cache=True, nogil=True)
def antiderivatives(kind, Ba, s):
    """``(I1(s), I2(s))`` for the selected kernel."""
    if kind == UNIT:
        return s, 0.5 * s * s
    rs = math.sqrt(s)
    if kind == DIFFUSION:
        return 2.0 * INV_SQRT_PI * rs, (4.0 / 3.0) * INV_SQRT_PI * s * rs
    x = rs / Ba
    if x <= 1.0:
        return Ba * _series_tail(x, 2), Ba * Ba * Ba * _series_tail(x, 4)
    i1 = 2.0 * INV_SQRT_PI * rs + Ba * (erfcx_scalar(x) - 1.0)
    i2 = (4.0 / 3.0) * INV_SQRT_PI * s * rs + Ba * Ba * i1 - Ba * s
    return i1, i2


@numba.njit(cache=True, nogil=True)
def derivatives(kind, Ba, s):
    """Kernel value and its first four derivatives with respect to ``s > 0``."""
    if kind == UNIT:
        return 1.0, 0.0, 0.0, 0.0, 0.0
    inv_s = 1.0 / s
    g0 = INV_SQRT_PI / math.sqrt(s)
    # Derivatives of the diffusion kernel: g_j = (-1)^j (1/2)_j s^(-j) g0.
    g1 = -0.5 * inv_s * g0
    g2 = -1.5 * inv_s * g1
    g3 = -2.5 * inv_s * g2
    g4 = -3.5 * inv_s * g3
    if kind == DIFFUSION:
        return g0, g1, g2, g3, g4
    x = math.sqrt(s) / Ba
    if x >= _ASYMPTOTIC_X:
        # xi = sum_k c_k Ba^(2k) s^(-k-1/2) / sqrt(pi), c_k = (-1)^k (2k-1)!!/2^k,
        # differentiated term by term.
        k0 = 0.0
        k1 = 0.0
        k2 = 0.0
        k3 = 0.0
        k4 = 0.0
        term = g0
        r = Ba * Ba * inv_s
        for k in range(60):
            nu = k + 0.5
            d1 = -nu * inv_s * term
            d2 = -(nu + 1.0) * inv_s * d1
            d3 = -(nu + 2.0) * inv_s * d2
            d4 = -(nu + 3.0) * inv_s * d3
            k0 += term
            k1 += d1
            k2 += d2
            k3 += d3
            k4 += d4
            if abs(term) < 1e-17 * abs(k0):
                break
            term *= -(2.0 * k + 1.0) * 0.5 * r
        return k0, k1, k2, k3, k4
    # Ba^2 xi' = xi - g gives each derivative from the previous one; the
    # cancellation costs at most a factor x^2 <= 64 per order.
    inv_b2 = 1.0 / (Ba * Ba)
    k0 = erfcx_scalar(x) / Ba
    k1 = (k0 - g0) * inv_b2
    k2 = (k1 - g1) * inv_b2
    k3 = (k2 - g2) * inv_b2
    k4 = (k3 - g3) * inv_b2
    return k0, k1, k2, k3, k4


@numba.njit(cache=True, nogil=True)
def panel_moments(kind, Ba, a, h):
    """Moments ``(M0, D)`` of the kernel over the lag interval ``[a, a + h]``.

    ``M0 = int K ds`` and ``D = (1/h) int (s - a - h/2) K ds``.  The weight of
    the sample at lag ``a + h`` (earlier time) in linear interpolation is
    ``M0/2 + D``; the weight of the sample at lag ``a`` is ``M0/2 - D``.
    """
    if kind == UNIT:
        return h, 0.0
    if a >= FAR_RATIO * h:
        c = a + 0.5 * h
        k0, k1, k2, k3, k4 = derivatives(kind, Ba, c)
        h2 = h * h
        m0 = h * (k0 + h2 * (k2 / 24.0 + h2 * k4 / 1920.0))
        d = h2 * (k1 / 12.0 + h2 * k3 / 480.0)
        return m0, d
    i1a, i2a = antiderivatives(kind, Ba, a)
    i1b, i2b = antiderivatives(kind, Ba, a + h)
    return i1b - i1a, 0.5 * (i1a + i1b) - (i2b - i2a) / h


@numba.njit(cache=True, nogil=True)
def weights_at(kind, Ba, nodes, widths, n, trapezoid):
    """Product-integration weights ``C[j]``, ``j = 0..n``, at node ``n``.

    ``widths[p]`` is the exact length of panel ``p``; it is used instead of
    ``nodes[p+1] - nodes[p]`` to avoid rounding in the panel length.
    """
    out = np.zeros(n + 1)
    tn = nodes[n]
    for p in range(n):
        a = tn - nodes[p + 1]
        if a < 0.0:
            a = 0.0
        m0, d = panel_moments(kind, Ba, a, widths[p])
        if trapezoid:
            out[p] += 0.5 * m0 + d
            out[p + 1] += 0.5 * m0 - d
        else:
            out[p] += m0
    return out


@numba.njit(cache=True, nogil=True)
def _eval_array(kind, Ba, s, which):
    out = np.empty_like(s)
    for i in range(s.size):
        if which == 0:
            out[i] = kernel_value(kind, Ba, s[i])
        else:
            i1, i2 = antiderivatives(kind, Ba, s[i])
            out[i] = i1 if which == 1 else i2
    return out


@dataclass(frozen=True)
class Kernel:
    """Convolution kernel selector.

    Use :meth:`diffusion`, :meth:`mixed` or :meth:`unit` to construct.
    A mixed kernel with ``Ba = 0`` is the diffusion kernel.
    """

    variant: str
    Ba: float = 0.0

    def __post_init__(self):
        if self.variant not in ("unit", "diffusion", "mixed"):
            raise DomainError(f"unknown kernel variant {self.variant!r}")
        if not (math.isfinite(self.Ba) and self.Ba >= 0.0):
            raise DomainError("Ba must be nonnegative and finite")
        if self.variant != "mixed" and self.Ba != 0.0:
            raise DomainError(f"the {self.variant} kernel takes no Ba")

    @classmethod
    def unit(cls) -> "Kernel":
        return cls("unit")

    @classmethod
    def diffusion(cls) -> "Kernel":
        return cls("diffusion")

    @classmethod
    def mixed(cls, Ba: float) -> "Kernel":
        return cls("mixed", float(Ba))

    @property
    def code(self) -> int:
        if self.variant == "unit":
            return UNIT
        if self.variant == "diffusion" or self.Ba == 0.0:
            return DIFFUSION
        return MIXED

    def _apply(self, s, which):
        arr = np.asarray(s, dtype=float)
        if np.any(np.isnan(arr)) or np.any(arr < 0.0):
            raise DomainError("lag must be nonnegative")
        if which == 0 and self.code == DIFFUSION and np.any(arr == 0.0):
            raise SingularPointError("the diffusion kernel diverges at zero lag")
        flat = np.ascontiguousarray(arr.reshape(-1))
        out = _eval_array(self.code, self.Ba, flat, which).reshape(arr.shape)
        return float(out) if out.ndim == 0 else out

    def __call__(self, s):
        """Kernel value at lag ``s``."""
        return self._apply(s, 0)

    def I1(self, s):
        """Antiderivative vanishing at zero."""
        return self._apply(s, 1)

    def I2(self, s):
        """Antiderivative of :meth:`I1` vanishing at zero."""
        return self._apply(s, 2)
