"""Predictor-corrector stepping for the adsorption integral equations.

Three equivalent integral forms are discretized by product integration on a
piecewise-uniform mesh:

``wt``
    ``Gamma*(t) = int_0^t xi_Ba(t - tau) R(tau) dtau`` with the residual
    ``R = Gamma*_inf (f_e - f(g))``.  Valid when ``Phi = 1`` or ``Ba = 0``
    (then ``xi`` is the diffusion kernel).
``exp``
    ``Gamma* = Gamma*_inf (1 - exp(-F / Gamma*_inf))`` with
    ``F = (J^1 R - J^(1/2) Gamma*) / Ba``, for the models with
    ``Phi = 1 - g`` and ``Ba > 0``.  The exponential keeps ``Gamma*`` below
    saturation by construction.
``hybrid``
    The same models written as ``Gamma* + Ba xi_Ba * dH/dt = xi_Ba * R``,
    where ``H(Gamma*) = F - Gamma* = -Gamma*_inf log(1 - g) - Gamma*`` is
    the part of the transform beyond linear order.  ``exp`` divides a
    difference of two half-order-sized integrals by ``Ba`` and needs steps
    well below ``Ba*`` in adsorption time; here the endpoint enters only
    through ``Gamma*_n + lam H(Gamma*_n) = b`` with ``0 < lam <= 1``, which
    is solved exactly, so the step size is limited by accuracy alone.
    For ``lam = 1`` the relation is the exponential transform itself.

Each step predicts with rectangle weights (explicit in ``R``) and corrects
once with trapezoid weights, using the predicted value for the unknown
endpoint sample of ``R``.

Within one mesh region all lags between nodes are multiples of the step, so
the weights of the region's own panels are computed once per region and
reused; panels from earlier regions are integrated afresh at every step.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from ..errors import AccuracyError, ConfigError, ModelValidityError
from ..isotherms import G_MAX, IsothermKind, f_scalar, pressure_scalar
from ..scaling import DimensionlessParams
from ..trajectory import Trajectory
from .kernels import DIFFUSION, MIXED, UNIT, Kernel, panel_moments, weights_at
from .mesh import Mesh, build_mesh

__all__ = [
    "solve",
    "step_wt",
    "step_exp",
    "step_hybrid",
    "weights",
    "select_formulation",
    "time_factor",
]

WT = 0
EXP = 1
HYBRID = 2
_FORMS = {"wt": WT, "exp": EXP, "hybrid": HYBRID}


@numba.njit(cache=True, nogil=True)
def _residual(code, beta, gsi, f_e, G, clamps):
    g = G / gsi
    if code != 0 and g > G_MAX:
        g = G_MAX
        clamps[0] += 1
    return gsi * (f_e - f_scalar(code, beta, g))


@numba.njit(cache=True, nogil=True)
def _region_tables(kind, Ba, steps, counts):
    offsets = np.zeros(len(counts) + 1, dtype=np.int64)
    for r in range(len(counts)):
        offsets[r + 1] = offsets[r] + counts[r]
    m0 = np.empty(offsets[-1])
    dd = np.empty(offsets[-1])
    for r in range(len(counts)):
        h = steps[r]
        for k in range(counts[r]):
            a, b = panel_moments(kind, Ba, k * h, h)
            m0[offsets[r] + k] = a
            dd[offsets[r] + k] = b
    return offsets, m0, dd


@numba.njit(cache=True, nogil=True)
def _history(kind, Ba, values, n, nodes, widths, start, off, m0t, dt):
    """Rectangle sum, trapezoid sum without the endpoint, endpoint weight."""
    rect = 0.0
    trap = 0.0
    tn = nodes[n]
    for p in range(start):
        m0, d = panel_moments(kind, Ba, tn - nodes[p + 1], widths[p])
        rect += m0 * values[p]
        trap += (0.5 * m0 + d) * values[p] + (0.5 * m0 - d) * values[p + 1]
    for p in range(start, n):
        k = off + n - 1 - p
        m0 = m0t[k]
        d = dt[k]
        rect += m0 * values[p]
        trap += (0.5 * m0 + d) * values[p]
        if p + 1 < n:
            trap += (0.5 * m0 - d) * values[p + 1]
    wn = 0.5 * m0t[off] - dt[off]
    return rect, trap, wn


@numba.njit(cache=True, nogil=True)
def _run(form, kind, Ba, code, beta, gsi, f_e, nodes, widths, steps, counts, n_corr):
    n_nodes = nodes.shape[0]
    G = np.zeros(n_nodes)
    R = np.zeros(n_nodes)
    clamps = np.zeros(1, dtype=np.int64)
    R[0] = _residual(code, beta, gsi, f_e, 0.0, clamps)
    if form == WT:
        off, m0t, dt = _region_tables(kind, Ba, steps, counts)
    else:
        off, m0t, dt = _region_tables(DIFFUSION, 0.0, steps, counts)
        uoff, um0, udt = _region_tables(UNIT, 0.0, steps, counts)
    n = 0
    for r in range(len(counts)):
        start = n
        for _ in range(counts[r]):
            n += 1
            if form == WT:
                rect, trap, wn = _history(kind, Ba, R, n, nodes, widths, start, off[r], m0t, dt)
                g_new = rect
                for _it in range(n_corr + 1):
                    g_new = trap + wn * _residual(code, beta, gsi, f_e, g_new, clamps)
            else:
                rect_u, trap_u, wn_u = _history(UNIT, 0.0, R, n, nodes, widths, start, uoff[r], um0, udt)
                rect_d, trap_d, wn_d = _history(DIFFUSION, 0.0, G, n, nodes, widths, start, off[r], m0t, dt)
                F = (rect_u - rect_d) / Ba
                g_new = -gsi * math.expm1(-F / gsi)
                for _it in range(n_corr + 1):
                    r_new = _residual(code, beta, gsi, f_e, g_new, clamps)
                    F = (trap_u + wn_u * r_new - trap_d - wn_d * g_new) / Ba
                    g_new = -gsi * math.expm1(-F / gsi)
            G[n] = g_new
            R[n] = _residual(code, beta, gsi, f_e, g_new, clamps)
    return G, clamps[0]


@numba.njit(cache=True, nogil=True)
def _excess(G, gsi):
    """``H(G) = -gsi log(1 - G/gsi) - G``, the nonlinear part of the transform."""
    return -gsi * math.log1p(-G / gsi) - G


@numba.njit(cache=True, nogil=True)
def _solve_excess(b, lam, gsi):
    """Root of ``G + lam H(G) = b`` for ``0 < lam <= 1``.

    The left side is increasing and convex.  ``G + H(G) = b`` has the closed
    form root ``gsi (1 - exp(-b/gsi))``, which bounds the root from below;
    ``min(b, gsi)`` bounds it from above.  Newton from the upper bound then
    converges monotonically; bisection guards the bracket.
    """
    lo = -gsi * math.expm1(-b / gsi)
    hi = min(b, gsi * (1.0 - 1e-16))
    if lam >= 1.0 or hi <= lo:
        return lo
    x = hi
    for _ in range(100):
        val = x + lam * _excess(x, gsi) - b
        if val > 0.0:
            hi = x
        else:
            lo = x
        xn = x - val / (1.0 + lam * x / (gsi - x))
        if not lo <= xn <= hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 4e-16 * abs(x):
            return xn
        x = xn
    return x


@numba.njit(cache=True, nogil=True)
def _history_hybrid(Ba, R, H, n, nodes, widths, start, off, m0t, dt):
    """Sums of :func:`_history` for ``R`` plus the known part of ``xi * dH/dt``.

    ``H`` is taken piecewise linear, so ``dH/dt`` is constant on each panel.
    The last panel's unknown endpoint ``H_n`` is left out; its coefficient
    is ``M0/h`` of the first panel of the current region.
    """
    rect = 0.0
    trap = 0.0
    known = 0.0
    tn = nodes[n]
    for p in range(n):
        if p < start:
            m0, d = panel_moments(MIXED, Ba, tn - nodes[p + 1], widths[p])
        else:
            k = off + n - 1 - p
            m0 = m0t[k]
            d = dt[k]
        rect += m0 * R[p]
        trap += (0.5 * m0 + d) * R[p]
        if p + 1 < n:
            trap += (0.5 * m0 - d) * R[p + 1]
            known += m0 / widths[p] * (H[p + 1] - H[p])
        else:
            known -= m0 / widths[p] * H[p]
    wn = 0.5 * m0t[off] - dt[off]
    return rect, trap, wn, known


@numba.njit(cache=True, nogil=True)
def _run_hybrid(Ba, code, beta, gsi, f_e, nodes, widths, steps, counts, n_corr):
    n_nodes = nodes.shape[0]
    G = np.zeros(n_nodes)
    R = np.zeros(n_nodes)
    H = np.zeros(n_nodes)
    clamps = np.zeros(1, dtype=np.int64)
    R[0] = _residual(code, beta, gsi, f_e, 0.0, clamps)
    off, m0t, dt = _region_tables(MIXED, Ba, steps, counts)
    n = 0
    for r in range(len(counts)):
        start = n
        lam = Ba * m0t[off[r]] / steps[r]
        for _ in range(counts[r]):
            n += 1
            rect, trap, wn, known = _history_hybrid(Ba, R, H, n, nodes, widths, start, off[r], m0t, dt)
            g_new = _solve_excess(rect - Ba * known, lam, gsi)
            for _it in range(n_corr + 1):
                r_new = _residual(code, beta, gsi, f_e, g_new, clamps)
                g_new = _solve_excess(trap + wn * r_new - Ba * known, lam, gsi)
            G[n] = g_new
            R[n] = _residual(code, beta, gsi, f_e, g_new, clamps)
            H[n] = _excess(g_new, gsi)
    return G, clamps[0]


@numba.njit(cache=True, nogil=True)
def _pressures(code, beta, g):
    out = np.empty_like(g)
    for i in range(g.shape[0]):
        gi = g[i]
        if code != 0 and gi > G_MAX:
            gi = G_MAX
        out[i] = pressure_scalar(code, beta, gi)
    return out


def select_formulation(dp: DimensionlessParams, formulation: str = "auto") -> str:
    """Resolve ``auto`` and check that an explicit choice is admissible."""
    formulation = formulation.lower()
    if formulation not in ("auto", *_FORMS):
        raise ConfigError(f"formulation must be auto, wt, exp or hybrid, got {formulation!r}")
    if formulation == "auto":
        return "hybrid" if (dp.iso.has_phi and dp.Ba > 0.0) else "wt"
    if formulation in ("exp", "hybrid") and dp.Ba == 0.0:
        raise ConfigError(f"the {formulation} formulation needs Ba > 0; use wt for diffusion control")
    if formulation in ("exp", "hybrid") and not dp.iso.has_phi:
        raise ConfigError(
            f"the {formulation} formulation applies to langmuir and frumkin, not {dp.iso.kind.value}"
        )
    if formulation == "wt" and dp.iso.has_phi and dp.Ba > 0.0:
        raise ConfigError("the wt formulation requires Phi = 1 or Ba = 0")
    return formulation


def time_factor(dp: DimensionlessParams) -> float:
    """Multiplier taking mesh coordinates to the diffusion time ``t_tilde``.

    For ``Ba > 0`` the mesh is in adsorption time ``t_star``.  Under pure
    diffusion control that scale vanishes, and the mesh coordinate is taken
    as ``t_tilde (Gamma*_inf f_e)^2``, the natural time of the
    square-root onset ``Gamma* ~ 2 Gamma*_inf f_e sqrt(t_tilde/pi)``.
    """
    if dp.Ba > 0.0:
        return dp.Ba / dp.prefactor
    return 1.0 / dp.prefactor**2


def _kernel_for(dp):
    return (MIXED, dp.Ba) if dp.Ba > 0.0 else (DIFFUSION, 0.0)


def solve(
    dp: DimensionlessParams,
    mesh: Mesh | None = None,
    formulation: str = "auto",
    *,
    corrector_iterations: int = 0,
    strict: bool = False,
) -> Trajectory:
    """Integrate the adsorption history from a clean interface.

    Parameters
    ----------
    dp : DimensionlessParams
    mesh : Mesh, optional
        Mesh in adsorption time (see :func:`time_factor`); the default mesh
        spans ``t_star`` in ``[0, 1000]``.  Under diffusion control a
        default with a longer fine region is used.
    formulation : {"auto", "wt", "exp", "hybrid"}
        ``auto`` uses ``hybrid`` for langmuir/frumkin with ``Ba > 0`` and
        ``wt`` otherwise.
    corrector_iterations : int
        Extra corrector passes beyond the single one of the PECE scheme.
    strict : bool
        Raise :class:`AccuracyError` if any sample had to be clamped below
        full coverage.
    """
    if mesh is None:
        mesh = build_mesh(diffusion_controlled=dp.Ba == 0.0)
    if not isinstance(mesh, Mesh):
        raise ConfigError("mesh must be a Mesh instance")
    if corrector_iterations < 0:
        raise ConfigError("corrector_iterations must be nonnegative")
    form = select_formulation(dp, formulation)
    factor = time_factor(dp)
    nodes = mesh.nodes * factor
    widths = mesh.widths() * factor
    steps = np.array([h for _, h in mesh.regions]) * factor
    counts = np.array(mesh.counts, dtype=np.int64)
    kind, Ba = _kernel_for(dp)
    code = dp.iso.kind.code
    if form == "hybrid":
        G, clamps = _run_hybrid(
            dp.Ba, code, dp.iso.beta_tilde, dp.gamma_star_inf, dp.f_e,
            nodes, widths, steps, counts, int(corrector_iterations),
        )
    else:
        G, clamps = _run(
            _FORMS[form], kind, Ba, code, dp.iso.beta_tilde,
            dp.gamma_star_inf, dp.f_e, nodes, widths, steps, counts, int(corrector_iterations),
        )
    if not np.all(np.isfinite(G)):
        raise AccuracyError(
            "the explicit stepping became unstable (non-finite values); "
            "use smaller steps where the coverage approaches saturation"
        )
    if strict and clamps > 0:
        raise AccuracyError(f"{clamps} samples were clamped below full coverage")
    coverage = G / dp.gamma_star_inf
    pressure = _pressures(code, dp.iso.beta_tilde, coverage)
    t_star = mesh.nodes.copy() if dp.Ba > 0.0 else np.full(len(nodes), np.nan)
    return Trajectory(
        t_star=t_star, t_tilde=nodes, gamma_star=G, coverage=coverage, pressure=pressure,
        params=dp, mesh_hash=mesh.digest(), formulation=form, clamp_count=int(clamps),
    )


def weights(kernel: Kernel, mesh, n: int, scheme: str = "trapezoid") -> np.ndarray:
    """Product-integration weights ``C[j]``, ``j = 0..n``, at node ``n``.

    ``sum_j C[j] u(t_j)`` equals ``int_0^{t_n} K(t_n - tau) u_h(tau) dtau``
    where ``u_h`` is the piecewise-constant (``rectangle``, value taken at
    the left node) or piecewise-linear (``trapezoid``) interpolant of ``u``.

    ``mesh`` is a :class:`Mesh` or a :class:`ScaledMesh` whose coordinates are
    the kernel's time variable.
    """
    if scheme not in ("rectangle", "trapezoid"):
        raise ConfigError(f"scheme must be rectangle or trapezoid, got {scheme!r}")
    nodes = np.ascontiguousarray(mesh.nodes, dtype=float)
    if not 1 <= n < len(nodes):
        raise ConfigError(f"node index {n} outside 1..{len(nodes) - 1}")
    widths = np.ascontiguousarray(mesh.widths(), dtype=float)
    return weights_at(kernel.code, kernel.Ba, nodes, widths, int(n), scheme == "trapezoid")


def _prefix_arrays(state: Trajectory, n: int, mesh):
    if not 1 <= n <= len(state):
        raise ConfigError(f"step index {n} requires a history of at least {n} samples")
    factor = time_factor(state.params)
    nodes = np.ascontiguousarray(mesh.nodes[: n + 1] * factor)
    widths = np.ascontiguousarray(mesh.widths()[:n] * factor)
    return nodes, widths


def _residuals(dp, G):
    clamps = np.zeros(1, dtype=np.int64)
    code = dp.iso.kind.code
    return np.array([
        _residual(code, dp.iso.beta_tilde, dp.gamma_star_inf, dp.f_e, float(x), clamps) for x in G
    ])


def step_wt(state: Trajectory, n: int, mesh: Mesh) -> float:
    """One PECE step of the convolution form from the samples ``0..n-1``.

    Uses weights evaluated directly for every panel, so it serves as an
    independent check of the region-table path inside :func:`solve`.
    """
    dp = state.params
    if dp.iso.has_phi and dp.Ba > 0.0:
        raise ModelValidityError("the convolution form needs Phi = 1 or Ba = 0")
    nodes, widths = _prefix_arrays(state, n, mesh)
    kind, Ba = _kernel_for(dp)
    R = _residuals(dp, state.gamma_star[:n])
    c1 = weights_at(kind, Ba, nodes, widths, n, False)
    c2 = weights_at(kind, Ba, nodes, widths, n, True)
    g_pred = float(c1[:n] @ R)
    r_pred = _residuals(dp, [g_pred])[0]
    return float(c2[:n] @ R + c2[n] * r_pred)


def step_exp(state: Trajectory, n: int, mesh: Mesh) -> float:
    """One PECE step of the exponential form from the samples ``0..n-1``."""
    dp = state.params
    if not dp.iso.has_phi or dp.Ba == 0.0:
        raise ModelValidityError("the exponential form needs langmuir or frumkin with Ba > 0")
    nodes, widths = _prefix_arrays(state, n, mesh)
    G = np.asarray(state.gamma_star[:n], dtype=float)
    R = _residuals(dp, G)
    gsi = dp.gamma_star_inf
    u1 = weights_at(UNIT, 0.0, nodes, widths, n, False)
    u2 = weights_at(UNIT, 0.0, nodes, widths, n, True)
    d1 = weights_at(DIFFUSION, 0.0, nodes, widths, n, False)
    d2 = weights_at(DIFFUSION, 0.0, nodes, widths, n, True)
    F = (u1[:n] @ R - d1[:n] @ G) / dp.Ba
    g_pred = -gsi * math.expm1(-F / gsi)
    r_pred = _residuals(dp, [g_pred])[0]
    F = (u2[:n] @ R + u2[n] * r_pred - d2[:n] @ G - d2[n] * g_pred) / dp.Ba
    return float(-gsi * math.expm1(-F / gsi))


def step_hybrid(state: Trajectory, n: int, mesh: Mesh) -> float:
    """One PECE step of the hybrid form from the samples ``0..n-1``."""
    dp = state.params
    if not dp.iso.has_phi or dp.Ba == 0.0:
        raise ModelValidityError("the hybrid form needs langmuir or frumkin with Ba > 0")
    nodes, widths = _prefix_arrays(state, n, mesh)
    G = np.asarray(state.gamma_star[:n], dtype=float)
    R = _residuals(dp, G)
    gsi = dp.gamma_star_inf
    H = np.array([_excess(float(x), gsi) for x in G])
    c1 = weights_at(MIXED, dp.Ba, nodes, widths, n, False)
    c2 = weights_at(MIXED, dp.Ba, nodes, widths, n, True)
    m0 = c1[:n]
    slopes = m0 / widths
    known = float(slopes[:-1] @ (H[1:] - H[:-1])) - slopes[-1] * H[-1]
    lam = dp.Ba * slopes[-1]
    g_pred = _solve_excess(float(m0 @ R) - dp.Ba * known, lam, gsi)
    r_pred = _residuals(dp, [g_pred])[0]
    return float(_solve_excess(float(c2[:n] @ R + c2[n] * r_pred) - dp.Ba * known, lam, gsi))
