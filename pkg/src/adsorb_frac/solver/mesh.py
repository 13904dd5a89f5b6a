"""Piecewise-uniform time meshes."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError

__all__ = ["Mesh", "build_mesh", "DEFAULT_REGIONS", "DIFFUSION_DEFAULT_REGIONS"]

# (end, step) pairs in adsorption time units; fine steps resolve the
# square-root onset, coarse ones carry the run to equilibrium.
DEFAULT_REGIONS = (
    (1e-3, 1e-5),
    (1e-2, 1e-4),
    (1e-1, 1e-3),
    (1.0, 1e-2),
    (1000.0, 1e-1),
)

# Pure diffusion control keeps the singular kernel unsmoothed, so the 1e-2
# step is carried on to 10 before coarsening.
DIFFUSION_DEFAULT_REGIONS = (
    (1e-3, 1e-5),
    (1e-2, 1e-4),
    (1e-1, 1e-3),
    (10.0, 1e-2),
    (1000.0, 1e-1),
)

_ALIGN_RTOL = 1e-9


@dataclass(frozen=True)
class Mesh:
    """Consecutive uniform regions ``(end, step)`` starting at 0.

    Attributes
    ----------
    regions : tuple of (float, float)
    counts : tuple of int
        Number of steps in each region.
    nodes : numpy.ndarray
        Node coordinates, ``nodes[0] = 0``.  Within a region nodes are
        ``start + i * step`` so that lags between nodes of one region are
        exact multiples of the step.
    """

    regions: tuple
    counts: tuple = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        regions = tuple((float(e), float(h)) for e, h in self.regions)
        if not regions:
            raise ConfigError("a mesh needs at least one region")
        counts = []
        chunks = [np.zeros(1)]
        start = 0.0
        for end, step in regions:
            if not (math.isfinite(end) and math.isfinite(step)) or step <= 0.0:
                raise ConfigError(f"region ({end}, {step}) needs a positive finite step")
            if end <= start:
                raise ConfigError(f"region ends must increase: {end} after {start}")
            span = end - start
            n = round(span / step)
            if n < 1 or abs(n * step - span) > _ALIGN_RTOL * span:
                raise ConfigError(
                    f"region ending at {end} is not a whole number of steps {step} "
                    f"(span {span} / step = {span / step})"
                )
            counts.append(n)
            chunks.append(start + step * np.arange(1, n + 1))
            start = end
        nodes = np.concatenate(chunks)
        nodes.setflags(write=False)
        object.__setattr__(self, "regions", regions)
        object.__setattr__(self, "counts", tuple(counts))
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_steps(self) -> int:
        return int(sum(self.counts))

    @property
    def end(self) -> float:
        return self.regions[-1][0]

    def widths(self) -> np.ndarray:
        """Exact panel lengths, one per step."""
        return np.repeat([h for _, h in self.regions], self.counts)

    def region_starts(self) -> np.ndarray:
        """Index of the first node of each region (the previous region's end)."""
        return np.concatenate(([0], np.cumsum(self.counts)[:-1])).astype(np.int64)

    def scaled(self, factor: float) -> "ScaledMesh":
        """The same mesh with every coordinate multiplied by ``factor``."""
        return ScaledMesh(self, float(factor))

    def digest(self) -> str:
        """Short stable hash of the region definition."""
        text = ";".join(f"{e!r}:{h!r}" for e, h in self.regions)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ScaledMesh:
    """A mesh expressed in another time unit."""

    base: Mesh
    factor: float

    @property
    def nodes(self) -> np.ndarray:
        return self.base.nodes * self.factor

    def widths(self) -> np.ndarray:
        return self.base.widths() * self.factor

    def steps(self) -> np.ndarray:
        return np.array([h for _, h in self.base.regions]) * self.factor


def build_mesh(spec=None, *, diffusion_controlled: bool = False) -> Mesh:
    """Construct a mesh from ``(end, step)`` pairs, or the default mesh.

    ``spec`` may also be a string ``"end:step, end:step, ..."`` or
    ``"default"``.  With ``spec=None`` the default regions are used, or the
    diffusion-control variant when ``diffusion_controlled`` is set.

    Raises
    ------
    ConfigError
        If the regions are not increasing, a step is not positive, or a
        region is not a whole number of steps.
    """
    if isinstance(spec, str):
        spec = _parse_regions(spec)
    if spec is None:
        return Mesh(DIFFUSION_DEFAULT_REGIONS if diffusion_controlled else DEFAULT_REGIONS)
    try:
        regions = [(e, h) for e, h in spec]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"mesh regions must be (end, step) pairs: {exc}") from None
    return Mesh(tuple(regions))


def _parse_regions(text: str):
    if text.strip().lower() == "default":
        return None
    regions = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            end, step = item.split(":")
            regions.append((float(end), float(step)))
        except ValueError:
            raise ConfigError(f"cannot parse mesh region {item!r}; expected end:step") from None
    return regions
