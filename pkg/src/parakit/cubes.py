"""Parabolic cubes, cube oscillations, and BMO norms by strided search.

A cube of radius r centered at z0 is the parabolic ball
{z : max(|x_i - x0_i|, |t - t0|^(1/2)) < r}: a spatial box of side 2r
times a time interval of length 2r^2, so doubling the radius multiplies
the volume by exactly 2^(n+2).

The continuum BMO sup over all cubes is discretized by a deterministic
family: dyadic radii from the largest cube fitting the domain down to a
floor of min_cells grid cells per axis, centers strided by a fraction of
the cube half-extent per axis (so time strides scale with r^2), with a
final flush position against the domain edge. The family sup
under-approximates the continuum sup and never decreases when the stride
is refined. Cube quadrature weights cells by their overlap with the cube,
which keeps cube means exact for constant fields at every radius.
"""

import concurrent.futures
import math
from dataclasses import dataclass

import numpy as np

from . import config
from ._kernels import backend_name, scan_level
from .grid import axis_interval_weights

__all__ = [
    "BmoResult",
    "CubeSearchPolicy",
    "ParabolicCube",
    "bmo_norm",
    "bmo_search",
    "cube_family",
    "cube_mean",
    "discrete_volume",
    "inf_oscillation",
    "mean_estimate_check",
    "oscillation",
    "overline_bmo_norm",
    "weighted_median",
]

_FORMS = {"oscillation": 0, "inf": 1}


@dataclass(frozen=True)
class ParabolicCube:
    """Parabolic ball: center (x_1..x_n, t) and radius under the distance."""

    center: tuple
    radius: float

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        if len(center) < 2:
            raise ValueError("cube center needs at least one spatial and one time coordinate")
        if self.radius <= 0:
            raise ValueError(f"cube radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self):
        return len(self.center) - 1

    def half_extents(self):
        """Half-lengths per axis: r spatially, r^2 in time."""
        return (self.radius,) * self.n + (self.radius**2,)

    def box(self):
        """Per-axis (lo, hi) intervals, time last."""
        return tuple(
            (c - e, c + e) for c, e in zip(self.center, self.half_extents())
        )

    def volume(self):
        return (2.0 * self.radius) ** self.n * 2.0 * self.radius**2

    def dilated(self, factor):
        """Concentric cube with the radius scaled by `factor`."""
        if factor <= 0:
            raise ValueError(f"dilation factor must be positive, got {factor}")
        return ParabolicCube(center=self.center, radius=self.radius * factor)


@dataclass(frozen=True)
class CubeSearchPolicy:
    """Deterministic cube family: dyadic radii, strided centers.

    stride_fraction strides centers by that fraction of the half-extent
    per axis; min_cells is the radius floor (a cube must span at least
    that many grid cells on every axis).
    """

    stride_fraction: float = 0.5
    min_cells: int = 3

    def __post_init__(self):
        if not 0.0 < self.stride_fraction <= 1.0:
            raise ValueError(
                f"stride_fraction must be in (0, 1], got {self.stride_fraction}"
            )
        if self.min_cells < 1:
            raise ValueError(f"min_cells must be >= 1, got {self.min_cells}")


@dataclass(frozen=True)
class CubeLevel:
    """All search cubes of one radius: per-axis center positions."""

    radius: float
    centers: tuple

    @property
    def count(self):
        return int(np.prod([len(c) for c in self.centers]))


@dataclass(frozen=True)
class BmoResult:
    """Outcome of one BMO search."""

    value: float
    argmax_cube: ParabolicCube
    form: str
    policy: CubeSearchPolicy
    domain: tuple
    cubes_scanned: int
    backend: str


def _cube_weights(grid, cube):
    pairs = [
        axis_interval_weights(grid, ax, lo, hi)
        for ax, (lo, hi) in enumerate(cube.box())
    ]
    if any(float(np.sum(w)) <= 0.0 for _, w in pairs):
        raise ValueError(f"cube {cube} does not intersect the grid")
    return pairs


def _cube_values_weights(fld, cube):
    pairs = _cube_weights(fld.grid, cube)
    sl = tuple(slice(k0, k0 + len(w)) for k0, w in pairs)
    block = fld.values[sl]
    w_full = np.ones(block.shape)
    for ax, (_, w) in enumerate(pairs):
        shape = [1] * block.ndim
        shape[ax] = len(w)
        w_full = w_full * w.reshape(shape)
    return block.ravel(), w_full.ravel()


def cube_mean(fld, cube):
    """Cell-weighted mean of the field over the cube; exact for constants."""
    vals, w = _cube_values_weights(fld, cube)
    return float(np.dot(w, vals) / np.sum(w))


def oscillation(fld, cube):
    """Mean absolute deviation from the cube mean."""
    vals, w = _cube_values_weights(fld, cube)
    wsum = np.sum(w)
    mean = np.dot(w, vals) / wsum
    return float(np.dot(w, np.abs(vals - mean)) / wsum)


def weighted_median(values, weights):
    """Lower weighted median: smallest v with cumulative weight >= half.

    Any value in the median interval minimizes the weighted L1 deviation,
    so ties do not affect the minimized objective.
    """
    values = np.asarray(values, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if values.size == 0 or values.shape != weights.shape:
        raise ValueError("median needs matching, non-empty values and weights")
    if np.any(weights < 0.0) or not np.sum(weights) > 0.0:
        raise ValueError("median weights must be nonnegative with positive sum")
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    half = 0.5 * cum[-1]
    return float(values[order][int(np.argmax(cum >= half))])


def inf_oscillation(fld, cube):
    """Smallest mean absolute deviation over all centering constants.

    The minimizer is a weighted median of the samples in the cube.
    """
    vals, w = _cube_values_weights(fld, cube)
    med = weighted_median(vals, w)
    return float(np.dot(w, np.abs(vals - med)) / np.sum(w))


def discrete_volume(grid, cube):
    """Product of per-axis quadrature weight sums (cell-clipped volume)."""
    pairs = _cube_weights(grid, cube)
    return float(np.prod([np.sum(w) for _, w in pairs]))


def _domain_or_box(grid, domain):
    if domain is None:
        return tuple(
            (o, o + L) for o, L in zip(grid.origin, grid.lengths)
        )
    domain = tuple((float(lo), float(hi)) for lo, hi in domain)
    if len(domain) != grid.ndim:
        raise ValueError(f"domain must have {grid.ndim} axis intervals")
    for ax, (lo, hi) in enumerate(domain):
        if not lo < hi:
            raise ValueError(f"domain axis {ax} needs lo < hi, got ({lo}, {hi})")
        cov_lo = grid.origin[ax]
        cov_hi = grid.origin[ax] + grid.lengths[ax]
        slack = 1e-9 * grid.lengths[ax]
        if lo < cov_lo - slack or hi > cov_hi + slack:
            raise ValueError(
                f"domain axis {ax} interval ({lo}, {hi}) exceeds the grid "
                f"box ({cov_lo}, {cov_hi})"
            )
    return domain


def _axis_centers(lo, hi, ext, stride_fraction):
    span = hi - lo
    step = stride_fraction * ext
    count = int(math.floor((span - 2.0 * ext) / step + 1e-12)) + 1
    count = max(count, 1)
    centers = lo + ext + np.arange(count) * step
    last = hi - ext
    if last - centers[-1] > 1e-12 * max(span, 1.0):
        centers = np.append(centers, last)
    return centers


def largest_radius(domain):
    """Radius of the largest parabolic cube fitting inside the domain."""
    spans = [hi - lo for lo, hi in domain]
    return min(min(s / 2.0 for s in spans[:-1]), math.sqrt(spans[-1] / 2.0))


def cube_family(grid, domain=None, policy=None, radii=None):
    """Deterministic cube levels for a domain under a policy.

    Radii run dyadically from the largest cube that fits the domain down
    to the floor where a cube spans min_cells grid cells on every axis;
    an explicit `radii` sequence overrides the ladder (each radius must
    still fit the domain). Returns an empty list when no radius
    qualifies.
    """
    if policy is None:
        policy = CubeSearchPolicy()
    domain = _domain_or_box(grid, domain)
    h = grid.spacing
    mc = policy.min_cells
    r_max = largest_radius(domain)
    if radii is None:
        r_floor = max(
            max(mc * hi / 2.0 for hi in h[:-1]), math.sqrt(mc * h[-1] / 2.0)
        )
        radii = []
        r = r_max
        while r >= r_floor * (1.0 - 1e-12):
            radii.append(r)
            r /= 2.0
    else:
        radii = sorted((float(r) for r in radii), reverse=True)
        for r in radii:
            if not 0.0 < r <= r_max * (1.0 + 1e-12):
                raise ValueError(
                    f"radius {r} does not fit the domain (max {r_max})"
                )
    levels = []
    for r in radii:
        exts = (r,) * grid.n + (r * r,)
        centers = tuple(
            _axis_centers(lo, hi, e, policy.stride_fraction)
            for (lo, hi), e in zip(domain, exts)
        )
        levels.append(CubeLevel(radius=r, centers=centers))
    return levels


def _level_windows(grid, level):
    """Per-axis window starts and weight matrices for one cube level."""
    starts = []
    weights = []
    exts = (level.radius,) * (grid.ndim - 1) + (level.radius**2,)
    for ax, (centers, ext) in enumerate(zip(level.centers, exts)):
        h = grid.spacing[ax]
        o = grid.origin[ax]
        nax = grid.shape[ax]
        lo = centers - ext
        hi = centers + ext
        k0 = np.clip(np.floor((lo - o) / h).astype(np.int64), 0, nax - 1)
        k1 = np.clip(np.ceil((hi - o) / h).astype(np.int64) - 1, 0, nax - 1)
        length = int(np.max(k1 - k0) + 1)
        k0 = np.minimum(k0, nax - length)
        cell_lo = o + (k0[:, None] + np.arange(length)[None, :]) * h
        w = np.minimum(hi[:, None], cell_lo + h) - np.maximum(lo[:, None], cell_lo)
        np.clip(w, 0.0, None, out=w)
        starts.append(k0)
        weights.append(np.ascontiguousarray(w))
    return starts, weights


def _scan_one_level(values, grid, level, mode):
    starts, weights = _level_windows(grid, level)
    best, idx = scan_level(values, starts, weights, mode)
    counts = [len(c) for c in level.centers]
    pos = np.unravel_index(int(idx), counts)
    center = tuple(level.centers[ax][p] for ax, p in enumerate(pos))
    return float(best), ParabolicCube(center=center, radius=level.radius)


def bmo_search(fld, domain=None, policy=None, form="oscillation", radii=None):
    """Max of the per-cube functional over the policy's family.

    form "oscillation" uses the mean absolute deviation about the cube
    mean; form "inf" minimizes the deviation over the centering constant
    (weighted median). Returns a BmoResult with the maximizing cube.
    """
    if form not in _FORMS:
        raise ValueError(f"form must be one of {sorted(_FORMS)}, got {form!r}")
    if policy is None:
        policy = CubeSearchPolicy()
    grid = fld.grid
    levels = cube_family(grid, domain, policy, radii=radii)
    if not levels:
        raise ValueError(
            "empty cube family: domain is smaller than the minimum cube"
        )
    mode = _FORMS[form]
    values = np.ascontiguousarray(fld.values)
    workers = config.thread_count()
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(workers) as pool:
            results = list(
                pool.map(
                    lambda lv: _scan_one_level(values, grid, lv, mode), levels
                )
            )
    else:
        results = [_scan_one_level(values, grid, lv, mode) for lv in levels]
    best_value, best_cube = results[0]
    for value, cube in results[1:]:
        if value > best_value:
            best_value, best_cube = value, cube
    return BmoResult(
        value=best_value,
        argmax_cube=best_cube,
        form=form,
        policy=policy,
        domain=_domain_or_box(grid, domain),
        cubes_scanned=sum(lv.count for lv in levels),
        backend=backend_name(),
    )


def bmo_norm(fld, domain=None, policy=None, form="oscillation", radii=None):
    """BMO norm value (see bmo_search for the full report)."""
    return bmo_search(
        fld, domain=domain, policy=policy, form=form, radii=radii
    ).value


def overline_bmo_norm(fld, domain=None, policy=None):
    """Inf-form BMO norm plus the L1 quadrature over the domain."""
    from .norms import lp_norm

    box = _domain_or_box(fld.grid, domain)
    bmo = bmo_norm(fld, domain=domain, policy=policy, form="inf")
    return bmo + lp_norm(fld, 1, domain=box)


def mean_estimate_check(
    fld, inner, outer, domain=None, policy=None, tolerance=0.02
):
    """Check |mean(outer) - mean(inner)| against i (1 + 2^(n+2)) bmo.

    `inner` must nest inside `outer` with radii in ratio 2^i, integer
    i >= 1. The bound uses the oscillation-form BMO norm over `domain`
    (the whole box by default); `tolerance` is the accepted relative
    discretization slack before the report flags a violation.
    """
    n = fld.grid.n
    ratio = outer.radius / inner.radius
    i = round(math.log2(ratio))
    if i < 1 or abs(ratio - 2.0**i) > 1e-9 * ratio:
        raise ValueError(
            f"cube radii must be in dyadic ratio 2^i, i >= 1; got {ratio}"
        )
    for (ilo, ihi), (olo, ohi) in zip(inner.box(), outer.box()):
        slack = 1e-12 * max(abs(olo), abs(ohi), 1.0)
        if ilo < olo - slack or ihi > ohi + slack:
            raise ValueError("inner cube is not nested inside the outer cube")
    bmo = bmo_norm(fld, domain=domain, policy=policy, form="oscillation")
    diff = abs(cube_mean(fld, outer) - cube_mean(fld, inner))
    factor = i * (1.0 + 2.0 ** (n + 2))
    bound = factor * bmo
    return {
        "difference": diff,
        "bound": bound,
        "bmo": bmo,
        "steps": int(i),
        "factor": factor,
        "tolerance": float(tolerance),
        "violation": bool(diff > bound * (1.0 + tolerance)),
    }
