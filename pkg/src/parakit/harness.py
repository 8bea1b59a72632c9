"""Empirical verification of the logarithmic Sobolev inequalities.

Each check assembles the norms of one inequality, evaluates both sides
with the leading constant set to 1, and reports the implied constant
lhs / rhs. The inequalities fix no constants, so the checks assert
boundedness and stability of the implied constant across field families,
never a specific value.

Field families provide the probes: the log spike is the canonical
BMO-bounded/L-infinity-unbounded family (on families where the sup and
BMO norms scale together the inequalities are vacuous), random
band-limited fields exercise the generic case, oscillatory packets the
single-scale case, and constants the degenerate one. All generators are
deterministic given their parameters.
"""

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from . import cubes, littlewood_paley as lp, norms
from .extension import localized_embedding, radius_ladder
from .grid import SampledField
from .profiles import quasi_distance, smooth_step

__all__ = [
    "CHECKS",
    "FieldFamily",
    "InequalityReport",
    "band_sup_check",
    "basic_log_sobolev_check",
    "constant_field",
    "constant_sweep",
    "generate_field",
    "interpolation_check",
    "log_spike_field",
    "low_band_check",
    "packet_field",
    "random_band_field",
    "run_check",
    "scaling_ratio_bound",
    "sweep_family",
    "verify_theorem1",
    "verify_theorem2",
]

CHECKS = ("theorem1", "theorem2", "basic", "interp", "bandsup", "lowband")


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class InequalityReport:
    """One inequality evaluated on one field.

    lhs and the rhs ingredients are raw norm values; implied_constant is
    lhs divided by the rhs assembled with constant 1. degenerate marks
    reports whose rhs vanishes (the ratio is recorded as 0 and must not
    enter constant statistics).
    """

    check: str
    lhs: float
    ingredients: dict
    implied_constant: float
    degenerate: bool
    field_desc: dict
    grid_desc: dict
    policy_desc: dict

    def as_dict(self):
        return {
            "check": self.check,
            "lhs": self.lhs,
            "ingredients": _jsonable(self.ingredients),
            "implied_constant": self.implied_constant,
            "degenerate": self.degenerate,
            "field": _jsonable(self.field_desc),
            "grid": _jsonable(self.grid_desc),
            "policy": _jsonable(self.policy_desc),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _grid_desc(grid):
    return {
        "n": grid.n,
        "shape": grid.shape,
        "box_len": grid.box_len,
        "time_len": grid.time_len,
        "origin": grid.origin,
        "periodic": grid.periodic,
    }


def _policy_desc(policy, partition=None, **extra):
    desc = {
        "stride_fraction": policy.stride_fraction,
        "min_cells": policy.min_cells,
    }
    if partition is not None:
        desc["levels"] = partition.levels
        desc["smoothing_order"] = partition.profile.smoothing_order
    desc.update(extra)
    return desc


def _report(check, lhs, ingredients, rhs, fld, policy_desc, field_desc=None):
    degenerate = not rhs > 0.0
    implied = 0.0 if degenerate else float(lhs) / float(rhs)
    return InequalityReport(
        check=check,
        lhs=float(lhs),
        ingredients=ingredients,
        implied_constant=implied,
        degenerate=degenerate,
        field_desc=dict(field_desc or {}),
        grid_desc=_grid_desc(fld.grid),
        policy_desc=policy_desc,
    )


# ---------------------------------------------------------------------------
# field families


def constant_field(grid, value=1.0):
    return SampledField(grid=grid, values=np.full(grid.shape, float(value)))


def _snap_to_node(grid, point):
    snapped = []
    for ax, c in enumerate(point):
        h = grid.spacing[ax]
        o = grid.origin[ax]
        idx = int(np.clip(round((c - o) / h - 0.5), 0, grid.shape[ax] - 1))
        snapped.append(o + (idx + 0.5) * h)
    return tuple(snapped)


def log_spike_field(grid, amplitude, center=None, smoothing_order=4):
    """Clipped logarithmic spike: min(M, log 1/dist(z - center)), floored at 0.

    The center is snapped to the nearest node so the sup norm equals the
    amplitude exactly. The support is the unit ball of the smooth
    quasi-distance; on a periodic grid it must fit inside the box with a
    small margin, since the spike is meant as a compactly supported probe.
    """
    if amplitude <= 0:
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    if center is None:
        center = tuple(
            o + 0.5 * L for o, L in zip(grid.origin, grid.lengths)
        )
    center = _snap_to_node(grid, center)
    if grid.periodic:
        for ax in range(grid.ndim):
            ext = 1.0 if ax < grid.n else 1.0
            lo = grid.origin[ax]
            hi = lo + grid.lengths[ax]
            margin = 2.0 * grid.spacing[ax]
            if center[ax] - ext < lo + margin or center[ax] + ext > hi - margin:
                raise ValueError(
                    f"spike support leaves the periodic box on axis {ax}; "
                    "enlarge the box or move the center"
                )
    coords = grid.coords()
    rel = [coords[ax] - center[ax] for ax in range(grid.ndim)]
    dist = quasi_distance(rel, k=smoothing_order)
    vals = np.clip(np.log(1.0 / np.maximum(dist, 1e-300)), 0.0, amplitude)
    return SampledField(grid=grid, values=vals)


def _interior_plateau(grid, plateau=0.5, support=0.9):
    """Smooth bump equal to 1 on the middle `plateau` fraction of the box
    and 0 outside the middle `support` fraction, per axis."""
    vals = np.ones(grid.shape)
    coords = grid.coords()
    for ax in range(grid.ndim):
        L = grid.lengths[ax]
        mid = grid.origin[ax] + 0.5 * L
        inner = 0.5 * plateau * L
        outer = 0.5 * support * L
        r = np.abs(coords[ax] - mid)
        vals = vals * smooth_step((outer - r) / (outer - inner))
    return vals


def random_band_field(grid, seed, decay=1.0, localized=True, partition=None):
    """Seeded random field shaped by the dyadic bands.

    White noise is filtered band by band with weights 2^(-decay j) for
    j >= 1 (the flat band 0 is dropped so constants do not dominate),
    then optionally multiplied by an interior plateau bump for compact
    support. Deterministic in (seed, grid, decay). On a bounded grid the
    band filtering runs on the periodicized copy of the box — the torus
    is only the construction device, the samples are what matter.
    """
    torus = grid if grid.periodic else replace(grid, periodic=True)
    rng = np.random.default_rng(seed)
    noise = SampledField(grid=torus, values=rng.standard_normal(grid.shape))
    if partition is None:
        partition = lp.build_partition(torus)
    stack = lp.decompose(noise, partition)
    vals = np.zeros(grid.shape)
    for j in range(1, partition.levels + 1):
        vals += 2.0 ** (-decay * j) * stack.bands[j].values
    if localized:
        vals = vals * _interior_plateau(grid)
    return SampledField(grid=grid, values=vals)


def packet_field(grid, seed, cycles=4.0, localized=True):
    """Oscillatory packet: a plane wave under a smooth interior envelope.

    The wave vector is drawn (seeded) near `cycles` oscillations across
    the box in space and time, phases uniform.
    """
    rng = np.random.default_rng(seed)
    coords = grid.coords()
    phase = rng.uniform(0.0, 2.0 * np.pi)
    arg = np.zeros(grid.shape) + phase
    for ax in range(grid.ndim):
        k_ax = rng.integers(max(1, int(cycles) - 1), int(cycles) + 2)
        arg = arg + (2.0 * np.pi * k_ax / grid.lengths[ax]) * coords[ax]
    vals = np.cos(arg)
    if localized:
        vals = vals * _interior_plateau(grid)
    return SampledField(grid=grid, values=vals)


_GENERATORS = {
    "const": constant_field,
    "logspike": log_spike_field,
    "random": random_band_field,
    "packet": packet_field,
}


def generate_field(name, grid, **params):
    """Dispatch to a named family generator; returns the sampled field."""
    if name not in _GENERATORS:
        raise ValueError(
            f"unknown field family {name!r}; choose from {sorted(_GENERATORS)}"
        )
    return _GENERATORS[name](grid, **params)


@dataclass(frozen=True)
class FieldFamily:
    """A named generator with a deterministic parameter grid."""

    name: str
    parameters: tuple

    def __post_init__(self):
        if self.name not in _GENERATORS:
            raise ValueError(f"unknown field family {self.name!r}")

    def realize(self, grid):
        for params in self.parameters:
            desc = {"family": self.name, **params}
            yield desc, generate_field(self.name, grid, **params)


def sweep_family(name, **sweeps):
    """Build a family from per-parameter value lists (cartesian product,
    deterministic order)."""
    keys = sorted(sweeps)
    rows = []
    for combo in itertools.product(*(np.atleast_1d(sweeps[k]) for k in keys)):
        rows.append(
            {k: (v.item() if hasattr(v, "item") else v) for k, v in zip(keys, combo)}
        )
    return FieldFamily(name=name, parameters=tuple(rows))


# ---------------------------------------------------------------------------
# checks


def verify_theorem1(fld, m, policy=None, partition=None, field_desc=None):
    """Whole-space bound: sup |u| against 1 + BMO (1 + log+ Sobolev).

    The field must be the localized kind (compactly supported inside its
    periodic box); the box stands in for the whole space.
    """
    if not fld.grid.periodic:
        raise ValueError("whole-space check needs a periodic (localized) field")
    norms.sobolev_embedding_check(fld, m)
    policy = policy or cubes.CubeSearchPolicy()
    lhs = norms.lp_norm(fld, np.inf)
    bmo = cubes.bmo_norm(fld, policy=policy)
    sob = norms.parabolic_sobolev_norm(fld, m)
    log_factor = 1.0 + norms.log_plus(sob)
    rhs = 1.0 + bmo * log_factor
    ingredients = {
        "bmo": bmo,
        "sobolev": sob,
        "log_factor": log_factor,
        "m": m,
    }
    return _report(
        "theorem1", lhs, ingredients, rhs, fld, _policy_desc(policy), field_desc
    )


def verify_theorem2(
    fld, m, policy=None, box_factor=4.0, field_desc=None
):
    """Bounded-domain bound via the extension pipeline.

    The domain norms (sup, overline BMO, Sobolev-by-extension) feed the
    inequality; the intermediate localized field's norms are reported as
    ratios against the domain norms — the empirical content of the
    extension estimates — together with the cube-radius ladder.
    """
    if fld.grid.periodic:
        raise ValueError("bounded-domain check needs a box field")
    norms.sobolev_embedding_check(fld, m)
    policy = policy or cubes.CubeSearchPolicy()
    g = fld.grid
    domain_box = tuple((o, o + L) for o, L in zip(g.origin, g.lengths))
    emb = localized_embedding(fld, m, box_factor=box_factor)

    lhs = norms.lp_norm(fld, np.inf)
    bmo_inf = cubes.bmo_norm(fld, policy=policy, form="inf")
    l1 = norms.lp_norm(fld, 1)
    overline = bmo_inf + l1
    sob = norms.parabolic_sobolev_norm(emb.field, m, domain=emb.inner_box)
    log_factor = 1.0 + norms.log_plus(sob)
    rhs = 1.0 + overline * log_factor

    w_big = norms.parabolic_sobolev_norm(emb.field, m)
    bmo_big = cubes.bmo_norm(emb.field, policy=policy)
    ingredients = {
        "overline_bmo": overline,
        "bmo_inf": bmo_inf,
        "l1": l1,
        "sobolev": sob,
        "log_factor": log_factor,
        "m": m,
        "ext_sobolev_big": w_big,
        "ext_sobolev_ratio": w_big / sob if sob > 0 else 0.0,
        "ext_bmo_big": bmo_big,
        "ext_bmo_ratio": bmo_big / overline if overline > 0 else 0.0,
        **radius_ladder(domain_box),
    }
    return _report(
        "theorem2",
        lhs,
        ingredients,
        rhs,
        fld,
        _policy_desc(policy, box_factor=box_factor),
        field_desc,
    )


def basic_log_sobolev_check(fld, m, partition=None, field_desc=None):
    """Truncated-scale bound: the l1-over-bands sup norm against the
    l2-over-bands one with a sqrt log+ Sobolev factor."""
    norms.sobolev_embedding_check(fld, m)
    if partition is None:
        partition = lp.build_partition(fld.grid)
    lhs = lp.lizorkin_triebel_norm(fld, 0.0, np.inf, 1.0, partition, truncated=True)
    f2 = lp.lizorkin_triebel_norm(fld, 0.0, np.inf, 2.0, partition, truncated=True)
    sob = norms.parabolic_sobolev_norm(fld, m)
    log_factor = 1.0 + math.sqrt(norms.log_plus(sob))
    rhs = 1.0 + f2 * log_factor
    ingredients = {
        "lt_inf_1": lhs,
        "lt_inf_2": f2,
        "sobolev": sob,
        "log_factor": log_factor,
        "m": m,
    }
    policy_desc = {"levels": partition.levels}
    return _report("basic", lhs, ingredients, rhs, fld, policy_desc, field_desc)


def interpolation_check(fld, policy=None, partition=None, field_desc=None):
    """Interpolation bound: the l2-band norm against the geometric mean of
    BMO and the l1-band norm. Degenerate (flagged) when the rhs vanishes."""
    policy = policy or cubes.CubeSearchPolicy()
    if partition is None:
        partition = lp.build_partition(fld.grid)
    lhs = lp.lizorkin_triebel_norm(fld, 0.0, np.inf, 2.0, partition, truncated=True)
    f1 = lp.lizorkin_triebel_norm(fld, 0.0, np.inf, 1.0, partition, truncated=True)
    bmo = cubes.bmo_norm(fld, policy=policy)
    rhs = math.sqrt(bmo * f1)
    ingredients = {"lt_inf_2": lhs, "lt_inf_1": f1, "bmo": bmo}
    return _report(
        "interp",
        lhs,
        ingredients,
        rhs,
        fld,
        _policy_desc(policy, partition),
        field_desc,
    )


def band_sup_check(fld, policy=None, partition=None, field_desc=None):
    """Band sup bound: every band j >= 1 has sup norm controlled by BMO
    with a j-uniform constant; reports the per-band ratios and their max."""
    policy = policy or cubes.CubeSearchPolicy()
    if partition is None:
        partition = lp.build_partition(fld.grid)
    stack = lp.decompose(fld, partition)
    sups = tuple(
        float(np.max(np.abs(stack.bands[j].values)))
        for j in range(1, partition.levels + 1)
    )
    bmo = cubes.bmo_norm(fld, policy=policy)
    scale = float(np.max(np.abs(fld.values))) if fld.values.size else 0.0
    if bmo <= 0.0 and max(sups, default=0.0) > 1e-12 * max(scale, 1.0):
        raise ValueError(
            "zero BMO with nonzero bands: the BMO search family is too "
            "coarse for this field"
        )
    ratios = tuple(s / bmo if bmo > 0 else 0.0 for s in sups)
    lhs = max(sups, default=0.0)
    ingredients = {"bmo": bmo, "band_sups": sups, "ratios": ratios}
    return _report(
        "bandsup",
        lhs,
        ingredients,
        bmo,
        fld,
        _policy_desc(policy, partition),
        field_desc,
    )


def low_band_check(fld, m, policy=None, partition=None, field_desc=None):
    """Low-band bound: sup of band 0 against the whole-space rhs shape."""
    norms.sobolev_embedding_check(fld, m)
    policy = policy or cubes.CubeSearchPolicy()
    if partition is None:
        partition = lp.build_partition(fld.grid)
    band0 = lp.band_filter(fld, partition, 0)
    lhs = float(np.max(np.abs(band0.values)))
    bmo = cubes.bmo_norm(fld, policy=policy)
    sob = norms.parabolic_sobolev_norm(fld, m)
    log_factor = 1.0 + norms.log_plus(sob)
    rhs = 1.0 + bmo * log_factor
    ingredients = {
        "band0_sup": lhs,
        "bmo": bmo,
        "sobolev": sob,
        "log_factor": log_factor,
        "m": m,
    }
    return _report(
        "lowband",
        lhs,
        ingredients,
        rhs,
        fld,
        _policy_desc(policy, partition),
        field_desc,
    )


def run_check(check, fld, m=1, policy=None, box_factor=4.0, field_desc=None):
    """Dispatch one named check on one field."""
    if check == "theorem1":
        return verify_theorem1(fld, m, policy=policy, field_desc=field_desc)
    if check == "theorem2":
        return verify_theorem2(
            fld, m, policy=policy, box_factor=box_factor, field_desc=field_desc
        )
    if check == "basic":
        return basic_log_sobolev_check(fld, m, field_desc=field_desc)
    if check == "interp":
        return interpolation_check(fld, policy=policy, field_desc=field_desc)
    if check == "bandsup":
        return band_sup_check(fld, policy=policy, field_desc=field_desc)
    if check == "lowband":
        return low_band_check(fld, m, policy=policy, field_desc=field_desc)
    raise ValueError(f"unknown check {check!r}; choose from {CHECKS}")


def constant_sweep(family, checks, grid, m=1, policy=None, box_factor=4.0):
    """Run checks over a field family; tabulate implied constants.

    Returns one row per check with min/median/max of the implied constant
    over non-degenerate reports, the degenerate count, and the reports
    themselves.
    """
    rows = []
    for check in checks:
        if check not in CHECKS:
            raise ValueError(f"unknown check {check!r}; choose from {CHECKS}")
        reports = []
        for desc, fld in family.realize(grid):
            reports.append(
                run_check(
                    check,
                    fld,
                    m=m,
                    policy=policy,
                    box_factor=box_factor,
                    field_desc=desc,
                )
            )
        values = [r.implied_constant for r in reports if not r.degenerate]
        rows.append(
            {
                "check": check,
                "family": family.name,
                "count": len(reports),
                "degenerate": sum(r.degenerate for r in reports),
                "min": float(np.min(values)) if values else 0.0,
                "median": float(np.median(values)) if values else 0.0,
                "max": float(np.max(values)) if values else 0.0,
                "reports": tuple(reports),
            }
        )
    return rows


def scaling_ratio_bound(report, scaled_report):
    """The wiring identity for scaling u -> lam u in the whole-space check.

    Both the sup and BMO norms are 1-homogeneous, so only the log factor
    resists the scaling; once the BMO ingredient is of order one the
    implied-constant ratio is controlled by the log factors alone:
    implied(lam u)/implied(u) <= log_factor(lam u)/log_factor(u).
    Returns (measured_ratio, bound) from the reports' own ingredients.
    """
    if report.degenerate or scaled_report.degenerate:
        raise ValueError("scaling comparison needs non-degenerate reports")
    measured = scaled_report.implied_constant / report.implied_constant
    bound = (
        scaled_report.ingredients["log_factor"]
        / report.ingredients["log_factor"]
    )
    return measured, bound
