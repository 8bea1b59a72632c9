"""Shared field builders for the test suite."""

import numpy as np

from parakit.grid import SampledField


def trig_field(grid, seed, kmax=3, decay=0.5):
    """Seeded trigonometric polynomial sampled on a 1+1d grid.

    The seed determines an analytic function independent of the lattice,
    so the same seed sampled on a refined grid gives the *same* function
    at higher resolution — the property refinement studies need.
    """
    rng = np.random.default_rng(seed)
    x, t = np.broadcast_arrays(*grid.coords())
    vals = np.zeros(grid.shape)
    for kx in range(kmax + 1):
        for kt in range(kmax + 1):
            if kx == 0 and kt == 0:
                continue
            amp = rng.standard_normal() * 2.0 ** (-decay * (kx + kt))
            phase = rng.uniform(0.0, 2.0 * np.pi)
            arg = (
                2.0 * np.pi * kx * (x - grid.origin[0]) / grid.lengths[0]
                + 2.0 * np.pi * kt * (t - grid.origin[1]) / grid.lengths[1]
                + phase
            )
            vals = vals + amp * np.cos(arg)
    return SampledField(grid=grid, values=vals)


def wavy_field(grid, kx=5.3, kt=3.0):
    """Non-periodic analytic probe field with both axes active."""
    x, t = np.broadcast_arrays(*grid.coords())
    vals = np.sin(kx * x + 0.4) * np.exp(np.cos(kt * t - 0.2))
    return SampledField(grid=grid, values=vals.copy())


def worst_mismatch(report, by=("axis",)):
    """Fold a seam report into worst relative mismatch per key tuple."""
    out = {}
    for row in report:
        key = tuple(row[k] for k in by)
        if len(by) == 1:
            key = key[0]
        out[key] = max(out.get(key, 0.0), row["mismatch"])
    return out


def seam_rates(values):
    """Dyadic convergence rates log2(e_N / e_2N) along a refinement run."""
    return [
        np.log2(values[i] / values[i + 1]) if values[i + 1] > 0 else np.inf
        for i in range(len(values) - 1)
    ]
