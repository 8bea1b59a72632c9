"""Dyadic frequency decomposition, band norms, and kernel laws."""

import numpy as np
import pytest

from parakit.grid import SampledField, make_grid, physical_energy
from parakit.littlewood_paley import (
    BumpProfile,
    band_filter,
    besov_norm,
    build_partition,
    decompose,
    frequency_distance,
    kernel_decay_check,
    kernel_scaling_check,
    lizorkin_triebel_norm,
    partition_sum,
    reconstruct,
)
from parakit.norms import lp_norm

from util import trig_field


def noise_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    return SampledField(grid=grid, values=rng.standard_normal(grid.shape))


# ----------------------------------------------------------------- partition


def test_bump_profile_plateaus_and_validation():
    prof = BumpProfile(4)
    vals = prof(np.array([0.0, 0.5, 1.0, 2.0, 7.0]))
    assert np.all(vals[:3] == 1.0)
    assert np.all(vals[3:] == 0.0)
    assert 0.0 < prof(np.array([1.5]))[0] < 1.0
    with pytest.raises(ValueError):
        BumpProfile(3)
    with pytest.raises(ValueError):
        BumpProfile(0)


@pytest.mark.parametrize("shape,box", [((64, 64), 2 * np.pi), ((32, 64), 4.0)])
def test_partition_sums_to_one(shape, box):
    g = make_grid(1, shape, box, box)
    part = build_partition(g)
    assert np.max(np.abs(partition_sum(part) - 1.0)) <= 1e-12


def test_partition_covers_lattice_with_default_levels(torus64):
    part = build_partition(torus64)
    # the top band's profile argument is <= 1 on the whole lattice, so the
    # telescoping sum closes exactly
    assert 2.0**part.levels >= np.max(frequency_distance(torus64))


def test_partition_rejects_non_periodic_grid(box32):
    with pytest.raises(ValueError):
        build_partition(box32)


def test_partition_rejects_too_few_levels(torus64):
    with pytest.raises(ValueError):
        build_partition(torus64, levels=1)
    # a coarse box has all lattice frequencies inside the first band
    tiny = make_grid(1, (4, 4), 100.0, 100.0)
    with pytest.raises(ValueError):
        build_partition(tiny)


def test_band_multipliers_supported_in_annuli(torus64):
    part = build_partition(torus64)
    rho = frequency_distance(torus64)
    for j in range(1, part.levels + 1):
        psi = part.multipliers[j]
        outside = (rho <= 2.0 ** (j - 1)) | (rho >= 2.0 ** (j + 1))
        assert np.all(psi[outside] == 0.0)


# ------------------------------------------------------------- decomposition


def test_reconstruction_identity(torus64):
    fld = noise_field(torus64, seed=1)
    stack = decompose(fld)
    back = reconstruct(stack)
    scale = np.max(np.abs(fld.values))
    assert np.max(np.abs(back.values - fld.values)) <= 1e-10 * scale


def test_bands_sum_pointwise(torus64):
    fld = noise_field(torus64, seed=2)
    stack = decompose(fld)
    total = sum(band.values for band in stack.bands)
    assert np.allclose(total, fld.values, atol=1e-10)


def test_band_energies_match_band_fields(torus64):
    fld = noise_field(torus64, seed=3)
    stack = decompose(fld)
    for band, energy in zip(stack.bands, stack.band_energies):
        assert energy == pytest.approx(physical_energy(band), rel=1e-12)


def test_band_filter_validates_index(torus64):
    fld = noise_field(torus64, seed=4)
    part = build_partition(torus64)
    with pytest.raises(ValueError):
        band_filter(fld, part, -1)
    with pytest.raises(ValueError):
        band_filter(fld, part, part.levels + 1)


def test_constant_field_lives_in_band_zero(torus64):
    fld = SampledField(grid=torus64, values=np.full(torus64.shape, 3.0))
    stack = decompose(fld)
    assert np.allclose(stack.bands[0].values, 3.0, atol=1e-12)
    for band in stack.bands[1:]:
        assert np.max(np.abs(band.values)) <= 1e-12


# ---------------------------------------------------------------- band norms


def test_besov_norm_of_constant_matches_lp(torus64):
    fld = SampledField(grid=torus64, values=np.full(torus64.shape, 2.0))
    # all content in band 0, so any (s, q) grading reduces to the Lp norm
    assert besov_norm(fld, s=1.0, p=2.0, q=1.0) == pytest.approx(
        lp_norm(fld, 2.0), rel=1e-10
    )


def test_lizorkin_triebel_truncation_drops_band_zero(torus64):
    fld = SampledField(grid=torus64, values=np.full(torus64.shape, 2.0))
    assert lizorkin_triebel_norm(fld, s=0.5, p=2.0, q=2.0, truncated=True) <= 1e-10
    assert lizorkin_triebel_norm(fld, s=0.5, p=2.0, q=2.0) > 1.0


def test_lizorkin_triebel_ell_q_monotonicity(torus64):
    fld = noise_field(torus64, seed=5)
    n1 = lizorkin_triebel_norm(fld, s=0.3, p=2.0, q=1.0)
    n2 = lizorkin_triebel_norm(fld, s=0.3, p=2.0, q=2.0)
    assert n1 >= n2 > 0.0


def test_band_norms_validate_exponents(torus64):
    fld = noise_field(torus64, seed=6)
    with pytest.raises(ValueError):
        besov_norm(fld, s=0.0, p=2.0, q=0.5)
    with pytest.raises(ValueError):
        lizorkin_triebel_norm(fld, s=0.0, p=0.5, q=2.0)


def test_besov_norm_supports_sup_grading(torus64):
    fld = noise_field(torus64, seed=7)
    ninf = besov_norm(fld, s=0.0, p=2.0, q=np.inf)
    n1 = besov_norm(fld, s=0.0, p=2.0, q=1.0)
    assert 0.0 < ninf <= n1


# ------------------------------------------------------------------- kernels


def test_kernel_decay_check_bounded(torus64):
    part = build_partition(torus64)
    rep = kernel_decay_check(part, decay_order=4, j=1)
    assert rep["decay_order"] == 4
    assert np.isfinite(rep["max"]) and rep["max"] > 0.0
    assert rep["max"] == pytest.approx(max(rep["shell_sup"].values()))


def test_kernel_decay_check_caps_order(torus64):
    part = build_partition(torus64)
    with pytest.raises(ValueError):
        kernel_decay_check(part, decay_order=7, j=1)
    with pytest.raises(ValueError):
        kernel_decay_check(part, decay_order=0, j=1)


def test_kernel_scaling_law(torus64):
    part = build_partition(torus64)
    # band j is the anisotropic dilation of band 1, exactly on nested
    # dyadic lattices
    for j in (2, 3):
        assert kernel_scaling_check(part, j) <= 1e-9


def test_kernel_scaling_rejects_band_zero(torus64):
    part = build_partition(torus64)
    with pytest.raises(ValueError):
        kernel_scaling_check(part, 0)


# -------------------------------------------------------------- refinement


def test_partition_consistent_under_refinement():
    coarse = make_grid(1, (32, 32), 2 * np.pi, 2 * np.pi)
    fine = make_grid(1, (64, 64), 2 * np.pi, 2 * np.pi)
    f_c = trig_field(coarse, seed=11)
    f_f = trig_field(fine, seed=11)
    b_c = besov_norm(f_c, s=0.5, p=2.0, q=2.0)
    b_f = besov_norm(f_f, s=0.5, p=2.0, q=2.0)
    # same analytic function, fully resolved on both lattices
    assert b_c == pytest.approx(b_f, rel=1e-6)
