"""Grid geometry, transforms, dilation, and field file I/O."""

import json

import numpy as np
import pytest

from parakit.grid import (
    AnisotropicGrid,
    SampledField,
    axis_interval_weights,
    box_weights,
    dilate_field,
    forward_transform,
    grid_max,
    hermitian_defect,
    inverse_transform,
    lattice_distance_max,
    make_grid,
    physical_energy,
    read_field,
    read_header,
    spectral_energy,
    write_field,
)


def random_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    return SampledField(grid=grid, values=rng.standard_normal(grid.shape))


# ---------------------------------------------------------------- validation


def test_grid_rejects_bad_dimension():
    with pytest.raises(ValueError):
        make_grid(3, (8, 8, 8, 8), 1.0, 1.0)


@pytest.mark.parametrize("shape", [(7, 8), (8, 2), (8,)])
def test_grid_rejects_bad_shapes(shape):
    with pytest.raises(ValueError):
        make_grid(1, shape, 1.0, 1.0)


def test_grid_rejects_nonpositive_lengths():
    with pytest.raises(ValueError):
        make_grid(1, (8, 8), -1.0, 1.0)
    with pytest.raises(ValueError):
        make_grid(1, (8, 8), 1.0, 0.0)


def test_grid_rejects_wrong_arity():
    with pytest.raises(ValueError):
        AnisotropicGrid(n=1, shape=(8, 8), box_len=(1.0, 1.0), time_len=1.0)
    with pytest.raises(ValueError):
        make_grid(1, (8, 8), 1.0, 1.0, origin=(0.0,))


def test_sampled_field_rejects_bad_values():
    g = make_grid(1, (8, 8), 1.0, 1.0)
    with pytest.raises(ValueError):
        SampledField(grid=g, values=np.zeros((8, 4)))
    bad = np.zeros((8, 8))
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        SampledField(grid=g, values=bad)


# ------------------------------------------------------------------ geometry


def test_nodes_sit_at_cell_centers():
    g = make_grid(1, (8, 4), 2.0, 1.0, origin=(0.0, 0.0))
    x = g.axis_coords(0)
    t = g.axis_coords(1)
    assert np.allclose(x, (np.arange(8) + 0.5) * 0.25)
    assert np.allclose(t, (np.arange(4) + 0.5) * 0.25)
    assert g.cell_volume == pytest.approx(0.25 * 0.25)


def test_centered_shifts_origin_to_symmetric_box():
    g = make_grid(1, (8, 8), 2.0, 4.0, periodic=False).centered()
    assert g.origin == (-1.0, -2.0)
    assert g.periodic is False


def test_make_grid_broadcasts_scalar_box_len():
    g = make_grid(2, (8, 8, 8), 3.0, 1.0)
    assert g.box_len == (3.0, 3.0)
    assert g.lengths == (3.0, 3.0, 1.0)


def test_lattice_distance_max_is_nyquist_scale():
    g = make_grid(1, (16, 16), 2.0 * np.pi, 2.0 * np.pi)
    # spatial frequencies run to N/2 * (2pi/L) = 8; time to sqrt(8)
    assert lattice_distance_max(g) == pytest.approx(8.0)


# ---------------------------------------------------------------- transforms


def test_transform_round_trip(torus64):
    fld = random_field(torus64, seed=1)
    back = inverse_transform(forward_transform(fld))
    assert np.max(np.abs(back.values - fld.values)) <= 1e-12


def test_parseval_energy_identity(torus64):
    fld = random_field(torus64, seed=2)
    spec = forward_transform(fld)
    assert spectral_energy(spec) == pytest.approx(physical_energy(fld), rel=1e-10)


def test_forward_transform_requires_periodic(box32):
    with pytest.raises(ValueError):
        forward_transform(random_field(box32))


def test_hermitian_defect_near_zero_for_real_fields(torus64):
    spec = forward_transform(random_field(torus64, seed=3))
    scale = np.max(np.abs(spec.coeffs))
    assert hermitian_defect(spec) <= 1e-13 * scale


def test_inverse_transform_rejects_asymmetric_spectrum(torus64):
    spec = forward_transform(random_field(torus64, seed=4))
    coeffs = spec.coeffs.copy()
    coeffs[3, 5] += 10.0j * np.max(np.abs(coeffs))
    broken = type(spec)(grid=spec.grid, coeffs=coeffs)
    with pytest.raises(ValueError):
        inverse_transform(broken)
    # tol=None skips the symmetry guard and returns the real part
    out = inverse_transform(broken, tol=None)
    assert np.all(np.isfinite(out.values))


def test_physical_energy_of_constant():
    g = make_grid(1, (8, 8), 2.0, 3.0)
    fld = SampledField(grid=g, values=np.full(g.shape, 2.0))
    assert physical_energy(fld) == pytest.approx(4.0 * 6.0)


def test_grid_max_is_sup_of_absolute_value():
    g = make_grid(1, (8, 8), 1.0, 1.0)
    vals = np.zeros(g.shape)
    vals[2, 3] = -7.0
    assert grid_max(SampledField(grid=g, values=vals)) == 7.0


# ------------------------------------------------------------------ dilation


def test_dilate_field_scales_grid_anisotropically():
    g = make_grid(1, (16, 16), 2.0, 4.0, origin=(0.0, 0.0))
    fld = random_field(g, seed=5)
    dil = dilate_field(fld, 2.0)
    assert dil.grid.box_len == (1.0,)
    assert dil.grid.time_len == 1.0
    assert np.array_equal(dil.values, fld.values)
    # cell volume shrinks by eta^(n+2), so the L2 energy does too
    assert physical_energy(dil) == pytest.approx(physical_energy(fld) / 8.0)


def test_dilate_field_rejects_nonpositive_eta():
    g = make_grid(1, (8, 8), 1.0, 1.0)
    with pytest.raises(ValueError):
        dilate_field(random_field(g), -1.0)


# ----------------------------------------------------------------- field I/O


def test_field_io_round_trip(tmp_path, box32):
    fld = random_field(box32, seed=6)
    path = tmp_path / "u.field"
    write_field(fld, path, manifest={"purpose": "round-trip"})
    back = read_field(path)
    assert np.array_equal(back.values, fld.values)
    assert back.grid == fld.grid
    head = read_header(path)
    assert head["manifest"] == {"purpose": "round-trip"}
    assert head["version"] == 1


def test_field_io_preserves_periodic_flag(tmp_path, torus64):
    path = tmp_path / "p.field"
    write_field(random_field(torus64, seed=7), path)
    assert read_field(path).grid.periodic is True


def test_read_field_rejects_truncation(tmp_path, box32):
    path = tmp_path / "t.field"
    write_field(random_field(box32, seed=8), path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-16])
    with pytest.raises(ValueError, match="truncated"):
        read_field(path)


def test_read_field_rejects_unknown_version(tmp_path, box32):
    path = tmp_path / "v.field"
    write_field(random_field(box32, seed=9), path)
    raw = path.read_bytes()
    split = raw.index(b"\n")
    head = json.loads(raw[:split])
    head["version"] = 99
    path.write_bytes(json.dumps(head).encode() + raw[split:])
    with pytest.raises(ValueError, match="version"):
        read_field(path)


def test_read_field_rejects_missing_header_key(tmp_path, box32):
    path = tmp_path / "k.field"
    write_field(random_field(box32, seed=10), path)
    raw = path.read_bytes()
    split = raw.index(b"\n")
    head = json.loads(raw[:split])
    del head["shape"]
    path.write_bytes(json.dumps(head).encode() + raw[split:])
    with pytest.raises(ValueError, match="shape"):
        read_field(path)


def test_write_field_leaves_no_temp_files(tmp_path, box32):
    path = tmp_path / "clean.field"
    write_field(random_field(box32, seed=11), path)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["clean.field"]


# -------------------------------------------------------- overlap quadrature


def test_axis_interval_weights_partial_cells():
    g = make_grid(1, (8, 8), 1.0, 1.0, origin=(0.0, 0.0), periodic=False)
    # cells have width 1/8; [0.25, 0.6875] covers three full cells and
    # half of the fourth
    first, w = axis_interval_weights(g, 0, 0.25, 0.6875)
    assert first == 2
    assert np.allclose(w, [0.125, 0.125, 0.125, 0.0625])
    assert w.sum() == pytest.approx(0.6875 - 0.25)


def test_axis_interval_weights_clip_to_box():
    g = make_grid(1, (8, 8), 1.0, 1.0, origin=(0.0, 0.0), periodic=False)
    first, w = axis_interval_weights(g, 0, -5.0, 5.0)
    assert first == 0
    assert w.sum() == pytest.approx(1.0)


def test_axis_interval_weights_rejects_empty_interval():
    g = make_grid(1, (8, 8), 1.0, 1.0, origin=(0.0, 0.0), periodic=False)
    with pytest.raises(ValueError):
        axis_interval_weights(g, 0, 0.5, 0.5)


def test_box_weights_measure_product_volume():
    g = make_grid(1, (8, 8), 1.0, 1.0, origin=(0.0, 0.0), periodic=False)
    pairs = box_weights(g, ((0.25, 0.75), (0.0, 0.5)))
    vol = np.prod([w.sum() for _, w in pairs])
    assert vol == pytest.approx(0.5 * 0.5)


def test_box_weights_rejects_wrong_arity():
    g = make_grid(1, (8, 8), 1.0, 1.0, origin=(0.0, 0.0), periodic=False)
    with pytest.raises(ValueError):
        box_weights(g, ((0.0, 1.0),))
