"""Lebesgue norms, spectral derivatives, and the anisotropic Sobolev norm."""

import warnings

import numpy as np
import pytest

from parakit.grid import SampledField, make_grid
from parakit.norms import (
    DerivativeBandwidthWarning,
    log_plus,
    lp_norm,
    parabolic_sobolev_norm,
    sobolev_embedding_check,
    sobolev_terms,
    spectral_derivative,
)


# ------------------------------------------------------------------ log_plus


def test_log_plus_values():
    assert log_plus(0.0) == 0.0
    assert log_plus(0.5) == 0.0
    assert log_plus(1.0) == 0.0
    assert log_plus(np.e) == pytest.approx(1.0)


def test_log_plus_rejects_negative():
    with pytest.raises(ValueError):
        log_plus(-1.0)


# ------------------------------------------------------------------ lp norms


def test_lp_norm_of_constant(torus64):
    fld = SampledField(grid=torus64, values=np.full(torus64.shape, 3.0))
    vol = (2.0 * np.pi) ** 2
    assert lp_norm(fld, 2.0) == pytest.approx(3.0 * np.sqrt(vol))
    assert lp_norm(fld, 1.0) == pytest.approx(3.0 * vol)
    assert lp_norm(fld, np.inf) == 3.0


def test_lp_norm_on_subdomain():
    g = make_grid(1, (32, 32), 1.0, 1.0, origin=(0.0, 0.0), periodic=False)
    fld = SampledField(grid=g, values=np.full(g.shape, 2.0))
    sub = ((0.25, 0.75), (0.0, 0.5))
    assert lp_norm(fld, 1.0, domain=sub) == pytest.approx(2.0 * 0.25)


def test_lp_norm_sup_respects_domain_mask():
    g = make_grid(1, (32, 32), 1.0, 1.0, origin=(0.0, 0.0), periodic=False)
    vals = np.ones(g.shape)
    vals[0, 0] = 100.0  # outside the probed window
    fld = SampledField(grid=g, values=vals)
    assert lp_norm(fld, np.inf, domain=((0.5, 1.0), (0.5, 1.0))) == 1.0


def test_lp_norm_rejects_bad_exponent(torus64):
    fld = SampledField(grid=torus64, values=np.ones(torus64.shape))
    with pytest.raises(ValueError):
        lp_norm(fld, 0.5)


# -------------------------------------------------------- spectral derivative


def test_spectral_derivative_matches_analytic(torus64):
    x, t = np.broadcast_arrays(*torus64.coords())
    fld = SampledField(grid=torus64, values=np.sin(3.0 * x) * np.cos(2.0 * t))
    dx = spectral_derivative(fld, 0, (1,))
    exact = 3.0 * np.cos(3.0 * x) * np.cos(2.0 * t)
    assert np.max(np.abs(dx.values - exact)) <= 1e-10

    dt = spectral_derivative(fld, 1, (0,))
    exact_t = -2.0 * np.sin(3.0 * x) * np.sin(2.0 * t)
    assert np.max(np.abs(dt.values - exact_t)) <= 1e-10

    dxx = spectral_derivative(fld, 0, (2,))
    assert np.max(np.abs(dxx.values + 9.0 * fld.values)) <= 1e-9


def test_spectral_derivative_kills_nyquist_on_odd_orders(torus64):
    x, _ = np.broadcast_arrays(*torus64.coords())
    # the pure Nyquist mode has no well-defined first derivative on the
    # lattice; the convention zeroes it
    fld = SampledField(grid=torus64, values=np.cos(32.0 * x).copy())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DerivativeBandwidthWarning)
        dx = spectral_derivative(fld, 0, (1,))
        assert np.max(np.abs(dx.values)) <= 1e-9
        dxx = spectral_derivative(fld, 0, (2,))
        assert np.max(np.abs(dxx.values + 32.0**2 * fld.values)) <= 1e-7


def test_spectral_derivative_requires_periodic(box32):
    fld = SampledField(grid=box32, values=np.ones(box32.shape))
    with pytest.raises(ValueError):
        spectral_derivative(fld, 0, (1,))


def test_spectral_derivative_validates_orders(torus64):
    fld = SampledField(grid=torus64, values=np.ones(torus64.shape))
    with pytest.raises(ValueError):
        spectral_derivative(fld, -1, (0,))
    with pytest.raises(ValueError):
        spectral_derivative(fld, 0, (0, 0))


def test_bandwidth_warning_fires_only_for_rough_fields(torus64):
    x, t = np.broadcast_arrays(*torus64.coords())
    smooth = SampledField(grid=torus64, values=np.sin(2.0 * x + t).copy())
    with warnings.catch_warnings():
        warnings.simplefilter("error", DerivativeBandwidthWarning)
        spectral_derivative(smooth, 0, (1,))
    rough = SampledField(grid=torus64, values=np.sin(30.0 * x).copy())
    with pytest.warns(DerivativeBandwidthWarning):
        spectral_derivative(rough, 0, (1,))


# ------------------------------------------------------------- sobolev terms


def test_sobolev_terms_enumerates_parabolic_orders():
    terms = sobolev_terms(1, 1)
    assert set(terms) == {(0, (0,)), (0, (1,)), (0, (2,)), (1, (0,))}
    terms2 = sobolev_terms(2, 1)
    assert len(terms2) == 9
    assert all(2 * r + sum(a) <= 4 for r, a in terms2)
    with pytest.raises(ValueError):
        sobolev_terms(0, 1)


# -------------------------------------------------------------- sobolev norm


def test_sobolev_norm_analytic_oracle(torus64):
    x, t = np.broadcast_arrays(*torus64.coords())
    fld = SampledField(grid=torus64, values=(np.sin(x) * np.sin(t)).copy())
    # each of u, u_x, u_xx, u_t has L2 norm pi on the 2pi-torus square
    assert parabolic_sobolev_norm(fld, 1) == pytest.approx(4.0 * np.pi, rel=1e-8)


def test_sobolev_norm_of_constant_on_box(box32):
    fld = SampledField(grid=box32, values=np.full(box32.shape, 2.0))
    # extension of a constant is the constant, so the norm is the plain L2
    # mass over the unit box plus a small spectral tail that the cutoff
    # annulus leaks into the restriction window
    norm = parabolic_sobolev_norm(fld, 1)
    assert 2.0 - 1e-9 <= norm <= 2.05


def test_sobolev_norm_bounded_tracks_periodic():
    from util import trig_field

    per = make_grid(1, (64, 64), 1.0, 1.0, origin=(0.0, 0.0))
    box = make_grid(1, (64, 64), 1.0, 1.0, origin=(0.0, 0.0), periodic=False)
    f_per = trig_field(per, seed=20)
    f_box = SampledField(grid=box, values=f_per.values.copy())
    n_per = parabolic_sobolev_norm(f_per, 1)
    n_box = parabolic_sobolev_norm(f_box, 1)
    # the localized route reproduces the field on the domain; the cutoff
    # tails only add mass
    assert n_box >= 0.5 * n_per
    assert n_box <= 10.0 * n_per


def test_sobolev_embedding_check_requires_admissible_orders(torus64):
    fld = SampledField(grid=torus64, values=np.ones(torus64.shape))
    rep = sobolev_embedding_check(fld, 1)
    assert rep["m"] == 1 and rep["n"] == 1
    assert rep["ratio"] == pytest.approx(rep["sup"] / rep["sobolev"])
    assert rep["ratio"] > 0.0
    g2 = make_grid(2, (16, 16, 16), 2.0 * np.pi, 2.0 * np.pi)
    fld2 = SampledField(grid=g2, values=np.ones(g2.shape))
    with pytest.raises(ValueError):
        sobolev_embedding_check(fld2, 1)
