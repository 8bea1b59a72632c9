"""Cube-scan backends: compiled core versus the numpy fallback."""

import numpy as np
import pytest

import parakit._kernels as kernels
from parakit import config
from parakit._kernels import HAVE_COMPILED, backend_name, fallback, scan_level


def make_case(rng, shape, win):
    values = rng.standard_normal(shape)
    starts = [
        np.arange(0, n - w + 1, max(1, w // 2), dtype=np.int64)
        for n, w in zip(shape, win)
    ]
    weights = [rng.uniform(0.2, 1.0, size=(len(s), w)) for s, w in zip(starts, win)]
    return values, starts, weights


def brute_force(values, starts, weights, mode):
    counts = [len(s) for s in starts]
    best, best_idx = -1.0, -1
    for flat in range(int(np.prod(counts))):
        idx = np.unravel_index(flat, counts)
        sl = tuple(
            slice(s[i], s[i] + w.shape[1]) for s, w, i in zip(starts, weights, idx)
        )
        v = values[sl].ravel()
        w = weights[0][idx[0]]
        for ax in range(1, len(starts)):
            w = np.multiply.outer(w, weights[ax][idx[ax]])
        w = w.ravel()
        if mode == 0:
            mean = np.sum(w * v) / np.sum(w)
            val = np.sum(w * np.abs(v - mean)) / np.sum(w)
        else:
            order = np.argsort(v, kind="stable")
            cum = np.cumsum(w[order])
            med = v[order][np.searchsorted(cum, 0.5 * cum[-1])]
            val = np.sum(w * np.abs(v - med)) / np.sum(w)
        if val > best:
            best, best_idx = val, flat
    return best, best_idx


@pytest.mark.parametrize("mode", [0, 1])
@pytest.mark.parametrize("shape,win", [((12, 10), (4, 3)), ((8, 7, 6), (3, 3, 2))])
def test_fallback_matches_brute_force(mode, shape, win):
    rng = np.random.default_rng(3 * len(shape) + mode)
    values, starts, weights = make_case(rng, shape, win)
    got = scan_level(values, starts, weights, mode, impl="numpy")
    want = brute_force(values, starts, weights, mode)
    assert got[1] == want[1]
    assert got[0] == pytest.approx(want[0], rel=1e-12)


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled core not built")
@pytest.mark.parametrize("mode", [0, 1])
@pytest.mark.parametrize("shape,win", [((20, 16), (5, 4)), ((10, 9, 8), (4, 3, 3))])
def test_backends_agree(mode, shape, win):
    rng = np.random.default_rng(7 * len(shape) + mode)
    values, starts, weights = make_case(rng, shape, win)
    a = scan_level(values, starts, weights, mode, impl="compiled")
    b = scan_level(values, starts, weights, mode, impl="numpy")
    assert a[1] == b[1]
    assert a[0] == pytest.approx(b[0], rel=1e-12, abs=1e-15)


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled core not built")
def test_default_path_uses_compiled():
    rng = np.random.default_rng(11)
    values, starts, weights = make_case(rng, (12, 10), (4, 3))
    assert backend_name() == "compiled"
    default = scan_level(values, starts, weights, 0)
    forced = scan_level(values, starts, weights, 0, impl="compiled")
    assert default == forced


def test_impl_numpy_routes_to_fallback():
    rng = np.random.default_rng(13)
    values, starts, weights = make_case(rng, (12, 10), (4, 3))
    got = scan_level(values, starts, weights, 1, impl="numpy")
    want = fallback.scan_level(values, starts, weights, 1)
    assert got == want


def test_requesting_missing_compiled_core_raises(monkeypatch):
    monkeypatch.setattr(kernels, "_compiled", None)
    rng = np.random.default_rng(17)
    values, starts, weights = make_case(rng, (8, 8), (3, 3))
    with pytest.raises(RuntimeError):
        scan_level(values, starts, weights, 0, impl="compiled")
    # the default path silently falls back
    got = kernels.scan_level(values, starts, weights, 0)
    assert got == fallback.scan_level(values, starts, weights, 0)


def test_backend_name_tracks_availability():
    assert backend_name() == ("compiled" if HAVE_COMPILED else "numpy")


def test_zero_weight_windows_scan_to_zero():
    values = np.ones((8, 8))
    starts = [np.array([0, 4], dtype=np.int64)] * 2
    weights = [np.zeros((2, 3))] * 2
    val, idx = scan_level(values, starts, weights, 0, impl="numpy")
    assert val == 0.0
    assert 0 <= idx < 4


# ------------------------------------------------------------- env knobs


def test_thread_count_parsing(monkeypatch):
    monkeypatch.delenv("PARAKIT_THREADS", raising=False)
    assert config.thread_count() == 1
    monkeypatch.setenv("PARAKIT_THREADS", "4")
    assert config.thread_count() == 4
    monkeypatch.setenv("PARAKIT_THREADS", "0")
    assert config.thread_count() == 1
    monkeypatch.setenv("PARAKIT_THREADS", "lots")
    assert config.thread_count() == 1


def test_force_fallback_parsing(monkeypatch):
    monkeypatch.delenv("PARAKIT_FORCE_FALLBACK", raising=False)
    assert not config.force_fallback()
    for token in ("1", "true", "YES"):
        monkeypatch.setenv("PARAKIT_FORCE_FALLBACK", token)
        assert config.force_fallback()
    monkeypatch.setenv("PARAKIT_FORCE_FALLBACK", "0")
    assert not config.force_fallback()
