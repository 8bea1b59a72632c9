"""Vectorized numpy cube-scan kernels (fallback for the compiled core).

Same contract as the compiled module: scan one cube level (fixed radius)
given per-axis window starts and weight matrices, return the largest
per-cube functional and the row-major index of the maximizing position.
Work is chunked along the first position axis to bound peak memory.
"""

import numpy as np

_TARGET_CELLS = 2_000_000


def _window_view(values, starts, win_shape, chunk0):
    sw = np.lib.stride_tricks.sliding_window_view(values, win_shape)
    return sw[np.ix_(chunk0, *starts[1:])]


def _full_weights(weights, chunk_w0):
    mats = [chunk_w0] + list(weights[1:])
    d = len(mats)
    out = None
    for ax, w in enumerate(mats):
        shape = [1] * (2 * d)
        shape[ax] = w.shape[0]
        shape[d + ax] = w.shape[1]
        piece = w.reshape(shape)
        out = piece if out is None else out * piece
    return out


def _median_objective(v, w, wsum):
    order = np.argsort(v, axis=1, kind="stable")
    vs = np.take_along_axis(v, order, axis=1)
    ws = np.take_along_axis(w, order, axis=1)
    cum = np.cumsum(ws, axis=1)
    half = 0.5 * wsum
    pick = np.argmax(cum >= half[:, None], axis=1)
    med = vs[np.arange(len(pick)), pick]
    return np.sum(w * np.abs(v - med[:, None]), axis=1) / wsum


def scan_level(values, starts, weights, mode):
    """Scan all cubes of one level; returns (best_value, best_flat_index)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    win_shape = tuple(w.shape[1] for w in weights)
    counts = [len(s) for s in starts]
    cells = int(np.prod(win_shape))
    rest = int(np.prod(counts[1:])) if len(counts) > 1 else 1
    chunk = max(1, _TARGET_CELLS // max(1, cells * rest))
    best = -1.0
    best_idx = -1
    for c0 in range(0, counts[0], chunk):
        sel = slice(c0, min(c0 + chunk, counts[0]))
        v = _window_view(values, starts, win_shape, starts[0][sel])
        w = _full_weights(weights, weights[0][sel])
        w = np.broadcast_to(w, v.shape)
        p = int(np.prod(v.shape[: len(counts)]))
        v2 = v.reshape(p, cells)
        w2 = np.ascontiguousarray(w.reshape(p, cells))
        wsum = np.sum(w2, axis=1)
        good = wsum > 0.0
        if mode == 0:
            mean = np.einsum("ij,ij->i", v2, w2)
            mean[good] /= wsum[good]
            vals = np.einsum("ij,ij->i", np.abs(v2 - mean[:, None]), w2)
            vals[good] /= wsum[good]
            vals[~good] = 0.0
        else:
            vals = np.zeros(p)
            if np.any(good):
                vals[good] = _median_objective(v2[good], w2[good], wsum[good])
        local = int(np.argmax(vals))
        if vals[local] > best:
            best = float(vals[local])
            best_idx = c0 * rest + local
    return best, best_idx
