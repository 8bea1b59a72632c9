"""Lebesgue and parabolic Sobolev norms of sampled fields.

The parabolic Sobolev norm of order (2m, m) sums the L2 norms of
D_t^r D_x^alpha u over every pair with 2r + |alpha| <= 2m, matching the
anisotropic scaling in which one time derivative weighs as much as two
spatial ones. Derivatives are spectral; on non-periodic grids the field is
first extended to a periodic box (module `extension`) and the L2 norms are
restricted to the original domain.
"""

import itertools
import warnings

import numpy as np

from .grid import box_weights, forward_transform, inverse_transform

__all__ = [
    "DerivativeBandwidthWarning",
    "lp_norm",
    "log_plus",
    "parabolic_sobolev_norm",
    "sobolev_embedding_check",
    "sobolev_terms",
    "spectral_derivative",
]


class DerivativeBandwidthWarning(UserWarning):
    """A spectral derivative concentrated near the resolution limit."""


def log_plus(x):
    """max(log x, 0), with log_plus(0) = 0."""
    x = float(x)
    if x < 0:
        raise ValueError(f"log_plus needs a nonnegative argument, got {x}")
    return max(np.log(x), 0.0) if x > 0 else 0.0


def _restricted(values, pairs):
    sl = tuple(slice(k0, k0 + len(w)) for k0, w in pairs)
    return values[sl]


def lp_norm(fld, p, domain=None):
    """L^p norm by Riemann cell sum, optionally over a sub-box.

    `domain` is a list of (lo, hi) per axis (time last); cells straddling
    the boundary contribute their overlap fraction. p may be inf.
    """
    if not (p == np.inf or p >= 1):
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    vals = fld.values
    if domain is None:
        if p == np.inf:
            return float(np.max(np.abs(vals)))
        acc = float(np.sum(np.abs(vals) ** p)) * fld.grid.cell_volume
        return acc ** (1.0 / p)
    pairs = box_weights(fld.grid, domain)
    block = np.abs(_restricted(vals, pairs))
    if p == np.inf:
        mask = np.ones(block.shape, dtype=bool)
        for ax, (_, w) in enumerate(pairs):
            shape = [1] * block.ndim
            shape[ax] = len(w)
            mask &= (w > 0.0).reshape(shape)
        return float(np.max(block[mask])) if np.any(mask) else 0.0
    acc = block**p
    for _, w in pairs:
        acc = np.tensordot(w, acc, axes=(0, 0))
    return float(acc) ** (1.0 / p)


def _nyquist_slices(shape, axis):
    sl = [slice(None)] * len(shape)
    sl[axis] = shape[axis] // 2
    return tuple(sl)


def spectral_derivative(fld, t_order, x_orders):
    """D_t^r D_x^alpha u by Fourier multiplier on a periodic grid.

    Nyquist modes of axes with odd derivative order are zeroed (their sign
    is not representable on the lattice). Emits DerivativeBandwidthWarning
    when most of the derivative's energy sits in the top third of the
    resolved frequencies, where the lattice no longer resolves the field.
    """
    grid = fld.grid
    if not grid.periodic:
        raise ValueError(
            "spectral_derivative needs a periodic grid; extend the field first"
        )
    x_orders = tuple(int(s) for s in np.atleast_1d(x_orders))
    if len(x_orders) != grid.n:
        raise ValueError(f"x_orders must have {grid.n} entries, got {x_orders}")
    if t_order < 0 or any(s < 0 for s in x_orders):
        raise ValueError("derivative orders must be nonnegative")
    orders = x_orders + (int(t_order),)
    spec = forward_transform(fld)
    coeffs = spec.coeffs.copy()
    freqs = grid.freqs()
    for ax, order in enumerate(orders):
        if order == 0:
            continue
        coeffs *= (1j * freqs[ax]) ** order
        if order % 2 == 1:
            coeffs[_nyquist_slices(grid.shape, ax)] = 0.0
    _warn_if_bandlimited(coeffs, freqs, orders)
    return inverse_transform(type(spec)(grid=grid, coeffs=coeffs))


def _warn_if_bandlimited(coeffs, freqs, orders):
    total = float(np.sum(np.abs(coeffs) ** 2))
    if total == 0.0:
        return
    top = np.zeros(coeffs.shape, dtype=bool)
    for ax, order in enumerate(orders):
        if order == 0:
            continue
        f = np.abs(freqs[ax])
        top |= f >= (2.0 / 3.0) * np.max(f)
    frac = float(np.sum(np.abs(coeffs[top]) ** 2)) / total
    if frac > 0.5:
        warnings.warn(
            f"spectral derivative {orders} has {frac:.0%} of its energy in "
            "the top third of the resolved band; refine the grid",
            DerivativeBandwidthWarning,
            stacklevel=3,
        )


def sobolev_terms(m, n):
    """All (t_order, x_orders) with 2 r + |alpha| <= 2m, n spatial axes."""
    if m < 1 or int(m) != m:
        raise ValueError(f"m must be a positive integer, got {m}")
    terms = []
    for j in range(2 * m + 1):
        for r in range(j // 2 + 1):
            s = j - 2 * r
            for alpha in itertools.product(range(s + 1), repeat=n):
                if sum(alpha) == s:
                    terms.append((r, alpha))
    return terms


def parabolic_sobolev_norm(fld, m, domain=None):
    """Anisotropic Sobolev norm of order (2m, m).

    Sum of the L2 norms of every derivative D_t^r D_x^alpha with
    2r + |alpha| <= 2m. On a periodic grid the derivatives are spectral and
    `domain` optionally restricts the L2 integrals to a sub-box. On a
    non-periodic grid the field is extended and localized first and the
    integrals are restricted to the field's own box.
    """
    grid = fld.grid
    if not grid.periodic:
        from . import extension

        emb = extension.localized_embedding(fld, m)
        return parabolic_sobolev_norm(emb.field, m, domain=emb.inner_box)
    total = 0.0
    for r, alpha in sobolev_terms(m, grid.n):
        term = spectral_derivative(fld, r, alpha)
        total += lp_norm(term, 2, domain=domain)
    return float(total)


def sobolev_embedding_check(fld, m):
    """Report the sup-norm to Sobolev-norm ratio.

    Admissible only for m > (n+2)/4, the hypothesis under which the
    parabolic Sobolev space embeds into bounded functions.
    """
    n = fld.grid.n
    if not 4 * m > n + 2:
        raise ValueError(
            f"embedding check needs m > (n+2)/4; m={m}, n={n} is outside "
            "the admissible range"
        )
    sup = lp_norm(fld, np.inf)
    w_norm = parabolic_sobolev_norm(fld, m)
    ratio = sup / w_norm if w_norm > 0 else 0.0
    return {
        "sup": sup,
        "sobolev": w_norm,
        "ratio": ratio,
        "m": int(m),
        "n": int(n),
    }
