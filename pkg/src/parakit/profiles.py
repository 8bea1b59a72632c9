"""Smooth splice profiles and anisotropic distances.

Space-time points are ordered (x_1, ..., x_n, t). The anisotropic dilation
by eta scales space by eta and time by eta^2; the parabolic distance

    dist(z) = max(|x_1|, ..., |x_n|, |t|^(1/2))

is 1-homogeneous under it. The smooth quasi-distance

    zeta_k(z) = (x_1^(2k) + ... + x_n^(2k) + t^k)^(1/(2k))

shares that homogeneity, is C-infinity away from the origin, and converges
to the parabolic distance as k grows. Splices built from exp(-1/t) give
exact 0/1 plateaus, which downstream code relies on for exact multiplier
supports.
"""

import numpy as np

# Revision of the splice/bump constructions below. Recorded in artifact
# manifests so outputs can be traced to the profile shapes that made them;
# bump any change to smooth_step/splice or the quasi-distance family.
PROFILE_VERSION = 1


def smooth_step(t):
    """C-infinity step: exactly 0 for t <= 0, exactly 1 for t >= 1.

    Uses the classical exp(-1/t) construction, monotone on [0, 1].
    """
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros(t.shape)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    # 1/tm overflows to inf for subnormal tm; exp then returns the exact
    # limit 0, so the overflow is benign and silenced
    with np.errstate(over="ignore"):
        a = np.exp(-1.0 / tm)
        b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    if out.ndim == 0:
        return float(out)
    return out


def splice(r, lo, hi):
    """Monotone ramp: exactly 1 for r <= lo, exactly 0 for r >= hi."""
    if not lo < hi:
        raise ValueError(f"splice needs lo < hi, got ({lo}, {hi})")
    return 1.0 - smooth_step((np.asarray(r, dtype=np.float64) - lo) / (hi - lo))


def parabolic_distance(z):
    """max(|x_i|, sqrt(|t|)) for a point or stacked array of points.

    `z` is a sequence of n+1 coordinate arrays (broadcastable); the last
    entry is time.
    """
    parts = [np.abs(np.asarray(c, dtype=np.float64)) for c in z]
    parts[-1] = np.sqrt(parts[-1])
    out = parts[0]
    for p in parts[1:]:
        out = np.maximum(out, p)
    return out


def anisotropic_dilate(z, eta):
    """Scale a point (x_1..x_n, t) by (eta, ..., eta, eta^2)."""
    if eta <= 0:
        raise ValueError(f"dilation factor must be positive, got {eta}")
    z = [np.asarray(c, dtype=np.float64) for c in z]
    return tuple(eta * c for c in z[:-1]) + (eta * eta * z[-1],)


def quasi_distance(z, k=4):
    """Smooth anisotropic quasi-distance zeta_k.

    Parameters
    ----------
    z : sequence of n+1 coordinate arrays, time last.
    k : even integer >= 2; larger k approaches the parabolic max-distance.

    Evaluated in scaled form so large coordinates cannot overflow the
    2k-th powers.
    """
    if k < 2 or k % 2 != 0:
        raise ValueError(f"smoothing order k must be even and >= 2, got {k}")
    scale = parabolic_distance(z)
    safe = np.where(scale > 0.0, scale, 1.0)
    acc = np.zeros(np.shape(safe))
    for c in z[:-1]:
        acc = acc + (np.abs(np.asarray(c, dtype=np.float64)) / safe) ** (2 * k)
    # the time term is folded in through sqrt(|t|)/safe <= 1 rather than
    # |t|/safe^2, so safe^2 never under- or overflows near the extremes
    # of the double range
    root_t = np.sqrt(np.abs(np.asarray(z[-1], dtype=np.float64)))
    acc = acc + (root_t / safe) ** (2 * k)
    out = scale * acc ** (1.0 / (2 * k))
    if out.ndim == 0:
        return float(out)
    return out
