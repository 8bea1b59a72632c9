"""Anisotropic space-time grids, spectral transforms, and field files.

A grid covers the box [origin_i, origin_i + L_i] on each axis with an even
number of cells; node k sits at the cell center origin + (k + 1/2) h. The
last axis is always time. Transforms use the unitary-symmetric convention

    coeffs = fftn(values) * cell_volume / (2 pi)^(d/2),   d = n + 1,

with phases relative to the first node, so that Parseval holds against the
dual cell measure prod_i (2 pi / L_i) and multiplier banks that sum to one
reconstruct the field without extra constants.

Field files are a one-line JSON header followed by raw little-endian
float64 in row-major order. Readers ignore unknown header keys; writers may
add "origin", "periodic", and "manifest" next to the required
{version, n, shape, box_len, time_len}.
"""

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .profiles import parabolic_distance

FORMAT_VERSION = 1


@dataclass(frozen=True)
class AnisotropicGrid:
    """Uniform cell-centered lattice on a space-time box.

    Attributes
    ----------
    n : number of spatial dimensions (1 or 2).
    shape : nodes per axis, spatial axes first, time last; all even.
    box_len : spatial box length per axis.
    time_len : time box length.
    origin : lower corner of the box (n+1 values).
    periodic : whether the box is treated as a torus by spectral ops.
    """

    n: int
    shape: tuple
    box_len: tuple
    time_len: float
    origin: tuple = None
    periodic: bool = True

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"n must be 1 or 2, got {self.n}")
        shape = tuple(int(s) for s in self.shape)
        if len(shape) != self.n + 1:
            raise ValueError(
                f"shape must have n+1={self.n + 1} axes, got {len(shape)}"
            )
        if any(s < 4 or s % 2 != 0 for s in shape):
            raise ValueError(f"all axis sizes must be even and >= 4, got {shape}")
        box_len = tuple(float(b) for b in np.atleast_1d(self.box_len))
        if len(box_len) != self.n:
            raise ValueError(
                f"box_len must have {self.n} entries, got {len(box_len)}"
            )
        if any(b <= 0 for b in box_len) or self.time_len <= 0:
            raise ValueError("box_len and time_len must be positive")
        origin = self.origin
        if origin is None:
            origin = (0.0,) * (self.n + 1)
        origin = tuple(float(o) for o in origin)
        if len(origin) != self.n + 1:
            raise ValueError(
                f"origin must have {self.n + 1} entries, got {len(origin)}"
            )
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "box_len", box_len)
        object.__setattr__(self, "time_len", float(self.time_len))
        object.__setattr__(self, "origin", origin)

    @property
    def ndim(self):
        return self.n + 1

    @property
    def lengths(self):
        """Box length per axis, time last."""
        return self.box_len + (self.time_len,)

    @property
    def spacing(self):
        """Cell size per axis, time last."""
        return tuple(L / s for L, s in zip(self.lengths, self.shape))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def axis_coords(self, axis):
        """Node coordinates (cell centers) along one axis."""
        h = self.spacing[axis]
        return self.origin[axis] + (np.arange(self.shape[axis]) + 0.5) * h

    def coords(self):
        """Sparse meshgrid of node coordinates, time last."""
        axes = [self.axis_coords(ax) for ax in range(self.ndim)]
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def axis_freqs(self, axis):
        """Angular frequencies along one axis (2 pi * fftfreq)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.shape[axis], d=self.spacing[axis])

    def freqs(self):
        """Sparse meshgrid of angular frequencies, time last."""
        axes = [self.axis_freqs(ax) for ax in range(self.ndim)]
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def centered(self):
        """Same grid with the box centered at the origin."""
        origin = tuple(-0.5 * L for L in self.lengths)
        return replace(self, origin=origin)


def make_grid(n, shape, box_len, time_len, origin=None, periodic=True):
    if np.ndim(box_len) == 0:
        box_len = (float(box_len),) * n
    return AnisotropicGrid(
        n=n,
        shape=tuple(shape),
        box_len=tuple(box_len),
        time_len=time_len,
        origin=origin,
        periodic=periodic,
    )


@dataclass(frozen=True)
class SampledField:
    """Real field sampled on the nodes of an AnisotropicGrid."""

    grid: AnisotropicGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            raise ValueError(
                f"values shape {vals.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SpectralField:
    """Complex coefficients on the dual lattice of an AnisotropicGrid."""

    grid: AnisotropicGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.shape != self.grid.shape:
            raise ValueError(
                f"coeffs shape {coeffs.shape} does not match grid {self.grid.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)


def _unitary_scale(grid):
    return grid.cell_volume / (2.0 * np.pi) ** (grid.ndim / 2.0)


def forward_transform(fld):
    """Forward FFT in the unitary-symmetric convention."""
    if not fld.grid.periodic:
        raise ValueError("forward_transform needs a periodic grid")
    coeffs = np.fft.fftn(fld.values) * _unitary_scale(fld.grid)
    return SpectralField(grid=fld.grid, coeffs=coeffs)


def hermitian_defect(spec):
    """Largest deviation of coeffs from conjugate symmetry, absolute."""
    sym = np.conj(spec.coeffs)
    for ax in range(spec.grid.ndim):
        sym = np.roll(np.flip(sym, axis=ax), 1, axis=ax)
    return float(np.max(np.abs(spec.coeffs - sym)))


def inverse_transform(spec, tol=1e-8):
    """Inverse FFT back to a real field.

    Rejects coefficient arrays that are not conjugate-symmetric within
    `tol` relative to the largest coefficient, since those do not
    represent a real field. Pass tol=None to skip the check when symmetry
    is structurally guaranteed (e.g. after multiplying by a multiplier
    that is even on the frequency lattice).
    """
    if tol is not None:
        scale = max(float(np.max(np.abs(spec.coeffs))), 1e-300)
        if hermitian_defect(spec) > tol * scale:
            raise ValueError(
                "spectral coefficients are not conjugate-symmetric; "
                "inverse transform would not be a real field"
            )
    vals = np.fft.ifftn(spec.coeffs / _unitary_scale(spec.grid))
    return SampledField(grid=spec.grid, values=vals.real)


def physical_energy(fld):
    """Riemann cell sum of |u|^2."""
    return float(np.sum(fld.values**2) * fld.grid.cell_volume)


def spectral_energy(spec):
    """Sum of |coeffs|^2 against the dual cell measure."""
    dual_cell = float(np.prod([2.0 * np.pi / L for L in spec.grid.lengths]))
    return float(np.sum(np.abs(spec.coeffs) ** 2) * dual_cell)


def dilate_field(fld, eta):
    """Anisotropic field dilation u_eta(z) = u(eta^a z).

    Node values are reused exactly; only the grid box is rescaled
    (space by 1/eta, time by 1/eta^2).
    """
    if eta <= 0:
        raise ValueError(f"dilation factor must be positive, got {eta}")
    g = fld.grid
    grid = replace(
        g,
        box_len=tuple(L / eta for L in g.box_len),
        time_len=g.time_len / eta**2,
        origin=tuple(o / eta for o in g.origin[:-1]) + (g.origin[-1] / eta**2,),
    )
    return SampledField(grid=grid, values=fld.values)


def grid_max(fld):
    """Sup norm over the nodes."""
    return float(np.max(np.abs(fld.values)))


def header_dict(grid, manifest=None):
    head = {
        "version": FORMAT_VERSION,
        "n": grid.n,
        "shape": list(grid.shape),
        "box_len": list(grid.box_len),
        "time_len": grid.time_len,
        "origin": list(grid.origin),
        "periodic": grid.periodic,
    }
    if manifest is not None:
        head["manifest"] = manifest
    return head


def write_field(fld, path, manifest=None):
    """Write a field file atomically (header line + raw float64)."""
    head = json.dumps(header_dict(fld.grid, manifest)) + "\n"
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "wb") as fh:
            fh.write(head.encode("utf-8"))
            fh.write(np.ascontiguousarray(fld.values, dtype="<f8").tobytes())
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def read_header(path):
    with open(path, "rb") as fh:
        return json.loads(fh.readline().decode("utf-8"))


def read_field(path):
    with open(path, "rb") as fh:
        head = json.loads(fh.readline().decode("utf-8"))
        for key in ("version", "n", "shape", "box_len", "time_len"):
            if key not in head:
                raise ValueError(f"field file {path} missing header key {key!r}")
        if head["version"] != FORMAT_VERSION:
            raise ValueError(
                f"unsupported field file version {head['version']} in {path}"
            )
        grid = AnisotropicGrid(
            n=head["n"],
            shape=tuple(head["shape"]),
            box_len=tuple(head["box_len"]),
            time_len=head["time_len"],
            origin=tuple(head["origin"]) if "origin" in head else None,
            periodic=head.get("periodic", True),
        )
        count = int(np.prod(grid.shape))
        raw = fh.read(count * 8)
        if len(raw) != count * 8:
            raise ValueError(f"field file {path} truncated")
        vals = np.frombuffer(raw, dtype="<f8").reshape(grid.shape)
    return SampledField(grid=grid, values=vals.copy())


def lattice_distance_max(grid):
    """Largest parabolic distance on the centered dual lattice."""
    return float(np.max(parabolic_distance(grid.freqs())))


def axis_interval_weights(grid, axis, lo, hi):
    """Cell-overlap quadrature weights for the interval (lo, hi) on one axis.

    Cell k spans [origin + k h, origin + (k+1) h]; its weight is the length
    of the overlap with the interval, so weighted sums are exact integrals
    of cellwise-constant fields. Returns (first_index, weights) for the
    contiguous run of cells with positive overlap; weights may carry zero
    end entries from roundoff.
    """
    if not lo < hi:
        raise ValueError(f"interval needs lo < hi, got ({lo}, {hi})")
    h = grid.spacing[axis]
    o = grid.origin[axis]
    nax = grid.shape[axis]
    k0 = max(0, min(nax - 1, int(np.floor((lo - o) / h))))
    k1 = max(0, min(nax - 1, int(np.ceil((hi - o) / h)) - 1))
    if k1 < k0:
        k1 = k0
    edges_lo = o + np.arange(k0, k1 + 1) * h
    w = np.minimum(hi, edges_lo + h) - np.maximum(lo, edges_lo)
    return k0, np.maximum(w, 0.0)


def box_weights(grid, box):
    """Per-axis (first_index, weights) pairs for a space-time box.

    `box` is a sequence of (lo, hi) pairs, one per axis, time last.
    """
    if len(box) != grid.ndim:
        raise ValueError(f"box must have {grid.ndim} axis intervals")
    return [
        axis_interval_weights(grid, ax, lo, hi) for ax, (lo, hi) in enumerate(box)
    ]
