"""parakit: anisotropic Littlewood-Paley analysis and parabolic BMO on space-time grids.

The package provides, on periodic space-time boxes with parabolic scaling
(space ~ eta, time ~ eta^2):

- smooth dyadic frequency partitions and band decompositions,
- Besov / Lizorkin-Triebel / parabolic Sobolev norms,
- BMO over parabolic cubes with a deterministic cube search,
- higher-order reflection extension of fields from bounded boxes,
- an inequality harness measuring implied constants of logarithmic
  Sobolev type bounds, and
- a one-dimensional periodic gradient-flow demo wired into the harness.
"""

__version__ = "0.1.0"

from .grid import (
    AnisotropicGrid,
    SampledField,
    SpectralField,
    dilate_field,
    forward_transform,
    grid_max,
    inverse_transform,
    make_grid,
    physical_energy,
    read_field,
    read_header,
    spectral_energy,
    write_field,
)
from .profiles import (
    anisotropic_dilate,
    parabolic_distance,
    quasi_distance,
    smooth_step,
    splice,
)

__all__ = [
    "AnisotropicGrid",
    "SampledField",
    "SpectralField",
    "__version__",
    "anisotropic_dilate",
    "dilate_field",
    "forward_transform",
    "grid_max",
    "inverse_transform",
    "make_grid",
    "parabolic_distance",
    "physical_energy",
    "quasi_distance",
    "read_field",
    "read_header",
    "smooth_step",
    "spectral_energy",
    "splice",
    "write_field",
]
