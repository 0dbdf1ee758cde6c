"""Point-vortex dynamics in planar domains.

A numerical library for the N-vortex Hamiltonian system in the plane,
the unit disk, and polynomially perturbed disks, together with a
truncated Fourier-spectral reduction that computes the family of
small-period choreography orbits circling stable critical points of
the Robin function.
"""

__version__ = "0.1.0"

from .geometry import (
    DomainModel,
    MapInversionError,
    OutsideDomainError,
    boundary_clearance,
    boundary_points,
    disk,
    grad_regular_part,
    grad_robin,
    hessian_robin,
    in_domain,
    map_derivative,
    map_forward,
    map_inverse,
    mapped_disk,
    plane,
    regular_part,
    robin,
)

__all__ = [
    "__version__",
    "DomainModel", "plane", "disk", "mapped_disk",
    "regular_part", "robin", "grad_regular_part", "grad_robin",
    "hessian_robin", "map_forward", "map_derivative", "map_inverse",
    "in_domain", "boundary_points", "boundary_clearance",
    "OutsideDomainError", "MapInversionError",
]
