"""The N-vortex Hamiltonian, its interaction term, and gradients.

For strengths Gamma_k and positions z_k in a domain with Green's
regular part g and Robin function h,

    H(z) = (1/2pi) sum_{j != k} G_j G_k log(1/|z_j - z_k|) - F(z),
    F(z) = sum_{j != k} G_j G_k g(z_j, z_k) + sum_k G_k^2 h(z_k),

with all pair sums over ordered pairs (each unordered pair twice).
The flow is Gamma_k dz_k/dt = -i grad_{z_k} H.

The rescaled Hamiltonian divides out the fast rotation of a radius-r
ring: with T_r = 4 pi^2 r^2/(N-1),

    H_r(u) = (T_r / 2 pi r^2) (H(r u) + (1/2pi) sum_{j != k} log|r|)
           = (1/(N-1)) sum_{j != k} log(1/|u_j - u_k|) - (2pi/(N-1)) F(r u),

which extends smoothly to r = 0.  All strengths must equal 1 for the
rescaled form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo

TWO_PI = 2.0 * np.pi


class CollisionError(ValueError):
    """Two vortices occupy the same point, where H is singular."""


@dataclass(frozen=True)
class VortexConfiguration:
    """Positions and strengths of N point vortices.

    Positions are complex; strengths default to 1.  Distinctness of the
    positions is enforced here, domain membership by the operations.
    """

    positions: np.ndarray
    strengths: np.ndarray = field(default=None)

    def __post_init__(self):
        pos = np.atleast_1d(np.asarray(self.positions, dtype=complex))
        if pos.ndim != 1 or pos.size < 1:
            raise ValueError("positions must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        s = self.strengths
        s = np.ones(pos.size) if s is None else np.asarray(s, dtype=float)
        if s.shape != pos.shape:
            raise ValueError("strengths must match positions in length")
        if pos.size > 1 and np.min(_pair_distances(pos)) == 0.0:
            raise CollisionError("coincident vortex positions")
        pos.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "strengths", s)

    def __len__(self) -> int:
        return self.positions.size

    @property
    def unit_strengths(self) -> bool:
        return bool(np.all(self.strengths == 1.0))


@dataclass(frozen=True)
class RescaledState:
    """A scale r and rescaled positions u with r*u inside the domain."""

    r: float
    u: np.ndarray

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.u, dtype=complex))
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "r", float(self.r))
        if len(u) > 1 and np.min(_pair_distances(u)) == 0.0:
            raise CollisionError("coincident rescaled positions")


def _pair_distances(z: np.ndarray) -> np.ndarray:
    diff = z[:, None] - z[None, :]
    return np.abs(diff[np.triu_indices(len(z), k=1)])


def _check_in_domain(dom, z):
    if not np.all(geo.in_domain(dom, z)):
        raise geo.OutsideDomainError(f"vortex outside {dom.label()}")


def hamiltonian(dom: geo.DomainModel, config: VortexConfiguration) -> float:
    """Full Hamiltonian H(z); raises on collisions or points outside."""
    z, s = config.positions, config.strengths
    _check_in_domain(dom, z)
    n = len(z)
    log_term = 0.0
    if n > 1:
        d = _pair_distances(z)
        if np.min(d) == 0.0:
            raise CollisionError("coincident vortex positions")
        w = s[:, None] * s[None, :]
        pair_w = w[np.triu_indices(n, k=1)]
        log_term = -2.0 * float(np.sum(pair_w * np.log(d))) / TWO_PI
    return log_term - interaction(dom, config)


def interaction(dom: geo.DomainModel, config: VortexConfiguration) -> float:
    """Boundary interaction F(z); smooth, so coincidences are allowed."""
    z, s = config.positions, config.strengths
    _check_in_domain(dom, z)
    n = len(z)
    total = float(np.sum(s ** 2 * robin_values(dom, z)))
    for j in range(n):
        for k in range(j + 1, n):
            total += 2.0 * s[j] * s[k] * geo.regular_part(dom, z[j], z[k])
    return total


def robin_values(dom, z):
    out = geo.robin(dom, z)
    return np.atleast_1d(np.asarray(out, dtype=float))


def grad_hamiltonian(dom: geo.DomainModel,
                     config: VortexConfiguration) -> np.ndarray:
    """Real gradients grad_{z_k} H as a complex array of length N."""
    z, s = config.positions, config.strengths
    _check_in_domain(dom, z)
    n = len(z)
    grad = np.zeros(n, dtype=complex)
    if n > 1:
        diff = z[:, None] - z[None, :]
        dist2 = np.abs(diff) ** 2
        np.fill_diagonal(dist2, 1.0)
        if np.min(_pair_distances(z)) == 0.0:
            raise CollisionError("coincident vortex positions")
        w = s[:, None] * s[None, :]
        np.fill_diagonal(w, 0.0)
        grad -= np.sum(w * diff / dist2, axis=1) / np.pi
    grad -= _grad_interaction(dom, z, s)
    return grad


def _grad_interaction(dom, z, s) -> np.ndarray:
    n = len(z)
    grad = s ** 2 * _grad_robin_vec(dom, z)
    for j in range(n):
        for k in range(j + 1, n):
            gw, gz = geo.grad_regular_part(dom, z[j], z[k])
            grad[j] += 2.0 * s[j] * s[k] * gw
            grad[k] += 2.0 * s[j] * s[k] * gz
    return grad


def _grad_robin_vec(dom, z):
    out = geo.grad_robin(dom, z)
    return np.atleast_1d(np.asarray(out, dtype=complex))


def velocity(dom: geo.DomainModel, config: VortexConfiguration) -> np.ndarray:
    """Right-hand side of the flow: dz_k/dt = -(i/Gamma_k) grad_{z_k} H."""
    return -1j * grad_hamiltonian(dom, config) / config.strengths


def angular_impulse(config: VortexConfiguration) -> float:
    """sum_k Gamma_k |z_k|^2, conserved in rotation-invariant domains."""
    return float(np.sum(config.strengths * np.abs(config.positions) ** 2))


def rescaled_hamiltonian(dom: geo.DomainModel, state: RescaledState) -> float:
    """H_r(u) for unit strengths, defined also at r = 0."""
    u, r = state.u, state.r
    n = len(u)
    if n < 2:
        raise ValueError("the rescaled Hamiltonian needs N >= 2")
    if r != 0.0:
        config = VortexConfiguration(r * u)
        _check_in_domain(dom, config.positions)
        h_full = hamiltonian(dom, config)
        t_over = TWO_PI / (n - 1)  # T_r / (2 pi r^2)
        return t_over * (h_full + n * (n - 1) * np.log(abs(r)) / TWO_PI)
    d = _pair_distances(u)
    if np.min(d) == 0.0:
        raise CollisionError("coincident rescaled positions")
    log_term = -2.0 * float(np.sum(np.log(d))) / (n - 1)
    f_origin = float(interaction_on_grid(dom, np.zeros((n, 1), dtype=complex))[0])
    return log_term - TWO_PI / (n - 1) * f_origin


# ----------------------------------------------------------------------
# grid-vectorized forms used by the spectral machinery (unit strengths)
# ----------------------------------------------------------------------

def interaction_on_grid(dom: geo.DomainModel, zs: np.ndarray) -> np.ndarray:
    """F at each column of the (N, Q) position array, strengths = 1."""
    n = zs.shape[0]
    total = np.zeros(zs.shape[1])
    for j in range(n):
        total += np.asarray(geo.robin(dom, zs[j]), dtype=float)
        for k in range(j + 1, n):
            total += 2.0 * np.asarray(geo.regular_part(dom, zs[j], zs[k]))
    return total


def interaction_grad_first_on_grid(dom: geo.DomainModel,
                                   zs: np.ndarray) -> np.ndarray:
    """grad of F with respect to the first component, columnwise."""
    n = zs.shape[0]
    out = np.asarray(geo.grad_robin(dom, zs[0]), dtype=complex).copy()
    for k in range(1, n):
        gw, _ = geo.grad_regular_part(dom, zs[0], zs[k])
        out += 2.0 * gw
    return out
