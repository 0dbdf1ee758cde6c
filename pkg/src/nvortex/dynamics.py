"""Time integration of the vortex flow with conservation monitoring.

The flow Gamma_k dz_k/dt = -i grad_{z_k} H is a canonical Hamiltonian
system in (x_k, Gamma_k y_k) coordinates, so the implicit midpoint rule
is symplectic for it; classical RK4 is kept as a convergence oracle.
Steps that would drive two vortices closer than ``guard_margin`` or a
vortex that close to the boundary abort with a diagnostic instead of
integrating into the singularity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import geometry as geo
from .hamiltonian import (VortexConfiguration, angular_impulse, hamiltonian,
                          velocity)


class GuardViolationError(RuntimeError):
    """A step hit the collision/boundary guard; ``time`` is the failure time."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class InnerSolveError(RuntimeError):
    """The midpoint Newton iteration failed to converge."""


@dataclass(frozen=True)
class IntegratorSpec:
    """Step size, method and guard settings for the integrators."""

    dt: float
    method: str = "implicit-midpoint"
    newton_tol: float = 1e-13
    max_inner_iter: int = 30
    guard_margin: float = 1e-4

    def __post_init__(self):
        if self.method not in ("implicit-midpoint", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.dt > 0 and self.newton_tol > 0 and self.guard_margin >= 0):
            raise ValueError("dt and newton_tol must be positive, "
                             "guard_margin nonnegative")


@dataclass(frozen=True)
class Trajectory:
    """Sampled states with energy and (for radial domains) impulse."""

    times: np.ndarray
    states: tuple
    energy: np.ndarray
    angular_impulse: np.ndarray | None = None

    def positions(self) -> np.ndarray:
        """(n_samples, N) complex position array."""
        return np.array([s.positions for s in self.states])


def _guard_ok(dom, z, margin):
    if len(z) > 1:
        dists = np.abs(z[:, None] - z[None, :])[np.triu_indices(len(z), k=1)]
        if np.min(dists) <= margin:
            return False
    clear = np.atleast_1d(geo.boundary_clearance(dom, z))
    return bool(np.all(clear > margin)) and bool(np.all(geo.in_domain(dom, z)))


def _pack(z):
    return np.concatenate([z.real, z.imag])


def _unpack(x):
    n = x.size // 2
    return x[:n] + 1j * x[n:]


def step(dom: geo.DomainModel, config: VortexConfiguration,
         spec: IntegratorSpec, _ws: dict | None = None) -> VortexConfiguration:
    """Advance one step; raises GuardViolationError on guard breach."""
    z0 = config.positions
    s = config.strengths

    def vel(z):
        return velocity(dom, VortexConfiguration(z, s))

    if spec.method == "rk4":
        k1 = vel(z0)
        k2 = vel(z0 + 0.5 * spec.dt * k1)
        k3 = vel(z0 + 0.5 * spec.dt * k2)
        k4 = vel(z0 + spec.dt * k3)
        z1 = z0 + (spec.dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        z1 = _midpoint_step(vel, z0, spec, _ws)

    if not _guard_ok(dom, z1, spec.guard_margin):
        raise GuardViolationError(
            f"guard violated: pair distance or boundary clearance "
            f"<= {spec.guard_margin}")
    return VortexConfiguration(z1, s)


def _midpoint_step(vel, z0, spec, ws=None):
    """Solve z1 = z0 + dt * V((z0+z1)/2) by Newton.

    The velocity Jacobian drifts slowly along a trajectory, so a copy
    cached in ``ws`` (when integrate() supplies one) is reused across
    steps and rebuilt only when the chord iteration slows down.
    """
    dt = spec.dt
    n2 = 2 * z0.size
    x0 = _pack(z0)

    def vel_x(x):
        return _pack(vel(_unpack(x)))

    x1 = x0 + dt * vel_x(x0)  # Euler predictor
    jac_v = None if ws is None else ws.get("jac_v")
    fresh = jac_v is None
    if fresh:
        jac_v = _fd_jacobian(vel_x, 0.5 * (x0 + x1))

    for attempt in (0, 1):
        jac = np.eye(n2) - 0.5 * dt * jac_v
        for it in range(spec.max_inner_iter):
            res = x1 - x0 - dt * vel_x(0.5 * (x0 + x1))
            if np.max(np.abs(res)) < spec.newton_tol:
                if ws is not None:
                    if it > 4:  # converged slowly; refresh next time
                        ws["jac_v"] = None
                    else:
                        ws["jac_v"] = jac_v
                return _unpack(x1)
            x1 = x1 - np.linalg.solve(jac, res)
        if fresh:
            break
        jac_v = _fd_jacobian(vel_x, 0.5 * (x0 + x1))
        fresh = True
    res = x1 - x0 - dt * vel_x(0.5 * (x0 + x1))
    if np.max(np.abs(res)) < spec.newton_tol:
        return _unpack(x1)
    raise InnerSolveError(
        f"midpoint Newton stalled at residual {np.max(np.abs(res)):.3e}")


def _fd_jacobian(f, x, h=1e-7):
    f0 = f(x)
    jac = np.empty((f0.size, x.size))
    for k in range(x.size):
        xp = x.copy()
        xp[k] += h
        jac[:, k] = (f(xp) - f0) / h
    return jac


def integrate(dom: geo.DomainModel, config: VortexConfiguration,
              spec: IntegratorSpec, t_end: float,
              sample_every: int = 1) -> Trajectory:
    """Repeated stepping to t_end with sampled diagnostics.

    The last step is shortened to land on t_end exactly.  Guard errors
    propagate and carry the failure time.
    """
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    if not _guard_ok(dom, config.positions, spec.guard_margin):
        raise GuardViolationError("initial configuration violates the guard",
                                  time=0.0)
    times = [0.0]
    states = [config]
    energy = [hamiltonian(dom, config)]
    impulse = [angular_impulse(config)] if dom.radial else None

    n_full = int(np.floor(t_end / spec.dt + 1e-12))
    rest = t_end - n_full * spec.dt
    if rest < 1e-12 * max(1.0, t_end):
        rest = 0.0

    t = 0.0
    current = config
    ws: dict = {}
    for k in range(n_full + (1 if rest else 0)):
        dt_k = spec.dt if k < n_full else rest
        sub = spec if dt_k == spec.dt else replace(spec, dt=dt_k)
        try:
            current = step(dom, current, sub, _ws=ws if dt_k == spec.dt else None)
        except GuardViolationError as err:
            raise GuardViolationError(str(err), time=t + dt_k) from None
        t += dt_k
        last = k == n_full + (1 if rest else 0) - 1
        if (k + 1) % sample_every == 0 or last:
            times.append(t)
            states.append(current)
            energy.append(hamiltonian(dom, current))
            if impulse is not None:
                impulse.append(angular_impulse(current))

    return Trajectory(
        times=np.array(times),
        states=tuple(states),
        energy=np.array(energy),
        angular_impulse=None if impulse is None else np.array(impulse),
    )


class PolygonResidual(NamedTuple):
    residual: float
    sigma: int


def polygon_residual(n: int, radius: float = 1.0) -> PolygonResidual:
    """Certify rigid rotation of the regular N-gon in the r -> 0 system.

    Evaluates the right-hand side of the rescaled zero-radius flow

        du_k/dt = (2i/(N-1)) sum_{j != k} (u_k - u_j)/|u_k - u_j|^2

    at the regular N-gon of the given radius and returns the deviation
    from unit-speed rigid rotation, max_k |RHS_k - sigma i u_k|,
    minimized over the orientation sigma in {+1, -1}.
    """
    if n < 2:
        raise ValueError("need at least two vortices")
    u = radius * np.exp(2j * np.pi * np.arange(n) / n)
    diff = u[:, None] - u[None, :]
    d2 = np.abs(diff) ** 2
    np.fill_diagonal(d2, 1.0)
    rhs = (2j / (n - 1)) * np.sum(diff / d2, axis=1)
    res_plus = float(np.max(np.abs(rhs - 1j * u)))
    res_minus = float(np.max(np.abs(rhs + 1j * u)))
    if res_plus <= res_minus:
        return PolygonResidual(res_plus, +1)
    return PolygonResidual(res_minus, -1)
