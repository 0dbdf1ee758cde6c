"""Green's-function machinery for planar domains.

The hydrodynamic Green's function of a domain splits as

    G(w, z) = (1/2pi) log(1/|w - z|) - g(w, z),

where g, the regular part, is harmonic in each argument and symmetric,
and its diagonal h(z) = g(z, z) is the Robin function.  With this sign
convention g is bounded below and h(z) -> +inf at the boundary of a
bounded domain.

Three domain kinds are supported:

* ``plane``        -- the whole plane, g == 0;
* ``disk``         -- the open unit disk, closed forms throughout;
* ``mapped-disk``  -- the image of the unit disk under a polynomial map
  f(w) = w + sum_{j>=2} c_j w^j that is injective on the closed disk.
  Everything is evaluated in preimage coordinates via the conformal
  invariance G_f(D)(f(p), f(q)) = G_D(p, q).

Real gradients of real-valued functions on C ~ R^2 are returned as
complex numbers gx + 1j*gy.  All point operations accept scalars or
ndarrays of complex points and broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi

#: switch from the off-diagonal mapped-disk formula to its diagonal
#: limit when the preimages are closer than this
DIAGONAL_SPLIT = 1e-6

_INVERSE_TOL = 1e-13
_INVERSE_MAXITER = 50


class OutsideDomainError(ValueError):
    """A point required to be in the (strict) interior is not."""


class MapInversionError(RuntimeError):
    """Newton inversion of the conformal map failed to converge."""


# ----------------------------------------------------------------------
# domain model
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DomainModel:
    """A planar domain specified by its kind and conformal map data.

    ``map_coeffs`` holds the coefficients (c_2, c_3, ...) of
    f(w) = w + c_2 w^2 + ... and is empty unless kind == "mapped-disk".
    Instances are immutable and safe to share between threads.
    """

    kind: str
    map_coeffs: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("plane", "disk", "mapped-disk"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        object.__setattr__(self, "map_coeffs",
                           tuple(complex(c) for c in self.map_coeffs))
        if self.kind != "mapped-disk":
            if self.map_coeffs:
                raise ValueError("map_coeffs only apply to mapped-disk domains")
            return
        if not all(np.isfinite(c.real) and np.isfinite(c.imag)
                   for c in self.map_coeffs):
            raise ValueError("map coefficients must be finite")
        _check_injective(self)

    @property
    def bounded(self) -> bool:
        return self.kind != "plane"

    @property
    def radial(self) -> bool:
        """Invariant under rotations about the origin (plane and disk)."""
        return self.kind in ("plane", "disk")

    def label(self) -> str:
        if self.kind == "mapped-disk":
            cs = ",".join(f"c{j + 2}={c:g}" for j, c in enumerate(self.map_coeffs))
            return f"mapped-disk({cs})"
        return self.kind

    @cached_property
    def _boundary(self) -> np.ndarray:
        """Dense boundary sample used for clearance queries."""
        theta = np.linspace(0.0, TWO_PI, 2048, endpoint=False)
        return np.asarray(boundary_points(self, theta))

    @cached_property
    def diameter(self) -> float:
        if not self.bounded:
            return np.inf
        b = self._boundary[::8]
        return float(np.max(np.abs(b[:, None] - b[None, :])))


def plane() -> DomainModel:
    return DomainModel("plane")


def disk() -> DomainModel:
    return DomainModel("disk")


def mapped_disk(coeffs) -> DomainModel:
    """Image of the unit disk under f(w) = w + sum_{j>=2} c_j w^j."""
    return DomainModel("mapped-disk", tuple(coeffs))


# ----------------------------------------------------------------------
# conformal map
# ----------------------------------------------------------------------

def _poly(dom: DomainModel) -> np.ndarray:
    # highest power first, for np.polyval: [c_m, ..., c_2, 1, 0]
    return np.array(list(dom.map_coeffs[::-1]) + [1.0, 0.0], dtype=complex)


def map_forward(dom: DomainModel, w):
    """f(w) for a mapped disk."""
    _require_kind(dom, "mapped-disk")
    return np.polyval(_poly(dom), w)


def map_derivative(dom: DomainModel, w):
    """f'(w) for a mapped disk."""
    _require_kind(dom, "mapped-disk")
    return np.polyval(np.polyder(_poly(dom)), w)


def _map_second_derivative(dom: DomainModel, w):
    return np.polyval(np.polyder(_poly(dom), 2), w)


def map_inverse(dom: DomainModel, z, tol: float = _INVERSE_TOL,
                maxiter: int = _INVERSE_MAXITER):
    """Solve f(p) = z by damped Newton, seeded at p = z.

    Raises :class:`MapInversionError` if any entry fails to reach
    ``tol`` within ``maxiter`` iterations.
    """
    p, ok = _map_inverse_try(dom, z, tol, maxiter)
    if not np.all(ok):
        raise MapInversionError("conformal map inversion did not converge")
    return p


def _map_inverse_try(dom, z, tol=_INVERSE_TOL, maxiter=_INVERSE_MAXITER):
    _require_kind(dom, "mapped-disk")
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    coeff = _poly(dom)
    dcoeff = np.polyder(coeff)

    p = z.copy()
    err = np.abs(np.polyval(coeff, p) - z)
    for _ in range(maxiter):
        if np.all(err <= tol):
            break
        res = np.polyval(coeff, p) - z
        dp = np.polyval(dcoeff, p)
        dp = np.where(dp == 0, 1e-30, dp)
        pn = p - res / dp
        # backtrack entries whose residual grew
        for _ in range(10):
            err_n = np.abs(np.polyval(coeff, pn) - z)
            bad = (err_n > err) & (err > tol)
            if not bad.any():
                break
            pn = np.where(bad, 0.5 * (p + pn), pn)
        p = pn
        err = np.abs(np.polyval(coeff, p) - z)
    ok = err <= max(tol, 1e-12)
    if scalar:
        return p[0], ok[0]
    return p, ok


def _check_injective(dom: DomainModel, n: int = 512) -> None:
    """Reject maps that fail the numerical injectivity test.

    f is injective on the closed disk iff f' has no zero there and the
    boundary curve f(e^{i theta}) is simple; both are checked on a grid.
    """
    theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
    w = np.exp(1j * theta)
    fp = np.polyval(np.polyder(_poly(dom)), w)
    if np.min(np.abs(fp)) <= 1e-9:
        raise ValueError("map derivative vanishes on the boundary; "
                         "f is not injective on the closed disk")
    curve = np.polyval(_poly(dom), w)
    if _curve_self_intersects(curve):
        raise ValueError("boundary curve self-intersects; "
                         "f is not injective on the closed disk")


def _curve_self_intersects(curve: np.ndarray) -> bool:
    """Segment-pair intersection test for the closed polyline ``curve``."""
    n = len(curve)
    a = curve
    b = np.roll(curve, -1)

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    i, j = np.triu_indices(n, k=2)
    # skip the wrap-around adjacency (segment 0 with segment n-1)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    p, r = a[i], b[i] - a[i]
    q, s = a[j], b[j] - a[j]
    rxs = cross(r, s)
    qp = q - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross(qp, s) / rxs
        u = cross(qp, r) / rxs
    hit = (np.abs(rxs) > 1e-15) & (t > -1e-12) & (t < 1 + 1e-12) \
        & (u > -1e-12) & (u < 1 + 1e-12)
    return bool(hit.any())


# ----------------------------------------------------------------------
# membership and clearance
# ----------------------------------------------------------------------

def in_domain(dom: DomainModel, z, margin: float = 0.0):
    """Elementwise test for membership in the open domain.

    ``margin`` shrinks the domain: points within ``margin`` of the
    boundary count as outside (used by integration guards).
    """
    z = np.asarray(z, dtype=complex)
    if dom.kind == "plane":
        return np.ones(z.shape, dtype=bool) if z.ndim else np.bool_(True)
    if dom.kind == "disk":
        return np.abs(z) < 1.0 - margin
    p, ok = _map_inverse_try(dom, z)
    inside = ok & (np.abs(p) < 1.0)
    if margin > 0.0:
        inside &= boundary_clearance(dom, z) > margin
    return inside


def boundary_points(dom: DomainModel, theta):
    """Boundary parametrization; theta in [0, 2pi)."""
    if dom.kind == "plane":
        raise ValueError("the plane has no boundary")
    w = np.exp(1j * np.asarray(theta, dtype=float))
    if dom.kind == "disk":
        return w
    return np.polyval(_poly(dom), w)


def boundary_clearance(dom: DomainModel, z):
    """Distance from z to the boundary (inf for the plane).

    For mapped disks this is the distance to a dense boundary sample,
    accurate to the sample spacing.
    """
    z = np.asarray(z, dtype=complex)
    if dom.kind == "plane":
        return np.full(z.shape, np.inf) if z.ndim else np.inf
    if dom.kind == "disk":
        out = 1.0 - np.abs(z)
        return float(out) if z.ndim == 0 else out
    b = dom._boundary
    out = np.min(np.abs(np.atleast_1d(z)[..., None] - b), axis=-1)
    return float(out[0]) if z.ndim == 0 else out


def _require_kind(dom: DomainModel, kind: str) -> None:
    if dom.kind != kind:
        raise ValueError(f"operation requires a {kind} domain, got {dom.kind}")


def _require_interior(dom: DomainModel, *points) -> None:
    for z in points:
        if not np.all(in_domain(dom, z)):
            raise OutsideDomainError(f"point outside {dom.label()}")


# ----------------------------------------------------------------------
# regular part, Robin function, derivatives
# ----------------------------------------------------------------------

def regular_part(dom: DomainModel, w, z):
    """g(w, z), the regular part of the Green's function.

    Symmetric in (w, z); requires both points in the open domain.  The
    mapped-disk value is g_D(p, q) + (1/2pi) log(|p-q| / |f(p)-f(q)|)
    with preimages p, q, switching to the diagonal limit
    (1/2pi) log(1/|f'|) once |p - q| < DIAGONAL_SPLIT.
    """
    _require_interior(dom, w, z)
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if dom.kind == "plane":
        return np.zeros(np.broadcast(w, z).shape) if (w.ndim or z.ndim) else 0.0
    if dom.kind == "disk":
        return _g_disk(w, z)

    p = map_inverse(dom, w)
    q = map_inverse(dom, z)
    p, q = np.broadcast_arrays(np.atleast_1d(p), np.atleast_1d(q))
    near = np.abs(p - q) < DIAGONAL_SPLIT
    out = np.empty(p.shape, dtype=float)
    if np.any(~near):
        pp, qq = p[~near], q[~near]
        ratio = np.abs(pp - qq) / np.abs(np.polyval(_poly(dom), pp)
                                         - np.polyval(_poly(dom), qq))
        out[~near] = _g_disk(pp, qq) + np.log(ratio) / TWO_PI
    if np.any(near):
        mid = 0.5 * (p[near] + q[near])
        fp = map_derivative(dom, mid)
        out[near] = _g_disk(p[near], q[near]) - np.log(np.abs(fp)) / TWO_PI
    if w.ndim == 0 and z.ndim == 0:
        return float(out.reshape(()))
    return out


def robin(dom: DomainModel, z):
    """Robin function h(z) = g(z, z)."""
    _require_interior(dom, z)
    z = np.asarray(z, dtype=complex)
    if dom.kind == "plane":
        return np.zeros(z.shape) if z.ndim else 0.0
    if dom.kind == "disk":
        out = -np.log1p(-np.abs(z) ** 2) / TWO_PI
        return float(out) if z.ndim == 0 else out
    p = map_inverse(dom, z)
    fp = map_derivative(dom, p)
    out = -np.log1p(-np.abs(p) ** 2) / TWO_PI - np.log(np.abs(fp)) / TWO_PI
    return float(out) if z.ndim == 0 else out


def grad_regular_part(dom: DomainModel, w, z):
    """Real gradients (d/dw g, d/dz g), each as a complex number."""
    _require_interior(dom, w, z)
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if dom.kind == "plane":
        zero = np.zeros(np.broadcast(w, z).shape, dtype=complex)
        return (zero, zero.copy()) if (w.ndim or z.ndim) else (0j, 0j)
    if dom.kind == "disk":
        gw = _dw_g_disk(w, z)
        gz = _dw_g_disk(z, w)
        if w.ndim == 0 and z.ndim == 0:
            return complex(gw), complex(gz)
        return gw, gz

    p = map_inverse(dom, w)
    q = map_inverse(dom, z)
    gw = _dp_g_mapped(dom, p, q) / np.conj(map_derivative(dom, p))
    gz = _dp_g_mapped(dom, q, p) / np.conj(map_derivative(dom, q))
    if w.ndim == 0 and z.ndim == 0:
        return complex(gw.reshape(())), complex(gz.reshape(()))
    return gw, gz


def grad_robin(dom: DomainModel, z):
    """Real gradient of the Robin function as a complex number."""
    _require_interior(dom, z)
    z = np.asarray(z, dtype=complex)
    if dom.kind == "plane":
        return np.zeros(z.shape, dtype=complex) if z.ndim else 0j
    if dom.kind == "disk":
        out = z / (1.0 - np.abs(z) ** 2) / np.pi
        return complex(out) if z.ndim == 0 else out
    # h(f(p)) = h_D(p) - (1/2pi) log|f'(p)|, then the chain rule
    p = map_inverse(dom, z)
    fp = map_derivative(dom, p)
    fpp = _map_second_derivative(dom, p)
    gp = p / (1.0 - np.abs(p) ** 2) / np.pi - np.conj(fpp / fp) / TWO_PI
    out = gp / np.conj(fp)
    return complex(out) if z.ndim == 0 else out


def hessian_robin(dom: DomainModel, z) -> np.ndarray:
    """2x2 real Hessian of the Robin function at a single point.

    Analytic for the disk; for mapped disks, Richardson-extrapolated
    central differences of the analytic gradient.
    """
    _require_interior(dom, z)
    z = complex(z)
    if dom.kind == "plane":
        return np.zeros((2, 2))
    if dom.kind == "disk":
        s = 1.0 - abs(z) ** 2
        v = np.array([z.real, z.imag])
        return (np.eye(2) / s + 2.0 * np.outer(v, v) / s ** 2) / np.pi
    step = max(1e-5, 1e-7 * abs(z))
    coarse = _grad_robin_jacobian_fd(dom, z, 2.0 * step)
    fine = _grad_robin_jacobian_fd(dom, z, step)
    hess = (4.0 * fine - coarse) / 3.0
    return 0.5 * (hess + hess.T)


def _grad_robin_jacobian_fd(dom, z, h):
    out = np.empty((2, 2))
    for j, dz in enumerate((h, 1j * h)):
        gp = grad_robin(dom, z + dz)
        gm = grad_robin(dom, z - dz)
        d = (gp - gm) / (2.0 * h)
        out[0, j] = d.real
        out[1, j] = d.imag
    return out


# -- closed forms for the unit disk ------------------------------------

def _g_disk(w, z):
    return -np.log(np.abs(1.0 - w * np.conj(z))) / TWO_PI


def _dw_g_disk(w, z):
    # 2 d/d(conj w) of -(1/4pi) [log(1 - w conj z) + log(1 - conj w z)]
    return z / (1.0 - np.conj(w) * z) / TWO_PI


def _dp_g_mapped(dom, p, q):
    """d/dp of g_mapped written in preimage coordinates.

    The singular difference 1/conj(p-q) - conj(f'(p))/conj(f(p)-f(q))
    tends to -conj(f''/2f') on the diagonal; switch to that limit below
    the splitting threshold.
    """
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    p, q = np.broadcast_arrays(np.atleast_1d(p), np.atleast_1d(q))
    coeff = _poly(dom)
    fp = np.polyval(np.polyder(coeff), p)
    near = np.abs(p - q) < DIAGONAL_SPLIT
    sing = np.empty(p.shape, dtype=complex)
    if np.any(~near):
        pp, qq = p[~near], q[~near]
        sing[~near] = 1.0 / np.conj(pp - qq) \
            - np.conj(fp[~near]) / np.conj(np.polyval(coeff, pp)
                                           - np.polyval(coeff, qq))
    if np.any(near):
        mid = 0.5 * (p[near] + q[near])
        sing[near] = -np.conj(_map_second_derivative(dom, mid)
                              / (2.0 * map_derivative(dom, mid)))
    out = (q / (1.0 - np.conj(p) * q) + sing) / TWO_PI
    return out if out.shape else out.reshape(())
