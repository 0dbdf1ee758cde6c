"""Truncated Fourier loops and the symmetric action functional.

A 2pi-periodic loop u(t) = sum_{|n| <= M} a_n e^{int} stands for the
first vortex of a choreography; the remaining vortices are its time
shifts by multiples of 2pi/N (the hat lift).  On such loops the action
of the rescaled system reduces to

    Psi_r(u) = (N/2) Int <i du/dt, u> dt
             + (N/(N-1)) sum_{k=1}^{N-1} Int log|u - u(.+2 pi k/N)| dt
             + (2 pi/(N-1)) Int F(r uhat) dt,

whose critical points are the 2pi-periodic solutions.  The H^1 gradient
is the grid Euler-Lagrange expression transformed to coefficients and
smoothed mode-wise by N/(1+n^2).

Inner products are the integral ones: <x, y>_{H^1} =
2 pi sum (1+n^2) Re(conj(a_n) b_n).

At the circle solutions u = a + e^{i sigma t} the linearization of the
Euler-Lagrange operator couples mode n only to mode 2 sigma - n through
the real coefficients xi_n; its kernel is exactly the 3-parameter
family of translations and phase shifts of the circle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import geometry as geo
from .hamiltonian import interaction_grad_first_on_grid, interaction_on_grid

TWO_PI = 2.0 * np.pi


class SymmetryCollisionError(ValueError):
    """The loop meets one of its own 2 pi k/N time shifts."""


# ----------------------------------------------------------------------
# loops
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class FourierLoop:
    """A truncated Fourier series; ``coeffs[n + M]`` is the n-th mode."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coeffs must be a 1-d array of odd length")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- constructors --------------------------------------------------
    @staticmethod
    def zeros(m: int) -> "FourierLoop":
        return FourierLoop(np.zeros(2 * m + 1, dtype=complex))

    @staticmethod
    def circle(m: int, sigma: int = +1, center: complex = 0j,
               phase: float = 0.0) -> "FourierLoop":
        """center + e^{i sigma (t + phase)}."""
        if sigma not in (+1, -1):
            raise ValueError("sigma must be +1 or -1")
        loop = FourierLoop.zeros(m)
        c = loop.coeffs.copy()
        c[m] = center
        c[m + sigma] = np.exp(1j * sigma * phase)
        return FourierLoop(c)

    @staticmethod
    def from_modes(m: int, modes: dict) -> "FourierLoop":
        c = np.zeros(2 * m + 1, dtype=complex)
        for n, val in modes.items():
            if abs(n) > m:
                raise ValueError(f"mode {n} outside truncation {m}")
            c[n + m] = val
        return FourierLoop(c)

    # -- basic queries ---------------------------------------------------
    @property
    def m(self) -> int:
        return (self.coeffs.size - 1) // 2

    def mode(self, n: int) -> complex:
        return complex(self.coeffs[n + self.m]) if abs(n) <= self.m else 0j

    def modes(self) -> np.ndarray:
        return np.arange(-self.m, self.m + 1)

    # -- calculus --------------------------------------------------------
    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(1j * np.outer(t, self.modes())) @ self.coeffs

    def grid_values(self, q: int) -> np.ndarray:
        return _eval_matrix(self.m, q) @ self.coeffs

    def derivative(self) -> "FourierLoop":
        return FourierLoop(1j * self.modes() * self.coeffs)

    def shifted(self, theta: float) -> "FourierLoop":
        """The loop t -> u(t + theta)."""
        return FourierLoop(self.coeffs * np.exp(1j * self.modes() * theta))

    def conjugate_reflected(self) -> "FourierLoop":
        """The loop t -> conj(u(-t)) (reverses orientation)."""
        return FourierLoop(np.conj(self.coeffs))

    def resized(self, m: int) -> "FourierLoop":
        """Zero-pad or truncate to order m."""
        out = np.zeros(2 * m + 1, dtype=complex)
        keep = min(m, self.m)
        out[m - keep:m + keep + 1] = self.coeffs[self.m - keep:self.m + keep + 1]
        return FourierLoop(out)

    # -- algebra -----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, FourierLoop):
            if other.m != self.m:
                raise ValueError("mismatched truncation orders")
            return FourierLoop(self.coeffs + other.coeffs)
        c = self.coeffs.copy()
        c[self.m] += complex(other)  # constants shift mode 0
        return FourierLoop(c)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, FourierLoop):
            return self + FourierLoop(-other.coeffs)
        return self + (-complex(other))

    def __mul__(self, scalar):
        return FourierLoop(self.coeffs * complex(scalar))

    __rmul__ = __mul__

    # -- inner products ----------------------------------------------------
    def h1_inner(self, other: "FourierLoop") -> float:
        a, b = _align(self, other)
        m = (len(a) - 1) // 2
        n = np.arange(-m, m + 1).astype(float)
        w = TWO_PI * (1.0 + n ** 2)
        return float(np.sum(w * np.real(np.conj(a) * b)))

    def h1_norm(self) -> float:
        return float(np.sqrt(max(self.h1_inner(self), 0.0)))

    def l2_inner(self, other: "FourierLoop") -> float:
        a, b = _align(self, other)
        return float(TWO_PI * np.sum(np.real(np.conj(a) * b)))


def _align(x: FourierLoop, y: FourierLoop):
    m = max(x.m, y.m)
    return x.resized(m).coeffs, y.resized(m).coeffs


@lru_cache(maxsize=32)
def _eval_matrix(m: int, q: int) -> np.ndarray:
    t = quadrature_grid(q)
    e = np.exp(1j * np.outer(t, np.arange(-m, m + 1)))
    e.setflags(write=False)
    return e


@lru_cache(maxsize=32)
def _transform_matrix(m: int, q: int) -> np.ndarray:
    e = np.conj(_eval_matrix(m, q)).T / q
    e.setflags(write=False)
    return e


def quadrature_grid(q: int) -> np.ndarray:
    """Uniform grid on [0, 2pi); the trapezoid rule on it is spectral."""
    return np.arange(q) * (TWO_PI / q)


def default_grid_size(m: int) -> int:
    return 4 * m + 1


def coeffs_from_grid(values: np.ndarray, m: int) -> np.ndarray:
    """Modes |n| <= m of grid samples; exact for bandwidth <= len - m - 1."""
    return _transform_matrix(m, len(values)) @ values


# ----------------------------------------------------------------------
# group action and hat lift
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GroupElement:
    """A time shift theta together with a permutation of components."""

    theta: float
    sigma: tuple = None

    def __post_init__(self):
        if self.sigma is not None:
            s = tuple(int(i) for i in self.sigma)
            if sorted(s) != list(range(len(s))):
                raise ValueError("sigma must be a permutation of 0..N-1")
            object.__setattr__(self, "sigma", s)


def act(g: GroupElement, loop: FourierLoop) -> FourierLoop:
    """Single-component action: the time shift only."""
    return loop.shifted(g.theta)


def act_full(g: GroupElement, loops) -> list:
    """(theta, sigma) acting on an N-component loop.

    Component k of the result is u_{sigma^{-1}(k)}(t + theta).
    """
    loops = list(loops)
    n = len(loops)
    sigma = g.sigma if g.sigma is not None else tuple(range(n))
    if len(sigma) != n:
        raise ValueError("permutation size differs from component count")
    inv = [0] * n
    for i, s in enumerate(sigma):
        inv[s] = i
    return [loops[inv[k]].shifted(g.theta) for k in range(n)]


def hat_lift(loop: FourierLoop, n: int) -> list:
    """[u, u(.+2pi/N), ..., u(.+2pi(N-1)/N)]; fixed under the cyclic
    shift-and-permute symmetry by construction."""
    return [loop.shifted(TWO_PI * k / n) for k in range(n)]


def cyclic_tau(n: int) -> GroupElement:
    """The order-N shift-and-permute element whose fixed points are
    exactly the hat lifts: component k of tau*u is u_{k-1}(t + 2pi/N)."""
    sigma_right = tuple((i + 1) % n for i in range(n))
    return GroupElement(TWO_PI / n, sigma_right)


# ----------------------------------------------------------------------
# action functional
# ----------------------------------------------------------------------

def _shift_stack(loop: FourierLoop, n: int, q: int) -> np.ndarray:
    """Grid values of the N components of the hat lift, shape (N, Q)."""
    e = _eval_matrix(loop.m, q)
    modes = loop.modes()
    phases = np.exp(1j * np.outer(TWO_PI * np.arange(n) / n, modes))
    return (e @ (phases * loop.coeffs).T).T


def _check_admissible(dom, r, stack, collision_tol=1e-9):
    u0 = stack[0]
    for k in range(1, stack.shape[0]):
        if np.min(np.abs(u0 - stack[k])) <= collision_tol:
            raise SymmetryCollisionError(
                "loop meets its 2 pi k/N shift; outside the admissible set")
    if r != 0.0 and not np.all(geo.in_domain(dom, r * stack)):
        raise geo.OutsideDomainError(
            f"rescaled loop leaves {dom.label()} at scale r = {r}")


def loop_action(dom: geo.DomainModel, r: float, loop: FourierLoop,
                n: int, q: int | None = None) -> float:
    """Psi_r(u): the reduced action of the hat-lifted loop."""
    if n < 2:
        raise ValueError("need at least two vortices")
    q = default_grid_size(loop.m) if q is None else q
    stack = _shift_stack(loop, n, q)
    _check_admissible(dom, r, stack)

    nn = loop.modes().astype(float)
    quad = -np.pi * n * float(np.sum(nn * np.abs(loop.coeffs) ** 2))

    log_term = 0.0
    for k in range(1, n):
        log_term += float(np.mean(np.log(np.abs(stack[0] - stack[k]))))
    log_term *= TWO_PI * n / (n - 1)

    f_term = TWO_PI / (n - 1) * TWO_PI * float(
        np.mean(interaction_on_grid(dom, r * stack)))
    return quad + log_term + f_term


def loop_action_gradient(dom: geo.DomainModel, r: float, loop: FourierLoop,
                         n: int, q: int | None = None) -> FourierLoop:
    """H^1 gradient of Psi_r, truncated to the modes of ``loop``.

    The grid Euler-Lagrange expression

        i du/dt + (2/(N-1)) sum_k (u - u_k)/|u - u_k|^2
                + (2 pi r/(N-1)) grad_1 F(r uhat)

    is transformed to coefficients and multiplied by N/(1+n^2).
    """
    if n < 2:
        raise ValueError("need at least two vortices")
    q = default_grid_size(loop.m) if q is None else q
    stack = _shift_stack(loop, n, q)
    _check_admissible(dom, r, stack)

    du = loop.derivative().grid_values(q)
    el = 1j * du
    for k in range(1, n):
        d = stack[0] - stack[k]
        el += (2.0 / (n - 1)) * d / np.abs(d) ** 2
    if r != 0.0:
        el += (TWO_PI * r / (n - 1)) * interaction_grad_first_on_grid(
            dom, r * stack)

    c = coeffs_from_grid(el, loop.m)
    nn = loop.modes().astype(float)
    return FourierLoop(n * c / (1.0 + nn ** 2))


# ----------------------------------------------------------------------
# circle linearization
# ----------------------------------------------------------------------

def xi_coefficient(n: int, mode: int) -> float:
    """The real coupling coefficient between modes ``mode`` and
    ``2 - mode`` in the linearization at the circle,

        xi = sum_{k=1}^{N-1} (1 - w^{k (mode-2)}) / (1 - w^{-k})^2,
        w = e^{2 pi i/N}.

    The sum is real (checked, imaginary part below 1e-12) and satisfies
    xi_1 = (N-1)/2, xi_2 = 0 and xi_mode = xi_{2-mode}.
    """
    if n < 2:
        raise ValueError("need at least two vortices")
    k = np.arange(1, n)
    val = np.sum((1.0 - np.exp(2j * np.pi * k * (mode - 2) / n))
                 / (1.0 - np.exp(-2j * np.pi * k / n)) ** 2)
    if abs(val.imag) > 1e-12:
        raise AssertionError(f"xi({n},{mode}) has imaginary part {val.imag}")
    return float(val.real)


def real_coordinates(loop: FourierLoop) -> np.ndarray:
    """Interleaved (Re a_n, Im a_n) for n = -M..M."""
    x = np.empty(2 * loop.coeffs.size)
    x[0::2] = loop.coeffs.real
    x[1::2] = loop.coeffs.imag
    return x


def loop_from_real(x: np.ndarray) -> FourierLoop:
    return FourierLoop(x[0::2] + 1j * x[1::2])


def h1_weights(m: int) -> np.ndarray:
    """Diagonal of the H^1 metric in real coordinates."""
    n = np.arange(-m, m + 1).astype(float)
    return np.repeat(TWO_PI * (1.0 + n ** 2), 2)


def circle_hessian_matrix(n: int, m: int) -> np.ndarray:
    """Coefficient-space linearization at the circle, real coordinates.

    Row block of mode ``p`` reads  p a_p + (2/(N-1)) xi_p conj(a_{2-p});
    conjugation becomes the reflection diag(1, -1).  Couplings whose
    partner mode 2-p exceeds the truncation are dropped.  Returned
    before the (1+n^2)^{-1} smoothing, which does not change the
    kernel: exactly the translations (mode 0) and the imaginary part of
    mode 1 annihilate it.
    """
    if m < 4:
        raise ValueError("truncation too small to resolve the kernel")
    size = 2 * (2 * m + 1)
    mat = np.zeros((size, size))
    refl = np.diag([1.0, -1.0])
    for p in range(-m, m + 1):
        i = 2 * (p + m)
        mat[i, i] = mat[i + 1, i + 1] = p
        partner = 2 - p
        if abs(partner) <= m:
            j = 2 * (partner + m)
            mat[i:i + 2, j:j + 2] += (2.0 / (n - 1)) * xi_coefficient(n, p) * refl
    return mat


def circle_kernel_report(n: int, m: int, rel_threshold: float = 1e-8) -> dict:
    """Singular values and kernel data of the circle linearization."""
    mat = circle_hessian_matrix(n, m)
    _, svals, vt = np.linalg.svd(mat)
    cutoff = rel_threshold * svals[0]
    kdim = int(np.sum(svals < cutoff))
    kernel = vt[-kdim:].T if kdim else np.zeros((len(svals), 0))
    return {
        "n_vortices": n,
        "n_modes": m,
        "singular_values": svals,
        "kernel_dimension": kdim,
        "kernel_basis": kernel,
    }
