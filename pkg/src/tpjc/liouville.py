"""Closed-form dissipative evolution of the field in the dispersive two-photon model.

The interaction-picture master equation never couples the atomic blocks, so
the reduced field state is ``rho_gg(t) + rho_ee(t)`` and each branch obeys

    d rho_ii/dt = L_ii rho_ii,
    L_ii = 2 kappa F -/+ i Omega (M^2 - P^2) - (kappa + i Omega_i) M - (kappa - i Omega_i) P

with F rho = a rho a^+, M rho = a^+ a rho, P rho = rho a^+ a, upper sign for
``gg``.  Along a diagonal chain m - n = d the generator only feeds (m+1, n+1)
into (m, n); for a coherent initial projector the chain closes and every
matrix element is the initial one times ``exp(Gamma_mn(t) + i Theta_imn(t))``.

The phase ``Theta`` carries, besides the free rotation, the imaginary part of

    |alpha|^2 kappa (1 - exp(-(2 kappa -/+ 2 i Omega d) t)) / (kappa -/+ i Omega d)

whose real part is the dissipative part of ``Gamma``.  Its expansion has two
pieces, ``Omega d (1 - e^{-2 kappa t} cos 2 Omega d t)`` and
``-kappa e^{-2 kappa t} sin 2 Omega d t``; both are kept.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.special import gammaln

from .model import (
    DEFAULT_TAIL_CEILING,
    FieldDensityMatrix,
    ModelParams,
    coherent_vector,
    poisson_tail,
)

BRANCHES = ("gg", "ee")
WEIGHT_CUTOFF = 1e-18


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def superoperators(dim: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Matrices of F, M, P acting on row-major ``rho.ravel()``."""
    a = annihilation(dim)
    num = np.diag(np.arange(dim, dtype=float))
    eye = np.eye(dim)
    # row-major vec(A rho B) = kron(A, B^T) vec(rho)
    return np.kron(a, a.conj()), np.kron(num, eye), np.kron(eye, num)


def superop_commutators_check(dim: int, superops=None, tol: float = 1e-12) -> bool:
    """Verify [F, M] = F, [F, P] = F and [M, P] = 0 on all matrix units.

    In the truncated space ``[a, a^+ a] = a`` and ``[a^+ a, a^+] = a^+`` hold
    exactly, so no boundary units need to be excluded.  ``superops`` lets a
    caller substitute (F, M, P), e.g. to check that a corrupted F is caught.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    F, M, P = superops if superops is not None else superoperators(dim)

    def comm(x, y):
        return x @ y - y @ x

    return bool(np.max(np.abs(comm(F, M) - F)) <= tol
                and np.max(np.abs(comm(F, P) - F)) <= tol
                and np.max(np.abs(comm(M, P))) <= tol)


@dataclass(frozen=True)
class LiouvillianSpec:
    which: str
    omega_branch: float
    kappa: float
    omega_shift: float

    @property
    def sign(self) -> int:
        return 1 if self.which == "gg" else -1


def liouvillian_spec(params: ModelParams, which: str) -> LiouvillianSpec:
    _check_branch(which)
    omega_branch = params.omega_g if which == "gg" else params.omega_e
    return LiouvillianSpec(which, omega_branch, params.kappa, params.omega_shift)


def liouvillian_matrix(spec: LiouvillianSpec, dim: int) -> np.ndarray:
    """Dense dim^2 x dim^2 generator of one atomic branch."""
    F, M, P = superoperators(dim)
    k, om, ob = spec.kappa, spec.omega_shift, spec.omega_branch
    return (2 * k * F + spec.sign * 1j * om * (M @ M - P @ P)
            - (k + 1j * ob) * M - (k - 1j * ob) * P)


def _check_branch(which):
    if which not in BRANCHES:
        raise ValueError(f"branch must be 'gg' or 'ee', got {which!r}")


@dataclass(frozen=True)
class KernelValue:
    m: int
    n: int
    t: float
    gamma: float
    theta_g: float
    theta_e: float


def kernel_arrays(params: ModelParams, m, n, t):
    """Vectorised (Gamma_mn, Theta_gmn, Theta_emn); arguments broadcast."""
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    t = np.asarray(t, dtype=float)
    kap, om, nbar = params.kappa, params.omega_shift, params.nbar
    d = m - n
    x = 2.0 * kap * t
    y = 2.0 * om * d * t
    decay = np.exp(-x)
    # 1 - e^{-x} cos y without cancellation at small t
    one_minus_ec = -np.expm1(-x) + 2.0 * decay * np.sin(0.5 * y) ** 2
    es = decay * np.sin(y)
    # nbar kappa / (kappa^2 + (Omega d)^2), rescaled by max(kappa, |Omega d|)
    # so that neither a tiny kappa nor kappa = 0 produces 0/0
    wd = om * d
    scale = np.maximum(kap, np.abs(wd))
    safe = np.where(scale > 0, scale, 1.0)
    k_hat = kap / safe
    w_hat = wd / safe
    norm = nbar / (k_hat * k_hat + w_hat * w_hat + (scale == 0))
    kk = norm * k_hat * k_hat
    kw = norm * k_hat * w_hat
    gamma = -kap * (m + n) * t + kk * one_minus_ec + kw * es
    phase = kw * one_minus_ec - kk * es
    rotation = om * (m * m - n * n) * t
    theta_g = -params.omega_g * d * t + rotation + phase
    theta_e = -params.omega_e * d * t - rotation - phase
    return gamma, theta_g, theta_e


KernelFn = Callable[[ModelParams, object, object, object], Tuple[np.ndarray, np.ndarray, np.ndarray]]


def kernel(params: ModelParams, m: int, n: int, t: float) -> KernelValue:
    if m < 0 or n < 0:
        raise ValueError("Fock indices must be non-negative")
    if t < 0:
        raise ValueError("time must be non-negative")
    g, tg, te = kernel_arrays(params, m, n, t)
    return KernelValue(m, n, t, float(g), float(tg), float(te))


@dataclass(frozen=True)
class BranchDensity:
    which: str
    matrix: FieldDensityMatrix


def _index_grid(dim):
    idx = np.arange(dim)
    return idx[:, None], idx[None, :]


def branch_density(params: ModelParams, which: str, t: float, dim: int,
                   kernel_fn: KernelFn = kernel_arrays,
                   ceiling: float = DEFAULT_TAIL_CEILING) -> BranchDensity:
    _check_branch(which)
    if t < 0:
        raise ValueError("time must be non-negative")
    amps = coherent_vector(params.alpha, dim, ceiling).amplitudes
    m, n = _index_grid(dim)
    gamma, theta_g, theta_e = kernel_fn(params, m, n, t)
    theta = theta_g if which == "gg" else theta_e
    entries = 0.5 * np.outer(amps, amps.conj()) * np.exp(gamma + 1j * theta)
    tail = poisson_tail(params.nbar * np.exp(-2 * params.kappa * t), dim)
    return BranchDensity(which, FieldDensityMatrix(entries, tail_bound=tail))


def field_state(params: ModelParams, t: float, dim: int,
                kernel_fn: KernelFn = kernel_arrays,
                ceiling: float = DEFAULT_TAIL_CEILING) -> FieldDensityMatrix:
    """Reduced field density matrix rho_gg(t) + rho_ee(t)."""
    gg = branch_density(params, "gg", t, dim, kernel_fn, ceiling).matrix
    ee = branch_density(params, "ee", t, dim, kernel_fn, ceiling).matrix
    return FieldDensityMatrix(gg.entries + ee.entries, tail_bound=gg.tail_bound)


def amplitude_moment(params: ModelParams, order: int, t: float,
                     kernel_fn: KernelFn = kernel_arrays) -> complex:
    """<a^order>(t), summed over the Fock basis in closed form."""
    if order < 1:
        raise ValueError("moment order must be >= 1")
    alpha = params.alpha
    if alpha == 0:
        return 0j
    nbar, kap, om = params.nbar, params.kappa, params.omega_shift
    gamma, theta_g, theta_e = (float(v) for v in kernel_fn(params, order, 0, t))
    decay = np.exp(-2 * kap * t)
    swirl = nbar * decay * np.sin(2 * om * order * t)
    envelope = np.exp(gamma + nbar * (decay * np.cos(2 * om * order * t) - 1))
    phases = np.exp(1j * (swirl + theta_g)) + np.exp(1j * (-swirl + theta_e))
    return complex(0.5 * alpha**order * envelope * phases)


def moment_from_state(state: FieldDensityMatrix, order: int) -> complex:
    """trace(a^order rho) for a truncated field state."""
    rho = state.entries
    k = np.arange(state.dim - order)
    # <k| a^order |k+order> = sqrt((k+order)!/k!)
    coef = np.exp(0.5 * (gammaln(k + order + 1) - gammaln(k + 1)))
    return complex(np.sum(coef * rho[k + order, k]))


def linear_entropy(params: ModelParams, t, dim: int, kernel_fn: KernelFn = kernel_arrays,
                   chunk: int = 256):
    """Idempotency defect 1 - trace(rho_F^2) from the double series over the truncation square.

    Evaluated as ``tail*(2 - tail) + sum_mn w_mn (1 - e^{2 Gamma} cos^2(dTheta/2))``,
    which equals ``1 - sum_mn w_mn e^{2 Gamma} cos^2(dTheta/2)`` but stays exact
    at t = 0.  ``t`` may be a scalar or an array.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0):
        raise ValueError("time must be non-negative")
    amps = coherent_vector(params.alpha, dim).amplitudes
    p = np.abs(amps) ** 2
    weights = np.outer(p, p)
    mi, ni = np.nonzero(weights >= WEIGHT_CUTOFF)
    w = weights[mi, ni]
    tail = poisson_tail(params.nbar, dim)
    base = tail * (2.0 - tail)
    out = np.empty(times.shape)
    for lo in range(0, len(times), chunk):
        ts = times[lo:lo + chunk, None]
        gamma, theta_g, theta_e = kernel_fn(params, mi[None, :], ni[None, :], ts)
        two_g = 2.0 * gamma
        defect = -np.expm1(two_g) + np.exp(two_g) * np.sin(0.5 * (theta_g - theta_e)) ** 2
        out[lo:lo + chunk] = base + defect @ w
    return out if np.ndim(t) else float(out[0])


def entropy_from_state(state: FieldDensityMatrix) -> float:
    """1 - trace(rho^2) straight from a density matrix."""
    return 1.0 - state.purity
