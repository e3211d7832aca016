"""Brute-force reference: RK4 integration of the interaction-picture master equation.

Joint basis ordering is ``|e,0..D-1>`` followed by ``|g,0..D-1>``.  The
effective interaction Hamiltonian is diagonal in this basis, with

    e: beta2 n + Omega (n+1)(n+2)
    g: beta1 n - Omega n (n-1)

so the commutator is an elementwise product; the dissipator
kappa(2 a rho a^+ - a^+ a rho - rho a^+ a) acts with a = 1_atom (x) a_field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional

import numpy as np

from .errors import ParameterError, StepSizeError
from .model import FieldDensityMatrix, ModelParams, coherent_amplitudes, coherent_vector

GUARD_LEVELS = 2


def interaction_energies(params: ModelParams, dim_field: int) -> np.ndarray:
    """Diagonal of the interaction-picture Hamiltonian, e-block then g-block."""
    n = np.arange(dim_field, dtype=float)
    om = params.omega_shift
    e = params.beta2 * n + om * (n + 1) * (n + 2)
    g = params.beta1 * n - om * n * (n - 1)
    return np.concatenate([e, g])


@dataclass(frozen=True)
class JointState:
    matrix: np.ndarray
    dim_field: int
    t: float = 0.0

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (2 * self.dim_field, 2 * self.dim_field):
            raise ValueError(f"joint matrix shape {mat.shape} does not match dim_field={self.dim_field}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def block(self, row: str, col: str) -> np.ndarray:
        """Atomic block <row| rho |col> as a field-space matrix."""
        d = self.dim_field
        i = {"e": 0, "g": 1}
        return self.matrix[i[row] * d:(i[row] + 1) * d, i[col] * d:(i[col] + 1) * d]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])


def initial_joint_state(params: ModelParams, dim_field: int) -> JointState:
    """(|e> + |g>)/sqrt(2) (x) |alpha>, truncated (not renormalised)."""
    amps = coherent_amplitudes(params.alpha, dim_field)
    psi = np.concatenate([amps, amps]) / math.sqrt(2.0)
    return JointState(np.outer(psi, psi.conj()), dim_field, 0.0)


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step classical RK4.

    ``step=None`` picks ``safety / rate_bound`` (capped at ``max_step``), where
    ``rate_bound`` bounds the largest generator eigenvalue modulus.
    """

    step: Optional[float] = None
    safety: float = 0.25
    max_step: float = 0.01
    gate_tol: float = 1e-8
    check_convergence: bool = False
    method: str = "rk4"

    def __post_init__(self):
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        if self.method != "rk4":
            raise ValueError(f"unsupported method {self.method!r}")


class _Generator:
    """Precomputed pieces of the Lindblad generator for one (params, dim)."""

    def __init__(self, params: ModelParams, dim_field: int):
        self.dim = dim_field
        h = interaction_energies(params, dim_field)
        nf = np.tile(np.arange(dim_field, dtype=float), 2)
        self.diag = -1j * (h[:, None] - h[None, :]) - params.kappa * (nf[:, None] + nf[None, :])
        s = np.sqrt(np.arange(1, dim_field, dtype=float))
        self.jump = (2.0 * params.kappa * np.outer(s, s))[None, :, None, :]
        self.rate_bound = float(np.max(np.abs(self.diag))) + 2.0 * params.kappa * dim_field

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        out = self.diag * rho
        out.reshape(2, d, 2, d)[:, :-1, :, :-1] += self.jump * rho.reshape(2, d, 2, d)[:, 1:, :, 1:]
        return out


def generator_apply(params: ModelParams, rho: JointState) -> np.ndarray:
    """d rho / dt for the joint state."""
    return _Generator(params, rho.dim_field)(np.asarray(rho.matrix))


def _rk4(gen: _Generator, rho: np.ndarray, span: float, step: float) -> np.ndarray:
    nsteps = max(1, math.ceil(span / step - 1e-12))
    dt = span / nsteps
    half = 0.5 * dt
    for _ in range(nsteps):
        k1 = gen(rho)
        k2 = gen(rho + half * k1)
        k3 = gen(rho + half * k2)
        k4 = gen(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho


def _step_for(gen: _Generator, config: IntegratorConfig) -> float:
    if config.step is not None:
        return config.step
    if gen.rate_bound == 0:
        return config.max_step
    return min(config.max_step, config.safety / gen.rate_bound)


def resolve_step(params: ModelParams, dim_field: int, config: IntegratorConfig) -> float:
    """The RK4 step ``trajectory`` will use for this problem."""
    return _step_for(_Generator(params, dim_field), config)


def _integrate(gen, initial: JointState, times: List[float], step: float) -> List[np.ndarray]:
    rho = np.array(initial.matrix)
    t = initial.t
    out = []
    for target in times:
        if target > t:
            rho = _rk4(gen, rho, target - t, step)
            t = target
        out.append(rho)
    return out


def trajectory(params: ModelParams, initial: JointState, times: Iterable[float],
               config: IntegratorConfig = IntegratorConfig()) -> List[JointState]:
    """Propagate through increasing ``times``, returning the state at each.

    With ``config.check_convergence`` the run is repeated at half the step and
    a :class:`StepSizeError` is raised if any element moves by more than
    ``config.gate_tol``.
    """
    times = [float(x) for x in times]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be non-decreasing")
    if times and times[0] < initial.t:
        raise ValueError("cannot propagate backwards in time")
    gen = _Generator(params, initial.dim_field)
    step = _step_for(gen, config)
    states = _integrate(gen, initial, times, step)
    if config.check_convergence:
        fine = _integrate(gen, initial, times, 0.5 * step)
        change = max((float(np.max(np.abs(a - b))) for a, b in zip(states, fine)), default=0.0)
        if not change <= config.gate_tol:
            raise StepSizeError(
                f"halving step {step:.3e} changed the state by {change:.3e} > {config.gate_tol:.1e}",
                max_change=change, step=step)
    return [JointState(rho, initial.dim_field, t) for rho, t in zip(states, times)]


def propagate(params: ModelParams, initial: JointState, t_end: float,
              config: IntegratorConfig = IntegratorConfig()) -> JointState:
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    return trajectory(params, initial, [t_end], config)[0]


def step_change(params: ModelParams, initial: JointState, t_end: float, step: float) -> float:
    """Max elementwise change at ``t_end`` when the RK4 step is halved."""
    gen = _Generator(params, initial.dim_field)
    coarse = _integrate(gen, initial, [t_end], step)[0]
    fine = _integrate(gen, initial, [t_end], 0.5 * step)[0]
    return float(np.max(np.abs(coarse - fine)))


def reduce_field(rho: JointState) -> FieldDensityMatrix:
    """Partial trace over the atom."""
    d = rho.dim_field
    field = np.einsum("aman->mn", rho.matrix.reshape(2, d, 2, d))
    tail = max(0.0, 1.0 - float(np.trace(field).real))
    return FieldDensityMatrix(field, tail_bound=tail)


def unitary_reference(params: ModelParams, t: float, dim: int) -> FieldDensityMatrix:
    """Lossless field state by exact phase evolution of each Fock component."""
    if params.kappa != 0:
        raise ParameterError("unitary_reference requires kappa = 0")
    cv = coherent_vector(params.alpha, dim)
    amps = cv.amplitudes
    energies = interaction_energies(params, dim)
    base = 0.5 * np.outer(amps, amps.conj())
    field = np.zeros((dim, dim), dtype=complex)
    for block in (energies[:dim], energies[dim:]):
        ph = np.exp(-1j * block * t)
        field += base * np.outer(ph, ph.conj())
    return FieldDensityMatrix(field, tail_bound=cv.tail_bound)


def oracle_field_states(params: ModelParams, times: Iterable[float], dim: int,
                        config: IntegratorConfig = IntegratorConfig()) -> List[FieldDensityMatrix]:
    """Reduced field states from the joint RK4 run, cropped to ``dim`` levels.

    The joint run carries ``GUARD_LEVELS`` extra Fock levels so that the
    truncation edge stays away from the compared block.
    """
    initial = initial_joint_state(params, dim + GUARD_LEVELS)
    out = []
    for state in trajectory(params, initial, times, config):
        field = reduce_field(state).entries[:dim, :dim]
        out.append(FieldDensityMatrix(field, tail_bound=max(0.0, 1.0 - float(np.trace(field).real))))
    return out
