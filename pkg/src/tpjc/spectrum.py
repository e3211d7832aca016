"""Two-photon block Hamiltonian, its exact and dispersive eigenvalues.

Each invariant subspace span{|e,n>, |g,n+2>} of the Stark-shifted two-photon
Hamiltonian is a real symmetric 2x2 block.  ``E_plus`` always denotes the
eigenvalue continuously connected to |e,n> as the two-photon coupling goes to
zero, ``E_minus`` the one connected to |g,n+2>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import DispersiveError, ParameterError
from .model import ModelParams

DEFAULT_DISPERSIVE_THRESHOLD = 0.1


def _require(params: ModelParams, *names: str) -> None:
    missing = [n for n in names if getattr(params, n) is None]
    if missing:
        raise ParameterError(f"parameters lack {', '.join(missing)} (built from ratios?)")


@dataclass(frozen=True)
class BlockHamiltonian:
    n: int
    h11: float
    h22: float
    h12: float

    @property
    def h21(self) -> float:
        return self.h12

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.h11, self.h12], [self.h21, self.h22]])

    @property
    def trace(self) -> float:
        return self.h11 + self.h22

    @property
    def det(self) -> float:
        return self.h11 * self.h22 - self.h12 * self.h21


def block_hamiltonian(params: ModelParams, n: int) -> BlockHamiltonian:
    if n < 0:
        raise ValueError("photon index must be non-negative")
    _require(params, "omega", "omega0", "detuning", "lambda_eff")
    base = params.omega * n + 0.5 * params.omega0
    return BlockHamiltonian(
        n=n,
        h11=base + params.beta2 * n,
        h22=base - params.detuning + params.beta1 * (n + 2),
        h12=params.lambda_eff * math.sqrt((n + 1) * (n + 2)),
    )


def exact_eigenvalues(block: BlockHamiltonian, params: ModelParams) -> Tuple[float, float]:
    """Closed-form eigenvalues of ``block`` as (E_plus, E_minus)."""
    n = block.n
    b1, b2, dlt, lam = params.beta1, params.beta2, params.detuning, params.lambda_eff
    centre = (params.omega * n + 0.5 * params.omega0 + 0.5 * b1 * (n + 2)
              + 0.5 * b2 * n - 0.5 * dlt)
    # split = h22 - h11
    split = b1 * (n + 2) - b2 * (n + 1) + b2 - dlt
    half_gap = 0.5 * math.sqrt(split * split + 4.0 * lam * lam * (n + 1) * (n + 2))
    # e-branch lies above the g-branch iff h11 >= h22
    sign = 1.0 if split <= 0 else -1.0
    return centre + sign * half_gap, centre - sign * half_gap


@dataclass(frozen=True)
class DispersiveReport:
    n_max: int
    ratios: List[Tuple[float, float]]
    threshold: float
    valid: bool


def dispersive_report(params: ModelParams, n_max: int,
                      threshold: float = DEFAULT_DISPERSIVE_THRESHOLD) -> DispersiveReport:
    """Perturbation ratios beta1(n+2)/|delta-beta2| and beta2(n+1)/|delta-beta2| for n <= n_max."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    _require(params, "detuning")
    gap = abs(params.detuning - params.beta2)
    if gap == 0:
        raise ParameterError("detuning equals beta2: dispersive ratios are singular")
    ratios = [(abs(params.beta1) * (n + 2) / gap, abs(params.beta2) * (n + 1) / gap)
              for n in range(n_max + 1)]
    valid = all(r1 < threshold and r2 < threshold for r1, r2 in ratios)
    return DispersiveReport(n_max=n_max, ratios=ratios, threshold=threshold, valid=valid)


def dispersive_eigenvalues(params: ModelParams, n: int,
                           threshold: float = DEFAULT_DISPERSIVE_THRESHOLD) -> Tuple[float, float]:
    report = dispersive_report(params, n, threshold)
    if not report.valid:
        worst = max(max(r) for r in report.ratios)
        raise DispersiveError(f"dispersive ratio {worst:.3g} exceeds threshold {threshold}")
    _require(params, "omega", "omega0")
    base = params.omega * n + 0.5 * params.omega0
    shift = params.omega_shift * (n + 1) * (n + 2)
    e_plus = base + params.beta2 * n + shift
    e_minus = base - params.detuning + params.beta1 * (n + 2) - shift
    return e_plus, e_minus


def effective_diagonal(params: ModelParams, n: int, atom_level: str) -> float:
    """<atom, n| H_eff |atom, n> for the dispersive effective Hamiltonian."""
    if n < 0:
        raise ValueError("photon index must be non-negative")
    _require(params, "omega", "omega0")
    om = params.omega_shift
    if atom_level == "e":
        return params.omega * n + 0.5 * params.omega0 + params.beta2 * n + om * (n + 1) * (n + 2)
    if atom_level == "g":
        return params.omega * n - 0.5 * params.omega0 + params.beta1 * n - om * n * (n - 1)
    raise ValueError(f"atom_level must be 'e' or 'g', got {atom_level!r}")
