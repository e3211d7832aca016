"""Model constants, coherent-state amplitudes and truncated field density matrices.

Two ways to build a :class:`ModelParams`:

* from raw couplings (field/atom frequencies, the two intermediate-level
  couplings and the intermediate detuning), deriving the Stark coefficients,
  the two-photon coupling and the dispersive shift;
* from dimensionless ratios in units of the dispersive shift (``Omega = 1``),
  which is how the entropy sweeps are specified.

Detuning convention: ``detuning = omega0 - 2*omega``.  With this sign the block
Hamiltonian, its exact eigenvalues, the dispersive energies and the effective
Hamiltonian are mutually consistent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import ParameterError, TruncationError

DEFAULT_TAIL_CEILING = 1e-10
_IDENTITY_TOL = 1e-12


def _frozen(arr):
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelParams:
    """All model constants (hbar = 1, frequencies in rad/time).

    Raw-coupling fields (``omega``, ``omega0``, ``lambda1``, ``lambda2``,
    ``delta_int``) are ``None`` when the parameters were given as ratios.
    """

    beta1: float
    beta2: float
    omega_shift: float
    kappa: float
    alpha: complex
    detuning: Optional[float] = None
    lambda_eff: Optional[float] = None
    omega: Optional[float] = None
    omega0: Optional[float] = None
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    delta_int: Optional[float] = None
    omega_sign: str = "signed"

    def __post_init__(self):
        if self.kappa < 0:
            raise ParameterError(f"kappa must be non-negative, got {self.kappa}")
        if self.omega_sign not in ("signed", "absolute"):
            raise ParameterError(f"omega_sign must be 'signed' or 'absolute', got {self.omega_sign!r}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.has_raw_couplings:
            self.check_identities()

    @property
    def has_raw_couplings(self) -> bool:
        return None not in (self.lambda1, self.lambda2, self.delta_int)

    @property
    def nbar(self) -> float:
        """Mean photon number |alpha|^2 of the initial coherent state."""
        return abs(self.alpha) ** 2

    @property
    def omega_g(self) -> float:
        return self.beta1 + self.omega_shift

    @property
    def omega_e(self) -> float:
        return self.beta2 + 3.0 * self.omega_shift

    def check_identities(self, tol: float = _IDENTITY_TOL) -> None:
        """Re-verify the Stark/coupling identities for raw-coupling parameters."""
        if not self.has_raw_couplings:
            return
        d = self.delta_int
        checks = {
            "beta1": (self.beta1, self.lambda1**2 / d),
            "beta2": (self.beta2, self.lambda2**2 / d),
            "lambda_eff": (self.lambda_eff, self.lambda1 * self.lambda2 / d),
            "omega_shift": (self.omega_shift, _dispersive_shift(self.beta1, self.beta2, self.detuning, self.omega_sign)),
        }
        for name, (got, want) in checks.items():
            if not math.isclose(got, want, rel_tol=tol, abs_tol=tol):
                raise ParameterError(f"{name}={got!r} inconsistent with couplings (expected {want!r})")

    def replace(self, **changes) -> "ModelParams":
        """Copy with changed fields; derived-field consistency is the caller's business."""
        return replace(self, **changes)


def _dispersive_shift(beta1, beta2, detuning, omega_sign):
    gap = detuning - beta2
    if gap == 0:
        raise ParameterError("detuning equals beta2: dispersive shift is singular")
    if omega_sign == "absolute":
        gap = abs(gap)
    return beta1 * beta2 / gap


@dataclass(frozen=True)
class RawCouplings:
    omega: float
    omega0: float
    lambda1: float
    lambda2: float
    delta_int: float
    kappa: float = 0.0
    alpha: complex = 0.0


@dataclass(frozen=True)
class DimensionlessRatios:
    """Parameters in units of the dispersive shift Omega.

    ``kappa`` is kappa/Omega, ``beta_diff`` is (beta2 - beta1)/Omega,
    ``beta1`` is beta1/Omega and ``nbar`` is |alpha|^2.  ``alpha`` overrides
    ``nbar`` when a complex amplitude is needed.
    """

    kappa: float
    beta_diff: float
    nbar: float = 1.0
    beta1: float = 1.0
    alpha: Optional[complex] = None


def build_params(raw: Optional[RawCouplings] = None,
                 ratios: Optional[DimensionlessRatios] = None,
                 omega_sign: str = "signed") -> ModelParams:
    """Build :class:`ModelParams` from exactly one of ``raw`` or ``ratios``."""
    if (raw is None) == (ratios is None):
        raise ParameterError("supply exactly one of raw couplings or dimensionless ratios")

    if raw is not None:
        if raw.delta_int == 0:
            raise ParameterError("intermediate detuning must be non-zero")
        beta1 = raw.lambda1**2 / raw.delta_int
        beta2 = raw.lambda2**2 / raw.delta_int
        detuning = raw.omega0 - 2.0 * raw.omega
        return ModelParams(
            beta1=beta1,
            beta2=beta2,
            omega_shift=_dispersive_shift(beta1, beta2, detuning, omega_sign),
            kappa=raw.kappa,
            alpha=raw.alpha,
            detuning=detuning,
            lambda_eff=raw.lambda1 * raw.lambda2 / raw.delta_int,
            omega=raw.omega,
            omega0=raw.omega0,
            lambda1=raw.lambda1,
            lambda2=raw.lambda2,
            delta_int=raw.delta_int,
            omega_sign=omega_sign,
        )

    if ratios.nbar < 0:
        raise ParameterError("nbar must be non-negative")
    alpha = ratios.alpha if ratios.alpha is not None else math.sqrt(ratios.nbar)
    beta1 = float(ratios.beta1)
    beta2 = beta1 + float(ratios.beta_diff)
    # Omega = 1 fixes the detuning through Omega = beta1*beta2/(detuning - beta2).
    return ModelParams(
        beta1=beta1,
        beta2=beta2,
        omega_shift=1.0,
        kappa=float(ratios.kappa),
        alpha=alpha,
        detuning=beta2 + beta1 * beta2,
        omega_sign=omega_sign,
    )


def params_from_ratios(kappa: float, beta_diff: float, nbar: float = 1.0,
                       beta1: float = 1.0) -> ModelParams:
    return build_params(ratios=DimensionlessRatios(kappa=kappa, beta_diff=beta_diff,
                                                   nbar=nbar, beta1=beta1))


def poisson_tail(mean: float, dim: int) -> float:
    """Probability mass of Poisson(mean) at or above ``dim``."""
    if mean == 0:
        return 0.0
    if dim <= 0:
        return 1.0
    # P(X >= dim) is the regularised lower incomplete gamma P(dim, mean)
    return float(gammainc(dim, mean))


@dataclass(frozen=True)
class CoherentVector:
    amplitudes: np.ndarray
    tail_bound: float

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen(self.amplitudes.astype(complex)))

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def projector(self) -> "FieldDensityMatrix":
        a = self.amplitudes
        return FieldDensityMatrix(np.outer(a, a.conj()), tail_bound=self.tail_bound)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """alpha^n exp(-|alpha|^2/2)/sqrt(n!) for n < dim, evaluated in log space."""
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    r = abs(alpha)
    log_mag = n * math.log(r) - 0.5 * r * r - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def coherent_vector(alpha: complex, dim: int, ceiling: float = DEFAULT_TAIL_CEILING) -> CoherentVector:
    if dim < 1:
        raise ValueError("dim must be at least 1")
    tail = poisson_tail(abs(alpha) ** 2, dim)
    if tail > ceiling:
        raise TruncationError(f"dim={dim} leaves tail {tail:.3e} above ceiling {ceiling:.1e} for |alpha|={abs(alpha):g}")
    return CoherentVector(coherent_amplitudes(alpha, dim), tail)


def choose_truncation(alpha: complex, horizon: float = 0.0, epsilon: float = 1e-12) -> int:
    """Smallest top Fock index N whose Poisson tail above N is below ``epsilon``.

    Under zero-temperature damping the photon distribution only shifts toward
    vacuum, so the initial tail bounds the tail at every later time and
    ``horizon`` does not enter.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    mean = abs(alpha) ** 2
    if mean == 0:
        return 0
    # the tail is below 1/2 from the mean upward, so scan from there
    n = int(mean)
    while poisson_tail(mean, n + 1) >= epsilon:
        n += 1
    return n


@dataclass(frozen=True)
class FieldDensityMatrix:
    """Truncated number-basis field density matrix <m|rho|n>, 0 <= m, n < dim."""

    entries: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {e.shape}")
        object.__setattr__(self, "entries", _frozen(e))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    @property
    def purity(self) -> float:
        """trace(rho^2), using Hermiticity: sum of |rho_mn|^2."""
        return float(np.sum(np.abs(self.entries) ** 2))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def check(self, herm_tol: float = 1e-12, diag_tol: float = 1e-10, trace_slack: float = 1e-12) -> None:
        """Raise ``AssertionError`` if an invariant of the container is violated."""
        assert self.hermiticity_defect() <= herm_tol, "not Hermitian"
        diag = np.diag(self.entries)
        assert np.all(np.abs(diag.imag) <= herm_tol), "complex diagonal"
        assert np.all(diag.real >= -diag_tol), "negative population"
        assert abs(self.trace - 1) <= self.tail_bound + trace_slack, "trace outside tail bound"

    def __add__(self, other: "FieldDensityMatrix") -> "FieldDensityMatrix":
        return FieldDensityMatrix(self.entries + other.entries,
                                  tail_bound=max(self.tail_bound, other.tail_bound))


__all__ = [
    "DEFAULT_TAIL_CEILING",
    "CoherentVector",
    "DimensionlessRatios",
    "FieldDensityMatrix",
    "ModelParams",
    "RawCouplings",
    "build_params",
    "choose_truncation",
    "coherent_amplitudes",
    "coherent_vector",
    "params_from_ratios",
    "poisson_tail",
]
