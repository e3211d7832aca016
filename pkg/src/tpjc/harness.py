"""Entropy sweeps, CSV traces and the oracle validation suite."""
from __future__ import annotations

import datetime as _dt
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .errors import TPJCError
from .liouville import (
    amplitude_moment,
    entropy_from_state,
    field_state,
    kernel_arrays,
    linear_entropy,
    superop_commutators_check,
)
from .model import ModelParams, choose_truncation, coherent_vector, params_from_ratios, poisson_tail
from .oracle import IntegratorConfig, oracle_field_states, unitary_reference

log = logging.getLogger(__name__)

MODES = ("fig1", "fig2", "custom", "validate")
FIG1_KAPPAS = (0.02, 0.04, 0.1)
FIG2_NBARS = (1.0, 2.0, 3.0)
FIG_KAPPA = 0.04
FIG_BETA_DIFF = 0.02
CSV_COLUMNS = ("omega_t", "s_f", "trace", "tail", "abs_a1")
OUT_ENV = "TPJC_OUT"


class ConfigError(TPJCError, ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    """One run of the harness; all rates are in units of Omega.

    ``kappas``/``nbars`` left as ``None`` take the preset values of the
    selected mode.  ``min_kappa_t`` stretches each trace's horizon to at least
    that many damping times, keeping the sample density of the base grid.
    """

    mode: str = "fig1"
    kappas: Optional[Tuple[float, ...]] = None
    nbars: Optional[Tuple[float, ...]] = None
    beta_diff: float = FIG_BETA_DIFF
    beta1: float = 1.0
    t_max: float = 30.0
    samples: int = 600
    epsilon: float = 1e-14
    out: str = "traces"
    min_kappa_t: float = 0.0
    validate_times: Tuple[float, ...] = (1.0, 5.0, 15.0)
    corrupt_kernel: bool = False
    jobs: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.t_max > 0:
            raise ConfigError("tmax must be positive")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.kappas is not None and any(k < 0 for k in self.kappas):
            raise ConfigError("kappa/Omega must be non-negative")
        if self.nbars is not None and any(n < 0 for n in self.nbars):
            raise ConfigError("nbar must be non-negative")
        if self.min_kappa_t < 0:
            raise ConfigError("min_kappa_t must be non-negative")

    def grid_for(self, kappa: float) -> np.ndarray:
        t_max = self.t_max
        if self.min_kappa_t > 0 and kappa > 0:
            t_max = max(t_max, self.min_kappa_t / kappa)
        samples = int(round((self.samples - 1) * t_max / self.t_max)) + 1
        return np.linspace(0.0, t_max, samples)


@dataclass
class EntropyTrace:
    omega_t: np.ndarray
    s_f: np.ndarray
    trace: np.ndarray
    tail: np.ndarray
    abs_a1: np.ndarray
    metadata: Dict[str, str] = field(default_factory=dict)

    def rows(self):
        return zip(self.omega_t, self.s_f, self.trace, self.tail, self.abs_a1)

    def body(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        lines += [",".join(f"{x:.17g}" for x in row) for row in self.rows()]
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        meta = dict(self.metadata)
        meta.setdefault("generated", _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
        header = "".join(f"# {k}={v}\n" for k, v in meta.items())
        path.write_text(header + self.body())
        return path

    @classmethod
    def from_csv(cls, path) -> "EntropyTrace":
        meta = {}
        data = []
        with open(path) as fh:
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    meta[key] = value
                elif line.startswith(CSV_COLUMNS[0]):
                    continue
                elif line.strip():
                    data.append([float(x) for x in line.split(",")])
        cols = np.array(data).T if data else np.zeros((len(CSV_COLUMNS), 0))
        return cls(*cols, metadata=meta)

    def check(self) -> List[str]:
        """Row invariants; returns a list of violations (empty when clean)."""
        problems = []
        if np.any(np.diff(self.omega_t) <= 0):
            problems.append("omega_t not strictly increasing")
        if np.any((self.s_f < 0) | (self.s_f >= 1)):
            problems.append("s_f outside [0, 1)")
        if np.any(np.abs(self.trace - 1) > self.tail + 1e-9):
            problems.append("trace deviates beyond tail bound")
        return problems


def compute_trace(params: ModelParams, times: Sequence[float], dim: int,
                  metadata: Optional[Dict[str, str]] = None) -> EntropyTrace:
    times = np.asarray(times, dtype=float)
    s_f = linear_entropy(params, times, dim)
    p = np.abs(coherent_vector(params.alpha, dim).amplitudes) ** 2
    m = np.arange(dim)
    gamma_diag, _, _ = kernel_arrays(params, m[None, :], m[None, :], times[:, None])
    trace = np.exp(gamma_diag) @ p
    tail = np.array([poisson_tail(params.nbar * math.exp(-2 * params.kappa * t), dim) for t in times])
    abs_a1 = np.array([abs(amplitude_moment(params, 1, t)) for t in times])
    return EntropyTrace(times, s_f, trace, tail, abs_a1, dict(metadata or {}))


def _members(config: SweepConfig) -> List[Tuple[str, float, float]]:
    """(label, kappa, nbar) for every trace the mode produces."""
    if config.mode == "fig1":
        kappas = config.kappas or FIG1_KAPPAS
        nbar = (config.nbars or (1.0,))[0]
        return [(f"fig1_{chr(97 + i)}_kappa{k:g}", k, nbar) for i, k in enumerate(kappas)]
    if config.mode == "fig2":
        nbars = config.nbars or FIG2_NBARS
        kappa = (config.kappas or (FIG_KAPPA,))[0]
        return [(f"fig2_{chr(97 + i)}_nbar{n:g}", kappa, n) for i, n in enumerate(nbars)]
    kappas = config.kappas or (FIG_KAPPA,)
    nbars = config.nbars or (1.0,)
    return [(f"custom_kappa{k:g}_nbar{n:g}", k, n) for k in kappas for n in nbars]


def _run_member(config: SweepConfig, label: str, kappa: float, nbar: float) -> Tuple[str, EntropyTrace, int]:
    params = params_from_ratios(kappa, config.beta_diff, nbar, config.beta1)
    dim = choose_truncation(params.alpha, config.t_max, config.epsilon) + 1
    meta = {
        "tpjc_version": __version__,
        "mode": config.mode,
        "label": label,
        "kappa_over_omega": f"{kappa!r}",
        "beta_diff_over_omega": f"{config.beta_diff!r}",
        "beta1_over_omega": f"{config.beta1!r}",
        "nbar": f"{nbar!r}",
        "dim": str(dim),
        "epsilon": f"{config.epsilon!r}",
    }
    return label, compute_trace(params, config.grid_for(kappa), dim, meta), dim


def run_sweep(config: SweepConfig, write: bool = True) -> Dict[str, EntropyTrace]:
    """Compute every trace of a fig1/fig2/custom config, optionally writing CSVs."""
    if config.mode == "validate":
        raise ConfigError("run_sweep does not handle validate mode")
    members = _members(config)
    jobs = config.jobs or min(len(members), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(lambda m: _run_member(config, *m), members))
    traces = {}
    for label, trace, dim in results:
        traces[label] = trace
        if write:
            path = trace.to_csv(Path(config.out) / f"{label}.csv")
            log.info("wrote %s (dim=%d, %d rows)", path, dim, len(trace.omega_t))
    return traces


def run_fig1(config: SweepConfig, write: bool = True) -> Dict[str, EntropyTrace]:
    if config.mode != "fig1":
        raise ConfigError("run_fig1 needs mode=fig1")
    return run_sweep(config, write)


def run_fig2(config: SweepConfig, write: bool = True) -> Dict[str, EntropyTrace]:
    if config.mode != "fig2":
        raise ConfigError("run_fig2 needs mode=fig2")
    return run_sweep(config, write)


def corrupted_kernel(params, m, n, t):
    """Kernel with a small spurious phase on the g branch; validation must flag it."""
    gamma, theta_g, theta_e = kernel_arrays(params, m, n, t)
    return gamma, theta_g + 1e-3 * (np.asarray(m) - np.asarray(n)) * np.asarray(t), theta_e


@dataclass
class CheckResult:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.3e} (tol {self.tol:.0e})"


@dataclass
class ValidationReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        lines = [c.line() for c in self.checks]
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _validation_sets(config: SweepConfig) -> List[Tuple[str, float, float]]:
    if config.kappas or config.nbars:
        return [(f"kappa{k:g}_nbar{n:g}", k, n)
                for k in (config.kappas or (FIG_KAPPA,)) for n in (config.nbars or (1.0,))]
    sets = [(f"fig1{chr(97 + i)}", k, 1.0) for i, k in enumerate(FIG1_KAPPAS)]
    sets += [(f"fig2{chr(97 + i)}", FIG_KAPPA, n) for i, n in enumerate(FIG2_NBARS)]
    return sets


def run_validate(config: SweepConfig, write: bool = True) -> ValidationReport:
    """Closed form against the brute-force oracle plus structural checks."""
    kfn = corrupted_kernel if config.corrupt_kernel else kernel_arrays
    report = ValidationReport()
    times = sorted(config.validate_times)
    gate = IntegratorConfig(check_convergence=True)

    for name, kappa, nbar in _validation_sets(config):
        params = params_from_ratios(kappa, config.beta_diff, nbar, config.beta1)
        dim = choose_truncation(params.alpha, max(times), config.epsilon) + 1
        oracle = oracle_field_states(params, times, dim, gate)
        dev = max(float(np.max(np.abs(field_state(params, t, dim, kfn).entries - o.entries)))
                  for t, o in zip(times, oracle))
        report.checks.append(CheckResult(f"oracle equivalence {name}", dev, 1e-6))

    lossless = params_from_ratios(0.0, config.beta_diff, 1.0, config.beta1)
    dim = choose_truncation(lossless.alpha, 0, config.epsilon) + 1
    dev = max(float(np.max(np.abs(field_state(lossless, t, dim, kfn).entries
                                  - unitary_reference(lossless, t, dim).entries))) for t in times)
    report.checks.append(CheckResult("lossless closed form vs unitary reference", dev, 1e-10))

    fig1b = params_from_ratios(FIG1_KAPPAS[1], config.beta_diff, 1.0, config.beta1)
    dim = choose_truncation(fig1b.alpha, config.t_max, config.epsilon) + 1
    grid = np.linspace(0.0, config.t_max, config.samples)
    series = linear_entropy(fig1b, grid, dim, kernel_fn=kfn)
    purity = np.array([entropy_from_state(field_state(fig1b, t, dim, kfn)) for t in grid])
    report.checks.append(CheckResult("dual-path entropy fig1b", float(np.max(np.abs(series - purity))), 1e-9))

    report.checks.append(CheckResult("superoperator commutators dim 8",
                                     0.0 if superop_commutators_check(8) else 1.0, 1e-12))

    m, n = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    antisym = 0.0
    for t in times:
        _, tg, te = kfn(fig1b, m, n, t)
        antisym = max(antisym, float(np.max(np.abs(tg + tg.T))), float(np.max(np.abs(te + te.T))))
    report.checks.append(CheckResult("kernel antisymmetry", antisym, 1e-12))

    shifted = fig1b.replace(beta1=fig1b.beta1 + 0.37, beta2=fig1b.beta2 + 0.37)
    shift_dev = float(np.max(np.abs(linear_entropy(shifted, grid, dim, kernel_fn=kfn) - series)))
    report.checks.append(CheckResult("beta-shift invariance of S_f", shift_dev, 1e-12))

    if write:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "validation_report.txt").write_text(report.text())
    return report


def with_overrides(config: SweepConfig, **changes) -> SweepConfig:
    return replace(config, **{k: v for k, v in changes.items() if v is not None})
