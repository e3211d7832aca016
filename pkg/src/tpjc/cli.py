"""Command-line entry point: ``tpjc --mode fig1|fig2|custom|validate``.

Settings come from defaults, then a ``key=value`` config file, then the
``TPJC_OUT`` environment variable (output directory), then flags.
Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import TPJCError
from .harness import OUT_ENV, ConfigError, SweepConfig, run_sweep, run_validate

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


def _floats(text):
    return tuple(float(x) for x in str(text).split(",") if x.strip())


# config-file key -> (SweepConfig field, parser)
KEYS = {
    "mode": ("mode", str),
    "kappa": ("kappas", _floats),
    "nbar": ("nbars", _floats),
    "beta_diff": ("beta_diff", float),
    "beta1": ("beta1", float),
    "tmax": ("t_max", float),
    "samples": ("samples", int),
    "epsilon": ("epsilon", float),
    "out": ("out", str),
    "min_kappa_t": ("min_kappa_t", float),
    "validate_times": ("validate_times", _floats),
    "corrupt_kernel": ("corrupt_kernel", lambda s: str(s).strip().lower() in ("1", "true", "yes", "on")),
    "jobs": ("jobs", int),
}


def read_config_file(path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in KEYS:
                raise ConfigError(f"{path}:{lineno}: cannot parse {raw.strip()!r}")
            field, parse = KEYS[key]
            try:
                values[field] = parse(value.strip())
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tpjc", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--mode", choices=["fig1", "fig2", "custom", "validate"])
    p.add_argument("--kappa", type=_floats, help="comma-separated kappa/Omega values")
    p.add_argument("--nbar", type=_floats, help="comma-separated mean photon numbers |alpha|^2")
    p.add_argument("--beta-diff", type=float, help="(beta2 - beta1)/Omega")
    p.add_argument("--beta1", type=float, help="beta1/Omega (does not affect S_f)")
    p.add_argument("--tmax", type=float, help="time horizon in units of 1/Omega")
    p.add_argument("--samples", type=int, help="number of time samples")
    p.add_argument("--epsilon", type=float, help="Fock truncation tail probability")
    p.add_argument("--out", help=f"output directory (also ${OUT_ENV})")
    p.add_argument("--min-kappa-t", type=float, help="stretch horizons to at least this kappa*t")
    p.add_argument("--validate-times", type=_floats, help="Omega*t checkpoints for validate mode")
    p.add_argument("--corrupt-kernel", action="store_true", default=None,
                   help="validate mode self-test: inject a faulty kernel")
    p.add_argument("--jobs", type=int, help="concurrent sweep members (0 = auto)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace, environ=os.environ) -> SweepConfig:
    values = read_config_file(args.config) if args.config else {}
    if environ.get(OUT_ENV):
        values["out"] = environ[OUT_ENV]
    flags = {
        "mode": args.mode, "kappas": args.kappa, "nbars": args.nbar, "beta_diff": args.beta_diff,
        "beta1": args.beta1, "t_max": args.tmax, "samples": args.samples, "epsilon": args.epsilon,
        "out": args.out, "min_kappa_t": args.min_kappa_t, "validate_times": args.validate_times,
        "corrupt_kernel": args.corrupt_kernel, "jobs": args.jobs,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    return SweepConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
    except (ConfigError, OSError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if config.mode == "validate":
            report = run_validate(config)
            sys.stdout.write(report.text())
            return EXIT_OK if report.passed else EXIT_VALIDATION
        traces = run_sweep(config)
    except TPJCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc, ConfigError) else EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    for label, trace in traces.items():
        bad = trace.check()
        print(f"{label}: {len(trace.omega_t)} rows, max S_f={trace.s_f.max():.4f}"
              + (f"  [{'; '.join(bad)}]" if bad else ""))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
