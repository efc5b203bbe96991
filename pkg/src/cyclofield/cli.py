"""Batch command-line front end.

Every subcommand reads a JSON config, runs the corresponding library
operations, and writes CSV/JSON artifacts into an output directory.  Float
formatting is fixed (17 significant digits) and files are written atomically,
so rerunning an identical config reproduces byte-identical artifacts; each
artifact carries the config hash in a leading comment line.

    cyclofield <command> --config <file.json> [--out <dir>] [--seed <u64>]
               [--threads <k>]

Commands: covariance, bfunc, lfunc, closed-form-audit, weights-audit,
theorem1, theorem2, simulate, figures.  Exit codes: 0 on success with all
diagnostics passing, 1 when a pass/fail diagnostic fails, 2 on config
errors, 3 on numerical non-convergence.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys

import numpy as np

from . import _io
from .covariance import audit_closed_forms, covariance_Bn, curve, functional_bn
from .limits import (
    NormalizedFunctionalSpec,
    convergence_diagnostic,
    degeneration_diagnostic,
)
from .quad import ConvergenceError, QuadratureSpec
from .sim import empirical_cov
from .spectral import density_from_dict
from .weights import (
    KernelAdmissibilityError,
    certify,
    kernel_from_dict,
    square_integral,
)

__all__ = ["main"]

COMMANDS = (
    "covariance",
    "bfunc",
    "lfunc",
    "closed-form-audit",
    "weights-audit",
    "theorem1",
    "theorem2",
    "simulate",
    "figures",
)


class ConfigError(ValueError):
    pass


_COMMON_KEYS = {"command", "quad", "seed", "output_dir"}

_ALLOWED_KEYS = {
    "covariance": _COMMON_KEYS | {"density", "r_grid"},
    "bfunc": _COMMON_KEYS | {"density", "r_grid"},
    "lfunc": _COMMON_KEYS | {"density", "r_grid"},
    "closed-form-audit": _COMMON_KEYS | {"count", "tolerance"},
    "weights-audit": _COMMON_KEYS | {"kernel"},
    "theorem1": _COMMON_KEYS
    | {"density", "kernel", "j", "times", "r_ladder", "final_delta_rel"},
    "theorem2": _COMMON_KEYS
    | {"density", "kernel", "a", "alpha", "t", "r_ladder", "ratio_threshold"},
    "simulate": _COMMON_KEYS | {"density", "lags", "M", "replicates"},
    "figures": _COMMON_KEYS | {"density", "r_grid", "label"},
}

_REQUIRED_KEYS = {
    "covariance": {"density", "r_grid"},
    "bfunc": {"density", "r_grid"},
    "lfunc": {"density", "r_grid"},
    "closed-form-audit": set(),
    "weights-audit": {"kernel"},
    "theorem1": {"density", "kernel", "j", "r_ladder"},
    "theorem2": {"density", "kernel", "a", "alpha", "r_ladder"},
    "simulate": {"density", "lags", "M", "replicates"},
    "figures": {"density"},
}


def _validate_keys(command: str, config: dict) -> None:
    allowed = _ALLOWED_KEYS[command]
    for key in config:
        if key not in allowed:
            raise ConfigError(
                f"config key '{key}' is not recognized for command '{command}'; "
                f"allowed keys: {sorted(allowed)}"
            )
    missing = _REQUIRED_KEYS[command] - set(config)
    if missing:
        raise ConfigError(
            f"command '{command}' requires config keys {sorted(missing)}"
        )
    declared = config.get("command")
    if declared is not None and declared != command:
        raise ConfigError(
            f"config declares command '{declared}' but '{command}' was invoked"
        )


def _quad_spec(config: dict) -> QuadratureSpec:
    doc = config.get("quad", {})
    if not isinstance(doc, dict):
        raise ConfigError("quad: must be an object")
    allowed = {"rel_tol", "abs_tol", "max_subdivisions"}
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"quad.{key}: unknown key; allowed: {sorted(allowed)}")
    try:
        return QuadratureSpec(
            rel_tol=float(doc.get("rel_tol", 1e-8)),
            abs_tol=float(doc.get("abs_tol", 1e-12)),
            max_subdivisions=int(doc.get("max_subdivisions", 2000)),
        )
    except ValueError as exc:
        raise ConfigError(f"quad: {exc}") from exc


def _density(config: dict):
    try:
        return density_from_dict(config["density"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"density: {exc}") from exc


def _kernel(config: dict):
    try:
        return kernel_from_dict(config["kernel"])
    except KernelAdmissibilityError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"kernel: {exc}") from exc


def _r_grid(config: dict, default=None) -> list[float]:
    doc = config.get("r_grid", default)
    if doc is None:
        raise ConfigError("r_grid: required")
    if isinstance(doc, dict):
        extra = set(doc) - {"start", "stop", "num"}
        if extra:
            raise ConfigError(f"r_grid: unknown keys {sorted(extra)}")
        try:
            grid = np.linspace(float(doc["start"]), float(doc["stop"]), int(doc["num"]))
        except KeyError as exc:
            raise ConfigError(f"r_grid: missing key {exc}") from exc
        return [float(r) for r in grid]
    if isinstance(doc, list) and doc:
        return [float(r) for r in doc]
    raise ConfigError("r_grid: must be a nonempty list or {start, stop, num}")


def _positive_list(config: dict, key: str) -> list[float]:
    doc = config.get(key)
    if not isinstance(doc, list) or not doc:
        raise ConfigError(f"{key}: must be a nonempty list")
    return [float(v) for v in doc]


def _map_ordered(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _config_hash(command: str, config: dict) -> str:
    canonical = json.dumps({"command": command, **config}, sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _out_path(config: dict, name: str) -> str:
    directory = config.get("output_dir", ".")
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, name)


# ---------------------------------------------------------------------------
# Command implementations; each returns the exit status.
# ---------------------------------------------------------------------------


def _run_curve(command: str, config: dict, threads: int, tag: str) -> int:
    density = _density(config)
    spec = _quad_spec(config)
    grid = _r_grid(config)
    kind = {"covariance": "Bn", "bfunc": "bn", "lfunc": "ln"}[command]
    if kind == "ln" and density.n < 2:
        raise ConfigError("lfunc: the sphere functional requires n >= 2")
    if kind != "Bn" and any(r <= 0.0 for r in grid):
        raise ConfigError(f"{command}: radii must be positive")
    result = curve(kind, density, grid, spec)
    result.write_csv(_out_path(config, f"{command}.csv"), tag)
    return 0


def _run_audit(config: dict, threads: int, tag: str) -> int:
    spec = _quad_spec(config)
    count = int(config.get("count", 20))
    tolerance = float(config.get("tolerance", 1e-5))
    report = audit_closed_forms(spec, count=count, tolerance=tolerance)
    report.write_csv(_out_path(config, "closed_form_audit.csv"), tag)
    _io.write_json(_out_path(config, "closed_form_audit.json"), report.to_dict(), tag)
    return 0 if report.all_accounted else 1


def _run_weights_audit(config: dict, threads: int, tag: str) -> int:
    spec = _quad_spec(config)
    violations = []
    decay = None
    l2 = None
    try:
        kern = _kernel(config)
        decay = kern.decay_constant if kern.certified else certify(kern)
    except KernelAdmissibilityError as exc:
        violations.append(str(exc))
        kern = None
    if kern is not None:
        try:
            l2, _ = square_integral(kern, spec)
        except (KernelAdmissibilityError, ConvergenceError) as exc:
            violations.append(str(exc))
    doc = {
        "kernel": config["kernel"],
        "decay_constant": decay,
        "l2_mass": l2,
        "admissible": not violations,
        "violations": violations,
    }
    _io.write_json(_out_path(config, "weights_audit.json"), doc, tag)
    return 0 if not violations else 1


def _run_theorem1(config: dict, threads: int, tag: str) -> int:
    density = _density(config)
    kern = _kernel(config)
    spec = _quad_spec(config)
    times = tuple(config.get("times", (0.25, 0.5, 1.0)))
    j = int(config["j"])
    try:
        fspec = NormalizedFunctionalSpec(
            density=density,
            kernel=kern,
            alpha=density.singularities[j - 1][1] if 1 <= j <= len(density.singularities) else -1.0,
            j=j,
            times=times,
        )
    except (ValueError, IndexError) as exc:
        raise ConfigError(str(exc)) from exc
    report = convergence_diagnostic(
        fspec,
        _positive_list(config, "r_ladder"),
        spec,
        final_delta_rel=float(config.get("final_delta_rel", 0.02)),
    )
    report.write_json(_out_path(config, "theorem1_report.json"), tag)
    report.write_csv(_out_path(config, "theorem1_delta.csv"), tag)
    return 0 if report.passed else 1


def _run_theorem2(config: dict, threads: int, tag: str) -> int:
    density = _density(config)
    kern = _kernel(config)
    spec = _quad_spec(config)
    try:
        report = degeneration_diagnostic(
            density,
            float(config["a"]),
            float(config["alpha"]),
            kern,
            float(config.get("t", 1.0)),
            _positive_list(config, "r_ladder"),
            spec,
            ratio_threshold=float(config.get("ratio_threshold", 0.1)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report.write_json(_out_path(config, "theorem2_report.json"), tag)
    report.write_csv(_out_path(config, "theorem2_variance.csv"), tag)
    return 0 if report.passed else 1


def _run_simulate(config: dict, threads: int, tag: str) -> int:
    density = _density(config)
    lags = _positive_list(config, "lags") if config["lags"] else []
    if any(l < 0 for l in lags):
        raise ConfigError("lags: must be nonnegative")
    try:
        rows = empirical_cov(
            density,
            config["lags"],
            M=int(config["M"]),
            replicates=int(config["replicates"]),
            seed=int(config.get("seed", 0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _io.write_csv(
        _out_path(config, "empirical_cov.csv"),
        ["lag", "estimate", "stderr"],
        [(float(l), float(e), float(s)) for l, e, s in rows],
        tag,
    )
    return 0


def _run_figures(config: dict, threads: int, tag: str) -> int:
    density = _density(config)
    if density.n != 3:
        raise ConfigError("figures: the figure data is defined for n = 3 densities")
    spec = _quad_spec(config)
    grid = _r_grid(config, default={"start": 0.1, "stop": 50.0, "num": 250})
    if any(r <= 0.0 for r in grid):
        raise ConfigError("figures: radii must be positive")
    label = str(config.get("label", "density"))

    def b_value(r: float) -> float:
        return covariance_Bn(density, r, spec)

    def bn_value(r: float) -> float:
        return functional_bn(density, r, spec)

    b_vals = _map_ordered(b_value, grid, threads)
    bn_vals = _map_ordered(bn_value, grid, threads)

    def with_errors(values, scale):
        rows = []
        for r, v in zip(grid, values):
            scaled = v * scale(r)
            rows.append((r, scaled, max(spec.rel_tol * abs(scaled), spec.abs_tol)))
        return rows

    outputs = {
        f"{label}_B3.csv": with_errors(b_vals, lambda r: 1.0),
        f"{label}_r2B3.csv": with_errors(b_vals, lambda r: r * r),
        f"{label}_b3.csv": with_errors(bn_vals, lambda r: 1.0),
        f"{label}_rm4b3.csv": with_errors(bn_vals, lambda r: r**-4),
    }
    for name, rows in outputs.items():
        _io.write_csv(
            _out_path(config, name),
            ["r", "value", "error"],
            [(float(a), float(b), float(c)) for a, b, c in rows],
            tag,
        )
    return 0


_RUNNERS = {
    "covariance": lambda cfg, thr, tag: _run_curve("covariance", cfg, thr, tag),
    "bfunc": lambda cfg, thr, tag: _run_curve("bfunc", cfg, thr, tag),
    "lfunc": lambda cfg, thr, tag: _run_curve("lfunc", cfg, thr, tag),
    "closed-form-audit": _run_audit,
    "weights-audit": _run_weights_audit,
    "theorem1": _run_theorem1,
    "theorem2": _run_theorem2,
    "simulate": _run_simulate,
    "figures": _run_figures,
}


def run(command: str, config: dict, threads: int = 1) -> int:
    """Validate the config and execute one command; returns the exit status."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command '{command}'; available: {COMMANDS}")
    _validate_keys(command, config)
    tag = _config_hash(command, config)
    return _RUNNERS[command](config, threads, tag)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cyclofield",
        description=(
            "Spectral densities, covariance functionals, weight kernels, "
            "limit diagnostics, and Monte Carlo simulation of cyclical "
            "long-range dependent isotropic Gaussian fields."
        ),
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("CYCLOFIELD_THREADS", "1")),
        help="worker threads for grid evaluation (default 1, or "
        "CYCLOFIELD_THREADS)",
    )
    args = parser.parse_args(argv)

    try:
        with open(args.config) as handle:
            config = json.load(handle)
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config error: {args.config} is not valid JSON: {exc}", file=sys.stderr)
        return 2
    if not isinstance(config, dict):
        print("config error: top-level JSON value must be an object", file=sys.stderr)
        return 2
    if args.out is not None:
        config["output_dir"] = args.out
    if args.seed is not None:
        config["seed"] = args.seed

    try:
        return run(args.command, config, max(1, args.threads))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except KernelAdmissibilityError as exc:
        print(f"config error: inadmissible kernel: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
