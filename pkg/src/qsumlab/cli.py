"""Command-line harness: ``qsumlab run|catalog|check|version``.

Config files are INI with one ``[experiment]`` section; list values are
comma separated.  Example::

    [experiment]
    problem = boolean-sum
    variants = deterministic, randomized
    epsilon = 0.2, 0.1, 0.05
    delta = 0.05, 0.25
    N = 256
    omega_samples = 200
    seed = 7
    output = results/boolean.csv
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import logging
import os
import platform
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import PROBLEMS, list_catalog
from .errors import ResourceCapError
from .metrics import chebyshev_check_report, qubit_lower_bound_check, randomized_error
from .statevector import DEFAULT_QUBIT_CAP

log = logging.getLogger("qsumlab")

CSV_VERSION = 1
CSV_COLUMNS = (
    "problem", "variant", "epsilon", "queries_mean", "qubits", "rand_error", "rand_error_se",
    "prob_error", "error_ok", "chebyshev_ok", "lower_bound_ok", "seed", "config_hash", "csv_version",
)
WORKERS_ENV = "QSUMLAB_WORKERS"

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    variants: tuple[str, ...]
    epsilons: tuple[float, ...]
    deltas: tuple[float, ...]
    seed: int
    omega_samples: int = 50
    N: int = 256
    d: int = 1
    r: int = 1
    backend: str = "analytic"
    qubit_cap: int = 20
    output: str = "results.csv"
    manifest: str = ""
    source_text: str = field(default="", compare=False)

    @property
    def params(self) -> dict:
        return {"N": self.N, "d": self.d, "r": self.r, "seed": self.seed}

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.source_text.encode()).hexdigest()[:16]


def _floats(raw: str, field_name: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"{field_name}: not a list of numbers: {raw!r}") from None


def _int(sec: configparser.SectionProxy, key: str, default: int | None = None) -> int:
    if key not in sec:
        if default is None:
            raise ConfigError(f"{key}: required field missing")
        return default
    try:
        return int(sec[key])
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {sec[key]!r}") from None


def parse_config(text: str, base: Path | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from None
    if "experiment" not in parser:
        raise ConfigError("missing [experiment] section")
    sec = parser["experiment"]
    problem = sec.get("problem", "").strip()
    if problem not in PROBLEMS:
        raise ConfigError(f"problem: unknown {problem!r}; choose from {', '.join(sorted(PROBLEMS))}")
    prob = PROBLEMS[problem]
    variants = tuple(v.strip() for v in sec.get("variants", ",".join(prob.variants)).split(",") if v.strip())
    for v in variants:
        if v not in prob.variants:
            raise ConfigError(f"variants: {v!r} not available for {problem} ({', '.join(prob.variants)})")
    if "epsilon" not in sec:
        raise ConfigError("epsilon: required field missing")
    eps = _floats(sec["epsilon"], "epsilon")
    if not eps or any(not 0 < e < 0.5 for e in eps):
        raise ConfigError("epsilon must lie in (0, 0.5)")
    deltas = _floats(sec.get("delta", "0.25"), "delta")
    if any(not 0 < dl < 1 for dl in deltas):
        raise ConfigError("delta must lie in (0, 1)")
    if "seed" not in sec:
        raise ConfigError("seed: required field missing (no wall-clock seeding)")
    seed = _int(sec, "seed")
    w = _int(sec, "omega_samples", 50)
    if w < 1:
        raise ConfigError("omega_samples must be >= 1")
    if deltas and w * min(deltas) < 10:
        raise ConfigError(f"omega_samples: W * min(delta) = {w * min(deltas):g} must be >= 10")
    n = _int(sec, "N", 256)
    if n < 2 or n & (n - 1):
        raise ConfigError("N must be a power of two >= 2")
    d, r = _int(sec, "d", 1), _int(sec, "r", 1)
    if d < 1:
        raise ConfigError("d must be >= 1")
    if problem == "integrate-r1" and r not in (1, 2):
        raise ConfigError("r must be 1 or 2")
    backend = sec.get("backend", "analytic").strip()
    if backend not in ("analytic", "statevector"):
        raise ConfigError("backend must be analytic or statevector")
    cap = _int(sec, "qubit_cap", 20)
    if not 1 <= cap <= DEFAULT_QUBIT_CAP:
        raise ConfigError(f"qubit_cap must lie in [1, {DEFAULT_QUBIT_CAP}]")
    output = sec.get("output", "results.csv").strip()
    manifest = sec.get("manifest", "").strip()
    if base is not None:
        output = os.path.normpath(base / output)
        if manifest:
            manifest = os.path.normpath(base / manifest)
    return ExperimentConfig(problem, variants, eps, deltas, seed, w, n, d, r, backend, cap, output,
                            manifest, text)


def _cell_seed(seed: int, problem: str, variant: str, eps: float) -> np.random.Generator:
    key = zlib.crc32(f"{problem}|{variant}|{eps!r}".encode())
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))


def _fmt(x: float) -> str:
    return repr(float(x))


def _capped(alg, cap: int):
    def run(instance, gen):
        prepared = alg(instance, gen)
        if prepared.qubits > cap:
            raise ResourceCapError(f"{prepared.qubits} qubits exceeds qubit_cap = {cap}")
        return prepared
    return run


def run_cell(cfg: ExperimentConfig, variant: str, eps: float) -> dict:
    prob = PROBLEMS[cfg.problem]
    suite = prob.suite(cfg.params)
    alg = prob.algorithm(variant, eps, cfg.params)
    if cfg.backend == "statevector":
        alg = _capped(alg, cfg.qubit_cap)
    randomized = variant == "randomized"
    report = randomized_error(alg, suite, cfg.omega_samples, _cell_seed(cfg.seed, cfg.problem, variant, eps),
                              deltas=cfg.deltas, problem=cfg.problem, name=variant, epsilon=eps,
                              randomized=randomized, backend=cfg.backend)
    cheb = all(chebyshev_check_report(report, dl).passed for dl in cfg.deltas)
    bounds = qubit_lower_bound_check(report.qubits, eps, cfg.problem, variant,
                                     cfg.N if cfg.problem in ("boolean-sum", "real-sum") else None)
    lower_ok = all(c.passed for c in bounds.values())
    # L2 error within eps up to 3 standard errors of the omega average
    error_ok = report.suite_max <= eps + 3 * report.suite_max_se
    return {
        "problem": cfg.problem,
        "variant": variant,
        "epsilon": _fmt(eps),
        "queries_mean": _fmt(report.queries_mean),
        "qubits": str(report.qubits),
        "rand_error": _fmt(report.suite_max),
        "rand_error_se": _fmt(report.suite_max_se),
        "prob_error": ";".join(f"{dl!r}={report.prob_suite_max[dl]!r}" for dl in sorted(report.prob_suite_max)),
        "error_ok": str(int(error_ok)),
        "chebyshev_ok": str(int(cheb)),
        "lower_bound_ok": str(int(lower_ok)),
        "seed": str(cfg.seed),
        "config_hash": cfg.config_hash,
        "csv_version": str(CSV_VERSION),
    }


def _run_cell_args(args) -> dict:
    return run_cell(*args)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[dict]:
    cells = sorted((v, e) for v in cfg.variants for e in cfg.epsilons)
    args = [(cfg, v, e) for v, e in cells]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell_args, args))
    else:
        rows = [_run_cell_args(a) for a in args]
    return sorted(rows, key=lambda r: (r["variant"], float(r["epsilon"])))


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def manifest(cfg: ExperimentConfig, rows: list[dict]) -> dict:
    import scipy

    return {
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "problem": cfg.problem,
        "csv_version": CSV_VERSION,
        "csv_columns": list(CSV_COLUMNS),
        "rows": len(rows),
        "versions": {"qsumlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "config": cfg.source_text,
    }


def cmd_run(args) -> int:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"config error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(text, base=path.parent)
        workers = worker_count()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.output:
        cfg = ExperimentConfig(**{**cfg.__dict__, "output": args.output})
    try:
        rows = run_experiment(cfg, workers)
    except ResourceCapError as exc:
        print(f"resource cap: {exc}; set 'backend = analytic' in the config", file=sys.stderr)
        return EXIT_CAP
    out = Path(cfg.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(rows_to_csv(rows))
    man = Path(cfg.manifest) if cfg.manifest else out.with_suffix(".json")
    man.write_text(json.dumps(manifest(cfg, rows), indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(rows)} rows to {out} (manifest {man})")
    return EXIT_OK


def cmd_catalog(args) -> int:
    for line in list_catalog(args.filter or ""):
        print(line)
    return EXIT_OK


def cmd_check(args) -> int:
    from .acceptance import CRITERIA, run_criteria

    only = None
    if args.only:
        try:
            only = sorted({int(tok) for tok in args.only.split(",")})
        except ValueError:
            print("config error: --only takes comma-separated criterion numbers", file=sys.stderr)
            return EXIT_CONFIG
        bad = [k for k in only if k not in CRITERIA]
        if bad:
            print(f"config error: unknown criteria {bad}", file=sys.stderr)
            return EXIT_CONFIG
    results = run_criteria(only, echo=True)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def cmd_version(args) -> int:
    print(f"qsumlab {__version__} (csv v{CSV_VERSION})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsumlab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run an experiment config and write CSV + JSON manifest")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="override the CSV path")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("catalog", help="list problems and test functions")
    p.add_argument("filter", nargs="?", default="")
    p.set_defaults(func=cmd_catalog)
    p = sub.add_parser("check", help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("version")
    p.set_defaults(func=cmd_version)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
