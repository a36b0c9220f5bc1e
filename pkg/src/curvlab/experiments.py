"""Experiment configs, dispatch and reports.

A config is a flat JSON object naming the experiment plus its parameters, e.g.

    {"experiment": "univariate_roots", "d": 4, "samples": 100000, "seed": 42}

Reports are written as JSON (machine readable), an aligned text table and a
CSV of the records.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .ensembles import PolynomialEnsemble, parse_ensemble
from .estimators import (
    RICE_BATCHES,
    estimate_crofton_volume,
    estimate_quadric_euler,
    estimate_rice_curvature,
    estimate_tube_volume_subsphere,
    estimate_univariate_roots,
)
from .identities import algebra_identity_records, matrix_identity_records
from .montecarlo import DEFAULT_BATCHES, DEFAULT_SEED, EstimateRecord

__all__ = [
    "ConfigError",
    "Experiment",
    "EXPERIMENTS",
    "ExperimentConfig",
    "RunReport",
    "run",
    "write_report",
    "load_report",
    "SuiteSummary",
    "report_suite",
]

DEFAULT_Z_THRESHOLD = 4.0
DEFAULT_EXACT_TOLERANCE = 1e-10
RESERVED = ("experiment", "samples", "seed", "output", "workers", "batches", "z_threshold", "exact_tolerance")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


def _require_int(params: dict, key: str, low: int | None = None, high: int | None = None) -> int:
    if key not in params:
        raise ConfigError(f"{key}: required")
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    value = int(value)
    if low is not None and value < low:
        raise ConfigError(f"{key}: must be >= {low}, got {value}")
    if high is not None and value > high:
        raise ConfigError(f"{key}: must be <= {high}, got {value}")
    return value


def _require_float(params: dict, key: str) -> float:
    if key not in params:
        raise ConfigError(f"{key}: required")
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite number, got {value!r}")
    return float(value)


def _check_keys(params: dict, allowed: set[str]) -> None:
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown field (allowed: {', '.join(sorted(allowed)) or 'none'})")


def _ensemble(spec: Any, n: int, where: str) -> PolynomialEnsemble:
    try:
        return parse_ensemble(spec, n)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _single_ensemble(params: dict, n: int) -> PolynomialEnsemble:
    spec = {k: params[k] for k in ("d", "betas", "delta", "kostlan") if k in params}
    if "d" not in spec:
        raise ConfigError("d: required")
    return _ensemble(spec, n, "d" if len(spec) == 1 else "betas/delta")


def _factor_ensembles(params: dict, n: int) -> list[PolynomialEnsemble]:
    """Factors from "factors": [spec, ...] or "d": int | [int, ...] with optional "s"."""
    if "factors" in params:
        factors = params["factors"]
        if not isinstance(factors, list) or not factors:
            raise ConfigError("factors: expected a nonempty list of ensembles")
        return [_ensemble(f, n, f"factors[{i}]") for i, f in enumerate(factors)]
    if "d" not in params:
        raise ConfigError("factors: required (or give d)")
    d = params["d"]
    if isinstance(d, list):
        if "s" in params and params["s"] != len(d):
            raise ConfigError(f"s: {params['s']} does not match {len(d)} degrees")
        return [_ensemble(x, n, f"d[{i}]") for i, x in enumerate(d)]
    s = _require_int(params, "s", 1) if "s" in params else 1
    return [_ensemble(d, n, "d")] * s


@dataclass(frozen=True)
class Experiment:
    name: str
    summary: str
    fields: tuple[str, ...]
    default_samples: int
    default_batches: int
    runner: Callable[..., list[EstimateRecord]]


def _run_univariate(params, samples, seed, workers, batches):
    e = _single_ensemble(params, 1)
    if e.d > 30:
        raise ConfigError("d: binary forms are capped at degree 30")
    return [estimate_univariate_roots(e, samples, seed, workers, batches)]


def _run_crofton(params, samples, seed, workers, batches):
    n = _require_int(params, "n", 1)
    es = _factor_ensembles(params, n)
    if len(es) > 2 or len(es) > n:
        raise ConfigError(f"factors: need 1 <= s <= min(n, 2), got s={len(es)}")
    if len(es) == 2 and any(e.d > 3 for e in es):
        raise ConfigError("factors: plane sections support degrees <= 3")
    return [estimate_crofton_volume(es, n, samples, seed, workers, batches)]


def _run_quadric(params, samples, seed, workers, batches):
    n = _require_int(params, "n", 1, 11)
    if n % 2 == 0:
        raise ConfigError(f"n: must be odd, got {n}")
    e = _single_ensemble({"d": 2, **params}, n)
    if e.d != 2:
        raise ConfigError(f"d: quadrics have degree 2, got {e.d}")
    return [estimate_quadric_euler(e, samples, seed, workers, batches)]


def _run_rice(params, samples, seed, workers, batches):
    n = _require_int(params, "n", 2)
    es = _factor_ensembles(params, n)
    if not 1 <= len(es) <= n - 1:
        raise ConfigError(f"factors: need 1 <= s <= n - 1, got s={len(es)}")
    for i, e in enumerate(es):
        if not e.delta > 0:
            raise ConfigError(f"factors[{i}]: curvature estimates need delta > 0")
    return estimate_rice_curvature(es, n, samples, seed, workers, batches)


def _run_tube(params, samples, seed, workers, batches):
    n = _require_int(params, "n", 1)
    k = _require_int(params, "k", 1, n)
    alpha = _require_float(params, "alpha")
    if not 0 < alpha < 0.5 * math.pi:
        raise ConfigError(f"alpha: must lie in (0, pi/2), got {alpha}")
    return [estimate_tube_volume_subsphere(n, k, alpha, samples, seed, workers, batches)]


def _run_matrix(params, samples, seed, workers, batches):
    return matrix_identity_records(samples, seed, workers, batches)


def _run_algebra(params, samples, seed, workers, batches):
    return algebra_identity_records()


EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in (
        Experiment(
            "univariate_roots",
            "real roots of a random binary form: E #roots = sqrt(delta)",
            ("d", "betas", "delta", "kostlan"), 100_000, DEFAULT_BATCHES, _run_univariate,
        ),
        Experiment(
            "crofton_volume",
            "common zeros on a random s-plane: E #zeros = prod sqrt(delta_i), i.e. E vol Z = prod sqrt(delta_i) vol P^(n-s)",
            ("n", "s", "d", "factors"), 100_000, DEFAULT_BATCHES, _run_crofton,
        ),
        Experiment(
            "quadric_euler",
            "Euler characteristic of a random quadric in odd P^n from its signature vs chi_((n-1)/2)(delta)",
            ("n", "d", "betas", "delta", "kostlan"), 100_000, DEFAULT_BATCHES, _run_quadric,
        ),
        Experiment(
            "rice_curvature",
            "curvature coefficients E K_(s+2j) of a random zero set in S^n via the Weingarten spectrum",
            ("n", "s", "d", "factors"), 200_000, RICE_BATCHES, _run_rice,
        ),
        Experiment(
            "tube_subsphere",
            "tube volume around a great S^(n-k): O_(n-k) O_(k-1) J_(n,k)(alpha)",
            ("n", "k", "alpha"), 100_000, DEFAULT_BATCHES, _run_tube,
        ),
        Experiment(
            "matrix_identities",
            "E det(I+W), E det T, Gaussian parallelepiped moments, pseudoinverse pipelines, jet conditioning",
            (), 100_000, DEFAULT_BATCHES, _run_matrix,
        ),
        Experiment(
            "algebra_identities",
            "exact series identities: convolutions, kinematic products, Euler series, Gauss-Bonnet, O_n gamma_n",
            (), 0, 0, _run_algebra,
        ),
    )
}


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict[str, Any] = field(default_factory=dict)
    samples: int | None = None
    seed: int = DEFAULT_SEED
    output: str | None = None
    workers: int | None = None
    batches: int | None = None
    z_threshold: float = DEFAULT_Z_THRESHOLD
    exact_tolerance: float = DEFAULT_EXACT_TOLERANCE

    @classmethod
    def from_dict(cls, obj: Any) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config: expected a JSON object")
        if "experiment" not in obj:
            raise ConfigError("experiment: required")
        name = obj["experiment"]
        if name not in EXPERIMENTS:
            raise ConfigError(f"experiment: unknown {name!r} (choose from {', '.join(EXPERIMENTS)})")
        params = {k: v for k, v in obj.items() if k not in RESERVED}
        if isinstance(obj.get("params"), dict):
            params.pop("params")
            params.update(obj["params"])
        _check_keys(params, set(EXPERIMENTS[name].fields))
        cfg = cls(experiment=name, params=params)
        if obj.get("samples") is not None:
            cfg.samples = _require_int(obj, "samples", 1)
        if obj.get("seed") is not None:
            cfg.seed = _require_int(obj, "seed", 0, 2**63 - 1)
        if obj.get("workers") is not None:
            cfg.workers = _require_int(obj, "workers", 1)
        if obj.get("batches") is not None:
            cfg.batches = _require_int(obj, "batches", 2)
        if obj.get("output") is not None:
            if not isinstance(obj["output"], str):
                raise ConfigError("output: expected a path string")
            cfg.output = obj["output"]
        for key in ("z_threshold", "exact_tolerance"):
            if obj.get(key) is not None:
                value = _require_float(obj, key)
                if value < 0:
                    raise ConfigError(f"{key}: must be >= 0, got {value!r}")
                setattr(cfg, key, value)
        return cfg

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from None
        return cls.from_dict(obj)

    def to_dict(self) -> dict[str, Any]:
        """Flat form with sorted keys; defaults are written out explicitly."""
        out: dict[str, Any] = {"experiment": self.experiment, **self.params, "seed": self.seed}
        out["z_threshold"] = self.z_threshold
        out["exact_tolerance"] = self.exact_tolerance
        for key in ("samples", "output", "workers", "batches"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return dict(sorted(out.items()))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass
class RunReport:
    config: dict[str, Any]
    records: list[EstimateRecord]
    passed: list[bool]
    z_threshold: float
    exact_tolerance: float
    wall_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(self.passed)

    def body(self) -> dict[str, Any]:
        """Everything except timing; identical for identical configs."""
        return {
            "config": self.config,
            "thresholds": {"z": self.z_threshold, "exact": self.exact_tolerance},
            "records": [dict(r.to_dict(), passed=p) for r, p in zip(self.records, self.passed)],
            "passed": self.ok,
        }

    def to_json(self) -> str:
        return json.dumps(dict(self.body(), wall_seconds=self.wall_seconds), indent=2, sort_keys=True)

    def table(self) -> str:
        return format_table(
            [
                (r.experiment, r.params, r.mean, r.se, r.target, r.z, r.discarded, p)
                for r, p in zip(self.records, self.passed)
            ],
            footer=f"thresholds: |z| <= {self.z_threshold:g}, exact {self.exact_tolerance:g}",
        )

    def csv(self) -> str:
        buf = io.StringIO()
        rows = [dict(r.to_dict(), passed=p) for r, p in zip(self.records, self.passed)]
        names = list(rows[0]) if rows else list(EstimateRecord.__dataclass_fields__) + ["passed"]
        writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()


def _fmt(x: Any) -> str:
    if isinstance(x, bool):
        return "PASS" if x else "FAIL"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def format_table(rows, footer: str = "") -> str:
    header = ("experiment", "parameters", "mean", "se", "target", "z", "discarded", "result")
    cells = [header] + [tuple(_fmt(x) for x in row) for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    if footer:
        lines.append(footer)
    return "\n".join(lines) + "\n"


def run(config: ExperimentConfig, workers: int | None = None) -> RunReport:
    """Execute the configured experiment. ``workers`` overrides the config."""
    exp = EXPERIMENTS[config.experiment]
    samples = config.samples if config.samples is not None else exp.default_samples
    batches = config.batches if config.batches is not None else exp.default_batches
    nworkers = workers if workers is not None else (config.workers or 1)
    if exp.default_samples and samples < batches:
        raise ConfigError(f"samples: {samples} cannot fill {batches} batches")
    start = time.perf_counter()
    try:
        records = exp.runner(dict(config.params), samples, config.seed, nworkers, batches)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    wall = time.perf_counter() - start
    passed = [r.passes(config.z_threshold, config.exact_tolerance) for r in records]
    echo = config.to_dict()
    echo.pop("workers", None)
    echo.pop("output", None)
    echo["samples"] = samples if exp.default_samples else 0
    return RunReport(echo, records, passed, config.z_threshold, config.exact_tolerance, wall)


def write_report(report: RunReport, directory: str | Path, stem: str) -> dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": directory / f"{stem}.json",
        "text": directory / f"{stem}.txt",
        "csv": directory / f"{stem}.csv",
    }
    paths["json"].write_text(report.to_json() + "\n")
    paths["text"].write_text(report.table())
    paths["csv"].write_text(report.csv())
    return paths


def load_report(path: str | Path) -> RunReport:
    obj = json.loads(Path(path).read_text())
    records = [EstimateRecord.from_dict(r) for r in obj["records"]]
    passed = [bool(r["passed"]) for r in obj["records"]]
    return RunReport(
        obj["config"], records, passed, float(obj["thresholds"]["z"]), float(obj["thresholds"]["exact"]),
        float(obj.get("wall_seconds", 0.0)),
    )


@dataclass
class SuiteSummary:
    rows: list[tuple]
    unreadable: list[str]

    @property
    def failures(self) -> int:
        return sum(1 for row in self.rows if not row[-1])

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def table(self) -> str:
        footer = f"{len(self.rows) - self.failures} passed, {self.failures} failed"
        if self.unreadable:
            footer += "\nunreadable: " + ", ".join(self.unreadable)
        return format_table(self.rows, footer)


def report_suite(directory: str | Path) -> SuiteSummary:
    """Collect every report JSON in ``directory`` into one table."""
    rows, unreadable = [], []
    for path in sorted(Path(directory).glob("*.json")):
        try:
            report = load_report(path)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            unreadable.append(f"{path.name} ({type(exc).__name__})")
            continue
        for r, p in zip(report.records, report.passed):
            rows.append((r.experiment, r.params, r.mean, r.se, r.target, r.z, r.discarded, p))
    return SuiteSummary(rows, unreadable)
