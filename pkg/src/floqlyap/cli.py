"""Command-line front end: ``floqlyap solve|scan|converge|stability``.

Results are written as CSV (default) or, with ``--json``, as a JSON document
carrying the same table plus run metadata. Exit codes: 0 success, 1 config
error, 2 instability at a requested single point, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .config import JobConfig, apply_overrides, load_document, parse_config
from .crosscheck import bisect_onset, time_domain_probe
from .errors import ConfigError, Divergence, FloqLyapError, Unstable
from .floquet import Truncation, build_drift, converge, solve_steady
from .gaussian import (
    Covariance,
    mech_occupation,
    squeezing_variances,
    steady_state,
    to_decibels,
)
from .linalg import spectral_abscissa
from .models import (
    MECHANICS,
    cooling_lab_frame,
    cooling_periodic,
    cooling_rwa,
    levitated_periodic,
    two_tone_periodic,
)

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_NUMERICAL = 0, 1, 2, 3

_PERIODIC = {
    "cooling": cooling_periodic,
    "two_tone": two_tone_periodic,
    "levitated": levitated_periodic,
}


@dataclass
class PointResult:
    stable: bool
    abscissa: float
    values: dict[str, float] = field(default_factory=dict)
    residual: float = 0.0


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[Any]]
    metadata: dict[str, Any]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_format_cell(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "columns": self.columns,
            "rows": [[_json_cell(v) for v in row] for row in self.rows],
            "metadata": self.metadata,
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    # repr gives the shortest string that round-trips
    return repr(value)


def _json_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if value is None or math.isnan(float(value)):
        return None
    return float(value)


def _periodic(config: JobConfig):
    return _PERIODIC[config.model](config.model_params())


def drift_for(config: JobConfig) -> np.ndarray:
    """The drift whose spectrum decides stability for ``config.method``."""
    if config.method == "lab":
        return np.asarray(cooling_lab_frame(config.model_params()).drift)
    if config.method == "rwa":
        return np.asarray(_periodic(config).a0)
    k = config.k if config.method == "floquet" else max(1, _periodic(config).order)
    return np.asarray(build_drift(_periodic(config), Truncation(k)).drift)


def _observables(cov: Covariance, names: Sequence[str], abscissa: float) -> dict[str, float]:
    out: dict[str, float] = {}
    need_sq = any(n in names for n in ("V_sq", "V_asq", "V_sq_db", "V_asq_db", "ratio"))
    if need_sq:
        v_sq, v_asq = squeezing_variances(cov, MECHANICS)
    for name in names:
        if name == "n_f":
            out[name] = mech_occupation(cov, MECHANICS)
        elif name == "V_sq":
            out[name] = v_sq
        elif name == "V_asq":
            out[name] = v_asq
        elif name == "V_sq_db":
            out[name] = to_decibels(v_sq)
        elif name == "V_asq_db":
            out[name] = to_decibels(v_asq)
        elif name == "ratio":
            out[name] = v_sq / v_asq
        elif name == "spectral_abscissa":
            out[name] = abscissa
    return out


def covariance_for(config: JobConfig) -> tuple[Covariance, float]:
    """Physical (dc-block) covariance for ``config.method`` plus a residual.

    Raises
    ------
    Unstable
        If the method's drift is not Hurwitz.
    Divergence
        If time-domain integration runs away.
    """
    if config.method == "lab":
        return steady_state(cooling_lab_frame(config.model_params())), 0.0
    if config.method == "rwa":
        if config.model == "cooling":
            return steady_state(cooling_rwa(config.model_params())), 0.0
        return steady_state(_periodic(config).dc_system()), 0.0
    if config.method == "floquet":
        fc = solve_steady(build_drift(_periodic(config), Truncation(config.k)))
        return fc.dc, fc.residual_norm
    system = _periodic(config)
    probe = time_domain_probe(system)
    return Covariance(system.layout, 0.5 * (probe.average + probe.average.T)), probe.settle_residual


def evaluate_point(config: JobConfig) -> PointResult:
    """Run one method at one parameter point.

    Instability is reported through ``PointResult.stable``; numerical
    failures propagate.
    """
    abscissa = spectral_abscissa(drift_for(config))
    if abscissa >= 0:
        return PointResult(False, abscissa)
    try:
        cov, residual = covariance_for(config)
    except (Unstable, Divergence):
        return PointResult(False, abscissa)
    names = [n for n in config.observables if n != "stable"]
    return PointResult(True, abscissa, _observables(cov, names, abscissa), residual)


def _value_columns(config: JobConfig) -> list[str]:
    """Observables in config order, then ``stable``, then ``spectral_abscissa``."""
    cols = [n for n in config.observables if n not in ("stable", "spectral_abscissa")]
    cols.append("stable")
    if "spectral_abscissa" in config.observables:
        cols.append("spectral_abscissa")
    return cols


def _row(result: PointResult, value_cols: list[str]) -> list[Any]:
    row = []
    for name in value_cols:
        if name == "stable":
            row.append(result.stable)
        elif name == "spectral_abscissa":
            row.append(result.abscissa)
        else:
            row.append(result.values.get(name, float("nan")) if result.stable else float("nan"))
    return row


def _worker_count(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("FLOQUET_WORKERS")
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ConfigError(f"FLOQUET_WORKERS: expected an integer, got {env!r}") from None
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ConfigError("--workers must be >= 1")
    return workers


def _map(fn, items: list, workers: int) -> list:
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        # map preserves input order, so output is independent of scheduling
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _metadata(config: JobConfig, results: list[PointResult], started: float) -> dict[str, Any]:
    residuals = [r.residual for r in results if r.stable]
    return {
        "config": config.to_dict(),
        "truncation_used": config.k if config.method in ("floquet",) else None,
        "solver_residual_max": max(residuals) if residuals else None,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }


def cmd_solve(config: JobConfig) -> ResultTable:
    started = time.perf_counter()
    if config.sweep is not None:
        raise ConfigError("solve: config must not contain a sweep (use scan)")
    result = evaluate_point(config)
    cols = _value_columns(config)
    return ResultTable(cols, [_row(result, cols)], _metadata(config, [result], started))


def _grid_points(config: JobConfig) -> list[tuple[float, ...]]:
    xs = [float(x) for x in config.sweep.grid()]
    if config.sweep2 is None:
        return [(x,) for x in xs]
    ys = [float(y) for y in config.sweep2.grid()]
    return [(x, y) for x in xs for y in ys]


def _point_config(config: JobConfig, point: tuple[float, ...]) -> JobConfig:
    values = {config.sweep.variable: point[0]}
    if config.sweep2 is not None:
        values[config.sweep2.variable] = point[1]
    return config.with_point(**values)


def _sweep_columns(config: JobConfig) -> list[str]:
    cols = [config.sweep.variable]
    if config.sweep2 is not None:
        cols.append(config.sweep2.variable)
    return cols


def cmd_scan(config: JobConfig, workers: int | None = None) -> ResultTable:
    started = time.perf_counter()
    if config.sweep is None:
        raise ConfigError("scan: config needs a sweep")
    points = _grid_points(config)
    results = _map(evaluate_point, [_point_config(config, p) for p in points], _worker_count(workers))
    value_cols = _value_columns(config)
    rows = [list(p) + _row(r, value_cols) for p, r in zip(points, results)]
    return ResultTable(_sweep_columns(config) + value_cols, rows, _metadata(config, results, started))


def _converge_observable(config: JobConfig):
    name = config.converge_on

    def observable(fc):
        return _observables(fc.dc, [name], float("nan"))[name]

    return observable


def _converge_point(config: JobConfig) -> tuple[list[PointResult], int | None]:
    results = [evaluate_point(replace(config, truncation=k)) for k in range(config.k_max + 1)]
    study = converge(_periodic(config), _converge_observable(config), config.k_max, config.rtol, stop_early=False)
    return results, study.k_star


def cmd_converge(config: JobConfig, workers: int | None = None) -> ResultTable:
    started = time.perf_counter()
    if config.method != "floquet":
        raise ConfigError("converge: method must be 'floquet'")
    points = _grid_points(config) if config.sweep is not None else [()]
    configs = [_point_config(config, p) if p else config for p in points]
    studies = _map(_converge_point, configs, _worker_count(workers))
    value_cols = _value_columns(config)
    lead = (_sweep_columns(config) if config.sweep is not None else []) + ["K"]
    rows, flat = [], []
    for p, (results, _) in zip(points, studies):
        for k, r in enumerate(results):
            rows.append(list(p) + [k] + _row(r, value_cols))
            flat.append(r)
    meta = _metadata(config, flat, started)
    meta["truncation_used"] = list(range(config.k_max + 1))
    meta["converged_at"] = [k_star for _, k_star in studies]
    return ResultTable(lead + value_cols, rows, meta)


def _abscissa_at(config: JobConfig) -> float:
    return spectral_abscissa(drift_for(config))


class _AbscissaAlong:
    """Picklable ``x -> spectral abscissa`` along one sweep variable."""

    def __init__(self, config: JobConfig, variable: str):
        self.config, self.variable = config, variable

    def __call__(self, x: float) -> float:
        return _abscissa_at(self.config.with_point(**{self.variable: x}))


def stability_boundaries(config: JobConfig, grid, abscissae, rtol: float = 1e-4) -> list[dict]:
    """Bisect every stability change between neighbouring grid points."""
    along = _AbscissaAlong(config, config.sweep.variable)
    out = []
    for i in range(len(grid) - 1):
        s0, s1 = abscissae[i] < 0, abscissae[i + 1] < 0
        if s0 == s1:
            continue
        # bisect_onset takes the stable end first, whichever side it is on
        lo, hi = (grid[i], grid[i + 1]) if s0 else (grid[i + 1], grid[i])
        x = bisect_onset(along, lo, hi, rtol)
        out.append({"at": x, "kind": "onset" if s0 else "recovery"})
    return out


def cmd_stability(config: JobConfig, workers: int | None = None) -> ResultTable:
    started = time.perf_counter()
    if config.method not in ("lab", "rwa", "floquet"):
        raise ConfigError("stability: method must be lab, rwa or floquet")
    if config.sweep is None:
        raise ConfigError("stability: config needs a sweep")
    points = _grid_points(config)
    abscissae = _map(_abscissa_at, [_point_config(config, p) for p in points], _worker_count(workers))
    rows = [list(p) + [a < 0, a] for p, a in zip(points, abscissae)]
    meta: dict[str, Any] = {
        "config": config.to_dict(),
        "truncation_used": config.k if config.method == "floquet" else None,
    }
    if config.sweep2 is None:
        grid = [p[0] for p in points]
        boundaries = stability_boundaries(config, grid, abscissae)
        meta["boundaries"] = boundaries
        onsets = [b["at"] for b in boundaries if b["kind"] == "onset"]
        meta["onset"] = onsets[0] if onsets else None
    meta["wall_time_s"] = round(time.perf_counter() - started, 6)
    return ResultTable(_sweep_columns(config) + ["stable", "spectral_abscissa"], rows, meta)


COMMANDS = {
    "solve": cmd_solve,
    "scan": cmd_scan,
    "converge": cmd_converge,
    "stability": cmd_stability,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floqlyap",
        description="Floquet-Lyapunov steady states of periodically driven optomechanical systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file ('-' for stdin)")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field (dotted keys, repeatable)")
        p.add_argument("--out", help="write results here instead of stdout")
        p.add_argument("--json", action="store_true", help="emit JSON with metadata")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: $FLOQUET_WORKERS or CPU count)")
    return parser


def load_config(path: str | None, overrides: list[str], stdin=None) -> JobConfig:
    doc: dict = {}
    if path == "-":
        doc = load_document((stdin or sys.stdin).read(), "stdin")
    elif path:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = load_document(fh.read(), path)
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(apply_overrides(doc, overrides))


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; 2 is reserved for instability
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        config = load_config(args.config, args.overrides)
        command = COMMANDS[args.command]
        if args.command == "solve":
            table = command(config)
        else:
            table = command(config, workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (FloqLyapError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERICAL

    text = table.to_json() if args.json else table.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if args.command == "solve" and not table.rows[0][table.columns.index("stable")]:
        print("unstable: drift matrix is not Hurwitz at the requested point", file=stderr)
        return EXIT_UNSTABLE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
