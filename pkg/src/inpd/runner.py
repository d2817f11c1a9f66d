"""Batch orchestration: parallel simulation dispatch, atomic raw-log
persistence, and end-to-end report generation from the logs alone."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from collections import defaultdict
from multiprocessing import Pool
from pathlib import Path

from .config import ExperimentConfig
from .engine import BatchRunError, RunSpec, SimulationLog, make_run_specs, run_simulation
from .stats import (
    DegenerateStatisticsError,
    PropertyReport,
    anticorrelation_report,
    cooperation_report,
    mcc_report,
    network_invariance_report,
    stratification_report,
)

logger = logging.getLogger(__name__)


def _atomic_write(path: Path, writer) -> None:
    tmp = path.with_name(path.name + ".tmp")
    writer(tmp)
    os.replace(tmp, path)


def _simulate_to_file(args: tuple[RunSpec, str]) -> str:
    spec, log_dir = args
    log = run_simulation(spec)
    base = Path(log_dir) / log.run_id
    tmp_csv = base.with_name(base.name + ".tmp.csv")
    log.write_csv(tmp_csv)
    # Sidecar first so a *.csv on disk always has its sidecar.
    os.replace(tmp_csv.with_suffix(".json"), base.with_name(base.name + ".json"))
    os.replace(tmp_csv, base.with_name(base.name + ".csv"))
    return log.run_id


def resolve_workers(parallelism: int | str, override: int | None = None) -> int:
    if override is not None:
        return max(1, override)
    if parallelism == "auto":
        return max(1, os.cpu_count() or 1)
    return max(1, int(parallelism))


def run_experiment(
    config: ExperimentConfig,
    workers: int | None = None,
    out_dir: str | Path | None = None,
    master_seed: int | None = None,
) -> Path:
    """Execute every simulation of the experiment grid, persist raw logs,
    and generate all property reports plus a top-level summary.

    Output is a pure function of (config, master seed): reruns overwrite
    with identical bytes regardless of the worker count.
    """
    if master_seed is not None:
        config = dataclasses.replace(config, master_seed=master_seed)
    out = Path(out_dir if out_dir is not None else config.output_dir)
    log_dir = out / "logs"
    log_dir.mkdir(parents=True, exist_ok=True)

    def write_echo(p: Path) -> None:
        with open(p, "w", encoding="utf-8") as fh:
            json.dump(config.echo(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    _atomic_write(out / "config_echo.json", write_echo)

    specs = make_run_specs(config)
    n_workers = resolve_workers(config.parallelism, workers)
    jobs = [(spec, str(log_dir)) for spec in specs]
    if n_workers == 1:
        for job in jobs:
            _run_job(job)
    else:
        # Worker exceptions re-raise in the parent via imap, carrying the
        # failing run's identity.
        with Pool(processes=n_workers) as pool:
            for _ in pool.imap_unordered(_run_job, jobs, chunksize=1):
                pass

    write_reports(log_dir, out / "reports", out)
    return out


def _run_job(job: tuple[RunSpec, str]) -> str:
    spec, _ = job
    try:
        return _simulate_to_file(job)
    except Exception as exc:
        raise BatchRunError.for_run(spec.run_id, exc) from exc


def load_logs(log_dir: str | Path) -> list[SimulationLog]:
    log_dir = Path(log_dir)
    paths = sorted(log_dir.glob("*.csv"))
    if not paths:
        raise FileNotFoundError(f"{log_dir}: no raw log CSVs found")
    logs = []
    for p in paths:
        try:
            logs.append(SimulationLog.read_csv(p))
        except Exception as exc:
            raise ValueError(f"{p}: malformed log: {exc}") from exc
    return logs


def regenerate_reports(log_dir: str | Path, out_dir: str | Path | None = None) -> Path:
    """Rebuild every report from raw logs alone."""
    log_dir = Path(log_dir)
    out = Path(out_dir) if out_dir is not None else log_dir.parent
    write_reports(log_dir, out / "reports", out)
    return out


def write_reports(log_dir: Path, report_dir: Path, out_root: Path) -> None:
    logs = load_logs(log_dir)

    by_setting: dict[str, list[SimulationLog]] = defaultdict(list)
    for log in logs:
        by_setting[log.setting].append(log)

    summary_rows: list[dict] = []
    for setting in sorted(by_setting):
        slogs = by_setting[setting]
        sdir = report_dir / setting
        sdir.mkdir(parents=True, exist_ok=True)
        summary_rows.extend(_setting_reports(setting, slogs, sdir))

    summary = PropertyReport(
        "summary",
        ("setting", "report", "scope", "rows", "satisfied_fraction"),
        rows=summary_rows,
    )
    _atomic_write(out_root / "summary.csv", summary.write_csv)


def _setting_reports(setting: str, slogs: list[SimulationLog], sdir: Path) -> list[dict]:
    by_matrix: dict[str, dict[str, list[SimulationLog]]] = defaultdict(lambda: defaultdict(list))
    by_combo: dict[tuple[str, str], list[SimulationLog]] = defaultdict(list)
    for log in slogs:
        by_matrix[log.matrix][log.network].append(log)
        by_combo[(log.network, log.matrix)].append(log)
    combos = sorted(by_combo)
    summary_rows: list[dict] = []

    # Network invariance: one file per reward matrix, rows per round.
    for matrix in sorted(by_matrix):
        nets = by_matrix[matrix]
        report = network_invariance_report(dict(sorted(nets.items())))
        _atomic_write(sdir / f"invariance_{matrix}.csv", report.write_csv)
        summary_rows.append(
            {
                "setting": setting,
                "report": "invariance",
                "scope": matrix,
                "rows": len(report.rows),
                "satisfied_fraction": report.satisfied_fraction(),
            }
        )

    # The remaining reports: one file per property with a row per
    # (network, matrix) combination.
    per_combo = {
        "cooperation": cooperation_report,
        "anticorrelation": anticorrelation_report,
        "mcc": mcc_report,
        "stratification": stratification_report,
    }
    for name, fn in per_combo.items():
        columns: tuple[str, ...] | None = None
        rows: list[dict] = []
        for net, matrix in combos:
            try:
                rep = fn(by_combo[(net, matrix)], setting=setting)
            except DegenerateStatisticsError as exc:
                logger.warning("%s report degenerate for %s/%s/%s: %s", name, setting, net, matrix, exc)
                continue
            if columns is None:
                columns = ("network", "matrix") + rep.columns
            for row in rep.rows:
                rows.append({"network": net, "matrix": matrix, **row})
        if columns is None:
            columns = ("network", "matrix", "setting", "satisfied")
        out_report = PropertyReport(name, columns, rows=rows)
        _atomic_write(sdir / f"{name}.csv", out_report.write_csv)
        flags = [r["satisfied"] for r in rows if "satisfied" in r and r["satisfied"] is not None]
        summary_rows.append(
            {
                "setting": setting,
                "report": name,
                "scope": "all",
                "rows": len(rows),
                "satisfied_fraction": (sum(map(bool, flags)) / len(flags)) if flags else float("nan"),
            }
        )
    return summary_rows
