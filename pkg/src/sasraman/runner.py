"""Scenario execution and output emission."""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bath import FockOracle, discretize_reservoir, fit_decay_rate, oracle_decay, thermal_phonon_number
from .errors import ThermalOccupationError
from .observables import run_scan, sample_events, spectrum_delay_duality
from .pair import VACUUM_THRESHOLD, check_vacuum_approximation, vacuum_matrix_elements

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2


@dataclass
class RunResult:
    status: int
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _check_thermal(scenario):
    nbar = thermal_phonon_number(scenario.medium.omega_tilde, scenario.medium.T)
    try:
        check_vacuum_approximation(scenario.medium)
        return {"passed": True, "value": nbar, "threshold": VACUUM_THRESHOLD}
    except ThermalOccupationError as exc:
        return {"passed": False, "value": nbar, "threshold": VACUUM_THRESHOLD, "detail": str(exc)}


def _check_vacuum(scenario):
    grid = discretize_reservoir(scenario.medium, scenario.J, scenario.bandwidth)
    report = vacuum_matrix_elements(FockOracle(grid, scenario.medium))
    return {"passed": report.passed, "value": report.v_deviation, "threshold": report.tolerance,
            "c_deviation": report.c_deviation, "b_deviation": report.b_deviation,
            "cross_max": report.cross_max}


def _check_decay(scenario):
    med = scenario.medium
    grid = discretize_reservoir(med, scenario.J, scenario.bandwidth)
    series = oracle_decay(grid, med, t_max=3.0 / med.gamma, steps=301)
    fit = fit_decay_rate(series, (0.5 / med.gamma, 3.0 / med.gamma))
    err = abs(fit.gamma - med.gamma) / med.gamma
    return {"passed": err <= 0.02, "value": fit.gamma, "relative_error": err, "threshold": 0.02}


def _check_duality(scenario):
    report = spectrum_delay_duality(scenario.medium)
    return {"passed": report.max_deviation <= 1e-6, "value": report.max_deviation, "threshold": 1e-6}


VALIDATIONS = {
    "thermal": _check_thermal,
    "vacuum": _check_vacuum,
    "decay": _check_decay,
    "duality": _check_duality,
}


def _scan_job(scenario, config):
    result = run_scan(config, scenario)
    events = None
    if config.events:
        events = sample_events(result.rates, scenario.seed, config.events, f"{config.scan_id}/events")
    return result, events


def run_scenario(scenario, out_dir=None, threads=1):
    """Run validations and scans, writing ``<id>.csv``, optional
    ``<id>_events.csv`` and ``summary.json`` into ``out_dir``.

    Returns a :class:`RunResult` whose ``status`` is 0 on success and 1 when
    any validation fails.  A failed thermal gate skips the scans.  Output
    bytes depend only on the scenario and seed, not on ``threads``.
    """
    out_dir = out_dir or scenario.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    validations = {name: VALIDATIONS[name](scenario) for name in scenario.checks}
    gate_ok = validations.get("thermal", {"passed": True})["passed"]
    files, scans = [], {}
    if gate_ok:
        jobs = scenario.scans
        if threads > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outputs = list(pool.map(lambda c: _scan_job(scenario, c), jobs))
        else:
            outputs = [_scan_job(scenario, c) for c in jobs]
        for config, (result, events) in zip(jobs, outputs):
            path = os.path.join(out_dir, f"{config.scan_id}.csv")
            result.to_csv(path)
            files.append(path)
            entry = {"kind": result.kind, "rows": len(result.records), "columns": result.columns,
                     "summary": result.summary}
            if events is not None:
                epath = os.path.join(out_dir, f"{config.scan_id}_events.csv")
                events.to_csv(epath, result.records)
                files.append(epath)
                entry["events"] = len(events)
            scans[config.scan_id] = entry
    passed = all(v["passed"] for v in validations.values())
    summary = {
        "scenario": scenario.name,
        "seed": scenario.seed,
        "version": __version__,
        "status": "ok" if passed else "validation_failed",
        "validations": validations,
        "scans": scans,
    }
    spath = os.path.join(out_dir, "summary.json")
    dump_json(summary, spath)
    files.append(spath)
    return RunResult(EXIT_OK if passed else EXIT_VALIDATION, files, summary)
