"""Sweep execution for the command-line interface: grid expansion, per-point
solves, delimited-text emission and the run manifest."""

from __future__ import annotations

import csv
import functools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from math import sqrt
from typing import Any

import numpy as np

from . import __version__
from .config import RunConfig, setup_from_spec
from .fme import FmeModel, FmeSetup, SiteOperator, feedback_table_from_entries, locc_check
from .liouvillian import SolverError, build_liouvillian, steady_state
from .measures import (
    concurrence,
    fidelity_to_pure,
    log_negativity,
    odd_even_bipartition,
    purity,
    spin_up_density,
)
from .oracle import CoarseStepParams, FieldConfig, validate_against_fme
from .protocols import (
    IsingParams,
    TwoQubitParams,
    ising_model,
    pair_setup,
    ring_model,
    target_pair_state,
    two_qubit_model,
)
from .qops import partial_trace, qubits, sigma_minus, sigma_x, zero_operator

COLUMNS: dict[str, list[str]] = {
    "two-qubit": [
        "z", "purity", "concurrence", "log_negativity", "spin_up_density",
        "fidelity_target", "residual", "unique", "status", "wall_time_s",
    ],
    "ring": [
        "n", "z", "purity", "concurrence_nn", "concurrence_nnn",
        "log_negativity_odd_even", "spin_up_density", "residual", "unique",
        "status", "wall_time_s",
    ],
    "ising": [
        "n", "delta", "g", "alpha", "b", "r", "hamiltonian_on",
        "spin_up_density", "purity", "residual", "unique", "status",
        "wall_time_s",
    ],
    "locc-check": [
        "setup_index", "channel", "site", "violation_norm", "status",
        "wall_time_s",
    ],
    "oracle": [
        "step", "time", "trace_distance", "stat_error_estimate", "bound",
        "status", "wall_time_s",
    ],
}


def expand_grid(config: RunConfig) -> list[dict[str, Any]]:
    """One work item per grid point; single-run experiments get one item."""
    p = config.params
    if config.experiment == "two-qubit":
        return [{"z": float(z)} for z in p["z_grid"]]
    if config.experiment == "ring":
        return [
            {"n": p["n"], "z": float(z), "periodic": p["periodic"]}
            for z in p["z_grid"]
        ]
    if config.experiment == "ising":
        items = []
        for g in p["g_grid"]:
            for alpha in p["alpha_grid"]:
                variants = [True, False] if p["include_hamiltonian_off"] else [True]
                for ham_on in variants:
                    items.append(
                        {
                            "n": p["n"],
                            "delta": float(p["delta"]),
                            "g": float(g),
                            "alpha": float(alpha),
                            "hamiltonian_on": ham_on,
                        }
                    )
        return items
    return [dict(p, seed=config.seed)]


def _failed_row(columns: list[str], message: str, **known) -> dict[str, Any]:
    row = {c: float("nan") for c in columns}
    row.update(known)
    row["status"] = "failed: " + message
    return row


def _solve(model: FmeModel, solver: dict):
    lv = build_liouvillian(model, storage=solver.get("storage", "auto"))
    return steady_state(lv, method=solver.get("method", "auto"))


def _oracle_setup(item: dict) -> FmeSetup:
    if "setup" in item:
        return setup_from_spec(item["setup"])
    if item["target"] == "single-qubit":
        space = qubits(1)
        table = feedback_table_from_entries(
            space, 1, [(0, SiteOperator(0, item["feedback_gain"] * sigma_x))]
        )
        return FmeSetup(
            space, (SiteOperator(0, sigma_minus),), np.array([[1j]]), table
        )
    return pair_setup(TwoQubitParams(item["z"]), 0, 1, qubits(2))


def _locc_setups(item: dict) -> list[FmeSetup]:
    if "setup" in item:
        return [setup_from_spec(item["setup"])]
    target = item["target"]
    if target == "two-qubit":
        return [pair_setup(TwoQubitParams(item["z"]), 0, 1, qubits(2))]
    if target == "ring":
        n = item.get("n", 4)
        space = qubits(n)
        p = TwoQubitParams(item["z"])
        return [pair_setup(p, j, (j + 1) % n, space) for j in range(n)]
    if target == "ising":
        p = IsingParams(
            item.get("n", 5),
            item.get("delta", 1.0),
            item.get("b", 0.5),
            item.get("r", 1.0),
        )
        from .protocols import _ising_setup, ising_interferometer, ising_coupling_matrix

        ring = ising_interferometer(p.n)
        gains = ising_coupling_matrix(p) @ np.linalg.inv(ring.v.real)
        return [_ising_setup(p, ring.v, gains), _ising_setup(p, ring.v.conj(), gains)]
    # identity: local measurement channels, no mixing
    n = item.get("n", 3)
    space = qubits(n)
    table = feedback_table_from_entries(
        space, n, [(k, SiteOperator(k, sigma_x)) for k in range(n)]
    )
    return [
        FmeSetup(
            space,
            tuple(SiteOperator(k, sigma_minus) for k in range(n)),
            np.eye(n),
            table,
        )
    ]


def run_item(experiment: str, solver: dict, item: dict) -> list[dict[str, Any]]:
    """Compute the result rows for one work item."""
    columns = COLUMNS[experiment]
    start = time.monotonic()
    try:
        if experiment == "two-qubit":
            z = item["z"]
            res = _solve(two_qubit_model(TwoQubitParams(z)), solver)
            rho = res.rho
            row = {
                "z": z,
                "purity": purity(rho),
                "concurrence": concurrence(rho),
                "log_negativity": log_negativity(rho, odd_even_bipartition(2)),
                "spin_up_density": spin_up_density(rho),
                "fidelity_target": fidelity_to_pure(rho, target_pair_state(z)),
                "residual": res.residual,
                "unique": res.unique,
                "status": "ok",
            }
            rows = [row]
        elif experiment == "ring":
            n, z = item["n"], item["z"]
            res = _solve(ring_model(n, z, periodic=item["periodic"]), solver)
            rho = res.rho
            rows = [
                {
                    "n": n,
                    "z": z,
                    "purity": purity(rho),
                    "concurrence_nn": concurrence(partial_trace(rho, {0, 1})),
                    "concurrence_nnn": concurrence(partial_trace(rho, {0, 2})),
                    "log_negativity_odd_even": log_negativity(
                        rho, odd_even_bipartition(n)
                    ),
                    "spin_up_density": spin_up_density(rho),
                    "residual": res.residual,
                    "unique": res.unique,
                    "status": "ok",
                }
            ]
        elif experiment == "ising":
            delta, g, alpha = item["delta"], item["g"], item["alpha"]
            b = g * delta
            r = alpha * sqrt(abs(delta))
            model, _ = ising_model(IsingParams(item["n"], delta, b, r))
            if not item["hamiltonian_on"]:
                model = FmeModel(model.space, zero_operator(model.space), model.jumps)
            res = _solve(model, solver)
            rows = [
                {
                    "n": item["n"],
                    "delta": delta,
                    "g": g,
                    "alpha": alpha,
                    "b": b,
                    "r": r,
                    "hamiltonian_on": item["hamiltonian_on"],
                    "spin_up_density": spin_up_density(res.rho),
                    "purity": purity(res.rho),
                    "residual": res.residual,
                    "unique": res.unique,
                    "status": "ok",
                }
            ]
        elif experiment == "locc-check":
            rows = []
            for idx, setup in enumerate(_locc_setups(item)):
                report = locc_check(setup)
                for j, l, norm in report.norms:
                    rows.append(
                        {
                            "setup_index": idx,
                            "channel": j,
                            "site": l,
                            "violation_norm": norm,
                            "status": "ok",
                        }
                    )
        else:  # oracle
            setup = _oracle_setup(item)
            fc = FieldConfig(
                setup.n_channels,
                fock_dim=item["fock_dim"],
                x_max=item["x_max"],
                n_points=item["n_points"],
            )
            params = CoarseStepParams(item["epsilon"], item["n_traj"], item["seed"])
            report = validate_against_fme(setup, fc, params, item["steps"])
            rows = [
                {
                    "step": s + 1,
                    "time": (s + 1) * item["epsilon"] ** 2,
                    "trace_distance": report.trace_distances[s],
                    "stat_error_estimate": report.stat_error_estimate,
                    "bound": report.bound(s + 1),
                    "status": "ok",
                    "_report": report,
                }
                for s in range(item["steps"])
            ]
    except (SolverError, ValueError, RuntimeError) as exc:
        rows = [_failed_row(columns, str(exc), **{
            k: item[k] for k in columns if k in item
        })]
    elapsed = time.monotonic() - start
    for row in rows:
        row["wall_time_s"] = elapsed
    return rows


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12e}"
    return str(value)


def parse_value(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def emit_results(rows: list[dict[str, Any]], columns: list[str], path: str):
    """Comma-separated output: a header naming every column, then one line
    per row with floats at 12 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])


def parse_results(path: str) -> tuple[list[str], list[dict[str, Any]]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [
            {c: parse_value(v) for c, v in zip(columns, line)} for line in reader
        ]
    return columns, rows


def run_experiment(config: RunConfig) -> int:
    """Execute a configured run: solve every grid point, write the result
    table and the manifest.  Returns the process exit code."""
    items = expand_grid(config)
    worker = functools.partial(run_item, config.experiment, config.solver)
    if config.workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            nested = list(pool.map(worker, items))
    else:
        nested = [worker(item) for item in items]
    rows = [row for rows_ in nested for row in rows_]

    extra: dict[str, Any] = {}
    if config.experiment == "locc-check":
        extra["is_locc_sufficient"] = all(
            row["status"] == "ok" and row["violation_norm"] <= 1e-10 for row in rows
        )
    if config.experiment == "oracle":
        reports = [row.pop("_report") for row in rows if "_report" in row]
        if reports:
            rep = reports[0]
            extra["oracle"] = {
                "sample_mean": rep.sample_mean,
                "sample_variance": rep.sample_variance,
                "n_samples": rep.n_samples,
                "bound_c1": rep.bound_c1,
                "bound_c2": rep.bound_c2,
            }

    columns = COLUMNS[config.experiment]
    emit_results(rows, columns, config.out)
    manifest = {
        "artifact_version": __version__,
        "columns": columns,
        "config": config.resolved(),
        "rows": len(rows),
    }
    manifest.update(extra)
    with open(config.out + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    failures = [r for r in rows if r["status"] != "ok"]
    if failures and config.strict:
        return 2
    return 0
