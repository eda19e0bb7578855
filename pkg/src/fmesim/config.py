"""Run-configuration parsing for the command-line interface.

Configurations are JSON objects; the full schema is documented in the
project README.  Complex numbers are written either as plain numbers or as
two-element [real, imag] arrays.  Local operators may be given by name
(sigma_x, sigma_y, sigma_z, sigma_plus, sigma_minus, identity) with an
optional scale, or as explicit matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .fme import FmeSetup, SiteOperator, feedback_table_from_entries
from .qops import (
    HilbertSpec,
    identity2,
    sigma_minus,
    sigma_plus,
    sigma_x,
    sigma_y,
    sigma_z,
)

EXPERIMENTS = ("two-qubit", "ring", "ising", "locc-check", "oracle")

NAMED_OPERATORS = {
    "sigma_x": sigma_x,
    "sigma_y": sigma_y,
    "sigma_z": sigma_z,
    "sigma_plus": sigma_plus,
    "sigma_minus": sigma_minus,
    "identity": identity2,
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, location: str, message: str):
        self.location = location
        super().__init__(f"{location}: {message}")


def _require(condition: bool, location: str, message: str):
    if not condition:
        raise ConfigError(location, message)


def parse_complex(value, location: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, (int, float)) for v in value)
    ):
        return complex(value[0], value[1])
    raise ConfigError(location, "expected a number or a [real, imag] pair")


def parse_matrix(rows, location: str) -> np.ndarray:
    _require(isinstance(rows, list) and rows, location, "expected a matrix (list of rows)")
    out = []
    for i, row in enumerate(rows):
        _require(isinstance(row, list), f"{location}[{i}]", "expected a list")
        out.append(
            [parse_complex(v, f"{location}[{i}][{j}]") for j, v in enumerate(row)]
        )
    matrix = np.array(out, dtype=complex)
    _require(
        matrix.ndim == 2 and matrix.shape[0] == matrix.shape[1],
        location,
        f"matrix must be square, got shape {matrix.shape}",
    )
    return matrix


def parse_local_operator(entry, location: str) -> np.ndarray:
    _require(isinstance(entry, dict), location, "expected an object")
    if "op" in entry:
        name = entry["op"]
        _require(
            name in NAMED_OPERATORS,
            f"{location}.op",
            f"unknown operator {name!r}; known: {sorted(NAMED_OPERATORS)}",
        )
        matrix = NAMED_OPERATORS[name].copy()
    elif "matrix" in entry:
        matrix = parse_matrix(entry["matrix"], f"{location}.matrix")
    else:
        raise ConfigError(location, "needs either 'op' or 'matrix'")
    if "scale" in entry:
        matrix = parse_complex(entry["scale"], f"{location}.scale") * matrix
    return matrix


def setup_from_spec(spec, location: str = "setup") -> FmeSetup:
    """Deserialize a declarative setup: site dimensions, channel couplings,
    interferometer and feedback entries."""
    _require(isinstance(spec, dict), location, "expected an object")
    dims = spec.get("dims")
    _require(
        isinstance(dims, list) and all(isinstance(d, int) for d in dims),
        f"{location}.dims",
        "expected a list of integers",
    )
    space = HilbertSpec(tuple(dims))

    raw_sys = spec.get("system_ops")
    _require(isinstance(raw_sys, list) and raw_sys, f"{location}.system_ops",
             "expected a nonempty list")
    system_ops = []
    for i, entry in enumerate(raw_sys):
        loc = f"{location}.system_ops[{i}]"
        _require(isinstance(entry, dict) and "site" in entry, loc,
                 "expected an object with a 'site'")
        system_ops.append(
            SiteOperator(int(entry["site"]), parse_local_operator(entry, loc))
        )

    u = parse_matrix(spec.get("interferometer"), f"{location}.interferometer")

    entries = []
    for i, entry in enumerate(spec.get("feedback_ops", [])):
        loc = f"{location}.feedback_ops[{i}]"
        _require(
            isinstance(entry, dict) and "channel" in entry and "site" in entry,
            loc,
            "expected an object with 'channel' and 'site'",
        )
        entries.append(
            (
                int(entry["channel"]),
                SiteOperator(int(entry["site"]), parse_local_operator(entry, loc)),
            )
        )
    table = feedback_table_from_entries(space, len(system_ops), entries)
    try:
        return FmeSetup(space, tuple(system_ops), u, table)
    except ValueError as exc:
        raise ConfigError(location, str(exc)) from exc


DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "two-qubit": {"z_grid": [round(0.1 * k, 10) for k in range(1, 10)]},
    "ring": {
        "n": 4,
        "z_grid": [round(0.1 * k, 10) for k in range(0, 10)],
        "periodic": True,
    },
    "ising": {
        "n": 5,
        "delta": 1.0,
        "g_grid": [0.1, 0.5, 1.0, 5.0, 10.0],
        "alpha_grid": [0.1, 1.0, 10.0],
        "include_hamiltonian_off": False,
    },
    "locc-check": {"target": "two-qubit", "z": 0.3},
    "oracle": {
        "target": "single-qubit",
        "z": 0.3,
        "feedback_gain": 0.3,
        "epsilon": 0.05,
        "n_traj": 10_000,
        "steps": 1,
        "fock_dim": 4,
        "x_max": 6.0,
        "n_points": 241,
    },
}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    params: dict[str, Any]
    out: str = "results.csv"
    seed: int = 0
    workers: int = 1
    strict: bool = False
    solver: dict[str, Any] = field(default_factory=dict)

    def resolved(self) -> dict[str, Any]:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "out": self.out,
            "seed": self.seed,
            "workers": self.workers,
            "strict": self.strict,
            "solver": self.solver,
        }


def _validate_grid(values, location: str, low: float, high: float):
    _require(
        isinstance(values, list) and values,
        location,
        "expected a nonempty list of numbers",
    )
    for i, v in enumerate(values):
        _require(
            isinstance(v, (int, float)), f"{location}[{i}]", "expected a number"
        )
        _require(
            low <= float(v) <= high,
            f"{location}[{i}]",
            f"value {v} outside the valid range [{low}, {high}]",
        )


def validate_params(experiment: str, params: dict[str, Any]):
    loc = "params"
    if experiment == "two-qubit":
        _validate_grid(params["z_grid"], f"{loc}.z_grid", 0.0, 0.99)
    elif experiment == "ring":
        _require(
            isinstance(params["n"], int) and params["n"] >= 3,
            f"{loc}.n",
            "need an integer site count >= 3",
        )
        _validate_grid(params["z_grid"], f"{loc}.z_grid", 0.0, 0.99)
        _require(isinstance(params["periodic"], bool), f"{loc}.periodic",
                 "expected true or false")
    elif experiment == "ising":
        _require(
            isinstance(params["n"], int) and params["n"] >= 3,
            f"{loc}.n",
            "need an integer site count >= 3",
        )
        _require(
            isinstance(params["delta"], (int, float)) and params["delta"] != 0,
            f"{loc}.delta",
            "need a nonzero number",
        )
        _validate_grid(params["g_grid"], f"{loc}.g_grid", -1e6, 1e6)
        _validate_grid(params["alpha_grid"], f"{loc}.alpha_grid", 1e-6, 1e6)
        _require(
            isinstance(params["include_hamiltonian_off"], bool),
            f"{loc}.include_hamiltonian_off",
            "expected true or false",
        )
    elif experiment == "locc-check":
        if "setup" not in params:
            _require(
                params.get("target") in ("two-qubit", "ring", "ising", "identity"),
                f"{loc}.target",
                "expected one of two-qubit, ring, ising, identity (or a raw 'setup')",
            )
    elif experiment == "oracle":
        if "setup" not in params:
            _require(
                params.get("target") in ("single-qubit", "two-qubit"),
                f"{loc}.target",
                "expected single-qubit or two-qubit (or a raw 'setup')",
            )
        _require(
            isinstance(params["epsilon"], (int, float))
            and 0.0 < params["epsilon"] <= 0.2,
            f"{loc}.epsilon",
            "epsilon must lie in (0, 0.2]",
        )
        _require(
            isinstance(params["n_traj"], int) and params["n_traj"] >= 1,
            f"{loc}.n_traj",
            "need a positive integer",
        )
        _require(
            isinstance(params["steps"], int) and params["steps"] >= 1,
            f"{loc}.steps",
            "need a positive integer",
        )
    else:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}")


def load_config(
    experiment: str,
    config_path: str | None = None,
    out: str | None = None,
    seed: int | None = None,
    workers: int | None = None,
    strict: bool | None = None,
) -> RunConfig:
    """Merge defaults, an optional config file, and command-line overrides."""
    raw: dict[str, Any] = {}
    if config_path is not None:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError("config", f"file not found: {config_path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from exc
        _require(isinstance(raw, dict), "config", "top level must be an object")
    file_experiment = raw.get("experiment", experiment)
    _require(
        file_experiment == experiment,
        "experiment",
        f"config file is for {file_experiment!r} but the {experiment!r} command was invoked",
    )
    params = dict(DEFAULT_PARAMS[experiment])
    file_params = raw.get("params", {})
    _require(isinstance(file_params, dict), "params", "expected an object")
    params.update(file_params)
    validate_params(experiment, params)
    solver = raw.get("solver", {})
    _require(isinstance(solver, dict), "solver", "expected an object")
    method = solver.get("method", "auto")
    _require(
        method in ("auto", "eig", "direct"),
        "solver.method",
        "expected auto, eig or direct",
    )
    config = RunConfig(
        experiment=experiment,
        params=params,
        out=out if out is not None else raw.get("out", "results.csv"),
        seed=seed if seed is not None else int(raw.get("seed", 0)),
        workers=workers if workers is not None else int(raw.get("workers", 1)),
        strict=strict if strict is not None else bool(raw.get("strict", False)),
        solver=solver,
    )
    _require(config.workers >= 1, "workers", "need at least one worker")
    _require(config.seed >= 0, "seed", "seed must be a non-negative integer")
    return config
