"""JSON report envelope, its schema, and CSV writers."""

from __future__ import annotations

import csv
import io
import json

import jsonschema

from . import __version__
from .core import RNG_FAMILY
from .kernels import BACKEND

SCHEMA_ID = "stabsim-report/1"

_count = {"type": "integer", "minimum": 0}
_prob = {"type": "number", "minimum": 0, "maximum": 1}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": SCHEMA_ID,
    "type": "object",
    "required": ["schema", "tool_version", "kind", "master_seed", "rng_family", "config", "result"],
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "tool_version": {"type": "string"},
        "kind": {"enum": ["calibration", "simulate_stability", "theorem_check", "bench", "ntarget_scan"]},
        "master_seed": {"type": "integer"},
        "rng_family": {"type": "string"},
        "backend": {"type": "string"},
        "config": {"type": "object"},
        "result": {"type": "object"},
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "calibration"}}},
            "then": {
                "properties": {
                    "result": {
                        "type": "object",
                        "required": [
                            "t_uniform", "t_uniform_mean", "t_uniform_std", "n_useful_hat", "p_hat",
                            "n_useful_v", "stability_target", "grid", "execution_counts",
                        ],
                        "properties": {
                            "t_uniform": _count,
                            "t_uniform_mean": {"type": "number", "minimum": 0},
                            "t_uniform_std": {"type": "number", "minimum": 0},
                            "n_useful_hat": _count,
                            "n_useful_sim": _count,
                            "p_hat": _prob,
                            "p_converged": {"type": "boolean"},
                            "n_useful_v": _count,
                            "fixed_point_trajectory": {"type": "array", "items": _count},
                            "stability_target": _prob,
                            "grid": {
                                "type": "array",
                                "items": {
                                    "type": "object",
                                    "required": ["p", "J"],
                                    "properties": {"p": _prob, "J": _prob},
                                },
                            },
                            "curve": {
                                "type": "array",
                                "items": {
                                    "type": "object",
                                    "required": ["p", "m_ensemble", "J"],
                                    "properties": {"p": _prob, "m_ensemble": _count, "J": _prob},
                                },
                            },
                            "counts": {"type": "array", "items": _count},
                            "execution_counts": {
                                "type": "object",
                                "required": ["real_runs", "simulated_runs"],
                                "properties": {"real_runs": _count, "simulated_runs": _count, "uniform_runs": _count},
                            },
                        },
                    }
                }
            },
        }
    ],
}


def envelope(kind: str, master_seed: int, config: dict, result: dict) -> dict:
    return {
        "schema": SCHEMA_ID,
        "tool_version": __version__,
        "kind": kind,
        "master_seed": int(master_seed),
        "rng_family": RNG_FAMILY,
        "backend": BACKEND,
        "config": config,
        "result": result,
    }


def validate_report(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` is not a valid report."""
    jsonschema.validate(doc, REPORT_SCHEMA)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
