"""Deterministic JSON report envelopes shared by the CLI and the gate suite.

Reports serialize with sorted keys and shortest-roundtrip floats, so a fixed
seed and fixed inputs reproduce byte-identical output.  Wall time is reported
on stderr only; keeping it out of the canonical bytes is what makes the
determinism contract checkable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np


def jsonable(obj):
    """Recursively convert report payloads to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def canonical_json(payload: dict) -> str:
    return json.dumps(jsonable(payload), sort_keys=True,
                      separators=(",", ":")) + "\n"


def digest(payload) -> str:
    return hashlib.sha256(canonical_json({"inputs": payload}).encode()).hexdigest()[:16]


@dataclass
class RunReport:
    command: str
    inputs: dict
    seed: int
    tolerances: dict
    results: dict
    wall_time_s: float = 0.0

    def payload(self) -> dict:
        return {
            "command": self.command,
            "inputs": jsonable(self.inputs),
            "inputs_digest": digest(self.inputs),
            "seed": self.seed,
            "tolerances": jsonable(self.tolerances),
            "results": jsonable(self.results),
        }

    def to_json(self) -> str:
        """Canonical bytes; wall time is intentionally excluded."""
        return canonical_json(self.payload())


def load_schema() -> dict:
    with resources.files("mdmult").joinpath("report_schema.json").open() as fh:
        return json.load(fh)


def validate_report(payload: dict):
    import jsonschema
    jsonschema.validate(payload, load_schema())
