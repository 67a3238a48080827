"""Instance and report JSON: complex entries as [re, im] pairs, matrices as
row-major nested arrays, schema_version mandatory."""

from __future__ import annotations

import json

import numpy as np

from .algebra import FdAlgebra, make_algebra
from .weights import Weight

SCHEMA_VERSION = 1


class InstanceError(ValueError):
    pass


def matrix_to_json(m: np.ndarray):
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    return np.array([[complex(v[0], v[1]) for v in row] for row in data])


def weight_to_json(w: Weight):
    return {"density": [matrix_to_json(d) for d in w.density]}


def weight_from_json(alg: FdAlgebra, data) -> Weight:
    return Weight(alg, [matrix_from_json(d) for d in data["density"]])


def instance_to_json(inst: dict) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": inst["seed"],
        "blocks": list(inst["algebra"].block_dims),
        "weight": weight_to_json(inst["weight"]),
        "group_h": [matrix_to_json(h) for h in inst["group_h"]],
        "tensor_blocks": list(inst["tensor_algebra"].block_dims),
        "tensor_weight": weight_to_json(inst["tensor_weight"]),
        "faithful": bool(inst["faithful"]),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def instance_from_json(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise InstanceError("missing schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise InstanceError(f"unsupported schema_version {doc['schema_version']}")
    try:
        alg = make_algebra(doc["blocks"])
        talg = make_algebra(doc["tensor_blocks"])
        inst = {
            "seed": int(doc["seed"]),
            "algebra": alg,
            "weight": weight_from_json(alg, doc["weight"]),
            "group_h": [matrix_from_json(h) for h in doc["group_h"]],
            "tensor_algebra": talg,
            "tensor_weight": weight_from_json(talg, doc["tensor_weight"]),
            "faithful": bool(doc.get("faithful", True)),
        }
    except (KeyError, TypeError, IndexError) as exc:
        raise InstanceError(f"malformed instance: {exc}") from exc
    return inst


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1) + "\n"


def report_from_json(text: str) -> dict:
    doc = json.loads(text)
    if "schema_version" not in doc:
        raise InstanceError("report missing schema_version")
    return doc
