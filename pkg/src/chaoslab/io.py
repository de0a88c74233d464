"""JSON file formats and report serialization.

Kernel files:   {"order": k, "dim": n, "entries": [{"idx": [...], "coef": c}, ...]}
Chaos files:    {"dim": n, "constant": c, "kernels": [kernel objects]}
Reports:        {"experiment": ..., "seed": ..., "rows": [...], "verdict": ..., "notes": [...]}
Estimates:      {"method": ..., "value": ..., "ci": [lo, hi], "n": [...]}

The idx arrays must be sorted ascending; the parser rejects unsorted
input and reports the offending location JSON-pointer style.  Writes go
through a temp file and an atomic rename, and serialization sorts keys,
so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile

import numpy as np

from .chaos import ChaosElement, SampleBatch
from .experiments import ExperimentReport
from .kernels import SymmetricKernel, make_kernel


class SchemaError(ValueError):
    """Input does not match the documented file schema."""


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SchemaError(f"{where}/{key}: missing required field")
    return obj[key]


def kernel_to_dict(ker: SymmetricKernel) -> dict:
    entries = [{"idx": list(idx), "coef": c}
               for idx, c in sorted(ker.entries.items())]
    return {"order": ker.order, "dim": ker.dim, "entries": entries}


def kernel_from_dict(obj: dict, where: str = "/kernel") -> SymmetricKernel:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    order = _require(obj, "order", where)
    dim = _require(obj, "dim", where)
    entries = _require(obj, "entries", where)
    if not isinstance(entries, list):
        raise SchemaError(f"{where}/entries: expected a list")
    raw = []
    for i, ent in enumerate(entries):
        loc = f"{where}/entries/{i}"
        if not isinstance(ent, dict):
            raise SchemaError(f"{loc}: expected an object")
        idx = _require(ent, "idx", loc)
        coef = _require(ent, "coef", loc)
        if not isinstance(idx, list) or not all(isinstance(v, int) for v in idx):
            raise SchemaError(f"{loc}/idx: expected a list of integers")
        if any(b < a for a, b in zip(idx, idx[1:])):
            raise SchemaError(f"{loc}/idx: must be sorted ascending, got {idx}")
        raw.append((tuple(idx), float(coef)))
    try:
        return make_kernel(int(order), int(dim), raw)
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def chaos_to_dict(fel: ChaosElement) -> dict:
    return {"dim": fel.dim, "constant": fel.constant,
            "kernels": [kernel_to_dict(fel.kernels[k]) for k in sorted(fel.kernels)]}


def chaos_from_dict(obj: dict, where: str = "/chaos") -> ChaosElement:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    dim = int(_require(obj, "dim", where))
    constant = float(obj.get("constant", 0.0))
    kernels = {}
    for i, kobj in enumerate(obj.get("kernels", [])):
        ker = kernel_from_dict(kobj, f"{where}/kernels/{i}")
        if ker.dim != dim:
            raise SchemaError(f"{where}/kernels/{i}/dim: {ker.dim} != element dim {dim}")
        if ker.order in kernels:
            raise SchemaError(f"{where}/kernels/{i}/order: duplicate order {ker.order}")
        if not ker.is_zero():
            kernels[ker.order] = ker
    return ChaosElement(dim, constant, kernels)


def report_to_dict(rep: ExperimentReport) -> dict:
    # wall_clock stays out so identical (config, seed) runs serialize identically
    return {"experiment": rep.experiment, "seed": rep.seed, "rows": rep.rows,
            "verdict": rep.verdict, "notes": rep.notes}


def report_from_dict(obj: dict) -> ExperimentReport:
    return ExperimentReport(
        experiment=str(_require(obj, "experiment", "/report")),
        seed=int(_require(obj, "seed", "/report")),
        rows=list(_require(obj, "rows", "/report")),
        verdict=str(_require(obj, "verdict", "/report")),
        notes=list(obj.get("notes", [])))


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json_atomic(obj: dict, path: str) -> None:
    """Serialize to a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(dumps(obj))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc


def load_kernel(path: str) -> SymmetricKernel:
    return kernel_from_dict(load_json(path), where="")


def save_kernel(ker: SymmetricKernel, path: str) -> None:
    write_json_atomic(kernel_to_dict(ker), path)


def load_chaos(path: str) -> ChaosElement:
    return chaos_from_dict(load_json(path), where="")


def save_chaos(fel: ChaosElement, path: str) -> None:
    write_json_atomic(chaos_to_dict(fel), path)


def load_report(path: str) -> ExperimentReport:
    return report_from_dict(load_json(path))


def save_report(rep: ExperimentReport, path: str) -> None:
    write_json_atomic(report_to_dict(rep), path)


def save_samples_csv(batch: SampleBatch, path: str) -> None:
    """One row per sample; header 'value' for scalars, 'x1,...' for vectors."""
    vals = np.asarray(batch.values)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh)
            if vals.ndim == 1:
                writer.writerow(["value"])
                for v in vals:
                    writer.writerow([repr(float(v))])
            else:
                writer.writerow([f"x{i + 1}" for i in range(vals.shape[1])])
                for row in vals:
                    writer.writerow([repr(float(v)) for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
