"""Data CSV and model JSON persistence.

Data files start with ``#grid,t1,...,td`` and continue with one
``label,v1,...,vd`` row per sample, labels written as ``+1`` / ``-1``.
Floats are written with ``repr`` so that they round-trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .functional import FunctionalSvmConfig, FunctionalSvmModel, kernel_id
from .kernels import Grid, KernelSpec, gram_matrix
from .svm import SvmModel, SvmParams

MODEL_FORMAT_VERSION = 1
_LABELS = {"+1": 1, "1": 1, "-1": -1}


def _fmt(x: float) -> str:
    return repr(float(x))


def format_data(grid: Grid, values, labels) -> str:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    lines = ["#grid," + ",".join(_fmt(t) for t in grid.points)]
    for lab, row in zip(labels, values):
        lines.append(("+1" if int(lab) > 0 else "-1") + "," + ",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_data(path, grid: Grid, values, labels) -> None:
    Path(path).write_text(format_data(grid, values, labels))


def parse_data(text: str, path="<data>"):
    """Return (grid, values (n, d), labels (n,)) from data-CSV text."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ConfigError("data file is empty", path, 1)
    header = lines[0].strip()
    if not header.startswith("#grid,"):
        raise ConfigError("first line must be '#grid,t1,...,td'", path, 1)
    try:
        grid = Grid([float(tok) for tok in header.split(",")[1:]])
    except ValueError as exc:
        raise ConfigError(f"bad grid header: {exc}", path, 1) from None
    labels, rows = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if fields[0] not in _LABELS:
            raise ConfigError(f"label must be +1 or -1, got {fields[0]!r}", path, lineno)
        if len(fields) - 1 != len(grid):
            raise ConfigError(
                f"expected {len(grid)} values after the label, got {len(fields) - 1}", path, lineno
            )
        try:
            row = [float(tok) for tok in fields[1:]]
        except ValueError as exc:
            raise ConfigError(str(exc), path, lineno) from None
        if not np.all(np.isfinite(row)):
            raise ConfigError("values must be finite", path, lineno)
        labels.append(_LABELS[fields[0]])
        rows.append(row)
    if not rows:
        raise ConfigError("data file has no samples", path, None)
    return grid, np.array(rows, dtype=float), np.array(labels, dtype=int)


def read_data(path):
    return parse_data(Path(path).read_text(), str(path))


def model_to_dict(model: FunctionalSvmModel) -> dict:
    cfg = model.config
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "order": cfg.spec.order,
        "grid": [float(t) for t in cfg.grid.points],
        "gamma": float(cfg.gamma),
        "jitter": float(cfg.jitter),
        "beta": cfg.beta,
        "C_used": float(model.c_used),
        "support_vectors": model.core.support_vectors.tolist(),
        "dual_coefs": model.core.dual_coefs.tolist(),
        "bias": float(model.core.bias),
    }


def model_from_dict(doc: dict) -> FunctionalSvmModel:
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ConfigError(f"unsupported model format_version {doc.get('format_version')!r}")
    spec = KernelSpec(int(doc["order"]))
    grid = Grid(doc["grid"])
    config = FunctionalSvmConfig(
        spec=spec,
        grid=grid,
        gamma=float(doc["gamma"]),
        jitter=float(doc["jitter"]),
        beta=doc.get("beta"),
        c_override=float(doc["C_used"]),
    )
    params = SvmParams(c_bound=config.c_override, gamma=config.gamma)
    sv = np.array(doc["support_vectors"], dtype=float).reshape(-1, len(grid))
    coefs = np.array(doc["dual_coefs"], dtype=float)
    if coefs.size != sv.shape[0]:
        raise ConfigError("support_vectors and dual_coefs differ in length")
    sv.setflags(write=False)
    coefs.setflags(write=False)
    core = SvmModel(sv, coefs, float(doc["bias"]), params, kernel_id(config))
    return FunctionalSvmModel(config, gram_matrix(spec, grid, config.jitter), core)


def save_model(path, model: FunctionalSvmModel) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path) -> FunctionalSvmModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model is not valid JSON: {exc.msg}", path, exc.lineno) from None
    try:
        return model_from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed model document: {exc}", path) from None
