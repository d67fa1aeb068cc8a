"""Versioned JSON checkpoints.

::

    {"format": "locspike-checkpoint", "version": 1, "kind": "hybrid" | "tsrm" | "lsrm",
     "branches": [{"axis": "time" | "location", "order": [...0-based...] | null,
                   "order_name": str, "kernel": {KernelConfig fields},
                   "axis_length": int,
                   "layers": [{"shape": [out, in], "weights": [[...], ...]}, ...]}],
     "extra": {...}}

Weights are written with ``repr`` precision, so a save/load round trip is
exact and identical models serialise to identical bytes.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .layer import DenseSpikingLayer
from .model import BranchNet, HybridNet
from .response import KernelConfig
from .spikes import LocationOrder

FORMAT = "locspike-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _branch_dict(br: BranchNet):
    return {
        "axis": br.axis,
        "order": list(br.order.order) if br.order is not None else None,
        "order_name": br.order.name if br.order is not None else "",
        "kernel": br.layer0.cfg.to_dict(),
        "axis_length": br.layer0.axis_length,
        "layers": [{"shape": list(l.weights.shape), "weights": l.weights.tolist()}
                   for l in br.layers],
    }


def to_dict(model, extra=None) -> dict:
    branches = [model.tsrm, model.lsrm] if isinstance(model, HybridNet) else [model]
    return {"format": FORMAT, "version": VERSION, "kind": model.kind,
            "branches": [_branch_dict(b) for b in branches], "extra": extra or {}}


def dumps(model, extra=None) -> str:
    return json.dumps(to_dict(model, extra), sort_keys=True, separators=(",", ":")) + "\n"


def save(model, path, extra=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(model, extra), encoding="utf-8")
    return path


def _branch_from(d) -> BranchNet:
    cfg = KernelConfig.from_dict(d["kernel"])
    layers = []
    for ld in d["layers"]:
        w = np.array(ld["weights"], dtype=np.float64).reshape(ld["shape"])
        layers.append(DenseSpikingLayer(w, cfg, d["axis_length"]))
    order = None
    if d.get("order") is not None:
        order = LocationOrder(tuple(d["order"]), d.get("order_name", ""))
    return BranchNet(d["axis"], layers[0], layers[1], order)


def from_dict(d):
    if d.get("format") != FORMAT:
        raise CheckpointError("not a locspike checkpoint")
    if d.get("version") != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {d.get('version')!r}")
    try:
        branches = [_branch_from(b) for b in d["branches"]]
        model = HybridNet(*branches) if d["kind"] == "hybrid" else branches[0]
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CheckpointError(f"corrupt checkpoint: {exc}") from None
    if model.kind != d["kind"]:
        raise CheckpointError(f"checkpoint kind {d['kind']!r} does not match its branches")
    return model, d.get("extra", {})


def load(path):
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: malformed checkpoint ({exc})") from None
    return from_dict(d)
