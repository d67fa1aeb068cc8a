"""Synaptic-operation counts for spiking forwards and MACs for dense equivalents.

One synaptic operation is one accumulate of a weight into one postsynaptic
neuron, triggered by one presynaptic spike, so a layer costs
``input spikes x fan-out``. Kernel evaluation and refractory feedback are not
counted; with binary inputs no multiplications are needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import HybridNet

CONVENTION = ("synaptic ops = presynaptic spikes x fan-out; kernel evaluation and "
              "refractory feedback excluded; ANN = dense MACs per step")


@dataclass
class LayerOps:
    branch: str
    layer: int
    input_spikes: int
    fan_out: int

    @property
    def ops(self) -> int:
        return self.input_spikes * self.fan_out


@dataclass
class OpReport:
    snn_accumulate_ops: int
    snn_multiply_ops: int
    ann_mac_ops: int
    compression_ratio: float
    samples: int
    per_layer: list = field(default_factory=list)
    convention: str = CONVENTION

    def branch_total(self, branch: str) -> int:
        return sum(l.ops for l in self.per_layer if l.branch == branch)


def _branches(model):
    return [model.tsrm, model.lsrm] if isinstance(model, HybridNet) else [model]


def count_snn_ops(model, dataset) -> list[LayerOps]:
    """Per-layer accumulate counts over every sample, from actual forward traces."""
    rows = []
    for br in _branches(model):
        spikes_in = [0] * len(br.layers)
        for x, _ in dataset:
            _, (a0, tr0, _) = br.forward(x)
            spikes_in[0] += int(np.count_nonzero(a0))
            spikes_in[1] += int(np.count_nonzero(tr0.spikes))
        rows.extend(LayerOps(br.kind, i, n, l.out_channels)
                    for i, (n, l) in enumerate(zip(spikes_in, br.layers)))
    return rows


def count_ann_dense_ops(layer_dims, steps: int) -> int:
    """MACs of a dense MLP ``dims[0] -> dims[1] -> ...`` applied at every step."""
    dims = list(layer_dims)
    if not dims:
        raise ValueError("layer_dims must be non-empty")
    return sum(a * b for a, b in zip(dims[:-1], dims[1:])) * int(steps)


def dense_equivalent_ops(model) -> int:
    """Per-sample MACs of the same topology evaluated densely along each branch axis."""
    total = 0
    for br in _branches(model):
        dims = [br.layer0.in_channels, br.layer0.out_channels, br.layer1.out_channels]
        total += count_ann_dense_ops(dims, br.layer0.axis_length)
    return total


def compression(snn_ops, ann_ops) -> float:
    """``ann_ops / snn_ops``; ``inf`` when the spiking side did no work."""
    if snn_ops == 0:
        return math.inf
    return ann_ops / snn_ops


def op_report(model, dataset, ann_ops_per_sample: int | None = None) -> OpReport:
    rows = count_snn_ops(model, dataset)
    snn = sum(r.ops for r in rows)
    per = dense_equivalent_ops(model) if ann_ops_per_sample is None else ann_ops_per_sample
    ann = per * len(dataset)
    return OpReport(snn, 0, ann, compression(snn, ann), len(dataset), rows)
