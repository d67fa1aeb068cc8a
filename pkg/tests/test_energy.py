import math

import numpy as np
import pytest

from locspike.dataset import Dataset, SampleMeta
from locspike.energy import (compression, count_ann_dense_ops, count_snn_ops,
                             dense_equivalent_ops, op_report)
from locspike.layer import DenseSpikingLayer, TIME
from locspike.model import BranchNet, build_model
from locspike.response import KernelConfig

from conftest import random_spikes


def _ds(xs, K=2):
    N, T = xs[0].shape
    return Dataset(N, T, K, [(x, SampleMeta(i % K, f"s{i}")) for i, x in enumerate(xs)])


def test_zero_input_zero_ops():
    m = build_model("hybrid", 6, 9, 3, seed=0)
    rep = op_report(m, _ds([np.zeros((6, 9), np.uint8)] * 3, K=3))
    assert rep.snn_accumulate_ops == 0 and rep.snn_multiply_ops == 0
    assert rep.compression_ratio == math.inf


def test_dense_counts():
    assert count_ann_dense_ops([78, 32], 325) == 811200
    assert count_ann_dense_ops([78, 32, 36], 325) == 1185600
    assert count_ann_dense_ops([78, 32, 36], 0) == 0
    with pytest.raises(ValueError):
        count_ann_dense_ops([], 3)


def test_first_layer_ops_equal_spikes_times_fanout():
    # 100 input spikes into a 32-wide first layer with a silent hidden layer
    cfg = KernelConfig()
    l0 = DenseSpikingLayer(np.zeros((32, 10)), cfg, 20)
    l1 = DenseSpikingLayer(np.zeros((4, 32)), cfg, 20)
    br = BranchNet(TIME, l0, l1)
    x = np.zeros((10, 20), np.uint8)
    x[:, :10] = 1
    rows = count_snn_ops(br, _ds([x], K=4))
    assert rows[0].input_spikes == 100 and rows[0].ops == 3200
    assert rows[1].ops == 0


def test_linear_in_duplication(rng):
    m = build_model("hybrid", 6, 12, 2, seed=1, init_gain=2.0)
    xs = [random_spikes(rng, (6, 12), 0.3) for _ in range(3)]
    one = op_report(m, _ds(xs)).snn_accumulate_ops
    two = op_report(m, _ds(xs + xs)).snn_accumulate_ops
    assert two == 2 * one


def test_hybrid_is_sum_of_branches(rng):
    m = build_model("hybrid", 6, 12, 2, seed=1, init_gain=2.0)
    ds = _ds([random_spikes(rng, (6, 12), 0.3) for _ in range(4)])
    rep = op_report(m, ds)
    t = sum(r.ops for r in count_snn_ops(m.tsrm, ds))
    l = sum(r.ops for r in count_snn_ops(m.lsrm, ds))
    assert rep.snn_accumulate_ops == t + l
    assert rep.branch_total("tsrm") == t and rep.branch_total("lsrm") == l
    assert dense_equivalent_ops(m) == dense_equivalent_ops(m.tsrm) + dense_equivalent_ops(m.lsrm)


def test_dense_equivalent_topology():
    m = build_model("tsrm", 78, 325, 36, seed=0)
    assert dense_equivalent_ops(m) == 1185600


def test_compression():
    assert compression(0, 100) == math.inf
    assert compression(50, 100) == 2.0
    assert compression(100, 100) == 1.0
