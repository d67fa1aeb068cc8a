"""Two-layer time and location branches, the hybrid net, and its readouts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .layer import (LOCATION, TIME, DenseSpikingLayer, ScanSession, backward_scan,
                    default_init_scale, forward_scan, init_weights)
from .response import KernelConfig
from .spikes import LocationOrder, ShapeError, location_view, pad_suffix

HIDDEN = 32


def _seedseq(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


@dataclass
class BranchNet:
    """``input -> SFc0 (hidden) -> SFc1 (K)`` scanned along ``axis``.

    Time branch: input is the N x T tensor, layers scan over T.
    Location branch: input is the T x N location view, layers scan over N.
    """

    axis: str
    layer0: DenseSpikingLayer
    layer1: DenseSpikingLayer
    order: LocationOrder | None = None
    kind: str = field(init=False)

    def __post_init__(self):
        if self.axis not in (TIME, LOCATION):
            raise ValueError(f"unknown axis {self.axis!r}")
        if self.axis == LOCATION and self.order is None:
            raise ValueError("location branch needs a LocationOrder")
        if self.layer1.in_channels != self.layer0.out_channels:
            raise ShapeError("layer1 inputs must equal layer0 outputs")
        self.kind = "tsrm" if self.axis == TIME else "lsrm"

    @classmethod
    def build(cls, axis, n_taxels, n_steps, classes, *, hidden=HIDDEN, cfg=None,
              order=None, seed=0, init_gain=1.0, init_density=0.05):
        cfg = cfg or KernelConfig()
        if axis == TIME:
            n_in, length = n_taxels, n_steps
        else:
            n_in, length = n_steps, n_taxels
            order = order or LocationOrder.identity(n_taxels)
        ss = _seedseq(seed).spawn(2)
        g0 = default_init_scale(cfg, length, init_density, init_gain)
        # hidden layer rates are not known up front; assume the same density
        g1 = default_init_scale(cfg, length, init_density, init_gain)
        l0 = DenseSpikingLayer(init_weights(n_in, hidden, ss[0], g0), cfg, length)
        l1 = DenseSpikingLayer(init_weights(hidden, classes, ss[1], g1), cfg, length)
        return cls(axis, l0, l1, order)

    @property
    def layers(self):
        return [self.layer0, self.layer1]

    @property
    def classes(self) -> int:
        return self.layer1.out_channels

    def orient(self, x):
        """Put the recurrence axis last: x itself, or its location view."""
        x = np.asarray(x)
        if self.axis == TIME:
            if x.shape[0] != self.layer0.in_channels:
                raise ShapeError(f"time branch expects {self.layer0.in_channels} taxels, got {x.shape[0]}")
            return x
        if x.shape[1] != self.layer0.in_channels:
            raise ShapeError(f"location branch expects {self.layer0.in_channels} steps, got {x.shape[1]}")
        return location_view(x, self.order)

    def forward(self, x, relaxed=False):
        """Return ``(output, cache)``; ``cache`` feeds :meth:`backward`."""
        a0 = self.orient(x)
        tr0 = forward_scan(a0, self.layer0, relaxed)
        tr1 = forward_scan(tr0.spikes, self.layer1, relaxed)
        return tr1.spikes, (a0, tr0, tr1)

    def backward(self, cache, grad_out):
        a0, tr0, tr1 = cache
        gw1, gh = backward_scan(tr1, tr0.spikes, grad_out, self.layer1)
        gw0, _ = backward_scan(tr0, a0, gh, self.layer0)
        return [gw0, gw1]


@dataclass
class HybridNet:
    tsrm: BranchNet
    lsrm: BranchNet
    kind: str = field(init=False, default="hybrid")

    def __post_init__(self):
        if self.tsrm.axis != TIME or self.lsrm.axis != LOCATION:
            raise ValueError("hybrid net needs a time branch and a location branch")
        if self.tsrm.classes != self.lsrm.classes:
            raise ShapeError("both branches must share K")

    @classmethod
    def build(cls, n_taxels, n_steps, classes, *, hidden=HIDDEN, cfg=None, cfg_location=None,
              order=None, seed=0, init_gain=1.0, init_density=0.05):
        s_t, s_l = _seedseq(seed).spawn(2)
        t = BranchNet.build(TIME, n_taxels, n_steps, classes, hidden=hidden, cfg=cfg,
                            seed=s_t, init_gain=init_gain, init_density=init_density)
        lc = cfg_location if cfg_location is not None else cfg
        l = BranchNet.build(LOCATION, n_taxels, n_steps, classes, hidden=hidden, cfg=lc,
                            order=order, seed=s_l, init_gain=init_gain, init_density=init_density)
        return cls(t, l)

    @property
    def K(self):
        return self.tsrm.classes

    @property
    def N(self):
        return self.tsrm.layer0.in_channels

    @property
    def T(self):
        return self.lsrm.layer0.in_channels

    @property
    def layers(self):
        return self.tsrm.layers + self.lsrm.layers


MODEL_KINDS = ("hybrid", "tsrm", "lsrm")


def build_model(kind, n_taxels, n_steps, classes, **kw):
    """Fresh ``hybrid``, ``tsrm`` or ``lsrm`` model; keyword args as in ``build``."""
    if kind == "hybrid":
        return HybridNet.build(n_taxels, n_steps, classes, **kw)
    kw.pop("cfg_location", None)
    if kind == "tsrm":
        kw.pop("order", None)
        return BranchNet.build(TIME, n_taxels, n_steps, classes, **kw)
    if kind == "lsrm":
        return BranchNet.build(LOCATION, n_taxels, n_steps, classes, **kw)
    raise ValueError(f"unknown model kind {kind!r}; choose from {MODEL_KINDS}")


def forward_tsrm(x, net) -> np.ndarray:
    """O1 (K x T) from the time branch."""
    return _branch(net, "tsrm").forward(x)[0]


def forward_lsrm(x, net) -> np.ndarray:
    """O2 (K x N) from the location branch."""
    return _branch(net, "lsrm").forward(x)[0]


def forward_hybrid(x, net: HybridNet) -> np.ndarray:
    """O = [O1 | O2], K x (T + N)."""
    return np.concatenate([forward_tsrm(x, net), forward_lsrm(x, net)], axis=1)


def model_output(x, net) -> np.ndarray:
    """The readout tensor of any model kind."""
    if isinstance(net, HybridNet):
        return forward_hybrid(x, net)
    return net.forward(x)[0]


def _branch(net, kind):
    if isinstance(net, HybridNet):
        return net.tsrm if kind == "tsrm" else net.lsrm
    if net.kind != kind:
        raise ValueError(f"model is a {net.kind} branch, not {kind}")
    return net


def class_scores(O) -> np.ndarray:
    return np.asarray(O, dtype=np.float64).sum(axis=1)


def predict(O) -> int:
    """Class with the most output spikes; ties go to the lowest index."""
    scores = class_scores(O)
    if scores.size == 0:
        raise ValueError("empty output")
    return int(np.argmax(scores))


def timestep_inference(x, net: HybridNet, t: int):
    """Literal prefix re-run at step ``t`` (1-based).

    Returns ``(O1(t): K x t, O2(t): K x N, O(t): K x (t+N), prediction)``.
    """
    x = np.asarray(x)
    T = x.shape[1]
    if not 1 <= t <= T:
        raise ValueError(f"t={t} outside [1, {T}]")
    prefix = x[:, :t]
    o1 = net.tsrm.forward(prefix)[0]
    # X' for the prefix, zero-extended back to T rows, then the location order
    padded = pad_suffix(prefix.T, T).T
    o2 = net.lsrm.forward(padded)[0]
    o = np.concatenate([o1, o2], axis=1)
    return o1, o2, o, predict(o)


class StreamingInference:
    """Anytime hybrid inference fed one time bin at a time.

    The time branch runs incrementally; the location branch sees a growing
    prefix on its channel axis and is re-run on the zero-padded input.
    """

    def __init__(self, net: HybridNet):
        self.net = net
        self.T = net.T
        self._s0 = ScanSession(net.tsrm.layer0)
        self._s1 = ScanSession(net.tsrm.layer1)
        self._x = np.zeros((net.N, self.T), dtype=np.uint8)
        self._o1 = np.zeros((net.K, self.T), dtype=np.uint8)
        self.t = 0

    def push(self, x_col):
        if self.t >= self.T:
            raise ValueError(f"stream already holds all {self.T} steps")
        x_col = np.asarray(x_col)
        self._x[:, self.t] = x_col
        h = self._s0.push(x_col)
        self._o1[:, self.t] = self._s1.push(h)
        self.t += 1
        o1 = self._o1[:, :self.t].copy()
        o2 = self.net.lsrm.forward(self._x)[0]
        o = np.concatenate([o1, o2], axis=1)
        return o1, o2, o, predict(o)


def stream(x, net: HybridNet):
    """Yield ``(t, O1(t), O2(t), O(t), prediction)`` for t = 1..T."""
    x = np.asarray(x)
    if x.shape != (net.N, net.T):
        raise ShapeError(f"input shape {x.shape} != {(net.N, net.T)}")
    sess = StreamingInference(net)
    for t in range(1, x.shape[1] + 1):
        yield (t, *sess.push(x[:, t - 1]))


@dataclass(frozen=True)
class TimeWeightConfig:
    psi: float = 10.0

    def __post_init__(self):
        if not math.isfinite(self.psi):
            raise ValueError("psi must be finite")


def time_weight(t, T, psi) -> float:
    """Location-branch weight ``1 / (1 + exp(-psi * (t/T - 1)))``; 0.5 at t = T."""
    z = -psi * (t / T - 1.0)
    if z > 700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(z))


def time_weighted_output(o1, o2, cfg: TimeWeightConfig | float, t, T):
    """Returns ``(weighted concatenation, weighted class scores, prediction)``."""
    psi = cfg.psi if isinstance(cfg, TimeWeightConfig) else float(cfg)
    if not 1 <= t <= T:
        raise ValueError(f"t={t} outside [1, {T}]")
    w = time_weight(t, T, psi)
    out = np.concatenate([(1.0 - w) * np.asarray(o1, dtype=np.float64),
                          w * np.asarray(o2, dtype=np.float64)], axis=1)
    scores = class_scores(out)
    return out, scores, int(np.argmax(scores))
