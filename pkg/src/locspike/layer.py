"""Fully-connected spiking layer scanned causally along one axis.

The membrane potential at step ``k`` of output neuron ``i`` is::

    u[i, k] = sum_j W[i, j] * sum_{m < L} eps[m] * x[j, k - m]
              + sum_{1 <= m < L} eta[m] * o[i, k - m]
    o[i, k] = 1  if u[i, k] > theta  else 0

The axis is whatever the last dimension of the input means: time steps for a
TSRM layer, taxel locations for an LSRM layer. Nothing else differs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _scan
from .response import KernelConfig, sample_kernels
from .spikes import ShapeError, location_view

TIME, LOCATION = "time", "location"


class DenseSpikingLayer:
    """Weights ``(out, in)`` plus the kernel tables for an axis of fixed length."""

    def __init__(self, weights, cfg: KernelConfig | None = None, axis_length: int | None = None):
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ShapeError(f"weights must be 2-D, got {self.weights.shape}")
        if not np.isfinite(self.weights).all():
            raise ValueError("weights contain NaN or Inf")
        self.cfg = cfg or KernelConfig()
        self.axis_length = axis_length
        self.eps, self.eta = sample_kernels(self.cfg, axis_length)

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    def set_weights(self, w):
        w = np.ascontiguousarray(w, dtype=np.float64)
        if w.shape != self.weights.shape:
            raise ShapeError(f"weight shape {w.shape} != {self.weights.shape}")
        if not np.isfinite(w).all():
            raise ValueError("weight update produced NaN or Inf")
        self.weights = w

    def _kernel_args(self):
        c = self.cfg
        return self.eps, self.eta, float(c.theta), float(c.surr_alpha), float(c.surr_beta)

    def __repr__(self):
        return (f"DenseSpikingLayer(in={self.in_channels}, out={self.out_channels}, "
                f"L={len(self.eps)})")


@dataclass
class ScanTrace:
    membrane: np.ndarray   # u, (out, S)
    spikes: np.ndarray     # o, (out, S); uint8, or float in relaxed mode
    synaptic: np.ndarray   # W @ psp, pre-refractory, (out, S)
    psp: np.ndarray        # eps-filtered input, (in, S)
    relaxed: bool = False

    @property
    def steps(self) -> int:
        return self.membrane.shape[1]


def forward_scan(x, layer: DenseSpikingLayer, relaxed: bool = False) -> ScanTrace:
    """Scan ``x`` (in x S) through ``layer`` along its last axis.

    With ``relaxed=True`` spikes are replaced by the smooth
    :func:`~locspike.response.relaxed_spike` of the membrane, everywhere
    including the refractory feedback; real-valued inputs are accepted.
    """
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != layer.in_channels:
        raise ShapeError(f"input shape {x.shape} does not match layer with {layer.in_channels} inputs")
    xf = np.ascontiguousarray(x, dtype=np.float64)
    eps, eta, theta, a, b = layer._kernel_args()
    psp, syn, u, s = _scan.forward(layer.weights, eps, eta, theta, a, b, bool(relaxed), xf)
    if not relaxed:
        s = s.astype(np.uint8)
        s.flags.writeable = False
    return ScanTrace(u, s, syn, psp, bool(relaxed))


def backward_scan(trace: ScanTrace, x, grad_out, layer: DenseSpikingLayer):
    """Surrogate gradients for one layer.

    ``grad_out`` is dL/d(output spike) per (neuron, step). The spike derivative
    is replaced by :func:`~locspike.response.surrogate_derivative` and the error
    is carried back through the refractory feedback. Returns
    ``(grad_weights, grad_input)`` where ``grad_input`` is dL/d(input spike).
    """
    x = np.asarray(x)
    g = np.ascontiguousarray(grad_out, dtype=np.float64)
    n_out, S = trace.membrane.shape
    if x.shape != (layer.in_channels, S) or trace.psp.shape != x.shape:
        raise ShapeError(f"trace over {S} steps does not match input {x.shape}")
    if n_out != layer.out_channels or g.shape != (n_out, S):
        raise ShapeError(f"grad_out shape {g.shape} does not match trace {(n_out, S)}")
    eps, eta, theta, a, b = layer._kernel_args()
    delta = _scan.backward(trace.membrane, g, eta, theta, a, b)
    grad_w = delta @ trace.psp.T
    grad_psp = layer.weights.T @ delta
    # adjoint of the causal eps filter: grad_x[:, k] = sum_m eps[m] * grad_psp[:, k + m]
    grad_x = np.zeros_like(grad_psp)
    for m in range(min(len(eps), S)):
        grad_x[:, :S - m] += eps[m] * grad_psp[:, m:]
    return grad_w, grad_x


def scan_axis(x, layer: DenseSpikingLayer, axis: str, order=None, relaxed: bool = False) -> ScanTrace:
    """Scan a taxels x time tensor along ``axis`` ("time" or "location")."""
    if axis == TIME:
        return forward_scan(x, layer, relaxed)
    if axis == LOCATION:
        if order is None:
            raise ValueError("location scans need a LocationOrder")
        return forward_scan(location_view(x, order), layer, relaxed)
    raise ValueError(f"unknown axis {axis!r}")


def default_init_scale(cfg: KernelConfig, axis_length: int | None = None,
                       density: float = 0.05, gain: float = 1.0) -> float:
    """Scale ``g`` for :func:`init_weights` (half-width is ``g / sqrt(in)``).

    Chosen so that at the given input spike density the membrane's standard
    deviation is about ``gain * theta``.
    """
    eps, _ = sample_kernels(cfg, axis_length)
    energy = float(np.sum(eps ** 2)) or 1.0
    return gain * cfg.theta * math.sqrt(3.0 / (density * energy))


def init_weights(n_in: int, n_out: int, seed, scale: float = 10.0) -> np.ndarray:
    """Uniform weights in ``[-c, c]`` with ``c = scale / sqrt(n_in)``."""
    c = scale / math.sqrt(n_in)
    rng = np.random.default_rng(seed)
    return rng.uniform(-c, c, size=(n_out, n_in))


class ScanSession:
    """Incremental forward scan: push one input column per step.

    Uses the same step kernel as :func:`forward_scan`, so the emitted columns
    are bit-identical to the whole-sequence result.
    """

    def __init__(self, layer: DenseSpikingLayer):
        self.layer = layer
        L = len(layer.eps)
        self._xbuf = np.zeros((layer.in_channels, L))
        self._sbuf = np.zeros((layer.out_channels, L))
        self._psp = np.zeros(layer.in_channels)
        self._syn = np.zeros(layer.out_channels)
        self._u = np.zeros(layer.out_channels)
        self._s = np.zeros(layer.out_channels)
        self.k = 0

    def push(self, x_col) -> np.ndarray:
        x_col = np.ascontiguousarray(x_col, dtype=np.float64)
        if x_col.shape != (self.layer.in_channels,):
            raise ShapeError(f"column shape {x_col.shape} != ({self.layer.in_channels},)")
        eps, eta, theta, a, b = self.layer._kernel_args()
        _scan.step(self.layer.weights, eps, eta, theta, a, b, False, self._xbuf, self._sbuf,
                   self.k, x_col, self._psp, self._syn, self._u, self._s)
        self.k += 1
        return self._s.copy()

    @property
    def membrane(self) -> np.ndarray:
        return self._u.copy()
