"""Response kernels, threshold, and the surrogate spike derivative.

Both kernels are alpha functions of the step offset ``s``::

    eps(s) = (s / tau_s) * exp(1 - s / tau_s)            s >= 0
    eta(s) = -2 * theta * (s / tau_r) * exp(1 - s / tau_r)  s >= 0

and vanish for ``s < 0``. The same tables drive scans along time and along
location; each branch of a model may carry its own :class:`KernelConfig`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class KernelConfig:
    tau_s: float = 1.0
    tau_r: float = 1.0
    theta: float = 10.0
    kernel_len: int | None = None  # None -> min(axis length, ceil(8 * max tau))
    surr_alpha: float = 0.1
    surr_beta: float = 0.1
    delay: int = 0

    def __post_init__(self):
        for name in ("tau_s", "tau_r", "theta", "surr_alpha", "surr_beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if self.kernel_len is not None and int(self.kernel_len) < 1:
            raise ValueError(f"kernel_len must be >= 1, got {self.kernel_len!r}")
        if int(self.delay) < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay!r}")

    def resolved_len(self, axis_length: int | None = None) -> int:
        if self.kernel_len is not None:
            return int(self.kernel_len)
        n = int(math.ceil(8 * max(self.tau_s, self.tau_r))) + int(self.delay)
        if axis_length is not None:
            n = min(n, int(axis_length))
        return max(n, 1)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "KernelConfig":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


def _alpha(s, tau):
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    pos = s >= 0
    r = s[pos] / tau
    out[pos] = r * np.exp(1.0 - r)
    return out


def eval_epsilon(s, cfg: KernelConfig):
    """Incoming-spike response at offset ``s`` (scalar or array), delay applied."""
    v = _alpha(np.asarray(s, dtype=np.float64) - cfg.delay, cfg.tau_s)
    return float(v) if v.ndim == 0 else v


def eval_eta(s, cfg: KernelConfig):
    """Refractory response at offset ``s``; non-positive, peak -2*theta at tau_r."""
    v = -2.0 * cfg.theta * _alpha(s, cfg.tau_r)
    return float(v) if v.ndim == 0 else v


def sample_kernels(cfg: KernelConfig, axis_length: int | None = None):
    """Return ``(eps_table, eta_table)`` sampled at integer offsets ``0..L-1``."""
    k = np.arange(cfg.resolved_len(axis_length), dtype=np.float64)
    eps = np.atleast_1d(eval_epsilon(k, cfg)).astype(np.float64)
    eta = np.atleast_1d(eval_eta(k, cfg)).astype(np.float64)
    eps.flags.writeable = False
    eta.flags.writeable = False
    return eps, eta


def surrogate_derivative(u, cfg: KernelConfig):
    """SLAYER-style spike-derivative stand-in: ``alpha * exp(-beta * |u - theta|)``."""
    u = np.asarray(u, dtype=np.float64)
    v = cfg.surr_alpha * np.exp(-cfg.surr_beta * np.abs(u - cfg.theta))
    return float(v) if v.ndim == 0 else v


def relaxed_spike(u, cfg: KernelConfig):
    """Smooth spike whose derivative is exactly :func:`surrogate_derivative`.

    Antiderivative anchored at 0 for ``u -> -inf``; equals ``alpha/beta`` at the
    threshold and saturates at ``2*alpha/beta``. Used to build the relaxed
    objective that finite differences can probe.
    """
    u = np.asarray(u, dtype=np.float64)
    a, b, th = cfg.surr_alpha, cfg.surr_beta, cfg.theta
    d = u - th
    v = np.where(d < 0, (a / b) * np.exp(b * np.minimum(d, 0.0)),
                 (a / b) * (2.0 - np.exp(-b * np.maximum(d, 0.0))))
    return float(v) if v.ndim == 0 else v
