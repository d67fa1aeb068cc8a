"""Binary event grids, taxel location orders, and axis views.

A spike tensor is a read-only 2-D ``uint8`` numpy array of shape
``(channels, steps)`` whose entries are 0 or 1. The scan always runs along
the last axis, so the caller picks the recurrence axis by orienting the data:
``x`` (taxels x time) for the time branch and :func:`location_view` (time x
taxels, permuted by a location order) for the location branch.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TAXELS_PER_SENSOR = 39

# 1-based taxel listings for the three fingerprint-inspired traversals.
_ARCH = [11, 25, 35, 4, 18, 30, 7, 2, 20, 37, 29, 12, 9, 33, 23, 16, 1, 6, 15, 21,
         27, 34, 39, 24, 17, 10, 31, 38, 28, 14, 3, 22, 32, 8, 19, 36, 5, 13, 26]
_WHORL = [21, 15, 16, 23, 27, 24, 17, 6, 9, 12, 20, 29, 33, 34, 31, 28, 22, 14, 10, 1,
          2, 7, 18, 30, 37, 39, 38, 32, 19, 8, 3, 4, 11, 25, 35, 36, 26, 13, 5]
_LOOP = list(range(1, 40))


class ShapeError(ValueError):
    pass


def as_spikes(data, *, channels: int | None = None, steps: int | None = None) -> np.ndarray:
    """Validate ``data`` as a binary grid and return a read-only uint8 copy."""
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise ShapeError(f"spike tensor must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 0:
        raise ShapeError(f"spike tensor needs >= 1 channel, got shape {arr.shape}")
    if channels is not None and arr.shape[0] != channels:
        raise ShapeError(f"expected {channels} channels, got {arr.shape[0]}")
    if steps is not None and arr.shape[1] != steps:
        raise ShapeError(f"expected {steps} steps, got {arr.shape[1]}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("spike tensor entries must be 0 or 1")
    out = np.array(arr, dtype=np.uint8)
    out.flags.writeable = False
    return out


def from_events(events, channels: int, steps: int) -> np.ndarray:
    """Materialise ``(taxel, step)`` pairs into a ``channels x steps`` grid.

    Repeated coordinates collapse to a single 1.
    """
    if channels < 1 or steps < 1:
        raise ShapeError(f"channels and steps must be >= 1, got {channels}x{steps}")
    out = np.zeros((channels, steps), dtype=np.uint8)
    for ev in events:
        taxel, step = int(ev[0]), int(ev[1])
        if not (0 <= taxel < channels and 0 <= step < steps):
            raise ValueError(
                f"event (taxel={taxel}, step={step}) outside {channels}x{steps} grid")
        out[taxel, step] = 1
    out.flags.writeable = False
    return out


def to_events(x) -> list[tuple[int, int]]:
    """Inverse of :func:`from_events`, sorted by (taxel, step)."""
    taxels, steps = np.nonzero(np.asarray(x))
    return list(zip(taxels.tolist(), steps.tolist()))


@dataclass(frozen=True)
class LocationOrder:
    """A 0-based permutation giving the traversal order of one sensor's taxels."""

    order: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        object.__setattr__(self, "order", order)
        if not order or sorted(order) != list(range(len(order))):
            raise ValueError(f"location order {self.name!r} is not a permutation of 0..{len(order) - 1}")

    def __len__(self):
        return len(self.order)

    @classmethod
    def identity(cls, n: int, name: str = "loop") -> "LocationOrder":
        return cls(tuple(range(n)), name)

    @classmethod
    def from_one_based(cls, seq, name: str = "") -> "LocationOrder":
        return cls(tuple(int(i) - 1 for i in seq), name)

    def one_based(self) -> list[int]:
        return [i + 1 for i in self.order]

    def full_permutation(self, n_taxels: int) -> np.ndarray:
        """Blockwise permutation over ``n_taxels`` (sensor 0's block first)."""
        size = len(self.order)
        if n_taxels % size:
            raise ShapeError(
                f"{n_taxels} taxels is not a whole number of {size}-taxel sensors")
        base = np.asarray(self.order, dtype=np.int64)
        return np.concatenate([base + b * size for b in range(n_taxels // size)])


def builtin_orders() -> dict[str, LocationOrder]:
    return {
        "arch": LocationOrder.from_one_based(_ARCH, "arch"),
        "whorl": LocationOrder.from_one_based(_WHORL, "whorl"),
        "loop": LocationOrder.from_one_based(_LOOP, "loop"),
    }


def resolve_order(name: str, n_taxels: int) -> LocationOrder:
    """Pick a named order usable on ``n_taxels`` taxels.

    The built-in orders describe 39-taxel fingertips and apply blockwise when
    ``n_taxels`` is a multiple of 39. Other taxel counts only admit ``loop``
    (identity), which is well defined for any length.
    """
    orders = builtin_orders()
    if name not in orders:
        raise ValueError(f"unknown location order {name!r}; choose from {sorted(orders)}")
    if n_taxels % TAXELS_PER_SENSOR == 0:
        return orders[name]
    if name == "loop":
        return LocationOrder.identity(n_taxels)
    raise ShapeError(
        f"order {name!r} needs a multiple of {TAXELS_PER_SENSOR} taxels, got {n_taxels}")


def location_view(x, order: LocationOrder, sensors: int | None = None) -> np.ndarray:
    """Reorient ``x`` (N x T) to (T x N) with taxels permuted along the last axis.

    ``out[t, j] = x[p[j], t]`` where ``p`` applies ``order`` to each sensor block.
    """
    x = np.asarray(x)
    n = x.shape[0]
    if sensors is not None and n != sensors * len(order):
        raise ShapeError(f"{n} taxels != {sensors} sensors x {len(order)} taxels")
    p = order.full_permutation(n)
    out = np.ascontiguousarray(x[p, :].T)
    out.flags.writeable = False
    return out


def inverse_location_view(xv, order: LocationOrder) -> np.ndarray:
    xv = np.asarray(xv)
    p = order.full_permutation(xv.shape[1])
    out = np.empty((xv.shape[1], xv.shape[0]), dtype=xv.dtype)
    out[p, :] = xv.T
    out.flags.writeable = False
    return out


def pad_suffix(x, total_steps: int) -> np.ndarray:
    """Zero-extend a ``t x N`` tensor along its first axis to ``total_steps x N``."""
    x = np.asarray(x)
    t = x.shape[0]
    if t > total_steps:
        raise ShapeError(f"cannot pad {t} rows down to {total_steps}")
    out = np.zeros((total_steps,) + x.shape[1:], dtype=x.dtype)
    out[:t] = x
    out.flags.writeable = False
    return out
