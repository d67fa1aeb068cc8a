"""Synthetic class-separable event-tactile datasets.

Class ``c`` owns the taxel band ``[c*B, (c+1)*B)`` with ``B = N // K`` and the
time window ``[c*W, (c+1)*W)`` with ``W = T // K``. Inside that block a
diagonal stripe ``width`` taxels wide sweeps across the band, upward for even
classes and downward for odd ones. Stripe cells fire with
``pattern_strength`` on top of Bernoulli(``base_rate``) background, and the
whole stripe is shifted in time by a uniform integer in ``[-jitter, jitter]``
per sample. Motifs are disjoint in taxels and in time, so a class is
recognisable from where it fires as well as from when.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .dataset import Dataset, SampleMeta


@dataclass(frozen=True)
class SynthSpec:
    classes: int = 4
    taxels: int = 16
    steps: int = 50
    samples_per_class: int = 50
    base_rate: float = 0.01
    pattern_strength: float = 0.9
    jitter: int = 2
    width: int = 2
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.base_rate < self.pattern_strength <= 1:
            raise ValueError("need 0 <= base_rate < pattern_strength <= 1")
        if self.classes * self.samples_per_class < 10:
            raise ValueError("need classes * samples_per_class >= 10")
        if self.classes < 1 or self.taxels < 1 or self.steps < 1:
            raise ValueError("classes, taxels and steps must be >= 1")
        if self.jitter < 0 or self.width < 1:
            raise ValueError("jitter must be >= 0 and width >= 1")

    def to_dict(self):
        return asdict(self)


def motif_cells(spec: SynthSpec, c: int) -> list[tuple[int, int]]:
    """Unjittered (taxel, step) support of class ``c``'s stripe."""
    band = spec.taxels // spec.classes
    window = spec.steps // spec.classes
    if window < 2 or band < spec.width:
        raise ValueError(
            f"cannot pack {spec.classes} disjoint {spec.width}-wide motifs into "
            f"{spec.taxels} taxels x {spec.steps} steps")
    travel = band - spec.width
    cells = []
    for m in range(window):
        pos = (m * travel) // (window - 1)
        if c % 2:
            pos = travel - pos
        for w in range(spec.width):
            cells.append((c * band + pos + w, c * window + m))
    return cells


def generate(spec: SynthSpec) -> Dataset:
    motifs = [motif_cells(spec, c) for c in range(spec.classes)]
    children = np.random.SeedSequence(spec.seed).spawn(spec.classes * spec.samples_per_class)
    samples = []
    for c in range(spec.classes):
        cells = np.array(motifs[c], dtype=np.int64)
        for i in range(spec.samples_per_class):
            rng = np.random.default_rng(children[c * spec.samples_per_class + i])
            x = (rng.random((spec.taxels, spec.steps)) < spec.base_rate).astype(np.uint8)
            shift = int(rng.integers(-spec.jitter, spec.jitter + 1)) if spec.jitter else 0
            fire = rng.random(len(cells)) < spec.pattern_strength
            t = cells[:, 1] + shift
            ok = fire & (t >= 0) & (t < spec.steps)
            x[cells[ok, 0], t[ok]] = 1
            x.flags.writeable = False
            samples.append((x, SampleMeta(c, f"c{c:03d}_s{i:05d}")))
    return Dataset(spec.taxels, spec.steps, spec.classes, samples,
                   {"kind": "synth", **spec.to_dict()})


def split(dataset: Dataset, frac: float = 0.8, seed=0):
    """Stratified split; each class contributes ``round(frac * n_c)`` to train."""
    if not 0 < frac < 1:
        raise ValueError(f"frac must be in (0, 1), got {frac}")
    labels = dataset.labels
    rng = np.random.default_rng(seed)
    tr, te = [], []
    for c in range(dataset.classes):
        idx = np.flatnonzero(labels == c)
        if len(idx) == 0:
            continue
        if len(idx) < 2:
            raise ValueError(f"class {c} has {len(idx)} sample; need >= 2 to split")
        idx = idx[rng.permutation(len(idx))]
        n_tr = min(max(int(round(frac * len(idx))), 1), len(idx) - 1)
        tr.extend(idx[:n_tr].tolist())
        te.extend(idx[n_tr:].tolist())
    return dataset.subset(sorted(tr)), dataset.subset(sorted(te))
