"""On-disk event datasets.

Layout::

    <root>/manifest.json
    <root>/events/<sample_id>.csv

``manifest.json``::

    {"format": "locspike-events", "version": 1,
     "channels": 78, "steps": 325, "classes": 36,
     "samples": [{"id": "s0000", "label": 3, "events": "events/s0000.csv"}, ...],
     "generator": {...}}            # optional, free-form provenance

Each events file holds one ``taxel_index,step_index`` pair per line (0-based).
Blank lines and lines starting with ``#`` are ignored; an empty file is an
all-zero sample.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spikes import ShapeError, from_events, to_events

FORMAT = "locspike-events"
VERSION = 1


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class SampleMeta:
    label: int
    sample_id: str


@dataclass
class Dataset:
    channels: int
    steps: int
    classes: int
    samples: list = field(default_factory=list)  # [(spike tensor, SampleMeta)]
    generator: dict | None = None

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    @property
    def labels(self) -> np.ndarray:
        return np.array([m.label for _, m in self.samples], dtype=np.int64)

    def subset(self, indices) -> "Dataset":
        return Dataset(self.channels, self.steps, self.classes,
                       [self.samples[i] for i in indices], self.generator)

    def validate(self):
        for x, meta in self.samples:
            if x.shape != (self.channels, self.steps):
                raise DatasetError(
                    f"sample {meta.sample_id!r} has shape {x.shape}, "
                    f"expected {(self.channels, self.steps)}")
            if not 0 <= meta.label < self.classes:
                raise DatasetError(
                    f"sample {meta.sample_id!r} label {meta.label} outside [0, {self.classes})")


def _parse_events(path: Path, channels: int, steps: int):
    events = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise DatasetError(f"{path}:{lineno}: expected 'taxel,step', got {line!r}")
            try:
                events.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise DatasetError(f"{path}:{lineno}: non-integer event {line!r}") from None
    try:
        return from_events(events, channels, steps)
    except (ValueError, ShapeError) as exc:
        raise DatasetError(f"{path}: {exc}") from None


def read_dataset(manifest_path, jobs: int = 1) -> Dataset:
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.json"
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            man = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{manifest_path}: malformed manifest ({exc})") from None
    if man.get("format") != FORMAT:
        raise DatasetError(f"{manifest_path}: not a {FORMAT} manifest")
    if man.get("version") != VERSION:
        raise DatasetError(f"{manifest_path}: unsupported version {man.get('version')!r}")
    try:
        channels, steps, classes = int(man["channels"]), int(man["steps"]), int(man["classes"])
        entries = man["samples"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"{manifest_path}: missing or invalid field {exc}") from None
    if channels < 1 or steps < 1 or classes < 1:
        raise DatasetError(f"{manifest_path}: channels, steps, classes must be >= 1")

    root = manifest_path.parent
    metas = []
    for e in entries:
        label = int(e["label"])
        if not 0 <= label < classes:
            raise DatasetError(
                f"{manifest_path}: sample {e.get('id')!r} label {label} outside [0, {classes})")
        metas.append(SampleMeta(label, str(e["id"])))
    paths = [root / e["events"] for e in entries]

    def load(p):
        return _parse_events(p, channels, steps)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            tensors = list(ex.map(load, paths))
    else:
        tensors = [load(p) for p in paths]
    ds = Dataset(channels, steps, classes, list(zip(tensors, metas)), man.get("generator"))
    ds.validate()
    return ds


def write_dataset(ds: Dataset, root) -> Path:
    """Write ``ds`` under ``root``; returns the manifest path. Output is byte-stable."""
    ds.validate()
    root = Path(root)
    (root / "events").mkdir(parents=True, exist_ok=True)
    entries = []
    for x, meta in ds.samples:
        rel = f"events/{meta.sample_id}.csv"
        if os.sep in meta.sample_id or "/" in meta.sample_id:
            raise DatasetError(f"sample id {meta.sample_id!r} must not contain path separators")
        lines = "".join(f"{t},{s}\n" for t, s in to_events(x))
        (root / rel).write_text(lines, encoding="utf-8")
        entries.append({"id": meta.sample_id, "label": int(meta.label), "events": rel})
    man = {"format": FORMAT, "version": VERSION, "channels": ds.channels,
           "steps": ds.steps, "classes": ds.classes, "samples": entries}
    if ds.generator is not None:
        man["generator"] = ds.generator
    path = root / "manifest.json"
    path.write_text(json.dumps(man, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return path
