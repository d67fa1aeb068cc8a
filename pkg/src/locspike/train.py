"""Spike-count losses, RMSProp with l2, the training loop, and evaluation."""
from __future__ import annotations

import copy
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .model import HybridNet, model_output, predict

log = logging.getLogger(__name__)


class TrainingDiverged(FloatingPointError):
    """Raised on a non-finite loss or gradient; ``last_good`` holds the prior model."""

    def __init__(self, msg, last_good=None, epoch=None):
        super().__init__(msg)
        self.last_good = last_good
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.01
    l2: float = 1e-5
    epochs: int = 100
    batch_size: int = 8
    lam: float = 1.0
    r_true: float = 0.5
    r_false: float = 0.05
    seed: int = 0
    split_frac: float = 0.8
    rho: float = 0.9
    rms_eps: float = 1e-8

    def __post_init__(self):
        if not 0 <= self.r_false < self.r_true <= 1:
            raise ValueError(f"need 0 <= r_false < r_true <= 1, got {self.r_false}, {self.r_true}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {self.l2}")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if not 0 < self.split_frac < 1:
            raise ValueError(f"split_frac must be in (0, 1), got {self.split_frac}")
        if not 0 <= self.rho < 1 or self.rms_eps <= 0:
            raise ValueError("need 0 <= rho < 1 and rms_eps > 0")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


# ------------------------------------------------------------------ losses


def desired_counts(label: int, classes: int, duration: float, cfg: TrainConfig) -> np.ndarray:
    if not 0 <= label < classes:
        raise ValueError(f"label {label} outside [0, {classes})")
    d = np.full(classes, cfg.r_false * duration)
    d[label] = cfg.r_true * duration
    return d


def spike_count_loss(counts, desired) -> float:
    e = np.asarray(counts, dtype=np.float64) - np.asarray(desired, dtype=np.float64)
    return 0.5 * float(e @ e)


def loss_count(O, label, cfg: TrainConfig, duration=None) -> float:
    """Standard spike-count loss over the output's own steps (or ``duration``)."""
    O = np.asarray(O)
    d = desired_counts(label, O.shape[0], O.shape[1] if duration is None else duration, cfg)
    return spike_count_loss(O.sum(axis=1), d)


def loss_location(O2, label, cfg: TrainConfig) -> float:
    """Count loss for a location-branch output; counts run over the N locations."""
    return loss_count(O2, label, cfg)


def loss_weighted(O1, O2, label, cfg: TrainConfig, lam=None) -> float:
    """``1/2 sum_k (count1_k + lam * count2_k - desired_k)^2`` over duration T + N."""
    lam = cfg.lam if lam is None else lam
    O1, O2 = np.asarray(O1), np.asarray(O2)
    bal = O1.sum(axis=1) + lam * O2.sum(axis=1)
    d = desired_counts(label, O1.shape[0], O1.shape[1] + O2.shape[1], cfg)
    return spike_count_loss(bal, d)


def loss_and_output_grads(model, outs, label, cfg: TrainConfig):
    """Loss for a model kind plus dL/d(output spike) per branch output."""
    if isinstance(model, HybridNet):
        o1, o2 = outs
        d = desired_counts(label, o1.shape[0], o1.shape[1] + o2.shape[1], cfg)
        e = o1.sum(axis=1) + cfg.lam * o2.sum(axis=1) - d
        g1 = np.repeat(e[:, None], o1.shape[1], axis=1)
        g2 = np.repeat((cfg.lam * e)[:, None], o2.shape[1], axis=1)
        return 0.5 * float(e @ e), [g1, g2]
    (o,) = outs
    d = desired_counts(label, o.shape[0], o.shape[1], cfg)
    e = o.sum(axis=1) - d
    return 0.5 * float(e @ e), [np.repeat(e[:, None], o.shape[1], axis=1)]


def _branches(model):
    return [model.tsrm, model.lsrm] if isinstance(model, HybridNet) else [model]


def sample_gradients(model, x, label, cfg: TrainConfig, relaxed: bool = False):
    """Forward + surrogate backward for one sample.

    Returns ``(loss, grads per layer in model.layers order, readout tensor)``.
    With ``relaxed=True`` the forward uses smooth spikes and the gradient is
    exact for that relaxed loss.
    """
    outs, caches = [], []
    for br in _branches(model):
        o, c = br.forward(x, relaxed)
        outs.append(o)
        caches.append(c)
    loss, gouts = loss_and_output_grads(model, outs, label, cfg)
    grads = []
    for br, c, g in zip(_branches(model), caches, gouts):
        grads.extend(br.backward(c, g))
    readout = np.concatenate(outs, axis=1) if len(outs) > 1 else outs[0]
    return loss, grads, readout


# --------------------------------------------------------------- optimiser


def rmsprop_step(weights, grads, state: dict, cfg: TrainConfig) -> np.ndarray:
    """One RMSProp update; ``state['sq']`` holds the running mean of squared grads."""
    w = np.asarray(weights, dtype=np.float64)
    g = np.asarray(grads, dtype=np.float64)
    if g.shape != w.shape:
        raise ValueError(f"gradient shape {g.shape} != weight shape {w.shape}")
    if not np.isfinite(g).all():
        raise TrainingDiverged(f"non-finite gradient (max |g| = {np.nanmax(np.abs(g))})")
    g = g + cfg.l2 * w
    sq = state.get("sq")
    if sq is None:
        sq = np.zeros_like(w)
    sq = cfg.rho * sq + (1.0 - cfg.rho) * g * g
    state["sq"] = sq
    return w - cfg.lr * g / (np.sqrt(sq) + cfg.rms_eps)


# ----------------------------------------------------------------- metrics


@dataclass
class Metrics:
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    confusion: np.ndarray  # rows = true class, columns = predicted

    @classmethod
    def from_predictions(cls, y_true, y_pred, classes: int) -> "Metrics":
        cm = np.zeros((classes, classes), dtype=np.int64)
        for t, p in zip(y_true, y_pred):
            cm[int(t), int(p)] += 1
        total = cm.sum()
        tp = np.diag(cm).astype(np.float64)
        with np.errstate(invalid="ignore", divide="ignore"):
            precision = np.where(cm.sum(axis=0) > 0, tp / cm.sum(axis=0), 0.0)
            recall = np.where(cm.sum(axis=1) > 0, tp / cm.sum(axis=1), 0.0)
        acc = float(tp.sum() / total) if total else 0.0
        return cls(acc, precision, recall, cm)


def _map(fn, items, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def predictions(model, dataset, jobs: int = 1) -> np.ndarray:
    return np.array(_map(lambda s: predict(model_output(s[0], model)), list(dataset), jobs),
                    dtype=np.int64)


def evaluate(model, dataset, jobs: int = 1) -> Metrics:
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    return Metrics.from_predictions(dataset.labels, predictions(model, dataset, jobs),
                                    dataset.classes)


# -------------------------------------------------------------------- loop


@dataclass
class History:
    epoch: list = field(default_factory=list)
    loss: list = field(default_factory=list)
    train_acc: list = field(default_factory=list)
    test_acc: list = field(default_factory=list)

    def rows(self):
        return list(zip(self.epoch, self.loss, self.train_acc, self.test_acc))


def train(model, train_set, cfg: TrainConfig, test_set=None, jobs: int = 1,
          on_epoch=None):
    """Train ``model`` in place. Returns ``(model, History)``.

    The per-epoch training accuracy is taken from the forward passes made
    while training (before each batch's update). Deterministic for a fixed
    ``cfg.seed`` regardless of ``jobs``.
    """
    if len(train_set) == 0:
        raise ValueError("training set is empty")
    rng = np.random.default_rng(cfg.seed)
    layers = model.layers
    states = [{} for _ in layers]
    hist = History()
    samples = list(train_set)
    for epoch in range(1, cfg.epochs + 1):
        last_good = copy.deepcopy(model)
        perm = rng.permutation(len(samples))
        total_loss, correct = 0.0, 0
        for start in range(0, len(perm), cfg.batch_size):
            batch = [samples[i] for i in perm[start:start + cfg.batch_size]]
            results = _map(lambda s: sample_gradients(model, s[0], s[1].label, cfg), batch, jobs)
            acc = [np.zeros_like(l.weights) for l in layers]
            for (loss, grads, readout), (_, meta) in zip(results, batch):
                if not np.isfinite(loss):
                    raise TrainingDiverged(f"non-finite loss in epoch {epoch}", last_good, epoch)
                total_loss += loss
                correct += int(predict(readout) == meta.label)
                for a, g in zip(acc, grads):
                    a += g
            for layer, a, st in zip(layers, acc, states):
                try:
                    layer.set_weights(rmsprop_step(layer.weights, a / len(batch), st, cfg))
                except (TrainingDiverged, ValueError) as exc:
                    raise TrainingDiverged(f"epoch {epoch}: {exc}", last_good, epoch) from None
        hist.epoch.append(epoch)
        hist.loss.append(total_loss / len(samples))
        hist.train_acc.append(correct / len(samples))
        hist.test_acc.append(evaluate(model, test_set, jobs).accuracy
                             if test_set is not None and len(test_set) else float("nan"))
        log.info("epoch %d loss %.4f train %.3f test %.3f", epoch, hist.loss[-1],
                 hist.train_acc[-1], hist.test_acc[-1])
        if on_epoch is not None:
            on_epoch(epoch, model, hist)
    return model, hist
