"""``locspike`` command line.

Subcommands: gen-synth, train, eval, infer-stream, cost, orders.
Exit codes: 0 ok, 2 usage, 3 I/O, 4 invalid input, 5 training diverged.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import checkpoint
from ._accel import backend_name
from .dataset import read_dataset, write_dataset
from .energy import op_report
from .model import MODEL_KINDS, HybridNet, build_model, stream, time_weighted_output
from .response import KernelConfig
from .spikes import builtin_orders, resolve_order
from .synth import SynthSpec, generate, split
from .train import Metrics, TrainConfig, TrainingDiverged, evaluate, train

log = logging.getLogger("locspike")

EXIT_USAGE, EXIT_IO, EXIT_INVALID, EXIT_DIVERGED = 2, 3, 4, 5

# flag name -> (section, key)
_TRAIN_FLAGS = {"lr": "lr", "l2": "l2", "epochs": "epochs", "batch_size": "batch_size",
                "lam": "lam", "r_true": "r_true", "r_false": "r_false", "seed": "seed",
                "split_frac": "split_frac", "rho": "rho", "rms_eps": "rms_eps"}
_KERNEL_FLAGS = {"theta": "theta", "tau_s": "tau_s", "tau_r": "tau_r",
                 "kernel_len": "kernel_len", "surr_alpha": "surr_alpha",
                 "surr_beta": "surr_beta", "delay": "delay"}


def _write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(v):
    return f"{v:.6g}" if isinstance(v, float) else v


# ------------------------------------------------------------------ gen-synth


def cmd_gen_synth(args):
    spec = SynthSpec(classes=args.classes, taxels=args.taxels, steps=args.steps,
                     samples_per_class=args.per_class, base_rate=args.base_rate,
                     pattern_strength=args.pattern_strength, jitter=args.jitter,
                     width=args.width, seed=args.seed)
    ds = generate(spec)
    out = Path(args.out)
    path = write_dataset(ds, out)
    _write_json(out / "run_config.json", {"command": "gen-synth", "synth": spec.to_dict()})
    print(f"wrote {len(ds)} samples to {path}")
    return 0


# ---------------------------------------------------------------------- train


def resolve_train_config(args) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    conf = {"model": "hybrid", "order": "loop", "init_gain": 1.0, "hidden": 32,
            "train": TrainConfig().to_dict(), "kernel": KernelConfig().to_dict()}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            user = json.load(fh)
        for k, v in user.items():
            if k in ("train", "kernel"):
                unknown = set(v) - set(conf[k])
                if unknown:
                    raise ValueError(f"unknown {k} config keys: {sorted(unknown)}")
                conf[k].update(v)
            elif k in conf:
                conf[k] = v
            else:
                raise ValueError(f"unknown config key {k!r}")
    for flag, key in _TRAIN_FLAGS.items():
        if getattr(args, flag, None) is not None:
            conf["train"][key] = getattr(args, flag)
    for flag, key in _KERNEL_FLAGS.items():
        if getattr(args, flag, None) is not None:
            conf["kernel"][key] = getattr(args, flag)
    for key in ("model", "order", "init_gain", "hidden"):
        if getattr(args, key, None) is not None:
            conf[key] = getattr(args, key)
    if conf["model"] not in MODEL_KINDS:
        raise ValueError(f"unknown model {conf['model']!r}")
    return conf


def _train_once(ds, conf, tcfg, kcfg, seed, split_seed, jobs):
    tr, te = split(ds, tcfg.split_frac, split_seed)
    order = resolve_order(conf["order"], ds.channels)
    model = build_model(conf["model"], ds.channels, ds.steps, ds.classes, hidden=conf["hidden"],
                        cfg=kcfg, order=order, seed=seed, init_gain=conf["init_gain"])
    model, hist = train(model, tr, tcfg, te, jobs=jobs)
    return model, hist, tr, te


def cmd_train(args):
    conf = resolve_train_config(args)
    tcfg = TrainConfig.from_dict(conf["train"])
    kcfg = KernelConfig.from_dict(conf["kernel"])
    ds = read_dataset(args.data, jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    resolved = {"command": "train", "data": str(args.data), "rounds": args.rounds,
                "resplit": args.resplit, **conf}
    _write_json(out / "run_config.json", resolved)

    summary = []
    for r in range(args.rounds):
        seed = tcfg.seed + r
        split_seed = seed if args.resplit else tcfg.seed
        rcfg = TrainConfig.from_dict({**tcfg.to_dict(), "seed": seed})
        tag = "" if args.rounds == 1 else f"_r{r}"
        extra = {"split_seed": split_seed, "split_frac": tcfg.split_frac,
                 "classes": ds.classes, "taxels": ds.channels, "steps": ds.steps,
                 "train": rcfg.to_dict(), "order_name": conf["order"]}
        try:
            model, hist, tr, te = _train_once(ds, conf, rcfg, kcfg, seed, split_seed, args.jobs)
        except TrainingDiverged as exc:
            if exc.last_good is not None:
                checkpoint.save(exc.last_good, out / f"checkpoint_last_good{tag}.json", extra)
            raise
        checkpoint.save(model, out / f"checkpoint{tag}.json", extra)
        _write_csv(out / f"metrics{tag}.csv", ["epoch", "loss", "train_acc", "test_acc"],
                   [[e, repr(l), repr(a), repr(b)] for e, l, a, b in hist.rows()])
        m = evaluate(model, te, args.jobs)
        _write_confusion(out / f"confusion{tag}.csv", m)
        summary.append((r, seed, split_seed, m.accuracy))
        print(f"round {r}: test accuracy {m.accuracy:.4f}")
    if args.rounds > 1:
        accs = np.array([s[3] for s in summary])
        _write_csv(out / "rounds.csv", ["round", "seed", "split_seed", "test_acc"],
                   [[a, b, c, repr(d)] for a, b, c, d in summary])
        print(f"mean test accuracy over {args.rounds} rounds: {accs.mean():.4f} "
              f"(std {accs.std():.4f})")
    return 0


def _write_confusion(path, m: Metrics):
    k = m.confusion.shape[0]
    _write_csv(path, ["true\\pred"] + [str(i) for i in range(k)],
               [[i] + m.confusion[i].tolist() for i in range(k)])


# ---------------------------------------------------------------- eval & co.


def _load_eval_inputs(args):
    model, extra = checkpoint.load(args.checkpoint)
    ds = read_dataset(args.data, jobs=getattr(args, "jobs", 1))
    want = (extra.get("taxels"), extra.get("steps"), extra.get("classes"))
    if None not in want and want != (ds.channels, ds.steps, ds.classes):
        raise ValueError(
            f"checkpoint expects taxels/steps/classes {want}, dataset has "
            f"{(ds.channels, ds.steps, ds.classes)}")
    which = getattr(args, "split", "all")
    if which == "all":
        return model, ds, extra
    tr, te = split(ds, extra.get("split_frac", 0.8), extra.get("split_seed", 0))
    return model, (te if which == "test" else tr), extra


def cmd_eval(args):
    model, ds, _ = _load_eval_inputs(args)
    m = evaluate(model, ds, args.jobs)
    report = {"accuracy": m.accuracy, "samples": len(ds),
              "precision": m.precision.tolist(), "recall": m.recall.tolist(),
              "confusion": m.confusion.tolist()}
    print(json.dumps(report, sort_keys=True))
    if args.out:
        out = Path(args.out)
        _write_json(out / "metrics.json", report)
        _write_confusion(out / "confusion.csv", m)
        _write_json(out / "run_config.json", {"command": "eval", **_jsonable(vars(args))})
    return 0


def cmd_infer_stream(args):
    model, ds, _ = _load_eval_inputs(args)
    if not isinstance(model, HybridNet):
        raise ValueError("infer-stream needs a hybrid checkpoint")
    K = model.K
    header = ["sample_id", "t"] + [f"score_{k}" for k in range(K)] + ["prediction"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    samples = [s for s in ds if args.sample is None or s[1].sample_id == args.sample]
    if not samples:
        raise ValueError(f"no sample with id {args.sample!r}")
    for x, meta in samples:
        T = x.shape[1]
        for t, o1, o2, o, pred in stream(x, model):
            if args.time_weighted:
                _, scores, pred = time_weighted_output(o1, o2, args.psi, t, T)
            else:
                scores = o.sum(axis=1)
            w.writerow([meta.sample_id, t] + [_fmt(float(v)) for v in scores] + [pred])
    text = buf.getvalue()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_cost(args):
    model, ds, _ = _load_eval_inputs(args)
    rep = op_report(model, ds)
    summary = {"snn_accumulate_ops": rep.snn_accumulate_ops,
               "snn_multiply_ops": rep.snn_multiply_ops,
               "ann_mac_ops": rep.ann_mac_ops,
               "compression_ratio": rep.compression_ratio if np.isfinite(rep.compression_ratio)
               else "inf",
               "samples": rep.samples, "convention": rep.convention,
               "branches": {b: rep.branch_total(b) for b in sorted({l.branch for l in rep.per_layer})}}
    print(json.dumps(summary, sort_keys=True))
    rows = [[l.branch, l.layer, l.input_spikes, l.fan_out, l.ops] for l in rep.per_layer]
    rows.append(["total", "", "", "", rep.snn_accumulate_ops])
    if args.out:
        out = Path(args.out)
        _write_json(out / "cost.json", summary)
        _write_csv(out / "cost.csv", ["branch", "layer", "input_spikes", "fan_out", "ops"], rows)
    return 0


def cmd_orders(args):
    for name, order in builtin_orders().items():
        print(f"{name}: " + ", ".join(str(i) for i in order.one_based()))
    return 0


def _jsonable(d):
    return {k: v for k, v in d.items() if k != "func" and isinstance(v, (str, int, float, bool, type(None)))}


# --------------------------------------------------------------------- parser


def build_parser():
    p = argparse.ArgumentParser(prog="locspike", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-synth", help="write a synthetic event dataset")
    g.add_argument("--classes", type=int, required=True)
    g.add_argument("--taxels", type=int, required=True)
    g.add_argument("--steps", type=int, required=True)
    g.add_argument("--per-class", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--base-rate", type=float, default=0.01)
    g.add_argument("--pattern-strength", type=float, default=0.9)
    g.add_argument("--jitter", type=int, default=2)
    g.add_argument("--width", type=int, default=2)
    g.add_argument("--out", default="synth")
    g.set_defaults(func=cmd_gen_synth)

    t = sub.add_parser("train", help="train a model and write a checkpoint")
    t.add_argument("--data", required=True, help="dataset directory or manifest.json")
    t.add_argument("--out", required=True)
    t.add_argument("--config", help="JSON config; flags override it")
    t.add_argument("--model", choices=MODEL_KINDS)
    t.add_argument("--order", choices=sorted(builtin_orders()))
    t.add_argument("--init-gain", dest="init_gain", type=float)
    t.add_argument("--hidden", type=int)
    t.add_argument("--lambda", dest="lam", type=float)
    t.add_argument("--lr", type=float)
    t.add_argument("--l2", type=float)
    t.add_argument("--epochs", type=int)
    t.add_argument("--batch-size", dest="batch_size", type=int)
    t.add_argument("--r-true", dest="r_true", type=float)
    t.add_argument("--r-false", dest="r_false", type=float)
    t.add_argument("--seed", type=int)
    t.add_argument("--split-frac", dest="split_frac", type=float)
    t.add_argument("--rho", type=float)
    t.add_argument("--rms-eps", dest="rms_eps", type=float)
    for name in ("theta", "tau_s", "tau_r", "surr_alpha", "surr_beta"):
        t.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    t.add_argument("--kernel-len", dest="kernel_len", type=int)
    t.add_argument("--delay", type=int)
    t.add_argument("--rounds", type=int, default=1)
    t.add_argument("--resplit", action="store_true", help="re-split the data every round")
    t.add_argument("--jobs", type=int, default=1)
    t.set_defaults(func=cmd_train)

    def eval_args(sp, default_split="test"):
        sp.add_argument("--checkpoint", required=True)
        sp.add_argument("--data", required=True)
        sp.add_argument("--split", choices=("test", "train", "all"), default=default_split)
        sp.add_argument("--jobs", type=int, default=1)

    e = sub.add_parser("eval", help="accuracy and confusion matrix")
    eval_args(e)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("infer-stream", help="timestep-wise predictions as CSV")
    eval_args(s)
    s.add_argument("--sample", help="only this sample id")
    s.add_argument("--time-weighted", action="store_true")
    s.add_argument("--psi", type=float, default=10.0)
    s.add_argument("--out", help="CSV path (default stdout)")
    s.set_defaults(func=cmd_infer_stream)

    c = sub.add_parser("cost", help="synaptic-operation counts vs dense MACs")
    eval_args(c, default_split="all")
    c.add_argument("--out")
    c.set_defaults(func=cmd_cost)

    o = sub.add_parser("orders", help="print the built-in location orders (1-based)")
    o.set_defaults(func=cmd_orders)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.info("scan backend: %s", backend_name())
    try:
        return args.func(args)
    except TrainingDiverged as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
