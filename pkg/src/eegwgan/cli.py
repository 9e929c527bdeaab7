"""Command-line interface: ``train``, ``generate``, ``evaluate`` and ``make-toy``."""

import argparse
import contextlib
import json
import os
import sys
from pathlib import Path

from .data import SEG_LEN, load_dataset_dir, make_toy_dataset, minmax_scale_file, write_segment_csv, write_toy_dataset
from .evaluation import SynthesisRequest, export_training_log, fidelity_report, generate_synthetic, plot_training_log
from .exceptions import ConfigError
from .model import TrainConfig, train
from .persistence import load_model, save_model

MODEL_FILE = "model.cwg"
LOG_FILE = "training_log.csv"
PLOT_FILE = "training_loss.svg"

RUN_DEFAULTS = {"data_dir": "data", "out_dir": "out", "seg_len": SEG_LEN}


def load_run_config(path):
    """Read a JSON run config; missing keys take defaults, unknown keys are rejected."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    known = set(TrainConfig.field_names()) | set(RUN_DEFAULTS)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {unknown}")
    run = {**RUN_DEFAULTS, **{k: v for k, v in raw.items() if k in RUN_DEFAULTS}}
    cfg = TrainConfig(**{k: v for k, v in raw.items() if k not in RUN_DEFAULTS})
    return cfg, run


def cmd_train(args):
    cfg, run = load_run_config(args.config)
    if args.data_dir is not None:
        run["data_dir"] = args.data_dir
    if args.out_dir is not None:
        run["out_dir"] = args.out_dir
    data_dir = Path(run["data_dir"])
    if not data_dir.is_dir():
        raise FileNotFoundError(f"data directory not found: {data_dir}")
    ds = load_dataset_dir(data_dir, seg_len=run["seg_len"])
    gen, critic, log = train(ds, cfg, verbose=args.verbose)
    out = Path(run["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    save_model(gen, critic, out / MODEL_FILE)
    export_training_log(log, out / LOG_FILE)
    plot_training_log(log, out / PLOT_FILE)
    final = log[-1]
    print(f"final epoch {final.epoch}: d_loss {final.d_loss!r} g_loss {final.g_loss!r}")
    return 0


def cmd_generate(args):
    gen, _ = load_model(args.model)
    synth = generate_synthetic(gen, SynthesisRequest(args.label, args.count, args.seed))
    # written in loader-normalised form so reloading does not rescale it
    if synth.max() > synth.min():
        synth = minmax_scale_file(synth)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{args.label}_synthetic.csv"
    write_segment_csv(path, synth)
    print(path)
    return 0


def cmd_evaluate(args):
    gen, _ = load_model(args.model)
    ds = load_dataset_dir(args.data, seg_len=gen.seg_len)
    real = ds.select(args.label)
    if real.shape[0] == 0:
        raise ConfigError(f"label {args.label} is absent from {args.data}")
    if real.shape[0] < 2:
        raise ConfigError(f"need at least 2 samples of label {args.label}")
    synth = generate_synthetic(gen, SynthesisRequest(args.label, real.shape[0], args.seed))
    report = fidelity_report(real, synth)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"fidelity_{args.label}.txt").write_text(report.to_text(), encoding="utf-8")
    (out / f"fidelity_{args.label}.csv").write_text(report.to_csv(), encoding="utf-8")
    print(report.to_text(), end="")
    return 0


def cmd_make_toy(args):
    ds = make_toy_dataset(args.n_per_class, args.seg_len, args.f0, args.f1, args.noise_std, args.seed)
    for path in write_toy_dataset(ds, args.out):
        print(path)
    return 0


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="eegwgan", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a conditional WGAN from a JSON config")
    t.add_argument("--config", required=True, help="JSON run config")
    t.add_argument("--data-dir", help="override data_dir from the config")
    t.add_argument("--out-dir", help="override out_dir from the config")
    t.add_argument("--verbose", action="store_true")
    t.set_defaults(func=cmd_train)

    g = sub.add_parser("generate", help="write synthetic segments for one label")
    g.add_argument("--model", required=True)
    g.add_argument("--label", type=int, choices=[0, 1], required=True)
    g.add_argument("--count", type=_positive_int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("evaluate", help="compare synthetic and real segments of one label")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True, help="directory of labelled segment CSVs")
    e.add_argument("--label", type=int, choices=[0, 1], required=True)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", required=True, help="output directory for report files")
    e.set_defaults(func=cmd_evaluate)

    m = sub.add_parser("make-toy", help="write a two-class sinusoid toy dataset")
    m.add_argument("--out", required=True, help="output directory")
    m.add_argument("--n-per-class", type=_positive_int, default=500)
    m.add_argument("--seg-len", type=_positive_int, default=SEG_LEN)
    m.add_argument("--f0", type=float, default=2)
    m.add_argument("--f1", type=float, default=6)
    m.add_argument("--noise-std", type=float, default=0.1)
    m.add_argument("--seed", type=int, default=0)
    m.set_defaults(func=cmd_make_toy)
    return p


def _thread_limit():
    n = os.environ.get("CWG_THREADS")
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(n)))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit():
            return args.func(args)
    except (OSError, ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
