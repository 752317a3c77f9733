"""Command line entry point: ``ddsc run | validate | inspect``."""

import argparse
from datetime import datetime, timezone
import json
import logging
import os
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .bench.runner import RunFailed, run_benchmark
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import ConfigError, build_config, dump_config, read_config_text, with_out
from .kernels import BACKEND
from .schedule import lambda_at, weight_entropy

OUT_ROOT_ENV = "DDSC_OUT_ROOT"

CONFIG_FILE = "config.cfg"
CURVES_FILE = "curves.csv"
SUMMARY_FILE = "summary.json"
CHECKPOINT_DIR = "checkpoints"


def _g(x):
    return f"{x:.6g}"


def _round6(obj):
    if isinstance(obj, float):
        return float(_g(obj))
    if isinstance(obj, dict):
        return {k: _round6(v) for k, v in obj.items()}
    return obj


def _config_args(p):
    p.add_argument("--config", metavar="PATH", help="flat key = value config file")
    p.add_argument("--strategies", metavar="LIST", help="comma list of strategies")
    p.add_argument("--seeds", metavar="N|LIST", help="seed count or comma list")
    p.add_argument("--epochs", metavar="N")
    p.add_argument("--label-fraction", metavar="F")
    p.add_argument("--shift-strength", metavar="F")
    p.add_argument("--checkpoints", choices=("on", "off"))
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")


_FLAG_KEYS = {
    "strategies": "run.strategies",
    "seeds": "run.seeds",
    "epochs": "run.epochs",
    "label_fraction": "dataset.label_fraction",
    "shift_strength": "dataset.shift_strength",
    "checkpoints": "run.checkpoints",
    "out": "run.out",
}


def load_run_config(args):
    raw = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {args.config}: {exc.strerror}") from None
        raw.update(read_config_text(text, source=args.config))
    for attr, key in _FLAG_KEYS.items():
        value = getattr(args, attr, None)
        if value is not None:
            raw[key] = str(value)
    for item in args.set:
        if "=" not in item:
            raise ConfigError("--set", f"expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        raw[k.strip()] = v.strip()
    return build_config(raw)


def cmd_validate(args) -> int:
    cfg = load_run_config(args)
    print(dump_config(cfg), end="")
    return 0


def _prepare_out(cfg):
    out = cfg.run.out or os.path.join(os.environ.get(OUT_ROOT_ENV, "runs"), f"run-{cfg.digest()}")
    out = Path(out)
    if out.exists() and any(out.iterdir()):
        raise ConfigError("run.out", f"output directory {out} is not empty")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = load_run_config(args)
    out = _prepare_out(cfg)
    cfg = with_out(cfg, str(out))
    (out / CONFIG_FILE).write_text(dump_config(cfg))

    hook = None
    if cfg.run.checkpoints:
        ckdir = out / CHECKPOINT_DIR
        ckdir.mkdir()

        def hook(strategy, seed, state, rep):
            save_checkpoint(state, ckdir / f"{strategy}_seed{seed}_epoch{rep.epoch:03d}.json")

    n_runs = len(cfg.run.strategies) * len(cfg.run.seeds)
    print(f"running {n_runs} runs ({len(cfg.run.strategies)} strategies x {len(cfg.run.seeds)} seeds), "
          f"T={cfg.run.epochs}, backend={BACKEND}", file=sys.stderr)
    report = run_benchmark(cfg.dataset, list(cfg.run.strategies), cfg.run.epochs, list(cfg.run.seeds),
                           schedule=cfg.schedule, model_cfg=cfg.model, on_epoch_end=hook)

    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    (out / CURVES_FILE).write_text(f"# generated {stamp} by ddsc {__version__}\n" + report.curves_csv())

    summary = {
        "strategies": report.summary(),
        "schedule": cfg.schedule.to_dict(),
        "epochs": cfg.run.epochs,
        "seeds": list(cfg.run.seeds),
    }
    if "ddsc" in cfg.run.strategies:
        summary["ddsc_unseen_delta_pct"] = {
            s: report.delta("ddsc", s) for s in cfg.run.strategies if s != "ddsc"
        }
    (out / SUMMARY_FILE).write_text(json.dumps(_round6(summary), indent=2, sort_keys=True) + "\n")

    print(f"{'strategy':<16}" + "".join(f"  {h:>20}" for h in ("overall %", "seen %", "unseen %")))
    for s, e in summary["strategies"].items():
        cells = [f"{_g(e[k + '_pct_mean'])} +- {_g(e[k + '_pct_std'])}" for k in ("acc_overall", "acc_seen",
                                                                                  "acc_unseen")]
        print(f"{s:<16}" + "".join(f"  {c:>20}" for c in cells))
    print(f"wrote {out}")
    return 0


def cmd_inspect(args) -> int:
    try:
        state = load_checkpoint(args.checkpoint)
    except CheckpointError as exc:
        print(f"error: unreadable checkpoint: {args.checkpoint} ({exc})", file=sys.stderr)
        return 1
    cfg = state.config
    led = state.ledger
    print(f"checkpoint: {args.checkpoint}")
    print(f"strategy: {state.strategy}  epoch: {state.epoch}/{cfg.T}  samples: {state.n}")
    if state.strategy == "ddsc" and state.epoch >= 1:
        print(f"lambda: {_g(lambda_at(state.epoch, cfg.T, cfg.lambda_min))} (epoch {state.epoch}), "
              f"{_g(lambda_at(min(state.epoch + 1, cfg.T), cfg.T, cfg.lambda_min))} (next)")
    else:
        print("lambda: n/a")
    norms = np.linalg.norm(state.bank.prototypes, axis=1)
    print("prototype norms: " + ", ".join(
        f"dev{m}={_g(norms[m])}" if state.bank.seen[m] else f"dev{m}=unseen" for m in range(state.bank.n_devices)
    ))
    for label, w in (("epoch weights", state.epoch_weights), ("next-epoch weights", state.next_weights)):
        q = np.quantile(w, [0.0, 0.25, 0.5, 0.75, 1.0])
        uniform = bool(np.all(w == w[0]))
        print(f"{label}: min={_g(q[0])} q25={_g(q[1])} median={_g(q[2])} q75={_g(q[3])} max={_g(q[4])} "
              f"entropy={_g(weight_entropy(w))} uniform={'yes' if uniform else 'no'}")
    k = min(args.top, state.n)
    order = np.lexsort((np.arange(state.n), -state.next_weights))
    H_med = np.nanmedian(led.H_hat) if not np.isnan(led.H_hat).all() else float("nan")
    print(f"H_hat median: {_g(H_med)}")
    for label, sel in (("top", order[:k]), ("bottom", order[::-1][:k])):
        print(f"{label}-weighted samples (next epoch):")
        for i in sel:
            print(f"  {int(i):>6}  weight={_g(state.next_weights[i])}  H_hat={_g(led.H_hat[i])}  "
                  f"D_bar={_g(led.D_bar[i])}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ddsc", description=__doc__)
    p.add_argument("--version", action="version", version=f"ddsc {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the synthetic benchmark")
    _config_args(run)
    run.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ROOT_ENV}/run-<hash>)")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a config and print resolved values")
    _config_args(val)
    val.set_defaults(func=cmd_validate)

    ins = sub.add_parser("inspect", help="summarise a checkpoint")
    ins.add_argument("checkpoint")
    ins.add_argument("--top", type=int, default=5)
    ins.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 2
    except RunFailed as exc:
        print(f"error: run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
