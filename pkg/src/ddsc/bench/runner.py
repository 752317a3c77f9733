"""Paired (strategy, seed) training runs on the synthetic benchmark."""

from dataclasses import dataclass, field, asdict
import csv
import io

import numpy as np

from ..engine import TrainingSet, run_training
from ..schedule import ScheduleConfig
from .backbone import ToyBackbone
from .data import SyntheticDatasetSpec, generate_dataset
from .metrics import classwise_accuracy
from .strategies import make_policy

CURVE_COLUMNS = (
    "strategy", "seed", "epoch", "lambda", "train_loss",
    "acc_overall", "acc_seen", "acc_unseen", "weight_entropy",
)


@dataclass(frozen=True)
class ModelConfig:
    dim: int = 16
    lr: float = 0.5
    batch_size: int = 16

    def validate(self):
        if self.dim < 1:
            raise ValueError(f"dim: must be >= 1, got {self.dim}")
        if not self.lr > 0:
            raise ValueError(f"lr: must be > 0, got {self.lr}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size: must be >= 1, got {self.batch_size}")

    def to_dict(self):
        return asdict(self)


class RunFailed(RuntimeError):
    def __init__(self, strategy, seed, epoch, cause):
        where = f"strategy={strategy} seed={seed}" + (f" epoch={epoch}" if epoch is not None else "")
        super().__init__(f"{where}: {cause}")
        self.strategy, self.seed, self.epoch = strategy, seed, epoch


def run_seeds(spec: SyntheticDatasetSpec, seed: int):
    """Data seed and init seed for one benchmark seed (shared by all strategies)."""
    ss = np.random.SeedSequence([int(spec.seed), int(seed)])
    data_seed, init_seed, order_seed = (int(x) for x in ss.generate_state(3))
    return data_seed, init_seed, order_seed


def evaluate_split(model, test, C):
    pred = model.predict(test.X)
    seen = test.seen
    return {
        "acc_overall": classwise_accuracy(pred, test.y, C),
        "acc_seen": classwise_accuracy(pred[seen], test.y[seen], C),
        "acc_unseen": classwise_accuracy(pred[~seen], test.y[~seen], C),
    }


@dataclass
class RunResult:
    strategy: str
    seed: int
    reports: list
    state: object
    initial_loss: float
    model: object = None

    @property
    def final(self):
        return self.reports[-1].metrics


def run_single(spec, strategy, seed, T, schedule=None, model_cfg=None, on_epoch_end=None) -> RunResult:
    schedule = schedule or ScheduleConfig(T=T)
    if schedule.T != T:
        schedule = ScheduleConfig(**{**schedule.to_dict(), "T": int(T)})
    model_cfg = model_cfg or ModelConfig()
    data_seed, init_seed, order_seed = run_seeds(spec, seed)
    train, test = generate_dataset(spec, seed=data_seed)
    model = ToyBackbone(train.X, train.y, spec.C, dim=model_cfg.dim, lr=model_cfg.lr, seed=init_seed)
    initial_loss = float(np.mean(model.per_sample_loss(np.arange(len(train)))))
    dataset = TrainingSet(train.device, spec.M_train)
    hook = None
    if on_epoch_end is not None:
        def hook(state, rep):
            on_epoch_end(strategy, seed, state, rep)
    reports, state = run_training(
        schedule, model, dataset, dim=model_cfg.dim, policy=make_policy(strategy),
        rng_seed=order_seed, batch_size=model_cfg.batch_size,
        evaluate=lambda: evaluate_split(model, test, spec.C), on_epoch_end=hook,
    )
    return RunResult(strategy, seed, reports, state, initial_loss, model)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.6g}"


@dataclass
class BenchmarkReport:
    spec: SyntheticDatasetSpec
    T: int
    results: list = field(default_factory=list)

    def curve_rows(self):
        for r in sorted(self.results, key=lambda r: (r.strategy, r.seed)):
            for rep in r.reports:
                yield {
                    "strategy": r.strategy, "seed": r.seed, "epoch": rep.epoch, "lambda": rep.lam,
                    "train_loss": rep.train_loss, "acc_overall": rep.metrics["acc_overall"],
                    "acc_seen": rep.metrics["acc_seen"], "acc_unseen": rep.metrics["acc_unseen"],
                    "weight_entropy": rep.weight_entropy,
                }

    def curves_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for row in self.curve_rows():
            w.writerow([row["strategy"], row["seed"]] + [_fmt(row[c]) for c in CURVE_COLUMNS[2:]])
        return buf.getvalue()

    def final_accuracies(self, strategy, key):
        """Final-epoch accuracies (percent) in seed order."""
        rs = sorted((r for r in self.results if r.strategy == strategy), key=lambda r: r.seed)
        return np.array([100.0 * r.final[key] for r in rs])

    @property
    def strategies(self):
        return sorted({r.strategy for r in self.results})

    def summary(self) -> dict:
        out = {}
        for s in self.strategies:
            entry = {"n_seeds": int(sum(r.strategy == s for r in self.results))}
            for key in ("acc_overall", "acc_seen", "acc_unseen"):
                a = self.final_accuracies(s, key)
                entry[f"{key}_pct_mean"] = float(a.mean())
                entry[f"{key}_pct_std"] = float(a.std(ddof=1)) if a.size > 1 else 0.0
            out[s] = entry
        return out

    def delta(self, a, b, key="acc_unseen"):
        """Signed difference of mean final accuracy (points), ``a - b``."""
        return float(self.final_accuracies(a, key).mean() - self.final_accuracies(b, key).mean())


def run_benchmark(spec: SyntheticDatasetSpec, strategies, T: int, seeds, schedule=None, model_cfg=None,
                  on_epoch_end=None) -> BenchmarkReport:
    if not strategies:
        raise ValueError("at least one strategy is required")
    if not seeds:
        raise ValueError("at least one seed is required")
    spec.validate()
    report = BenchmarkReport(spec, T)
    for strategy in strategies:
        make_policy(strategy)
        for seed in seeds:
            try:
                res = run_single(spec, strategy, seed, T, schedule, model_cfg, on_epoch_end)
            except Exception as exc:
                raise RunFailed(strategy, seed, getattr(exc, "epoch", None), exc) from exc
            report.results.append(res)
    return report
