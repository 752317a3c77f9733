"""Epoch loop of the dual-signal curriculum.

Per epoch ``e``:

1. the weights prepared at the end of epoch ``e - 1`` are used (epoch 1 is
   uniform);
2. batches are drawn in a seeded shuffled order, each sample's loss goes into
   the ledger and the trainer takes one step on the in-batch renormalised
   weighted loss;
3. afterwards the loss-change signal is finalised, prototypes are updated
   from the epoch's detached embeddings, entropies are scored against the
   updated bank and smoothed, and the progress signal is min-max normalised;
4. the policy turns the signals into next-epoch weights.

Signal updates run once per epoch, after the batch loop.  Baseline strategies
plug in through ``policy``; the signals are tracked regardless.
"""

from dataclasses import dataclass, field
import logging
from typing import Callable, Optional, Protocol

import numpy as np

from .invariance import PrototypeBank, score_embeddings, smooth_invariance, update_prototypes
from .progress import SampleLedger, finalize_epoch_losses, normalize_progress, record_losses
from .schedule import ScheduleConfig, fuse_scores, lambda_at, scores_to_weights, weight_entropy

log = logging.getLogger(__name__)

# invariance score used when fewer than two devices have prototypes
UNINFORMATIVE_H = 0.5


class Trainer(Protocol):
    """What the engine needs from a backbone.  All methods take index arrays."""

    def embed(self, idx: np.ndarray) -> np.ndarray:
        """Detached embeddings, one row per index."""

    def per_sample_loss(self, idx: np.ndarray) -> np.ndarray:
        """Unweighted per-sample losses at the current parameters."""

    def apply_weighted_step(self, idx: np.ndarray, weights: np.ndarray) -> None:
        """One optimisation step on ``sum(weights * loss[idx])``."""


@dataclass
class TrainingSet:
    devices: np.ndarray
    n_devices: int

    def __post_init__(self):
        self.devices = np.asarray(self.devices, dtype=np.int64)
        if self.devices.ndim != 1 or self.devices.size == 0:
            raise ValueError("training set must be a nonempty 1-d array of device labels")
        if self.n_devices < 1:
            raise ValueError("n_devices must be >= 1")
        bad = (self.devices < 0) | (self.devices >= self.n_devices)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise ValueError(
                f"device label {int(self.devices[i])} of sample {i} out of range [0, {self.n_devices})"
            )

    def __len__(self):
        return int(self.devices.size)


@dataclass
class EpochReport:
    epoch: int
    lam: Optional[float]
    train_loss: float
    weight_entropy: float
    weight_min: float
    weight_max: float
    n_visited: int
    H_hat_mean: float
    D_bar_mean: float
    metrics: dict = field(default_factory=dict)


@dataclass
class CurriculumState:
    config: ScheduleConfig
    bank: PrototypeBank
    ledger: SampleLedger
    rng_seed: int = 0
    batch_size: int = 32
    epoch: int = 0
    epoch_weights: np.ndarray = None
    next_weights: np.ndarray = None
    last_embeddings: np.ndarray = None
    strategy: str = "ddsc"
    policy_state: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.ledger.n
        if self.next_weights is None:
            self.next_weights = np.full(n, 1.0 / n)
        if self.epoch_weights is None:
            self.epoch_weights = self.next_weights.copy()
        if self.last_embeddings is None:
            self.last_embeddings = np.full((n, self.bank.dim), np.nan)

    @property
    def n(self) -> int:
        return self.ledger.n


def new_state(config: ScheduleConfig, dataset: TrainingSet, dim: int, *, rng_seed=0, batch_size=32,
              strategy="ddsc") -> CurriculumState:
    # pad to two devices so a single-device dataset still gets a valid bank
    bank = PrototypeBank(max(dataset.n_devices, 2), dim, gamma=config.gamma)
    ledger = SampleLedger(len(dataset))
    return CurriculumState(config, bank, ledger, rng_seed=int(rng_seed), batch_size=int(batch_size),
                           strategy=strategy)


class DDSCPolicy:
    """Softmax over lambda-mixed invariance and progress scores."""

    name = "ddsc"

    def lambda_for(self, e: int, config: ScheduleConfig) -> float:
        return lambda_at(e, config.T, config.lambda_min)

    def next_weights(self, state: CurriculumState) -> np.ndarray:
        cfg = state.config
        # weights for epoch e+1; after the final epoch the schedule is held at T
        lam = self.lambda_for(min(state.epoch + 1, cfg.T), cfg)
        H = np.where(np.isnan(state.ledger.H_hat), UNINFORMATIVE_H, state.ledger.H_hat)
        s = fuse_scores(H, state.ledger.D_bar, lam)
        state.ledger.score = s
        return scores_to_weights(s)


class EpochError(RuntimeError):
    def __init__(self, epoch, cause):
        super().__init__(f"epoch {epoch}: {cause}")
        self.epoch = epoch


def _unit_rows(Z, idx):
    Z = np.asarray(Z, dtype=float)
    norms = np.linalg.norm(Z, axis=1)
    if not (norms > 0).all():
        j = int(np.flatnonzero(~(norms > 0))[0])
        raise ValueError(f"zero-norm embedding for sample {int(idx[j])}")
    return Z / norms[:, None]


def run_epoch(state: CurriculumState, trainer: Trainer, dataset: TrainingSet, policy=None,
              evaluate: Optional[Callable[[], dict]] = None) -> EpochReport:
    policy = policy or DDSCPolicy()
    cfg = state.config
    e = state.epoch + 1
    if e > cfg.T:
        raise ValueError(f"all {cfg.T} epochs already completed")
    if len(dataset) != state.n:
        raise ValueError(f"dataset has {len(dataset)} samples, state expects {state.n}")

    w = state.next_weights.copy()
    state.epoch_weights = w
    ledger = state.ledger

    rng = np.random.default_rng([state.rng_seed, e])
    order = rng.permutation(np.flatnonzero(w > 0))

    visit_Z, visit_dev = [], []
    for start in range(0, order.size, state.batch_size):
        idx = order[start:start + state.batch_size]
        Z = _unit_rows(trainer.embed(idx), idx)
        losses = np.asarray(trainer.per_sample_loss(idx), dtype=float)
        record_losses(ledger, idx, losses)
        bw = w[idx]
        trainer.apply_weighted_step(idx, bw / bw.sum())
        visit_Z.append(Z)
        visit_dev.append(dataset.devices[idx])
        state.last_embeddings[idx] = Z

    means = ledger.epoch_mean()
    visited = ledger.loss_count > 0
    train_loss = float(np.dot(w[visited], means[visited]))

    # end-of-epoch signal updates
    finalize_epoch_losses(ledger, cfg.beta)
    Zs = np.concatenate(visit_Z)
    devs = np.concatenate(visit_dev)
    update_prototypes(state.bank, {m: Zs[devs == m] for m in np.unique(devs)}, epoch=e)
    if state.bank.n_seen >= 2:
        Ht = score_embeddings(state.last_embeddings[visited], state.bank, cfg.tau)
        ledger.H_tilde[visited] = Ht
        ledger.H_hat[visited] = smooth_invariance(ledger.H_hat[visited], Ht, cfg.eta_H)
    else:
        if not state.policy_state.get("warned_single_device"):
            log.warning("fewer than two devices seen: entropy undefined, using constant H_hat=%.1f",
                        UNINFORMATIVE_H)
            state.policy_state["warned_single_device"] = True
        ledger.H_tilde[:] = UNINFORMATIVE_H
        ledger.H_hat[:] = UNINFORMATIVE_H
    normalize_progress(ledger, cfg.epsilon)

    state.epoch = e
    nxt = np.asarray(policy.next_weights(state), dtype=float)
    state.next_weights = nxt
    ledger.weight = nxt

    lam = policy.lambda_for(e, cfg) if hasattr(policy, "lambda_for") else None
    report = EpochReport(
        epoch=e,
        lam=lam,
        train_loss=train_loss,
        weight_entropy=weight_entropy(w),
        weight_min=float(w.min()),
        weight_max=float(w.max()),
        n_visited=int(visited.sum()),
        H_hat_mean=float(np.nanmean(ledger.H_hat)) if visited.any() else float("nan"),
        D_bar_mean=float(ledger.D_bar.mean()),
    )
    if evaluate is not None:
        report.metrics = dict(evaluate())
    return report


def run_training(config: ScheduleConfig, trainer: Trainer, dataset: TrainingSet, T=None, *, dim,
                 policy=None, rng_seed=0, batch_size=32, evaluate=None, on_epoch_end=None):
    """Run ``T`` epochs (default ``config.T``); returns ``(reports, state)``.

    ``on_epoch_end(state, report)`` is called after every epoch, e.g. to write
    a checkpoint.
    """
    if T is not None and T != config.T:
        config = ScheduleConfig(**{**config.to_dict(), "T": int(T)})
    policy = policy or DDSCPolicy()
    state = new_state(config, dataset, dim, rng_seed=rng_seed, batch_size=batch_size,
                      strategy=policy.name)
    reports = []
    for e in range(1, config.T + 1):
        try:
            rep = run_epoch(state, trainer, dataset, policy, evaluate)
        except Exception as exc:
            raise EpochError(e, exc) from exc
        reports.append(rep)
        if on_epoch_end is not None:
            on_epoch_end(state, rep)
    return reports, state
