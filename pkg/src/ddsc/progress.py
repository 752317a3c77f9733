"""Per-sample loss ledger and the smoothed loss-change progress signal."""

from dataclasses import dataclass

import numpy as np


class NonFiniteLossError(FloatingPointError):
    pass


@dataclass
class SampleLedger:
    """Running per-sample state, stored as parallel arrays of length ``n``.

    ``H_hat`` is nan until a sample has been scored once.
    """

    n: int
    prev_loss: np.ndarray = None
    has_prev: np.ndarray = None
    loss_sum: np.ndarray = None
    loss_count: np.ndarray = None
    D: np.ndarray = None
    D_bar: np.ndarray = None
    H_tilde: np.ndarray = None
    H_hat: np.ndarray = None
    score: np.ndarray = None
    weight: np.ndarray = None
    epochs_finalized: int = 0
    open_phase: bool = False

    def __post_init__(self):
        n = self.n
        defaults = {
            "prev_loss": np.zeros(n),
            "has_prev": np.zeros(n, dtype=bool),
            "loss_sum": np.zeros(n),
            "loss_count": np.zeros(n, dtype=np.int64),
            "D": np.zeros(n),
            "D_bar": np.zeros(n),
            "H_tilde": np.full(n, np.nan),
            "H_hat": np.full(n, np.nan),
            "score": np.zeros(n),
            "weight": np.full(n, 1.0 / n) if n else np.zeros(0),
        }
        for name, value in defaults.items():
            cur = getattr(self, name)
            if cur is None:
                setattr(self, name, value)
            else:
                setattr(self, name, np.asarray(cur, dtype=value.dtype).copy())

    def epoch_mean(self):
        """Current-epoch running mean (nan for unvisited samples)."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.loss_count > 0, self.loss_sum / np.maximum(self.loss_count, 1), np.nan)

    def copy(self) -> "SampleLedger":
        return SampleLedger(**{k: getattr(self, k) for k in self.__dataclass_fields__})


def record_loss(ledger: SampleLedger, i: int, loss: float) -> None:
    if not np.isfinite(loss):
        raise NonFiniteLossError(f"non-finite loss for sample {i}: {loss!r}")
    if loss < 0:
        raise ValueError(f"negative loss for sample {i}: {loss!r}")
    ledger.loss_sum[i] += loss
    ledger.loss_count[i] += 1
    ledger.open_phase = True


def record_losses(ledger: SampleLedger, idx, losses) -> None:
    """Vectorised :func:`record_loss`; repeated indices accumulate."""
    idx = np.asarray(idx, dtype=np.int64)
    losses = np.asarray(losses, dtype=float)
    bad = ~np.isfinite(losses)
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        raise NonFiniteLossError(f"non-finite loss for sample {int(idx[j])}: {losses[j]!r}")
    if (losses < 0).any():
        j = int(np.flatnonzero(losses < 0)[0])
        raise ValueError(f"negative loss for sample {int(idx[j])}: {losses[j]!r}")
    np.add.at(ledger.loss_sum, idx, losses)
    np.add.at(ledger.loss_count, idx, 1)
    ledger.open_phase = True


def finalize_epoch_losses(ledger: SampleLedger, beta: float) -> np.ndarray:
    """Close the epoch: update stored losses and the smoothed change ``D``.

    Samples seen for the first time get ``h = 0``; unvisited samples carry
    their previous loss forward, also with ``h = 0``.  Returns ``h``.
    """
    if not ledger.open_phase:
        raise RuntimeError("double finalize: no losses recorded since the last finalize")
    visited = ledger.loss_count > 0
    cur = np.where(visited, ledger.loss_sum / np.maximum(ledger.loss_count, 1), ledger.prev_loss)
    h = np.where(visited & ledger.has_prev, np.abs(cur - ledger.prev_loss), 0.0)
    ledger.D = beta * ledger.D + (1.0 - beta) * h
    ledger.prev_loss = cur
    ledger.has_prev = ledger.has_prev | visited
    ledger.loss_sum[:] = 0.0
    ledger.loss_count[:] = 0
    ledger.epochs_finalized += 1
    ledger.open_phase = False
    return h


def normalize_progress(ledger: SampleLedger, epsilon: float = 1e-12) -> np.ndarray:
    """Epoch-wise min-max normalisation of ``D`` into ``D_bar``."""
    if ledger.n == 0:
        raise ValueError("empty ledger")
    lo = ledger.D.min()
    hi = ledger.D.max()
    ledger.D_bar = (ledger.D - lo) / (hi - lo + epsilon)
    return ledger.D_bar
