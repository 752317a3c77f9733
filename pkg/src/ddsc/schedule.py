"""Mixing schedule, score fusion and score-to-weight mapping."""

from dataclasses import dataclass, asdict
import math

import numpy as np


@dataclass(frozen=True)
class ScheduleConfig:
    """Curriculum hyperparameters.

    Only ``lambda_min`` has a validated default (0.2).  ``tau``, ``beta``,
    ``gamma``, ``eta_H`` and ``epsilon`` are implementation choices and are
    always echoed in resolved configs and reports.
    """

    T: int = 40
    lambda_min: float = 0.2
    tau: float = 0.1
    beta: float = 0.9
    gamma: float = 0.3
    eta_H: float = 0.7
    epsilon: float = 1e-12

    def __post_init__(self):
        self.validate()

    def validate(self):
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T: must be an integer >= 1, got {self.T!r}")
        if not 0.0 <= self.lambda_min < 1.0:
            raise ValueError(f"lambda_min: {self.lambda_min!r} out of [0,1)")
        if not self.tau > 0.0:
            raise ValueError(f"tau: {self.tau!r} must be > 0")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta: {self.beta!r} out of (0,1)")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma: {self.gamma!r} out of (0,1]")
        if not 0.0 < self.eta_H < 1.0:
            raise ValueError(f"eta_H: {self.eta_H!r} out of (0,1)")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon: {self.epsilon!r} must be > 0")

    def to_dict(self):
        return asdict(self)


def lambda_at(e: int, T: int, lambda_min: float = 0.2) -> float:
    """Cosine decay from 1 (progress 0) to ``lambda_min`` (progress 1).

    ``e`` is the 1-based epoch; progress is ``e / T``.
    """
    if not 1 <= e <= T:
        raise ValueError(f"epoch {e} out of range [1, {T}]")
    if e == T:
        return float(lambda_min)
    rho = e / T
    return lambda_min + (1.0 - lambda_min) * 0.5 * (1.0 + math.cos(math.pi * rho))


def fuse_scores(H_hat, D_bar, lam: float):
    H_hat = np.asarray(H_hat, dtype=float)
    D_bar = np.asarray(D_bar, dtype=float)
    if H_hat.shape != D_bar.shape:
        raise ValueError(f"length mismatch: {H_hat.shape} vs {D_bar.shape}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda {lam!r} out of [0,1]")
    return lam * H_hat + (1.0 - lam) * D_bar


def scores_to_weights(s):
    """Max-shifted softmax over all samples."""
    s = np.asarray(s, dtype=float)
    if s.size == 0:
        raise ValueError("no scores")
    if not np.isfinite(s).all():
        raise ValueError("non-finite score")
    e = np.exp(s - s.max())
    return e / e.sum()


def batch_weighted_loss(weights, idx, losses) -> float:
    """Weighted loss of one mini-batch with weights renormalised in-batch.

    For a batch covering the whole dataset this is exactly sum_i pi_i L_i.
    """
    idx = np.asarray(idx, dtype=np.int64)
    losses = np.asarray(losses, dtype=float)
    if idx.size == 0:
        raise ValueError("empty batch")
    w = np.asarray(weights, dtype=float)[idx]
    mass = w.sum()
    if not mass > 0.0:
        raise ValueError("batch weight mass is zero")
    return float(np.dot(w / mass, losses))


def weight_entropy(weights) -> float:
    """Entropy of the weight vector normalised by ``log N`` (1 = uniform)."""
    w = np.asarray(weights, dtype=float)
    n = w.size
    if n < 2:
        return 1.0
    p = w[w > 0]
    return float(-np.sum(p * np.log(p)) / math.log(n))
