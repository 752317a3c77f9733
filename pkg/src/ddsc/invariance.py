"""Device prototypes and the prototype-entropy invariance score.

Each training device keeps a unit-norm prototype built from the detached,
unit-normalised embeddings seen during an epoch.  A sample's cosine scores
against the prototypes, divided by a temperature, give a posterior over
devices; the entropy of that posterior, normalised to [0, 1], is high when the
sample carries little device evidence.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import kernels


class EmptyBankError(ValueError):
    pass


def unit(z):
    """Return ``z / ||z||``; raises on a zero vector."""
    z = np.asarray(z, dtype=float)
    norm = np.linalg.norm(z)
    if not norm > 0.0:
        raise ValueError("cannot normalise a zero-norm embedding")
    return z / norm


@dataclass
class PrototypeBank:
    """Unit prototypes for ``n_devices`` devices plus their seen flags."""

    n_devices: int
    dim: int
    gamma: float = 0.3
    prototypes: np.ndarray = field(default=None, repr=False)
    seen: np.ndarray = field(default=None)
    epoch_of_last_update: int = 0

    def __post_init__(self):
        if self.n_devices < 2:
            raise ValueError("a prototype bank needs at least two devices")
        if self.dim < 1:
            raise ValueError("embedding dimension must be >= 1")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.prototypes is None:
            self.prototypes = np.zeros((self.n_devices, self.dim))
        if self.seen is None:
            self.seen = np.zeros(self.n_devices, dtype=bool)
        self.prototypes = np.asarray(self.prototypes, dtype=float).reshape(self.n_devices, self.dim)
        self.seen = np.asarray(self.seen, dtype=bool).reshape(self.n_devices)

    @property
    def n_seen(self) -> int:
        return int(self.seen.sum())

    def copy(self) -> "PrototypeBank":
        return PrototypeBank(
            self.n_devices,
            self.dim,
            self.gamma,
            self.prototypes.copy(),
            self.seen.copy(),
            self.epoch_of_last_update,
        )


def cosine_scores(z, bank: PrototypeBank):
    """Cosine score of ``z`` against every seen prototype (unseen -> nan)."""
    z = np.asarray(z, dtype=float)
    out = np.full(bank.n_devices, np.nan)
    out[bank.seen] = bank.prototypes[bank.seen] @ z
    return out


def device_posterior(z, bank: PrototypeBank, tau: float):
    """Temperature-scaled softmax over cosine scores of seen devices.

    Unseen devices get probability exactly 0 and do not enter the
    normaliser.
    """
    if not tau > 0.0:
        raise ValueError("invalid temperature")
    if bank.n_seen == 0:
        raise EmptyBankError("empty prototype bank")
    z = np.asarray(z, dtype=float)
    logits = bank.prototypes[bank.seen] @ z / tau
    logits = logits - logits.max()
    e = np.exp(logits)
    probs = np.zeros(bank.n_devices)
    probs[bank.seen] = e / e.sum()
    return probs


def normalized_entropy(probs, m_effective: int) -> float:
    """Shannon entropy (nats) of ``probs`` divided by ``log(m_effective)``."""
    if m_effective < 2:
        raise ValueError("entropy undefined for fewer than two devices")
    p = np.asarray(probs, dtype=float)
    p = p[p > 0.0]
    h = -float(np.sum(p * np.log(p))) / math.log(m_effective)
    return min(max(h, 0.0), 1.0)


def score_embeddings(Z, bank: PrototypeBank, tau: float):
    """Normalised posterior entropy for every row of ``Z`` (batched kernel)."""
    if not tau > 0.0:
        raise ValueError("invalid temperature")
    if bank.n_seen < 2:
        raise ValueError("entropy undefined for fewer than two devices")
    Z = np.ascontiguousarray(Z, dtype=float)
    return kernels.posterior_entropy(Z, bank.prototypes, bank.seen, float(tau))


def update_prototypes(bank: PrototypeBank, epoch_embeddings, epoch=None) -> PrototypeBank:
    """End-of-epoch EMA update of the prototypes, in place.

    ``epoch_embeddings`` maps device index -> array of unit embeddings
    collected during the epoch.  Devices with no embeddings keep their
    prototype untouched; a device seen for the first time is initialised
    from its normalised epoch mean.
    """
    g = bank.gamma
    for m, emb in epoch_embeddings.items():
        if not 0 <= m < bank.n_devices:
            raise ValueError(f"device index {m} out of range [0, {bank.n_devices})")
        emb = np.asarray(emb, dtype=float)
        if emb.size == 0:
            continue
        mean = emb.reshape(-1, bank.dim).mean(axis=0)
        mnorm = np.linalg.norm(mean)
        if not mnorm > 0.0:
            raise ValueError(f"degenerate prototype mean for device {m}")
        if bank.seen[m]:
            mixed = (1.0 - g) * bank.prototypes[m] + g * mean
            norm = np.linalg.norm(mixed)
            if not norm > 0.0:
                raise ValueError(f"degenerate prototype update for device {m}")
            bank.prototypes[m] = mixed / norm
        else:
            bank.prototypes[m] = mean / mnorm
            bank.seen[m] = True
    bank.epoch_of_last_update = bank.epoch_of_last_update + 1 if epoch is None else int(epoch)
    return bank


def smooth_invariance(prev, h_tilde, eta_h: float):
    """EMA of the normalised entropy; ``prev`` of None/nan means first score.

    Works elementwise on arrays (nan entries of ``prev`` initialise).
    """
    if prev is None:
        return h_tilde
    prev = np.asarray(prev, dtype=float)
    h_tilde = np.asarray(h_tilde, dtype=float)
    out = np.where(np.isnan(prev), h_tilde, eta_h * prev + (1.0 - eta_h) * h_tilde)
    return float(out) if out.ndim == 0 else out
