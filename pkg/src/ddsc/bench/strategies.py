"""Baseline weighting policies sharing the engine's epoch loop.

``static_entropy`` ranks samples once by device-posterior entropy after a
uniform warm-up epoch and then exposes a growing top fraction.
``self_paced`` keeps the lowest-loss fraction of samples, with the fraction
relaxing linearly to 1.  Both are simplified stand-ins for the published
methods, not re-implementations.
"""

import math

import numpy as np

from ..engine import DDSCPolicy

STRATEGIES = ("uniform", "ddsc", "static_entropy", "self_paced")


def linear_exposure(e: int, T: int, start: float = 0.3) -> float:
    """Fraction of samples exposed at epoch ``e``: ``start`` at 1, 1.0 at ``T``."""
    if T <= 1:
        return 1.0
    return start + (1.0 - start) * (e - 1) / (T - 1)


def _top_k_uniform(order, n, frac):
    k = max(1, min(n, math.ceil(frac * n - 1e-12)))
    w = np.zeros(n)
    w[order[:k]] = 1.0 / k
    return w


class UniformPolicy:
    name = "uniform"

    def next_weights(self, state):
        return np.full(state.n, 1.0 / state.n)


def static_entropy_weights(H_tilde, T, exposure=linear_exposure):
    """Per-epoch weight plan of shape ``(T, N)`` from one entropy ranking.

    Row 0 is the uniform warm-up epoch.  From epoch 2 on, the top
    ``exposure(e, T)`` fraction by descending entropy gets uniform weight and
    the rest zero; ties go to the lower sample index.
    """
    H = np.asarray(H_tilde, dtype=float)
    n = H.size
    order = np.lexsort((np.arange(n), -H))
    plan = np.empty((T, n))
    plan[0] = 1.0 / n
    for e in range(2, T + 1):
        plan[e - 1] = _top_k_uniform(order, n, exposure(e, T))
    return plan


class StaticEntropyPolicy:
    name = "static_entropy"

    def __init__(self, exposure=linear_exposure):
        self.exposure = exposure

    def next_weights(self, state):
        T = state.config.T
        if "order" not in state.policy_state:
            # frozen after the warm-up epoch
            H = state.ledger.H_tilde
            n = state.n
            state.policy_state["order"] = np.lexsort((np.arange(n), -H)).tolist()
        e = min(state.epoch + 1, T)
        return _top_k_uniform(np.asarray(state.policy_state["order"]), state.n, self.exposure(e, T))


class SelfPacedPolicy:
    """Hard self-paced weights: the easiest fraction by last-epoch loss."""

    name = "self_paced"

    def __init__(self, exposure=linear_exposure):
        self.exposure = exposure

    def next_weights(self, state):
        T = state.config.T
        e = min(state.epoch + 1, T)
        n = state.n
        loss = state.ledger.prev_loss
        order = np.lexsort((np.arange(n), loss))
        return _top_k_uniform(order, n, self.exposure(e, T))


def make_policy(name: str):
    if name == "ddsc":
        return DDSCPolicy()
    if name == "uniform":
        return UniformPolicy()
    if name == "static_entropy":
        return StaticEntropyPolicy()
    if name == "self_paced":
        return SelfPacedPolicy()
    raise ValueError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}")
