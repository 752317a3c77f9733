"""Independent reference computations written with plain Python floats.

Nothing here imports from ``ddsc``; these are the second route the tests
compare the package against.
"""

import math

import numpy as np


def softmax(xs):
    m = max(xs)
    ex = [math.exp(x - m) for x in xs]
    tot = sum(ex)
    return [v / tot for v in ex]


def entropy(ps):
    return -sum(p * math.log(p) for p in ps if p > 0)


def unit(v):
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def cosine_lambda(e, T, lambda_min):
    rho = e / T
    return lambda_min + (1 - lambda_min) * 0.5 * (1 + math.cos(math.pi * rho))


def ema_closed_form(hs, beta):
    """D after len(hs) epochs from D0 = 0: sum_k beta^(e-k) (1-beta) h_k."""
    e = len(hs)
    return sum(beta ** (e - k) * (1 - beta) * h for k, h in enumerate(hs, start=1))


class FakeTrainer:
    """Deterministic stand-in for a backbone.

    Each sample has a scalar parameter moving toward a target; its loss and
    embedding are smooth functions of that parameter.
    """

    def __init__(self, n, dim, seed, lr=0.7):
        r = np.random.default_rng(seed)
        self.base = r.normal(size=(n, dim))
        self.direction = r.normal(size=(n, dim))
        self.target = r.normal(size=n)
        self.theta = np.zeros(n)
        self.lr = lr

    def embed(self, idx):
        idx = np.asarray(idx)
        return self.base[idx] + self.theta[idx, None] * self.direction[idx]

    def per_sample_loss(self, idx):
        idx = np.asarray(idx)
        return (self.theta[idx] - self.target[idx]) ** 2 + 0.1

    def apply_weighted_step(self, idx, weights):
        idx = np.asarray(idx)
        grad = 2.0 * (self.theta[idx] - self.target[idx])
        self.theta[idx] -= self.lr * len(idx) * np.asarray(weights) * grad


def straight_line_ddsc(trainer, devices, n_devices, T, *, tau, beta, gamma, eta_h, eps, lambda_min,
                       seed, batch_size):
    """Per-epoch weights of the dual-signal curriculum, scalar loops only.

    Batch order uses the same seeded permutation convention as the engine
    (``default_rng([seed, epoch]).permutation(N)``).
    """
    n = len(devices)
    mu = [None] * n_devices
    prev = [0.0] * n
    has_prev = [False] * n
    D = [0.0] * n
    H_hat = [None] * n
    weights = [1.0 / n] * n
    history = []
    for e in range(1, T + 1):
        history.append(list(weights))
        order = [int(i) for i in np.random.default_rng([seed, e]).permutation(n)]
        sums = [0.0] * n
        counts = [0] * n
        emb = [None] * n
        per_dev = {m: [] for m in range(n_devices)}
        for start in range(0, n, batch_size):
            batch = order[start:start + batch_size]
            Z = trainer.embed(batch)
            L = trainer.per_sample_loss(batch)
            for j, i in enumerate(batch):
                z = unit([float(x) for x in Z[j]])
                emb[i] = z
                per_dev[devices[i]].append(z)
                sums[i] += float(L[j])
                counts[i] += 1
            mass = sum(weights[i] for i in batch)
            trainer.apply_weighted_step(batch, [weights[i] / mass for i in batch])

        for i in range(n):
            cur = sums[i] / counts[i]
            h = abs(cur - prev[i]) if has_prev[i] else 0.0
            D[i] = beta * D[i] + (1 - beta) * h
            prev[i] = cur
            has_prev[i] = True

        for m, zs in per_dev.items():
            if not zs:
                continue
            mean = [sum(col) / len(zs) for col in zip(*zs)]
            if mu[m] is None:
                mu[m] = unit(mean)
            else:
                mu[m] = unit([(1 - gamma) * a + gamma * b for a, b in zip(mu[m], mean)])

        seen = [m for m in range(n_devices) if mu[m] is not None]
        for i in range(n):
            p = softmax([dot(emb[i], mu[m]) / tau for m in seen])
            h_t = min(1.0, max(0.0, entropy(p) / math.log(len(seen))))
            H_hat[i] = h_t if H_hat[i] is None else eta_h * H_hat[i] + (1 - eta_h) * h_t

        lo, hi = min(D), max(D)
        D_bar = [(d - lo) / (hi - lo + eps) for d in D]
        lam = cosine_lambda(min(e + 1, T), T, lambda_min)
        weights = softmax([lam * H_hat[i] + (1 - lam) * D_bar[i] for i in range(n)])
    return history
