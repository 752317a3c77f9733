"""Hot numeric kernels.

Each kernel exists twice: a numba loop version and a vectorised numpy version.
The public names resolve to whichever backend ``ddsc._numba`` selected; both
variants stay importable so tests and ``benchmarks/`` can compare them.

With numba, the MLP kernels only take the compiled path for batches of at
most ``SMALL_BATCH`` rows.  Those are the per-step training batches where
numpy's call overhead dominates; large evaluation passes are faster through
numpy's vectorised tanh (see ``benchmarks/bench_backends.py``).
"""

import math

import numpy as np

from ._numba import BACKEND, njit

SMALL_BATCH = 64

__all__ = [
    "BACKEND",
    "posterior_entropy",
    "mlp_forward",
    "mlp_loss_and_grad",
]


# --------------------------------------------------------------------------
# device-posterior entropy over a batch of unit embeddings


def posterior_entropy_numpy(Z, prototypes, seen, tau):
    P = prototypes[seen]
    k = P.shape[0]
    S = (Z @ P.T) / tau
    S = S - S.max(axis=1, keepdims=True)
    E = np.exp(S)
    p = E / E.sum(axis=1, keepdims=True)
    safe = np.where(p > 0.0, p, 1.0)
    H = -(p * np.log(safe)).sum(axis=1) / math.log(k)
    return np.clip(H, 0.0, 1.0)


@njit(cache=True, fastmath=True)
def posterior_entropy_numba(Z, prototypes, seen, tau):
    n, f = Z.shape
    m_all = prototypes.shape[0]
    k = 0
    for m in range(m_all):
        if seen[m]:
            k += 1
    idx = np.empty(k, dtype=np.int64)
    j = 0
    for m in range(m_all):
        if seen[m]:
            idx[j] = m
            j += 1
    log_k = math.log(k)
    out = np.empty(n)
    s = np.empty(k)
    for i in range(n):
        smax = -np.inf
        for a in range(k):
            acc = 0.0
            pm = idx[a]
            for c in range(f):
                acc += Z[i, c] * prototypes[pm, c]
            s[a] = acc / tau
            if s[a] > smax:
                smax = s[a]
        total = 0.0
        for a in range(k):
            s[a] = math.exp(s[a] - smax)
            total += s[a]
        h = 0.0
        for a in range(k):
            p = s[a] / total
            if p > 0.0:
                h -= p * math.log(p)
        h /= log_k
        if h < 0.0:
            h = 0.0
        elif h > 1.0:
            h = 1.0
        out[i] = h
    return out


# --------------------------------------------------------------------------
# toy backbone: affine -> tanh (embedding tap) -> affine -> softmax CE


def mlp_forward_numpy(X, W1, b1, W2, b2):
    Z = np.tanh(X @ W1.T + b1)
    logits = Z @ W2.T + b2
    return Z, logits


def mlp_loss_and_grad_numpy(X, y, w, W1, b1, W2, b2):
    Z, logits = mlp_forward_numpy(X, W1, b1, W2, b2)
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(X.shape[0])
    losses = lse - shifted[rows, y]

    probs = np.exp(shifted - lse[:, None])
    probs[rows, y] -= 1.0
    dlogits = probs * w[:, None]
    gW2 = dlogits.T @ Z
    gb2 = dlogits.sum(axis=0)
    dA = (dlogits @ W2) * (1.0 - Z * Z)
    gW1 = dA.T @ X
    gb1 = dA.sum(axis=0)
    return losses, Z, gW1, gb1, gW2, gb2


@njit(cache=True, fastmath=True)
def _tanh(x):
    # libm tanh is slow under numba; expm1 form stays accurate near 0
    t = math.expm1(-2.0 * abs(x))
    r = -t / (t + 2.0)
    return r if x >= 0.0 else -r


@njit(cache=True, fastmath=True)
def mlp_forward_numba(X, W1, b1, W2, b2):
    Z = X @ W1.T
    n, f = Z.shape
    for i in range(n):
        for h in range(f):
            Z[i, h] = _tanh(Z[i, h] + b1[h])
    logits = Z @ W2.T
    c = logits.shape[1]
    for i in range(n):
        for o in range(c):
            logits[i, o] += b2[o]
    return Z, logits


@njit(cache=True, fastmath=True)
def mlp_loss_and_grad_numba(X, y, w, W1, b1, W2, b2):
    Z, dlogits = mlp_forward_numba(X, W1, b1, W2, b2)
    n, c = dlogits.shape
    f = Z.shape[1]
    losses = np.empty(n)
    gb2 = np.zeros(c)
    for i in range(n):
        lmax = -np.inf
        for o in range(c):
            if dlogits[i, o] > lmax:
                lmax = dlogits[i, o]
        total = 0.0
        for o in range(c):
            total += math.exp(dlogits[i, o] - lmax)
        lse = math.log(total)
        losses[i] = lse - (dlogits[i, y[i]] - lmax)
        # overwrite logits with w_i * (softmax - onehot)
        for o in range(c):
            g = math.exp(dlogits[i, o] - lmax - lse)
            if o == y[i]:
                g -= 1.0
            g *= w[i]
            dlogits[i, o] = g
            gb2[o] += g
    gW2 = dlogits.T @ Z
    dA = dlogits @ W2
    gb1 = np.zeros(f)
    for i in range(n):
        for h in range(f):
            da = dA[i, h] * (1.0 - Z[i, h] * Z[i, h])
            dA[i, h] = da
            gb1[h] += da
    gW1 = dA.T @ X
    return losses, Z, gW1, gb1, gW2, gb2


def _mlp_forward_dispatch(X, W1, b1, W2, b2):
    if X.shape[0] <= SMALL_BATCH:
        return mlp_forward_numba(X, W1, b1, W2, b2)
    return mlp_forward_numpy(X, W1, b1, W2, b2)


def _mlp_loss_and_grad_dispatch(X, y, w, W1, b1, W2, b2):
    if X.shape[0] <= SMALL_BATCH:
        return mlp_loss_and_grad_numba(X, y, w, W1, b1, W2, b2)
    return mlp_loss_and_grad_numpy(X, y, w, W1, b1, W2, b2)


if BACKEND == "numba":
    posterior_entropy = posterior_entropy_numba
    mlp_forward = _mlp_forward_dispatch
    mlp_loss_and_grad = _mlp_loss_and_grad_dispatch
else:
    posterior_entropy = posterior_entropy_numpy
    mlp_forward = mlp_forward_numpy
    mlp_loss_and_grad = mlp_loss_and_grad_numpy
