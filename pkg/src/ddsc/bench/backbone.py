"""Two-layer tanh network trained by plain SGD; implements ``engine.Trainer``."""

import numpy as np

from .. import kernels


class ToyBackbone:
    """``x -> tanh(W1 x + b1) -> W2 z + b2`` with softmax cross-entropy.

    The tanh layer (width ``dim``) is the embedding tap.  ``X``/``y`` are the
    training arrays that the engine addresses by index.
    """

    def __init__(self, X, y, n_classes, dim=16, lr=0.5, seed=0):
        self.X = np.ascontiguousarray(X, dtype=float)
        self.y = np.ascontiguousarray(y, dtype=np.int64)
        self.n_classes = int(n_classes)
        self.dim = int(dim)
        self.lr = float(lr)
        rng = np.random.default_rng(seed)
        d = self.X.shape[1]
        self.W1 = rng.normal(0.0, 1.0 / np.sqrt(d), size=(self.dim, d))
        self.b1 = np.zeros(self.dim)
        self.W2 = rng.normal(0.0, 1.0 / np.sqrt(self.dim), size=(self.n_classes, self.dim))
        self.b2 = np.zeros(self.n_classes)

    # -- parameter vector helpers (finite-difference checks)

    def get_params(self):
        return np.concatenate([self.W1.ravel(), self.b1, self.W2.ravel(), self.b2])

    def set_params(self, theta):
        theta = np.asarray(theta, dtype=float)
        shapes = [self.W1.shape, self.b1.shape, self.W2.shape, self.b2.shape]
        out, k = [], 0
        for shp in shapes:
            size = int(np.prod(shp))
            out.append(theta[k:k + size].reshape(shp).copy())
            k += size
        self.W1, self.b1, self.W2, self.b2 = out

    # -- numerics

    def loss_and_grad(self, X, y, w):
        """Weighted loss ``sum(w * L)`` and its gradient as a flat vector."""
        X = np.ascontiguousarray(X, dtype=float)
        y = np.ascontiguousarray(y, dtype=np.int64)
        w = np.ascontiguousarray(w, dtype=float)
        losses, _, gW1, gb1, gW2, gb2 = kernels.mlp_loss_and_grad(X, y, w, self.W1, self.b1, self.W2, self.b2)
        return float(np.dot(w, losses)), np.concatenate([gW1.ravel(), gb1, gW2.ravel(), gb2])

    def logits(self, X):
        return kernels.mlp_forward(np.ascontiguousarray(X, dtype=float), self.W1, self.b1, self.W2, self.b2)[1]

    def predict(self, X):
        return np.argmax(self.logits(X), axis=1)

    # -- Trainer protocol

    def embed(self, idx):
        return kernels.mlp_forward(self.X[idx], self.W1, self.b1, self.W2, self.b2)[0]

    def per_sample_loss(self, idx):
        w = np.zeros(len(idx))
        return kernels.mlp_loss_and_grad(self.X[idx], self.y[idx], w, self.W1, self.b1, self.W2, self.b2)[0]

    def apply_weighted_step(self, idx, weights):
        w = np.ascontiguousarray(weights, dtype=float)
        _, _, gW1, gb1, gW2, gb2 = kernels.mlp_loss_and_grad(
            self.X[idx], self.y[idx], w, self.W1, self.b1, self.W2, self.b2
        )
        self.W1 -= self.lr * gW1
        self.b1 -= self.lr * gb1
        self.W2 -= self.lr * gW2
        self.b2 -= self.lr * gb2
