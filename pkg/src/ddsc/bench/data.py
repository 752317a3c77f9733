"""Synthetic multi-device classification data.

Every device applies its own affine "colouring" ``x -> A_m x + b_m`` with
``A_m = I + shift_strength * R_m`` to class-conditional Gaussian samples.
Training uses ``M_train`` devices; the test split adds ``M_unseen`` devices
that never appear in training.
"""

from dataclasses import dataclass, asdict

import numpy as np


@dataclass(frozen=True)
class SyntheticDatasetSpec:
    C: int = 5
    M_train: int = 3
    M_unseen: int = 2
    F_raw: int = 32
    n_per_class_device: int = 60
    shift_strength: float = 0.6
    noise_sigma: float = 0.5
    label_fraction: float = 0.05
    seed: int = 0
    class_sep: float = 0.2

    def validate(self):
        if self.C < 2:
            raise ValueError(f"C: need at least 2 classes, got {self.C}")
        if self.M_train < 2:
            raise ValueError(f"M_train: need at least 2 training devices, got {self.M_train}")
        if self.M_unseen < 1:
            raise ValueError(f"M_unseen: need at least 1 unseen device, got {self.M_unseen}")
        if self.F_raw < 1:
            raise ValueError(f"F_raw: must be >= 1, got {self.F_raw}")
        if self.n_per_class_device < 1:
            raise ValueError(f"n_per_class_device: must be >= 1, got {self.n_per_class_device}")
        if self.shift_strength < 0:
            raise ValueError(f"shift_strength: must be >= 0, got {self.shift_strength}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma: must be >= 0, got {self.noise_sigma}")
        if not 0.0 < self.label_fraction <= 1.0:
            raise ValueError(f"label_fraction: {self.label_fraction} out of (0,1]")
        if self.class_sep <= 0:
            raise ValueError(f"class_sep: must be > 0, got {self.class_sep}")

    def to_dict(self):
        return asdict(self)

    @property
    def n_train_per_cell(self) -> int:
        return int(round(self.label_fraction * self.n_per_class_device))


@dataclass
class Split:
    X: np.ndarray
    y: np.ndarray
    device: np.ndarray
    M_train: int

    def __len__(self):
        return int(self.y.size)

    @property
    def seen(self):
        return self.device < self.M_train


def generate_dataset(spec: SyntheticDatasetSpec, seed=None):
    """Return ``(train, test)``; deterministic in ``seed`` (default ``spec.seed``).

    ``seed`` may be an int or a sequence of ints (passed to
    ``numpy.random.default_rng``).
    """
    spec.validate()
    k = spec.n_train_per_cell
    if k < 1:
        raise ValueError(
            f"label_fraction={spec.label_fraction} leaves empty (class, device) cells with "
            f"n_per_class_device={spec.n_per_class_device}; increase n_per_class_device"
        )
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    d = spec.F_raw
    M = spec.M_train + spec.M_unseen
    scale = 1.0 / np.sqrt(d)

    # same draws for every shift_strength: it only scales them
    centroids = rng.normal(0.0, spec.class_sep, size=(spec.C, d))
    eye = np.eye(d)
    A = np.empty((M, d, d))
    b = np.empty((M, d))
    for m in range(M):
        R = rng.normal(0.0, scale, size=(d, d))
        A[m] = eye + spec.shift_strength * R
        b[m] = spec.shift_strength * rng.normal(0.0, spec.class_sep, size=d)

    n = spec.n_per_class_device

    def cell(c, m):
        clean = centroids[c] + spec.noise_sigma * rng.normal(size=(n, d))
        return clean @ A[m].T + b[m]

    Xtr, ytr, dtr = [], [], []
    for m in range(spec.M_train):
        for c in range(spec.C):
            X = cell(c, m)
            keep = np.sort(rng.choice(n, size=k, replace=False))
            Xtr.append(X[keep])
            ytr.append(np.full(k, c))
            dtr.append(np.full(k, m))

    Xte, yte, dte = [], [], []
    for m in range(M):
        for c in range(spec.C):
            Xte.append(cell(c, m))
            yte.append(np.full(n, c))
            dte.append(np.full(n, m))

    train = Split(np.concatenate(Xtr), np.concatenate(ytr), np.concatenate(dtr), spec.M_train)
    test = Split(np.concatenate(Xte), np.concatenate(yte), np.concatenate(dte), spec.M_train)
    return train, test
