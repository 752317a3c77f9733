import numpy as np


def classwise_accuracy(pred, truth, C: int) -> float:
    """Mean over classes of per-class accuracy (labels are ``0..C-1``)."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or truth.ndim != 1 or truth.size == 0:
        raise ValueError("predictions and truth must be equal-length nonempty vectors")
    if truth.min() < 0 or truth.max() >= C:
        raise ValueError(f"labels must lie in [0, {C})")
    counts = np.bincount(truth, minlength=C)
    if (counts == 0).any():
        c = int(np.flatnonzero(counts == 0)[0])
        raise ValueError(f"undefined per-class accuracy: class {c} absent from truth")
    correct = np.bincount(truth[pred == truth], minlength=C)
    return float(np.mean(correct / counts))
