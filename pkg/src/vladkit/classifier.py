"""One-vs-rest linear classification with hinge loss.

Each class gets a binary classifier trained by epoch-wise stochastic
subgradient descent (Pegasos-style 1/(reg*t) step size). The shuffle order is
a pure function of (seed, epoch) and shared by all binary problems, so the
trained model is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, TooFewClasses


@dataclass(frozen=True)
class TrainHyper:
    reg: float = 1e-4
    epochs: int = 50
    seed: int = 0


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray  # (C, dim)
    biases: np.ndarray   # (C,)
    hyper: TrainHyper | None = None

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def _train_binary(
    x: np.ndarray, y: np.ndarray, reg: float, perms: list[np.ndarray]
) -> tuple[np.ndarray, float]:
    # The bias rides along as a constant input so it shares the weight
    # shrinkage; otherwise the early 1/(reg*t) steps let it run away.
    w = np.zeros(x.shape[1])
    t = 0
    for perm in perms:
        for i in perm:
            t += 1
            lr = 1.0 / (reg * t)
            margin = y[i] * (w @ x[i])
            w *= 1.0 - lr * reg
            if margin < 1.0:
                w += lr * y[i] * x[i]
    return w[:-1], float(w[-1])


def train_ovr(
    encodings: np.ndarray, labels: np.ndarray, hyper: TrainHyper = TrainHyper()
) -> LinearModel:
    x = np.asarray(encodings, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    if x.ndim != 2 or x.shape[0] != labels.shape[0]:
        raise DimMismatch("encodings and labels disagree in length")
    num_classes = int(labels.max()) + 1 if labels.size else 0
    if num_classes < 2:
        raise TooFewClasses("need at least two classes to train")
    rng = np.random.default_rng(hyper.seed)
    perms = [rng.permutation(x.shape[0]) for _ in range(hyper.epochs)]
    augmented = np.hstack([x, np.ones((x.shape[0], 1))])
    weights = np.zeros((num_classes, x.shape[1]))
    biases = np.zeros(num_classes)
    for c in range(num_classes):
        y = np.where(labels == c, 1.0, -1.0)
        weights[c], biases[c] = _train_binary(augmented, y, hyper.reg, perms)
    return LinearModel(weights=weights, biases=biases, hyper=hyper)


def predict(model: LinearModel, encoding: np.ndarray) -> tuple[int, np.ndarray]:
    encoding = np.asarray(encoding, dtype=np.float64)
    if encoding.shape != (model.dim,):
        raise DimMismatch(f"encoding shape {encoding.shape} != ({model.dim},)")
    scores = model.weights @ encoding + model.biases
    return int(np.argmax(scores)), scores


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    per_class_accuracy: np.ndarray
    confusion: np.ndarray  # (C, C) counts, rows = true class


def tabulate(true_labels: np.ndarray, predicted: np.ndarray, num_classes: int) -> EvalReport:
    confusion = np.zeros((num_classes, num_classes), dtype=int)
    for t, p in zip(true_labels, predicted):
        confusion[t, p] += 1
    row_totals = confusion.sum(axis=1)
    safe = np.where(row_totals == 0, 1, row_totals)
    per_class = np.diag(confusion) / safe
    accuracy = float(np.trace(confusion)) / max(1, confusion.sum())
    return EvalReport(accuracy=accuracy, per_class_accuracy=per_class, confusion=confusion)
