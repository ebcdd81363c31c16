"""Comparison classifiers: a one-hidden-layer perceptron and per-tag
logistic regression, both trained by per-example gradient descent on
cross-entropy.  Targets may be soft (smoothed) values in [0, 1];
unknown-state cells are masked out of the loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import log1pexp, sigm
from .estimators import DIVERGENCE_LIMIT, DivergenceError

# validation-selected defaults: 250 hidden units / lr 0.001 for the MLP,
# lr 2.0 for logistic regression
MLP_DEFAULT_HIDDEN = 250
MLP_DEFAULT_LR = 0.001
LOGREG_DEFAULT_LR = 2.0


@dataclass
class MlpParams:
    W1: np.ndarray  # D x H
    b1: np.ndarray  # H
    W2: np.ndarray  # H x C
    b2: np.ndarray  # C

    @property
    def D(self):
        return self.W1.shape[0]

    @property
    def H(self):
        return self.W1.shape[1]

    @property
    def C(self):
        return self.W2.shape[1]

    def copy(self):
        return MlpParams(self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy())

    @classmethod
    def random_init(cls, D, H, C, rng, scale=0.01):
        return cls(rng.uniform(-scale, scale, (D, H)), np.zeros(H),
                   rng.uniform(-scale, scale, (H, C)), np.zeros(C))


@dataclass
class LogRegParams:
    W: np.ndarray  # D x C
    b: np.ndarray  # C

    @property
    def D(self):
        return self.W.shape[0]

    @property
    def C(self):
        return self.W.shape[1]

    def copy(self):
        return LogRegParams(self.W.copy(), self.b.copy())

    @classmethod
    def zeros(cls, D, C):
        return cls(np.zeros((D, C)), np.zeros(C))


@dataclass
class SgdConfig:
    lr: float = 0.01
    epochs: int = 10
    seed: int = 0


def mlp_predict(x, p: MlpParams) -> np.ndarray:
    """Sigmoid hidden layer, independent sigmoid output per tag."""
    x = np.asarray(x, dtype=float)
    if x.shape != (p.D,):
        raise ValueError(f"x must have length {p.D}")
    h = sigm(p.b1 + x @ p.W1)
    return sigm(p.b2 + h @ p.W2)


def logreg_predict(x, p: LogRegParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (p.D,):
        raise ValueError(f"x must have length {p.D}")
    return sigm(p.b + x @ p.W)


def cross_entropy(probs, targets, mask=None) -> float:
    """Masked multi-label cross-entropy; safe at saturated probabilities
    when computed from logits upstream, here clipped for generality."""
    probs = np.clip(np.asarray(probs, dtype=float), 1e-12, 1 - 1e-12)
    targets = np.asarray(targets, dtype=float)
    terms = -(targets * np.log(probs) + (1 - targets) * np.log(1 - probs))
    if mask is not None:
        terms = terms * mask
    return float(np.sum(terms))


def _mlp_grads(x, t, mask, p: MlpParams):
    h = sigm(p.b1 + x @ p.W1)
    o = sigm(p.b2 + h @ p.W2)
    dpre_o = (o - t) * mask
    dh = p.W2 @ dpre_o
    dpre_h = dh * h * (1 - h)
    return (np.outer(x, dpre_h), dpre_h, np.outer(h, dpre_o), dpre_o)


def mlp_train(X, targets, mask, cfg: SgdConfig, p0: MlpParams) -> MlpParams:
    """Seeded per-example SGD on cross-entropy; targets in [0, 1]."""
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets, dtype=float)
    mask = np.ones_like(targets) if mask is None else np.asarray(mask, dtype=float)
    rng = np.random.default_rng(cfg.seed)
    p = p0.copy()
    for epoch in range(cfg.epochs):
        for i in rng.permutation(X.shape[0]):
            dW1, db1, dW2, db2 = _mlp_grads(X[i], targets[i], mask[i], p)
            p.W1 -= cfg.lr * dW1
            p.b1 -= cfg.lr * db1
            p.W2 -= cfg.lr * dW2
            p.b2 -= cfg.lr * db2
        for a in (p.W1, p.b1, p.W2, p.b2):
            if not np.all(np.isfinite(a)) or np.max(np.abs(a), initial=0.0) > DIVERGENCE_LIMIT:
                raise DivergenceError(f"parameters diverged at epoch {epoch}")
    return p


def logreg_train(X, targets, mask, cfg: SgdConfig,
                 p0: LogRegParams | None = None) -> LogRegParams:
    """Per-tag independent sigmoid regression by per-example SGD."""
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets, dtype=float)
    mask = np.ones_like(targets) if mask is None else np.asarray(mask, dtype=float)
    p = p0.copy() if p0 is not None else LogRegParams.zeros(X.shape[1], targets.shape[1])
    rng = np.random.default_rng(cfg.seed)
    for epoch in range(cfg.epochs):
        for i in rng.permutation(X.shape[0]):
            o = sigm(p.b + X[i] @ p.W)
            dpre = (o - targets[i]) * mask[i]
            p.W -= cfg.lr * np.outer(X[i], dpre)
            p.b -= cfg.lr * dpre
        for a in (p.W, p.b):
            if not np.all(np.isfinite(a)) or np.max(np.abs(a), initial=0.0) > DIVERGENCE_LIMIT:
                raise DivergenceError(f"parameters diverged at epoch {epoch}")
    return p
