"""Brute-force ground truth for small models: exact partition function,
conditional label distribution, marginals, and the exact conditional
log-likelihood gradient.

Primary path enumerates the 2^C label vectors with hidden units
marginalized analytically; a slower joint (y,h) enumeration is kept as a
secondary cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import (DrbmParams, Gradient, LabeledExample, cond_free_energy,
                   energy, log1pexp, p_hidden_given, sigm)

ENUM_BITS = 20  # ~10^6 terms keeps a full enumeration under a second


class CapacityError(ValueError):
    """Raised when an instance is too large to enumerate."""


@dataclass
class Marginals:
    y_marg: np.ndarray     # C,  p(y_j=1|x)
    h_marg: np.ndarray     # n,  p(h_k=1|x)
    pair_marg: np.ndarray  # n x C,  p(y_j=1, h_k=1|x)


def all_bit_vectors(C: int) -> np.ndarray:
    """All 2^C binary vectors of length C as a (2^C, C) float array."""
    if C > ENUM_BITS:
        raise CapacityError(f"enumeration over {C} bits exceeds the {ENUM_BITS}-bit bound")
    cols = [(np.arange(2 ** C) >> j) & 1 for j in range(C)]
    return np.stack(cols, axis=1).astype(float)


def _free_energies(x, p: DrbmParams, Y: np.ndarray) -> np.ndarray:
    """F(y|x) for every row of Y, vectorized."""
    act = p.c + p.W @ np.asarray(x, dtype=float)  # n
    inputs = act[None, :] + Y @ p.U.T             # 2^C x n
    return -(Y @ p.d) - np.sum(log1pexp(inputs), axis=1)


def exact_log_partition(x, p: DrbmParams) -> float:
    """log sum_y e^{-F(y|x)}, log-sum-exp stable."""
    F = _free_energies(x, p, all_bit_vectors(p.C))
    m = np.max(-F)
    return float(m + np.log(np.sum(np.exp(-F - m))))


def exact_cond_prob(y, x, p: DrbmParams) -> float:
    """p(y|x) = e^{-F(y|x) - log Z(x)}."""
    return float(np.exp(-cond_free_energy(y, x, p) - exact_log_partition(x, p)))


def exact_marginals(x, p: DrbmParams) -> Marginals:
    if p.n > ENUM_BITS:
        raise CapacityError(f"n={p.n} exceeds the {ENUM_BITS}-bit bound")
    Y = all_bit_vectors(p.C)
    F = _free_energies(x, p, Y)
    logw = -F - np.max(-F)
    w = np.exp(logw)
    w /= np.sum(w)
    # p(h_k=1 | y, x) is analytic per enumerated y
    act = p.c + p.W @ np.asarray(x, dtype=float)
    H = sigm(act[None, :] + Y @ p.U.T)  # 2^C x n
    y_marg = w @ Y
    h_marg = w @ H
    pair = (H * w[:, None]).T @ Y       # n x C
    return Marginals(y_marg, h_marg, pair)


def exact_grad(example: LabeledExample, p: DrbmParams) -> Gradient:
    """Exact gradient of log p(y_t|x_t): data term minus model expectation."""
    m = exact_marginals(example.x, p)
    h0 = p_hidden_given(example.y, example.x, p)
    return Gradient(
        dU=np.outer(h0, example.y) - m.pair_marg,
        dW=np.outer(h0 - m.h_marg, example.x),
        dc=h0 - m.h_marg,
        dd=example.y - m.y_marg,
    )


def finite_diff(f, p: DrbmParams, step: float = 1e-5) -> Gradient:
    """Central finite differences of a scalar function of the
    parameters, entry by entry."""
    g = Gradient(np.zeros_like(p.U), np.zeros_like(p.W),
                 np.zeros_like(p.c), np.zeros_like(p.d))
    for src, dst in ((p.U, g.dU), (p.W, g.dW), (p.c, g.dc), (p.d, g.dd)):
        it = np.nditer(src, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = src[idx]
            src[idx] = orig + step
            hi = f(p)
            src[idx] = orig - step
            lo = f(p)
            src[idx] = orig
            dst[idx] = (hi - lo) / (2 * step)
    return g


def log_pl_reference(example: LabeledExample, p: DrbmParams) -> float:
    """Pseudo-likelihood computed purely from free energies:
    sum_j [-F(y|x) - log(e^{-F(y|x)} + e^{-F(y with bit j flipped|x)})].
    """
    y, x = example.y, example.x
    F = cond_free_energy(y, x, p)
    total = 0.0
    for j in range(p.C):
        y_flip = y.copy()
        y_flip[j] = 1 - y_flip[j]
        Fj = cond_free_energy(y_flip, x, p)
        total += -F - np.logaddexp(-F, -Fj)
    return float(total)


def joint_log_partition(x, p: DrbmParams) -> float:
    """Secondary check: direct 2^{C+n} sum over (y, h)."""
    if p.C + p.n > ENUM_BITS:
        raise CapacityError("joint enumeration exceeds the bit bound")
    terms = []
    for y in product((0.0, 1.0), repeat=p.C):
        for h in product((0.0, 1.0), repeat=p.n):
            terms.append(-energy(np.array(y), np.array(h), x, p))
    terms = np.array(terms)
    m = terms.max()
    return float(m + np.log(np.sum(np.exp(terms - m))))


def joint_marginals(x, p: DrbmParams) -> Marginals:
    """Secondary check: marginals from the full (y, h) table."""
    if p.C + p.n > ENUM_BITS:
        raise CapacityError("joint enumeration exceeds the bit bound")
    y_marg = np.zeros(p.C)
    h_marg = np.zeros(p.n)
    pair = np.zeros((p.n, p.C))
    logZ = joint_log_partition(x, p)
    for y in product((0.0, 1.0), repeat=p.C):
        ya = np.array(y)
        for h in product((0.0, 1.0), repeat=p.n):
            ha = np.array(h)
            w = np.exp(-energy(ya, ha, x, p) - logZ)
            y_marg += w * ya
            h_marg += w * ha
            pair += w * np.outer(ha, ya)
    return Marginals(y_marg, h_marg, pair)
