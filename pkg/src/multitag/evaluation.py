"""Retrieval evaluation: per-tag area under the ROC curve, the
cross-validation driver with hyper-parameter selection on validation
folds only, and paired significance testing between models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import NEGATIVE, POSITIVE, UNKNOWN, FoldSplit


@dataclass
class AucReport:
    tags: list
    values: np.ndarray  # tags x folds, NaN for undefined cells

    @property
    def n_folds(self):
        return self.values.shape[1]

    def per_tag_mean(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.nanmean(self.values, axis=1)

    def grand_mean(self) -> float:
        valid = self.values[~np.isnan(self.values)]
        if valid.size == 0:
            return float("nan")
        return float(np.mean(valid))

    def valid_cells(self) -> int:
        return int(np.sum(~np.isnan(self.values)))


@dataclass
class SignificanceReport:
    tags: list
    p_values: np.ndarray    # per tag, NaN where untestable
    winners: list           # 'a', 'b', or None per tag
    a_better: int
    b_better: int


def _average_ranks(a: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    _, inv, counts = np.unique(a, return_inverse=True, return_counts=True)
    cum = np.cumsum(counts)
    avg = cum - counts + (counts + 1) / 2.0
    return avg[inv]


def auc(scores, labels):
    """Mann-Whitney AUC: fraction of (positive, negative) pairs ranked
    correctly, ties counted half.  Unknown labels are excluded; returns
    None when either class is empty (undefined, excluded from means).
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    keep = labels != UNKNOWN
    scores, labels = scores[keep], labels[keep]
    pos = labels == POSITIVE
    neg = labels == NEGATIVE
    n_pos, n_neg = int(pos.sum()), int(neg.sum())
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _average_ranks(scores)
    u = float(np.sum(ranks[pos])) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def _betacf(a, b, x, max_iter=300, eps=1e-14):
    """Continued fraction for the regularized incomplete beta."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def betainc_reg(a, b, x):
    """Regularized incomplete beta I_x(a, b), accurate to ~1e-14."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t."""
    if df < 1:
        raise ValueError("df must be >= 1")
    t = abs(float(t))
    return betainc_reg(df / 2.0, 0.5, df / (df + t * t))


def paired_ttest(a, b) -> float:
    """Two-sided paired t-test p-value; identical samples give 1.0 by
    convention, zero-variance nonzero differences give 0.0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValueError("need two equal-length vectors of >= 2 paired values")
    d = a - b
    if np.all(d == 0):
        return 1.0
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        return 0.0
    t = float(np.mean(d)) / (sd / math.sqrt(d.size))
    return t_sf_two_sided(t, d.size - 1)


def significance_counts(report_a: AucReport, report_b: AucReport,
                        alpha: float = 0.05) -> SignificanceReport:
    """Per-tag paired t-test across folds; a tag counts for the model
    with the higher mean AUC when p < alpha, undecided tags count for
    neither."""
    if report_a.tags != report_b.tags:
        raise ValueError("mismatched tag sets")
    if report_a.n_folds != report_b.n_folds:
        raise ValueError("mismatched fold counts")
    p_values = np.full(len(report_a.tags), np.nan)
    winners = [None] * len(report_a.tags)
    a_better = b_better = 0
    for j in range(len(report_a.tags)):
        va, vb = report_a.values[j], report_b.values[j]
        ok = ~(np.isnan(va) | np.isnan(vb))
        if ok.sum() < 2:
            continue
        p = paired_ttest(va[ok], vb[ok])
        p_values[j] = p
        if p < alpha:
            if np.mean(va[ok]) > np.mean(vb[ok]):
                winners[j] = "a"
                a_better += 1
            elif np.mean(vb[ok]) > np.mean(va[ok]):
                winners[j] = "b"
                b_better += 1
    return SignificanceReport(list(report_a.tags), p_values, winners,
                              a_better, b_better)


def score_matrix_auc(scores: np.ndarray, cells: np.ndarray, tags) -> np.ndarray:
    """Per-tag AUC column vector for one evaluation set; NaN where
    undefined."""
    out = np.full(len(tags), np.nan)
    for j in range(len(tags)):
        val = auc(scores[:, j], cells[:, j])
        if val is not None:
            out[j] = val
    return out


def cv_run(X: np.ndarray, cells: np.ndarray, tags, split: FoldSplit,
           train_fn, grid, seed: int = 0):
    """Hyper-parameter selection and test scoring.

    train_fn(X_train, cells_train, hyper, seed) must return a scoring
    function mapping an items x D matrix to items x C scores.  Selection
    sees only validation-rotation reports; the winning grid point is
    retrained on all non-test folds and scored on each held-out fold.

    Returns (test AucReport, selected hyper, validation grand means).
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty hyper-parameter grid")
    n_folds = len(split.folds)
    val_means = []
    for hyper in grid:
        cols = []
        for test_fold in range(n_folds):
            for val_idx, train_idx in split.rotations(test_fold):
                score = train_fn(X[train_idx], cells[train_idx], hyper, seed)
                cols.append(score_matrix_auc(score(X[val_idx]), cells[val_idx], tags))
        stacked = np.stack(cols, axis=1)
        valid = stacked[~np.isnan(stacked)]
        val_means.append(float(np.mean(valid)) if valid.size else float("nan"))
    best = int(np.nanargmax(val_means))
    hyper = grid[best]

    values = np.full((len(tags), n_folds), np.nan)
    for test_fold in range(n_folds):
        train_idx = split.train_items(test_fold)
        score = train_fn(X[train_idx], cells[train_idx], hyper, seed)
        test_idx = split.folds[test_fold]
        values[:, test_fold] = score_matrix_auc(score(X[test_idx]),
                                                cells[test_idx], tags)
    return AucReport(list(tags), values), hyper, val_means


def write_auc_report(path, model_name: str, report: AucReport,
                     delimiter="\t"):
    """One row per (model, tag, fold, AUC)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(delimiter.join(("model", "tag", "fold", "auc")) + "\n")
        for j, tag in enumerate(report.tags):
            for f in range(report.n_folds):
                v = report.values[j, f]
                cell = "NA" if np.isnan(v) else repr(float(v))
                fh.write(delimiter.join((model_name, tag, str(f), cell)) + "\n")


def write_summary(path, rows, delimiter="\t"):
    """Summary rows: (model, dataset, smoothed flag, grand mean AUC)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(delimiter.join(("model", "dataset", "smoothed", "grand_mean_auc")) + "\n")
        for model, dataset, smoothed, mean in rows:
            fh.write(delimiter.join((model, dataset, "+" if smoothed else "-",
                                     repr(float(mean)))) + "\n")
