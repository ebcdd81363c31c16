"""Seeded synthetic corpora for experiments and the desk-scale
end-to-end pipeline: a generic feature->tags corpus, a label-dependency
corpus where one tag is a noisy copy of another, and a co-occurrence
corpus with under-reported tags for the smoothing experiments.
"""

from __future__ import annotations

import os

import numpy as np

from .core import sigm
from .smoother import TagEvent


def make_tag_corpus(n_items, C, D, seed, weight_scale=2.0):
    """Features drawn standard normal; each tag Bernoulli with logit
    linear in x.  Returns (X, Y)."""
    rng = np.random.default_rng(seed)
    w_true = rng.normal(size=(D, C)) * weight_scale
    X = rng.normal(size=(n_items, D))
    Y = (rng.random((n_items, C)) < sigm(X @ w_true)).astype(float)
    return X, Y


def make_dependency_corpus(n_items, seed, D=5, flip=0.1, weight_scale=1.5):
    """Two tags: tag 0 depends on x, tag 1 is tag 0 with flip noise.
    Returns (X, Y)."""
    rng = np.random.default_rng(seed)
    w = rng.normal(size=D) * weight_scale
    X = rng.normal(size=(n_items, D))
    y0 = (rng.random(n_items) < sigm(X @ w)).astype(float)
    flips = rng.random(n_items) < flip
    y1 = np.where(flips, 1 - y0, y0)
    return X, np.stack([y0, y1], axis=1)


def make_cooccurrence_corpus(n_clips, seed, D=3, drop=0.5, users_per_clip=3,
                             weight_scale=2.0):
    """Tags 0 and 1 always co-occur in truth; users report tag 0
    reliably but omit tag 1 with probability ``drop``.  A third tag is
    independent noise.

    Returns (X, Y_true, events) with one TagEvent per (user, clip); each
    clip is its own track.
    """
    rng = np.random.default_rng(seed)
    w = rng.normal(size=D) * weight_scale
    X = rng.normal(size=(n_clips, D))
    present = (rng.random(n_clips) < sigm(X @ w)).astype(float)
    extra = (rng.random(n_clips) < 0.3).astype(float)
    Y_true = np.stack([present, present, extra], axis=1)
    events = []
    for clip in range(n_clips):
        for u in range(users_per_clip):
            user = (clip * users_per_clip + u) % (2 * users_per_clip)
            y = Y_true[clip].copy()
            if y[1] == 1 and rng.random() < drop:
                y[1] = 0.0
            if y[2] == 1 and rng.random() < 0.5:
                y[2] = 0.0
            events.append(TagEvent(user=user, track=clip, clip=clip, y=y))
    return X, Y_true, events


def write_corpus_files(outdir, X, Y, tags, min_users=1, delimiter="\t"):
    """Write triples/features/items files for a (X, Y) corpus so the
    ingestion pipeline can consume it.  Each positive cell becomes
    ``min_users`` distinct (user, item, tag) triples."""
    os.makedirs(outdir, exist_ok=True)
    items = [f"item{i:04d}" for i in range(X.shape[0])]
    triples_path = os.path.join(outdir, "triples.tsv")
    with open(triples_path, "w", encoding="utf-8") as fh:
        for i, item in enumerate(items):
            for j, tag in enumerate(tags):
                if Y[i, j]:
                    for u in range(min_users):
                        fh.write(delimiter.join((f"user{u}", item, tag)) + "\n")
    features_path = os.path.join(outdir, "features.tsv")
    with open(features_path, "w", encoding="utf-8") as fh:
        for i, item in enumerate(items):
            row = delimiter.join(repr(float(v)) for v in X[i])
            fh.write(item + delimiter + row + "\n")
    items_path = os.path.join(outdir, "items.tsv")
    with open(items_path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(item + delimiter + "track_" + item + "\n")
    return triples_path, features_path, items_path
