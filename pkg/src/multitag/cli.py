"""Command-line front end: ingest tag data, train models, smooth tags,
evaluate, and run the oracle verification suite.

Option precedence is flags > config file > MULTITAG_SEED (for the seed)
> built-in defaults.  The config file is flat ``key=value`` text with
keys named like the long flags (dashes or underscores).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import data as dt
from .baselines import (LOGREG_DEFAULT_LR, MLP_DEFAULT_HIDDEN, MLP_DEFAULT_LR,
                        LogRegParams, MlpParams, SgdConfig, logreg_predict,
                        logreg_train, mlp_predict, mlp_train)
from .core import DrbmParams, LabeledExample
from .estimators import (ESTIMATORS, GaussianRbmParams, TrainConfig,
                         sgd_train, sgd_train_generative)
from .evaluation import (AucReport, score_matrix_auc, significance_counts,
                         write_auc_report, write_summary)
from .inference import lbp_marginals, predict_scores
from .modelio import load_model, save_model
from .oracle import (ENUM_BITS, CapacityError, exact_cond_prob, exact_grad,
                     exact_marginals, finite_diff, log_pl_reference)
from .core import sigm
from .estimators import pl_gradient
from .smoother import SmootherParams, TagEvent, smooth_tags, train_smoother

STATE_CHARS = {dt.POSITIVE: "P", dt.NEGATIVE: "N", dt.UNKNOWN: "U"}
CHAR_STATES = {v: k for k, v in STATE_CHARS.items()}


def _read_config(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _merge(args, defaults):
    """Fill unset options from config file, MULTITAG_SEED, then defaults."""
    config = _read_config(args.config) if getattr(args, "config", None) else {}
    for key, default in defaults.items():
        if getattr(args, key, None) is not None:
            continue
        if key in config:
            cast = type(default) if default is not None else str
            if cast is bool:
                setattr(args, key, config[key].lower() in ("1", "true", "yes"))
            else:
                setattr(args, key, cast(config[key]))
        elif key == "seed" and os.environ.get("MULTITAG_SEED"):
            setattr(args, key, int(os.environ["MULTITAG_SEED"]))
        else:
            setattr(args, key, default)
    return args


def _write_matrix(path, matrix: dt.ThreeStateTagMatrix):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("item\t" + "\t".join(matrix.vocab) + "\n")
        for i, item in enumerate(matrix.items):
            cells = "\t".join(STATE_CHARS[int(v)] for v in matrix.cells[i])
            fh.write(item + "\t" + cells + "\n")


def _read_matrix(path) -> dt.ThreeStateTagMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        vocab = header[1:]
        items, rows = [], []
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            items.append(parts[0])
            rows.append([CHAR_STATES[c] for c in parts[1:]])
    return dt.ThreeStateTagMatrix(items, vocab, np.asarray(rows, dtype=np.int8))


def _write_features(path, table: dt.FeatureTable):
    with open(path, "w", encoding="utf-8") as fh:
        for i, item in enumerate(table.items):
            fh.write(item + "\t" + "\t".join(repr(float(v)) for v in table.X[i]) + "\n")


def cmd_ingest(args):
    triples = dt.read_triples(args.triples)
    features = dt.read_features(args.features)
    records = dt.condense(triples)
    vocab = dt.select_vocab(records, args.vocab_size)
    feat_items = set(features.items)
    tagged = {item for item, _ in records}
    missing = sorted(tagged - feat_items)
    for item in missing:
        print(f"warning: no features for tagged item {item}, excluded",
              file=sys.stderr)
    items = sorted(feat_items)
    matrix = dt.binarize(records, vocab, args.min_positive, items=items)
    order = [features.items.index(i) for i in items]
    table = dt.normalize_features(
        dt.FeatureTable(items, features.X[order]))
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "vocab.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(vocab) + "\n")
    _write_matrix(os.path.join(args.out, "matrix.tsv"), matrix)
    _write_features(os.path.join(args.out, "features.tsv"), table)
    return 0


def _load_ingested(data_dir):
    matrix = _read_matrix(os.path.join(data_dir, "matrix.tsv"))
    features = dt.read_features(os.path.join(data_dir, "features.tsv"))
    if features.items != matrix.items:
        raise ValueError("matrix and features item order mismatch")
    return matrix, features


def _events_from_triples(triples, vocab, items_map):
    """One TagEvent per (user, clip); ids assigned by sorted order, so
    the same triples file always yields the same id maps."""
    col = {t: j for j, t in enumerate(vocab)}
    users = sorted({t.user for t in triples})
    clips = sorted({t.item for t in triples})
    tracks = sorted({items_map.get(c, c) for c in clips})
    uid = {u: i for i, u in enumerate(users)}
    cid = {c: i for i, c in enumerate(clips)}
    tid = {t: i for i, t in enumerate(tracks)}
    grouped = {}
    for t in triples:
        grouped.setdefault((t.user, t.item), set()).add(t.tag)
    events = []
    for (user, item), tags in sorted(grouped.items()):
        y = np.zeros(len(vocab))
        for tag in tags:
            if tag in col:
                y[col[tag]] = 1.0
        events.append(TagEvent(uid[user], tid[items_map.get(item, item)],
                               cid[item], y))
    sizes = (len(users), len(tracks), len(clips))
    return events, sizes, cid, tid


def cmd_train(args):
    if args.estimator not in ESTIMATORS:
        raise SystemExit(f"error: unknown estimator {args.estimator!r}")
    if args.kind == "smoother":
        return _train_smoother_cmd(args)
    matrix, features = _load_ingested(args.data)
    X = features.X
    Y = (matrix.cells == dt.POSITIVE).astype(float)
    mask = (matrix.cells != dt.UNKNOWN).astype(float)
    rng = np.random.default_rng(args.seed)
    log_path = args.model + ".log"
    cfg = TrainConfig(estimator=args.estimator, k=args.k, lr=args.lr,
                      beta=args.beta, epochs=args.epochs, seed=args.seed,
                      l1=args.l1)
    with open(log_path, "w", encoding="utf-8") as log:
        if args.kind == "drbm":
            p0 = DrbmParams.random_init(args.hidden, Y.shape[1], X.shape[1], rng)
            dataset = [LabeledExample(X[i], Y[i]) for i in range(X.shape[0])]
            model = sgd_train(dataset, p0, cfg, log_file=log)
        elif args.kind == "grbm":
            p0 = GaussianRbmParams.random_init(args.hidden, Y.shape[1],
                                               X.shape[1], rng)
            dataset = [LabeledExample(X[i], Y[i]) for i in range(X.shape[0])]
            model = sgd_train_generative(dataset, p0, cfg, log_file=log)
        elif args.kind == "mlp":
            p0 = MlpParams.random_init(X.shape[1], args.hidden, Y.shape[1], rng)
            model = mlp_train(X, Y, mask, SgdConfig(args.lr, args.epochs,
                                                    args.seed), p0)
        elif args.kind == "logreg":
            model = logreg_train(X, Y, mask, SgdConfig(args.lr, args.epochs,
                                                       args.seed))
        else:
            raise SystemExit(f"error: unknown model kind {args.kind!r}")
    save_model(args.model, model, matrix.vocab)
    return 0


def _train_smoother_cmd(args):
    triples = dt.read_triples(args.triples)
    items_map = dt.read_items(args.items) if args.items else {}
    records = dt.condense(triples)
    vocab = dt.select_vocab(records, args.vocab_size)
    events, sizes, _, _ = _events_from_triples(triples, vocab, items_map)
    rng = np.random.default_rng(args.seed)
    p0 = SmootherParams.random_init(args.hidden, len(vocab), sizes, rng)
    cfg = TrainConfig(estimator="cd", k=args.k, lr=args.lr,
                      epochs=args.epochs, seed=args.seed, l1=args.l1)
    with open(args.model + ".log", "w", encoding="utf-8") as log:
        model = train_smoother(events, p0, cfg, log_file=log)
    save_model(args.model, model, vocab)
    return 0


def cmd_smooth(args):
    model, vocab = load_model(args.model)
    if not isinstance(model, SmootherParams):
        raise SystemExit("error: --model must point to a smoother model")
    triples = dt.read_triples(args.triples)
    items_map = dt.read_items(args.items) if args.items else {}
    events, sizes, cid, tid = _events_from_triples(triples, vocab, items_map)
    if sizes != model.aux_sizes:
        raise SystemExit("error: triples vocabularies do not match the model")
    clip_track = {}
    for e in events:
        clip_track[e.clip] = e.track
    clip_name = {i: name for name, i in cid.items()}
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("item\t" + "\t".join(vocab) + "\n")
        for clip in sorted(clip_name):
            probs = smooth_tags(clip, clip_track[clip], model, events)
            fh.write(clip_name[clip] + "\t"
                     + "\t".join(repr(float(v)) for v in probs) + "\n")
    return 0


def _model_scores(model, X):
    if isinstance(model, DrbmParams):
        return np.stack([predict_scores(x, model, "lbp", K=10) for x in X])
    if isinstance(model, GaussianRbmParams):
        view = model.drbm_view()
        return np.stack([predict_scores(x, view, "lbp", K=10) for x in X])
    if isinstance(model, MlpParams):
        return np.stack([mlp_predict(x, model) for x in X])
    if isinstance(model, LogRegParams):
        return np.stack([logreg_predict(x, model) for x in X])
    raise SystemExit(f"error: cannot score model type {type(model).__name__}")


def _fold_report(scores, matrix, split) -> AucReport:
    values = np.full((matrix.C, len(split.folds)), np.nan)
    for f, fold in enumerate(split.folds):
        values[:, f] = score_matrix_auc(scores[fold], matrix.cells[fold],
                                        matrix.vocab)
    return AucReport(list(matrix.vocab), values)


def cmd_eval(args):
    matrix, features = _load_ingested(args.data)
    split = dt.make_folds(len(matrix.items), args.seed)
    os.makedirs(args.out, exist_ok=True)
    model_a, vocab_a = load_model(args.model)
    if vocab_a != matrix.vocab:
        raise SystemExit("error: model vocabulary does not match the data")
    report_a = _fold_report(_model_scores(model_a, features.X), matrix, split)
    write_auc_report(os.path.join(args.out, "auc_a.tsv"), "a", report_a)
    summary = [("a", args.data, False, report_a.grand_mean())]
    if args.model_b:
        model_b, vocab_b = load_model(args.model_b)
        if vocab_b != matrix.vocab:
            raise SystemExit("error: comparison models use different folds "
                             "or vocabularies")
        report_b = _fold_report(_model_scores(model_b, features.X), matrix,
                                split)
        write_auc_report(os.path.join(args.out, "auc_b.tsv"), "b", report_b)
        summary.append(("b", args.data, False, report_b.grand_mean()))
        sig = significance_counts(report_a, report_b)
        with open(os.path.join(args.out, "significance.tsv"), "w",
                  encoding="utf-8") as fh:
            fh.write("a_better\t{}\nb_better\t{}\n".format(sig.a_better,
                                                           sig.b_better))
    write_summary(os.path.join(args.out, "summary.tsv"), summary)
    return 0


def _check(name, ok, failures):
    print(("PASS " if ok else "FAIL ") + name)
    if not ok:
        failures.append(name)


def cmd_oracle_check(args):
    rng = np.random.default_rng(args.seed)
    failures = []

    def instance(C=4, n=3, D=5, scale=0.5):
        p = DrbmParams(rng.normal(scale=scale, size=(n, C)),
                       rng.normal(scale=scale, size=(n, D)),
                       rng.normal(scale=scale, size=n),
                       rng.normal(scale=scale, size=C))
        ex = LabeledExample(rng.normal(size=D),
                            (rng.random(C) < 0.5).astype(float))
        return ex, p

    ok = True
    for _ in range(args.trials):
        ex, p = instance()
        g = exact_grad(ex, p)
        fd = finite_diff(lambda q: float(np.log(exact_cond_prob(ex.y, ex.x, q))), p)
        ok &= np.allclose(g.flat(), fd.flat(), rtol=1e-6, atol=1e-8)
    _check("exact gradient vs finite differences", ok, failures)

    ok = True
    for _ in range(args.trials):
        ex, p = instance()
        g, _ = pl_gradient(ex, p)
        fd = finite_diff(lambda q: log_pl_reference(ex, q), p)
        ok &= np.allclose(g.flat(), fd.flat(), rtol=1e-6, atol=1e-8)
    _check("pseudo-likelihood gradient vs finite differences", ok, failures)

    ok = True
    for _ in range(args.trials):
        ex, p = instance(C=8, n=1)
        m = lbp_marginals(ex.x, p, K=25, beta=0.0,
                          printed_pair_normalizer=args.printed_normalizer)
        e = exact_marginals(ex.x, p)
        ok &= (np.allclose(m.y_marg, e.y_marg, atol=1e-8)
               and np.allclose(m.h_marg, e.h_marg, atol=1e-8)
               and np.allclose(m.pair_marg, e.pair_marg, atol=1e-8))
    _check("belief propagation exact on single-hidden-unit models", ok,
           failures)

    ex, p = instance()
    p.U[:] = 0.0
    m = lbp_marginals(ex.x, p, K=10, beta=0.0,
                      printed_pair_normalizer=args.printed_normalizer)
    ok = np.allclose(m.pair_marg, np.outer(m.h_marg, m.y_marg), atol=1e-10)
    _check("independence identity at zero coupling", ok, failures)

    ok = True
    for _ in range(args.trials):
        ex, p = instance(C=5)
        from .oracle import all_bit_vectors
        total = sum(exact_cond_prob(y, ex.x, p) for y in all_bit_vectors(p.C))
        ok &= abs(total - 1.0) < 1e-10
    _check("conditional distribution normalizes", ok, failures)

    try:
        big = DrbmParams(np.zeros((2, ENUM_BITS + 1)), np.zeros((2, 1)),
                         np.zeros(2), np.zeros(ENUM_BITS + 1))
        exact_marginals(np.zeros(1), big)
        ok = False
    except CapacityError:
        ok = True
    _check("capacity bound enforced", ok, failures)

    if failures:
        print(f"{len(failures)} check(s) failed", file=sys.stderr)
        return 1
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="multitag",
                                     description="multi-label autotagging "
                                                 "models and evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **options):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        for flag, default in options.items():
            sp.add_argument("--" + flag.replace("_", "-"), dest=flag,
                            default=None,
                            type=type(default) if default is not None else str)
        sp.set_defaults(fn=fn, defaults=options)
        return sp

    add("ingest", cmd_ingest, triples="triples.tsv", features="features.tsv",
        items=None, vocab_size=10, min_positive=2, out="ingested")
    add("train", cmd_train, data="ingested", kind="drbm", estimator="cd",
        k=1, beta=0.0, lr=0.01, epochs=10, hidden=10, seed=0, l1=0.0,
        vocab_size=10, triples=None, items=None, model="model.txt")
    add("smooth", cmd_smooth, model="smoother.txt", triples="triples.tsv",
        items=None, out="smoothed.tsv")
    add("eval", cmd_eval, data="ingested", model="model.txt", model_b=None,
        seed=0, out="reports")
    sp = add("oracle-check", cmd_oracle_check, seed=0, trials=5)
    sp.add_argument("--printed-normalizer", dest="printed_normalizer",
                    action="store_true", default=False,
                    help="use the uncorrected 3-term pairwise normalizer "
                         "(negative control; fails the tree check)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge(args, args.defaults)
        return args.fn(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
