#!/usr/bin/env python3
"""Generate a synthetic tagging corpus as triples/features/items files
ready for `multitag ingest`."""

import argparse

from multitag.synthetic import make_tag_corpus, write_corpus_files


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="corpus", help="output directory")
    ap.add_argument("--items", type=int, default=200)
    ap.add_argument("--tags", type=int, default=5)
    ap.add_argument("--features", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    X, Y = make_tag_corpus(args.items, args.tags, args.features, args.seed)
    names = [f"tag{j}" for j in range(args.tags)]
    write_corpus_files(args.out, X, Y, names)
    print(f"wrote {args.items} items, {args.tags} tags to {args.out}/")


if __name__ == "__main__":
    main()
