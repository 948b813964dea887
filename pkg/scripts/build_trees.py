#!/usr/bin/env python3
"""Build the digit trees for a range of k, export JSON and DOT, print sizes.

Example:
    python3 scripts/build_trees.py --p 3 --k-min 2 --k-max 7 --out out/
"""

import argparse
import json
import pathlib
import time

from padicharm.cli import tree_document, tree_dot
from padicharm.tree import build_tree


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--p", type=int, default=3)
    parser.add_argument("--k-min", type=int, default=2)
    parser.add_argument("--k-max", type=int, default=7)
    parser.add_argument("--max-depth", type=int, default=32)
    parser.add_argument("--engine", default="both",
                        choices=["stirling", "expansion", "both"])
    parser.add_argument("--out", default="out")
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.k_min, args.k_max + 1):
        t0 = time.time()
        tree = build_tree(args.p, k, args.max_depth, engine=args.engine)
        doc = tree_document(tree)
        (out / f"tree_p{args.p}_k{k}.json").write_text(
            json.dumps(doc, sort_keys=True, indent=2) + "\n"
        )
        (out / f"tree_p{args.p}_k{k}.dot").write_text(tree_dot(tree))
        print(json.dumps({
            "p": args.p,
            "k": k,
            "nodes": tree.node_count,
            "status": tree.status,
            "levels": [len(level) for level in tree.levels],
            "dual_checks": tree.dual_checks,
            "seconds": round(time.time() - t0, 2),
        }))


if __name__ == "__main__":
    main()
