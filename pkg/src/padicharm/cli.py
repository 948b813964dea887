"""Command-line surface: valuations, trees, branch bits, checks, scans.

This is the only module that does I/O.  Machine paths emit line-delimited
JSON (or DOT for trees); randomized checks require an explicit seed.
Exit codes: 0 success, 1 check failure / engine discrepancy / precision
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass

from . import __version__
from .checks import (
    check_corollary_2adic,
    check_cpicong,
    check_harm_count_suite,
    check_integral_scan,
    check_lengyel_identity,
    check_p59_exponent,
    check_structural_identities,
    check_ubound,
    monitor_lower_bound,
)
from .core import EngineDisagreement, PrecisionError, vp
from .expansion import vp_H_expansion
from .tree import PTree, build_tree, f_sequence
from .valuation import exact_H, exact_H_table, vp_H_with_guard

CACHE_ENV = "PADIC_CACHE"


@dataclass
class CacheRecord:
    p: int
    n: int
    k: int
    valuation: int
    engine: str
    guard: int


class CacheIntegrityError(RuntimeError):
    """Conflicting valuations stored for the same (p, n, k)."""


class ValCache:
    """Append-only JSON-lines store keyed by (p, n, k), single writer."""

    def __init__(self, path: str):
        self.path = path
        self._records: dict[tuple[int, int, int], CacheRecord] = {}
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = CacheRecord(**json.loads(line))
                    key = (rec.p, rec.n, rec.k)
                    old = self._records.get(key)
                    if old is not None and old.valuation != rec.valuation:
                        raise CacheIntegrityError(
                            f"cache {path} holds conflicting valuations for "
                            f"(p={rec.p}, n={rec.n}, k={rec.k}): "
                            f"{old.valuation} vs {rec.valuation}"
                        )
                    self._records.setdefault(key, rec)

    def get(self, p: int, n: int, k: int) -> CacheRecord | None:
        return self._records.get((p, n, k))

    def put(self, rec: CacheRecord) -> None:
        key = (rec.p, rec.n, rec.k)
        old = self._records.get(key)
        if old is not None:
            if old.valuation != rec.valuation:
                raise CacheIntegrityError(
                    f"refusing to insert conflicting valuation for {key}: "
                    f"{old.valuation} vs {rec.valuation}"
                )
            return
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(dataclasses.asdict(rec), sort_keys=True) + "\n")
        self._records[key] = rec


def tree_document(tree: PTree, stamp: bool = False) -> dict:
    """JSON-ready view of a built tree; byte-stable unless stamped."""
    stats = tree.stats
    return {
        "format": "ptree-v1",
        "version": __version__,
        "p": tree.p,
        "k": tree.k,
        "root": list(tree.constants.root_digits.digits),
        "t": tree.constants.t,
        "U": tree.constants.U,
        "W": tree.constants.W,
        "engine": tree.engine,
        "dual_checks": tree.dual_checks,
        "max_depth": tree.max_depth,
        "status": tree.status,
        "truncated_at": tree.truncated_at,
        "node_count": tree.node_count,
        "levels": [
            [list(ds.digits) for ds in sorted(level, key=lambda d: d.value)]
            for level in tree.levels
        ],
        "leaves": [
            list(ds.digits)
            for ds in sorted(tree.leaves, key=lambda d: (len(d), d.value))
        ],
        "child_stats": {
            "min_children": stats.min_children if stats else None,
            "max_children": stats.max_children if stats else None,
            "determined": stats.determined if stats else 0,
            "girth": stats.girth if stats else None,
        },
        "built_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()) if stamp else None,
    }


def _label(digits: tuple[int, ...], p: int) -> str:
    sep = "" if p <= 10 else "."
    return sep.join(str(d) for d in digits)


def tree_dot(tree: PTree) -> str:
    """DOT text: one box per digit string, leaves dashed."""
    p = tree.p
    lines = ["digraph ptree {", "  node [shape=box];"]
    for level in tree.levels:
        for ds in sorted(level, key=lambda d: d.value):
            lines.append(f'  "{_label(ds.digits, p)}";')
    for ds in sorted(tree.leaves, key=lambda d: (len(d), d.value)):
        lines.append(f'  "{_label(ds.digits, p)}" [style=dashed];')
    for level in tree.levels[1:]:
        for ds in sorted(level, key=lambda d: d.value):
            lines.append(
                f'  "{_label(ds.parent().digits, p)}" -> "{_label(ds.digits, p)}";'
            )
    for ds in sorted(tree.leaves, key=lambda d: (len(d), d.value)):
        lines.append(
            f'  "{_label(ds.parent().digits, p)}" -> "{_label(ds.digits, p)}";'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _cache_path(args) -> str | None:
    return os.environ.get(CACHE_ENV) or getattr(args, "cache", None)


def cmd_val(args) -> int:
    p, n, k, method = args.p, args.n, args.k, args.method
    cache = ValCache(_cache_path(args)) if _cache_path(args) else None
    if cache is not None:
        hit = cache.get(p, n, k)
        if hit is not None:
            print(json.dumps(
                {"p": p, "n": n, "k": k, "valuation": hit.valuation, "method": method},
                sort_keys=True,
            ))
            return 0
    guard = 0
    if method == "exact":
        val = vp(exact_H(n, k), p)
        assert isinstance(val, int)
    elif method == "stirling":
        val, guard = vp_H_with_guard(n, k, p)
    elif method == "expansion":
        verdict = vp_H_expansion(n, k, p)
        if not verdict.is_exact:
            raise PrecisionError(
                f"expansion engine only bounds vp >= {verdict.value} for "
                f"n={n}; use method stirling or both"
            )
        val = verdict.value
    else:  # both
        val, guard = vp_H_with_guard(n, k, p)
        verdict = None
        if k >= 2:
            try:
                verdict = vp_H_expansion(n, k, p)
            except ValueError:
                verdict = None  # digits of n do not extend those of k-1
        if verdict is not None:
            if verdict.is_exact and verdict.value != val:
                raise EngineDisagreement(
                    f"vp(H({n},{k})) mod {p}: stirling={val}, expansion={verdict.value}"
                )
            if not verdict.is_exact and val < verdict.value:
                raise EngineDisagreement(
                    f"vp(H({n},{k})) mod {p}: stirling={val} below expansion "
                    f"lower bound {verdict.value}"
                )
    if cache is not None:
        cache.put(CacheRecord(p=p, n=n, k=k, valuation=val, engine=method, guard=guard))
    print(json.dumps(
        {"p": p, "n": n, "k": k, "valuation": val, "method": method}, sort_keys=True
    ))
    return 0


def cmd_tree(args) -> int:
    tree = build_tree(
        args.p,
        args.k,
        max_depth=args.max_depth,
        engine=args.engine,
        workers=args.workers,
    )
    if args.format == "dot":
        sys.stdout.write(tree_dot(tree))
    else:
        print(json.dumps(tree_document(tree, stamp=args.stamp), sort_keys=True))
    return 0


def cmd_fseq(args) -> int:
    print(json.dumps(str(f_sequence(args.terms))))
    return 0


def cmd_scan(args) -> int:
    table = exact_H_table(args.max_n, args.max_n)
    for n in range(1, args.max_n + 1):
        for k in range(1, n + 1):
            if table[n][k].denominator == 1:
                print(json.dumps({"n": n, "k": k}))
    return 0


_RANDOMIZED = {"corollary-2adic", "cpicong", "harm-count"}


def _run_verify(args):
    name = args.check
    seed = args.seed if args.seed is not None else 0
    if name == "structural":
        return check_structural_identities()
    if name == "lengyel":
        return check_lengyel_identity(m_max=args.m_max)
    if name == "integral-scan":
        return check_integral_scan(n_max=args.max_n)
    if name == "corollary-2adic":
        return check_corollary_2adic(S=args.terms, sample_count=args.samples, seed=seed)
    if name == "ubound":
        return check_ubound(args.p, args.k, args.x)
    if name == "harm-count":
        return check_harm_count_suite(args.p, cases=args.samples, seed=seed)
    if name == "cpicong":
        return check_cpicong(
            args.p, q_samples=args.q_samples, a_samples=args.a_samples, seed=seed
        )
    if name == "p59-exponent":
        return check_p59_exponent(prime_bound=args.prime_bound)
    if name == "lower-bound-monitor":
        return monitor_lower_bound(args.p, args.k, args.max_n)
    raise KeyError(name)


CHECK_NAMES = [
    "structural",
    "lengyel",
    "integral-scan",
    "corollary-2adic",
    "ubound",
    "harm-count",
    "cpicong",
    "p59-exponent",
    "lower-bound-monitor",
]


def cmd_verify(args) -> int:
    if args.check not in CHECK_NAMES:
        print(
            f"unknown check {args.check!r}; valid names: {', '.join(CHECK_NAMES)}",
            file=sys.stderr,
        )
        return 2
    if args.check in _RANDOMIZED and args.seed is None:
        print(f"check {args.check!r} requires an explicit --seed", file=sys.stderr)
        return 2
    report = _run_verify(args)
    print(report.to_json())
    return 0 if report.passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padicharm",
        description="p-adic valuations of multiple harmonic sums, digit trees, "
        "and mechanical claim verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("val", help="valuation of one H(n, k)")
    p_val.add_argument("--p", type=int, required=True)
    p_val.add_argument("--n", type=int, required=True)
    p_val.add_argument("--k", type=int, required=True)
    p_val.add_argument(
        "--method",
        choices=["exact", "stirling", "expansion", "both"],
        default="both",
    )
    p_val.add_argument("--cache", help=f"JSONL cache path ({CACHE_ENV} overrides)")
    p_val.set_defaults(func=cmd_val)

    p_tree = sub.add_parser("tree", help="build and serialize a digit tree")
    p_tree.add_argument("--p", type=int, required=True)
    p_tree.add_argument("--k", type=int, required=True)
    p_tree.add_argument("--max-depth", type=int, default=32)
    p_tree.add_argument(
        "--engine", choices=["stirling", "expansion", "both"], default="both"
    )
    p_tree.add_argument("--format", choices=["json", "dot"], default="json")
    p_tree.add_argument("--workers", type=int, default=1)
    p_tree.add_argument("--stamp", action="store_true", help="embed a build timestamp")
    p_tree.set_defaults(func=cmd_tree)

    p_fseq = sub.add_parser("fseq", help="branch bits of the 2-adic tree")
    p_fseq.add_argument("--terms", type=int, required=True)
    p_fseq.set_defaults(func=cmd_fseq)

    p_verify = sub.add_parser("verify", help="run one named check")
    p_verify.add_argument("check")
    p_verify.add_argument("--seed", type=int)
    p_verify.add_argument("--m-max", type=int, default=12)
    p_verify.add_argument("--max-n", type=int, default=40)
    p_verify.add_argument("--p", type=int, default=3)
    p_verify.add_argument("--k", type=int, default=2)
    p_verify.add_argument("--x", type=int, default=729)
    p_verify.add_argument("--terms", type=int, default=14)
    p_verify.add_argument("--samples", type=int, default=500)
    p_verify.add_argument("--q-samples", type=int, default=20)
    p_verify.add_argument("--a-samples", type=int, default=10)
    p_verify.add_argument("--prime-bound", type=int, default=1000)
    p_verify.set_defaults(func=cmd_verify)

    p_scan = sub.add_parser("scan", help="integral values of H(n, k)")
    p_scan.add_argument("--max-n", type=int, required=True)
    p_scan.set_defaults(func=cmd_scan)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (EngineDisagreement, PrecisionError, CacheIntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:  # SizeCapError included
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
