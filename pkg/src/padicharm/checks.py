"""One verification operation per desk-checkable claim.

Every check returns a CheckReport carrying its parameters, the observed
counts or values, the bound they were held against, and a witness for the
first failure.  Verdicts never hinge on floating point: thresholds with
rational exponents (x^0.835 = x^(167/200), y^(2/3)) are compared by exact
integer powers, and the one genuinely transcendental comparison (the
exponent maximum over primes) runs at 60+ bits with a guard band that
escalates precision instead of guessing.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath

from .core import (
    a_p_set,
    a_p_set_by_filter,
    bp_count,
    cp,
    free_p,
    ilog,
    structure_constants,
    to_digits,
    vp,
    vp_factorial,
    vp_int,
)
from .expansion import h_p_mod, vp_H_expansion
from .report import CheckReport
from .tree import build_tree, f_sequence
from .valuation import (
    DEFAULT_POLICY,
    EscalationPolicy,
    exact_H_table,
    stirling,
    vp_H,
    vp_H_sweep,
)

__all__ = [
    "check_structural_identities",
    "check_lengyel_identity",
    "check_integral_scan",
    "check_corollary_2adic",
    "check_ubound",
    "check_harm_count",
    "check_harm_count_suite",
    "check_cpicong",
    "check_p59_exponent",
    "monitor_lower_bound",
    "cpicong_hit_count",
    "harm_hit_count",
]


# ---------------------------------------------------------------------------
# exact threshold comparisons (0.835 = 167/200, powers of 2/3 cube away)

def _le_3x_0835(count: int, x: int) -> bool:
    """count <= 3 * x^0.835, exactly."""
    return count ** 200 <= 3 ** 200 * x ** 167


def _lt_p_0835(count: int, p: int) -> bool:
    """count < p^0.835, exactly (equality is impossible for prime p)."""
    return count ** 200 < p ** 167


def _lt_harm_bound(count: int, y: int) -> bool:
    """count < 1.5 * y^(2/3) + 1, exactly."""
    if count <= 1:
        return True
    return 8 * (count - 1) ** 3 < 27 * y * y


def _le_cpi_bound(count: int, p: int) -> bool:
    """count <= 3 * ((p-2)/2)^(2/3) + 2, exactly."""
    if count <= 2:
        return True
    return 4 * (count - 2) ** 3 < 27 * (p - 2) ** 2


# ---------------------------------------------------------------------------
# structural identity suite

def _jp_layer_sums(n_max: int, k: int, p: int, M: int):
    """Valuation-graded tuple sums, built one integer at a time.

    Yields, for each n, arrays indexed by total valuation u of the sums of
    inverse free parts over increasing k-tuples from [1, n] whose product
    has valuation exactly u, plus an occupancy mask.  Enumerates tuples by
    their maximum element, so the whole sweep costs O(n_max * k * u_max)
    and never touches the block machinery it is checking against.
    """
    mod = p ** M
    u_max = k * (ilog(n_max, p) + 1)
    sums = [[0] * (u_max + 1) for _ in range(k + 1)]
    occupied = [[False] * (u_max + 1) for _ in range(k + 1)]
    occupied[0][0] = True
    sums[0][0] = 1
    for m in range(1, n_max + 1):
        vm = vp_int(m, p)
        inv = pow(free_p(m, p), -1, mod)
        for j in range(k, 0, -1):
            for u in range(u_max - vm, -1, -1):
                if occupied[j - 1][u]:
                    sums[j][u + vm] = (sums[j][u + vm] + sums[j - 1][u] * inv) % mod
                    occupied[j][u + vm] = True
        yield m, sums[k], occupied[k]


def check_structural_identities(
    p_set: tuple[int, ...] = (2, 3, 5, 7),
    n_max: int = 64,
    k_max: int = 200,
    *,
    ratio_n_max: int = 12,
    legendre_n_max: int = 10_000,
    slice_n_max: int = 2000,
    slice_p_set: tuple[int, ...] = (2, 3, 5),
    layer_n_max: int = 200,
    layer_p_set: tuple[int, ...] = (2, 3),
    layer_k_set: tuple[int, ...] = (2, 3),
    layer_prec: int = 9,
) -> CheckReport:
    """Brute-force versus formula for the digit-level identities.

    Covers: H(n,k)*n! = s(n+1,k+1); Legendre's formula against the
    floor-sum; the coprime-block form of the fixed-valuation slices; block
    telescoping to k-1; the top-slice count k-1; the maximum product
    valuation k*s - U; and the graded tuple sums against h_p_mod.
    """
    params = {
        "p_set": list(p_set),
        "ratio_n_max": ratio_n_max,
        "legendre_n_max": legendre_n_max,
        "slice_n_max": slice_n_max,
        "k_max": k_max,
        "layer_n_max": layer_n_max,
    }
    observed: dict[str, int] = {}

    def report(passed: bool, witness=None) -> CheckReport:
        return CheckReport(
            claim_id="structural-identities",
            parameters=params,
            observed=observed,
            bound="exact equality per identity",
            passed=passed,
            witness=witness,
        )

    # H(n, k) * n! = s(n+1, k+1)
    checked = 0
    table = exact_H_table(ratio_n_max, ratio_n_max)
    for n in range(1, ratio_n_max + 1):
        nf = math.factorial(n)
        for k in range(1, n + 1):
            if table[n][k] * nf != stirling(n + 1, k + 1):
                return report(False, {"identity": "harmonic-stirling-ratio", "n": n, "k": k})
            checked += 1
    observed["harmonic-stirling-ratio"] = checked

    # Legendre's digit formula vs the floor sum
    checked = 0
    for p in p_set:
        for n in range(legendre_n_max + 1):
            floor_sum, q = 0, p
            while q <= n:
                floor_sum += n // q
                q *= p
            if vp_factorial(n, p) != floor_sum:
                return report(False, {"identity": "legendre-factorial", "n": n, "p": p})
            checked += 1
    observed["legendre-factorial"] = checked

    # fixed-valuation slices: block formula vs direct filter
    checked = 0
    for p in slice_p_set:
        for n in range(1, slice_n_max + 1):
            s = ilog(n, p)
            buckets: dict[int, list[int]] = {}
            for m in range(1, n + 1):
                buckets.setdefault(vp_int(m, p), []).append(m)
            for v in range(s + 1):
                if a_p_set(n, v, p) != buckets.get(s - v, []):
                    return report(False, {"identity": "valuation-slice", "n": n, "v": v, "p": p})
                checked += 1
            # spot-check the standalone filter on the top slice
            if a_p_set_by_filter(n, s, p) != buckets.get(0, []):
                return report(False, {"identity": "valuation-slice-filter", "n": n, "p": p})
    observed["valuation-slice"] = checked

    # block telescoping and top-slice count
    checked = 0
    for p in p_set:
        for k in range(2, k_max + 1):
            sc = structure_constants(k, p)
            total = sum(
                bp_count(sc.root_digits.prefix(v + 1)) for v in range(sc.t + 1)
            )
            if total != k - 1:
                return report(False, {"identity": "block-telescoping", "k": k, "p": p})
            checked += 1
            # top-slice count on digit extensions of the root
            for extra in (sc.root_digits.value * p, sc.root_digits.value * p * p + 1):
                union: set[int] = set()
                for v in range(sc.t + 1):
                    union.update(a_p_set(extra, v, p))
                if len(union) != k - 1:
                    return report(
                        False, {"identity": "top-slice-count", "k": k, "p": p, "n": extra}
                    )
                checked += 1
    observed["block-telescoping"] = checked

    # graded tuple sums vs h_p_mod, and the max valuation k*s - U
    checked = 0
    for p in layer_p_set:
        for k in layer_k_set:
            sc = structure_constants(k, p)
            root = sc.root_digits
            for n, row, occ in _jp_layer_sums(layer_n_max, k, p, layer_prec):
                d = to_digits(n, p)
                s = len(d) - 1
                if not (d.extends(root) and s >= sc.t + 1):
                    continue
                v_obs = max(u for u in range(len(occ)) if occ[u])
                if v_obs != k * s - sc.U:
                    return report(
                        False,
                        {"identity": "max-valuation", "n": n, "k": k, "p": p, "observed": v_obs},
                    )
                for v in range(s - sc.t):
                    expected = h_p_mod(d.prefix(sc.t + v + 2), k, layer_prec)
                    if row[v_obs - v] != expected:
                        return report(
                            False,
                            {
                                "identity": "valuation-layer-sum",
                                "n": n,
                                "k": k,
                                "p": p,
                                "v": v,
                                "tuple_sum": row[v_obs - v],
                                "h_p": expected,
                            },
                        )
                    checked += 1
    observed["valuation-layer-sum"] = checked

    return report(True)


# ---------------------------------------------------------------------------

def check_lengyel_identity(m_max: int = 12, policy: EscalationPolicy = DEFAULT_POLICY) -> CheckReport:
    """v2(H(2^m - 1, 2)) = 4 - 2m for m = 2..m_max (Lengyel's identity)."""
    if m_max < 2:
        raise ValueError(f"m_max must be at least 2, got {m_max}")
    observed = {}
    witness = None
    passed = True
    for m in range(2, m_max + 1):
        val = vp_H(2 ** m - 1, 2, 2, policy)
        observed[str(m)] = val
        if val != 4 - 2 * m:
            passed = False
            witness = {"m": m, "observed": val, "expected": 4 - 2 * m}
            break
    return CheckReport(
        claim_id="lengyel",
        parameters={"m_max": m_max},
        observed=observed,
        bound="4 - 2m",
        passed=passed,
        witness=witness,
    )


def check_integral_scan(n_max: int = 40) -> CheckReport:
    """The only integral H(n, k) with k <= n <= n_max are (1,1) and (3,2)."""
    table = exact_H_table(n_max, n_max)
    found = [
        (n, k)
        for n in range(1, n_max + 1)
        for k in range(1, n + 1)
        if table[n][k].denominator == 1
    ]
    expected = [(1, 1), (3, 2)] if n_max >= 3 else [(1, 1)]
    return CheckReport(
        claim_id="integral-scan",
        parameters={"n_max": n_max},
        observed={"integral_pairs": found},
        bound=expected,
        passed=found == expected,
    )


def check_corollary_2adic(
    S: int = 14,
    sample_count: int = 500,
    seed: int = 0,
    *,
    exact_cross_max: int = 4096,
) -> CheckReport:
    """Branch-bit description of v2(H(n, 2)) on seeded random n <= 2^S.

    Digits matching the branch bits through position s force the valuation
    to at least 1 - s; a first mismatch at position r pins it to r - 2s.
    Samples below exact_cross_max are also cross-checked against exact
    rationals.
    """
    bits = f_sequence(S).bits
    rng = random.Random(seed)
    exact_vals: dict[int, int] = {}
    if exact_cross_max:
        table = exact_H_table(min(exact_cross_max, 2 ** S), 2)
        for n in range(2, len(table)):
            val = vp(table[n][2], 2)
            assert isinstance(val, int)
            exact_vals[n] = val
    matched = mismatched = crossed = 0
    witness = None

    # random draws almost never match the whole bit prefix, so the prefixes
    # themselves are added as systematic full-match cases
    prefix_values = [
        int("".join(map(str, bits[: s + 1])), 2) for s in range(1, S + 1)
    ]
    samples = [rng.randint(2, 2 ** S) for _ in range(sample_count)] + prefix_values
    for n in samples:
        d = to_digits(n, 2).digits
        s = len(d) - 1
        r = next((i for i in range(1, s + 1) if d[i] != bits[i]), None)
        verdict = vp_H_expansion(n, 2, 2)
        if r is None:
            ok = (not verdict.is_exact and verdict.value == 1 - s) or (
                verdict.is_exact and verdict.value >= 1 - s
            )
            matched += 1
        else:
            ok = verdict.is_exact and verdict.value == r - 2 * s
            mismatched += 1
        if ok and n in exact_vals:
            crossed += 1
            if r is None:
                ok = exact_vals[n] >= 1 - s
            else:
                ok = exact_vals[n] == r - 2 * s
        if not ok:
            witness = {
                "n": n,
                "digits": list(d),
                "first_mismatch": r,
                "verdict": str(verdict),
                "exact": exact_vals.get(n),
            }
            break
    return CheckReport(
        claim_id="corollary-2adic",
        parameters={"S": S, "sample_count": sample_count, "exact_cross_max": exact_cross_max},
        observed={"matched": matched, "mismatched": mismatched, "exact_crossed": crossed},
        bound="match: vp >= 1-s; mismatch at r: vp = r-2s",
        passed=witness is None,
        seed=seed,
        witness=witness,
    )


# ---------------------------------------------------------------------------

def _ubound_holds(n: int, k: int, p: int, nu: int) -> bool:
    """vp < -(k-1)(log_p n - log_p(k-1) - 1), by exact integer powers.

    Equivalent to n^(k-1) < (k-1)^(k-1) * p^(k-1-nu); the p power moves to
    whichever side keeps exponents nonnegative, so equality cases (n a
    power of p times k-1) fall out exactly.
    """
    lhs = n ** (k - 1)
    rhs = (k - 1) ** (k - 1)
    e = k - 1 - nu
    if e >= 0:
        rhs *= p ** e
    else:
        lhs *= p ** (-e)
    return lhs < rhs


def check_ubound(p: int, k: int, x: int, policy: EscalationPolicy = DEFAULT_POLICY) -> CheckReport:
    """Upper-bound mechanism on [(k-1)p, x]: leaf exits force the strict
    inequality, violators stay inside the tree, and the violator count is
    at most 3 x^0.835."""
    sc = structure_constants(k, p)
    if x < (k - 1) * p:
        raise ValueError(f"x must be at least (k-1)p = {(k - 1) * p}")
    depth = ilog(x, p) - sc.t + 1
    tree = build_tree(p, k, max_depth=depth)
    nodes = tree.node_values()
    vals = vp_H_sweep(x, k, p, policy)
    root = sc.root_digits
    exceptions = []
    leaf_exits = 0
    full_chain = 0
    witness = None
    for n in range((k - 1) * p, x + 1):
        d = to_digits(n, p)
        if not d.extends(root):
            continue
        s = len(d) - 1
        exit_at = next(
            (r for r in range(sc.t + 1, s + 1) if n // p ** (s - r) not in nodes),
            None,
        )
        holds = _ubound_holds(n, k, p, vals[n])
        if exit_at is not None:
            leaf_exits += 1
            if not holds:
                witness = {
                    "n": n,
                    "vp": vals[n],
                    "exit_at": exit_at,
                    "reason": "leaf exit must satisfy the bound",
                }
                break
        else:
            full_chain += 1
            if not holds:
                exceptions.append(n)
    count_ok = _le_3x_0835(len(exceptions), x)
    passed = witness is None and count_ok
    if witness is None and not count_ok:
        witness = {"reason": "exception count exceeds 3x^0.835", "count": len(exceptions)}
    return CheckReport(
        claim_id="ubound",
        parameters={"p": p, "k": k, "x": x},
        observed={
            "tested": leaf_exits + full_chain,
            "leaf_exits": leaf_exits,
            "full_chain": full_chain,
            "exceptions": len(exceptions),
        },
        bound=f"3 * {x}^0.835",
        passed=passed,
        witness=witness,
    )


# ---------------------------------------------------------------------------

def harm_hit_count(p: int, x: int, y: int, r: Fraction) -> tuple[int, list[int]]:
    """Count v in [x, x+y] with vp(H_v - r) > 0, plus the hits."""
    hits = []
    h = sum((Fraction(1, i) for i in range(1, x)), Fraction(0))
    for v in range(x, x + y + 1):
        h += Fraction(1, v)
        if vp(h - r, p) > 0:
            hits.append(v)
    return len(hits), hits


def check_harm_count(p: int, x: int, y: int, r: Fraction | int = 0) -> CheckReport:
    """Harmonic congruence hits on a window shorter than p stay below
    1.5 y^(2/3) + 1."""
    if not 1 <= y < p:
        raise ValueError(f"need 1 <= y < p, got y={y}, p={p}")
    if x < 1:
        raise ValueError(f"x must be positive, got {x}")
    count, hits = harm_hit_count(p, x, y, Fraction(r))
    passed = _lt_harm_bound(count, y)
    return CheckReport(
        claim_id="harm-count",
        parameters={"p": p, "x": x, "y": y, "r": str(Fraction(r))},
        observed={"count": count, "hits": hits},
        bound="1.5 * y^(2/3) + 1",
        passed=passed,
        witness=None if passed else {"count": count, "hits": hits},
    )


def check_harm_count_suite(
    p: int, cases: int = 100, seed: int = 0, *, x_max: int = 400
) -> CheckReport:
    """Seeded batch of harmonic congruence windows for one prime."""
    rng = random.Random(seed)
    worst = 0
    witness = None
    for _ in range(cases):
        x = rng.randint(1, x_max)
        y = rng.randint(1, p - 1)
        r = Fraction(0) if rng.random() < 0.25 else Fraction(
            rng.randint(-p * p, p * p), rng.randint(1, 4 * p)
        )
        count, hits = harm_hit_count(p, x, y, r)
        worst = max(worst, count)
        if not _lt_harm_bound(count, y):
            witness = {"x": x, "y": y, "r": str(r), "count": count, "hits": hits}
            break
    return CheckReport(
        claim_id="harm-count",
        parameters={"p": p, "cases": cases, "x_max": x_max},
        observed={"worst_count": worst},
        bound="1.5 * y^(2/3) + 1",
        passed=witness is None,
        seed=seed,
        witness=witness,
    )


def cpicong_hit_count(p: int, q: Fraction, a: int) -> tuple[int, list[int]]:
    """d in [0, p-1] with sum_{i=a}^{a+d} 1/cp(i) congruent to q mod p."""
    hits = []
    total = Fraction(0)
    for d in range(p):
        total += Fraction(1, cp(a + d, p))
        if vp(total - q, p) > 0:
            hits.append(d)
    return len(hits), hits


def check_cpicong(
    p: int, q_samples: int = 20, a_samples: int = 10, seed: int = 0
) -> CheckReport:
    """Congruence hit counts over coprime-block windows of length p.

    For every sampled (q, a) the count must stay below p^0.835, below
    ceil(p/2), below 3((p-2)/2)^(2/3) + 2, and no two consecutive window
    lengths may both hit.
    """
    rng = random.Random(seed)
    qs = []
    for _ in range(q_samples):
        den = rng.randint(1, 10 * p)
        while den % p == 0:
            den = rng.randint(1, 10 * p)
        qs.append(Fraction(rng.randint(-10 * p, 10 * p), den))
    if Fraction(0) not in qs:
        qs[0] = Fraction(0)
    a_list = [rng.randint(1, 5 * p * p) for _ in range(a_samples)]
    worst = 0
    witness = None
    pairs = 0
    for q in qs:
        for a in a_list:
            pairs += 1
            count, hits = cpicong_hit_count(p, q, a)
            worst = max(worst, count)
            consecutive = any(b - a_ == 1 for a_, b in zip(hits, hits[1:]))
            if (
                not _lt_p_0835(count, p)
                or count > -(-p // 2)
                or not _le_cpi_bound(count, p)
                or consecutive
            ):
                witness = {"q": str(q), "a": a, "count": count, "hits": hits}
                break
        if witness:
            break
    return CheckReport(
        claim_id="cpicong",
        parameters={"p": p, "q_samples": q_samples, "a_samples": a_samples},
        observed={"pairs": pairs, "worst_count": worst},
        bound="p^0.835, ceil(p/2), 3((p-2)/2)^(2/3)+2, no consecutive hits",
        passed=witness is None,
        seed=seed,
        witness=witness,
    )


def _primes_upto(n: int) -> list[int]:
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(n + 1) if sieve[i]]


def check_p59_exponent(prime_bound: int = 1000, *, guard: float = 1e-6) -> CheckReport:
    """The per-prime exponent log_p(min(3((p-2)/2)^(2/3)+2, ceil(p/2)))
    peaks at p = 59 and stays below 0.835.

    Evaluated with mpmath at 80+ bits; any comparison landing inside the
    guard band escalates precision instead of deciding.
    """
    if prime_bound < 59:
        raise ValueError(f"prime_bound must be at least 59, got {prime_bound}")
    primes = _primes_upto(prime_bound)

    def g_values(prec: int) -> list[tuple[object, int]]:
        with mpmath.workprec(prec):
            out = []
            for p in primes:
                cap = mpmath.mpf(-(-p // 2))
                curve = 3 * mpmath.power(mpmath.mpf(p - 2) / 2, mpmath.mpf(2) / 3) + 2
                m = min(cap, curve)
                out.append((mpmath.log(m) / mpmath.log(p) if p > 2 else mpmath.mpf(0), p))
        return out

    prec = 80
    while True:
        vals = g_values(prec)
        ranked = sorted(vals, key=lambda t: (-t[0], t[1]))
        (g_top, p_top), (g_second, _) = ranked[0], ranked[1]
        margin_ok = float(g_top - g_second) > guard and abs(float(g_top) - 0.835) > guard
        if margin_ok:
            break
        prec *= 2
        if prec > 4096:
            raise RuntimeError("precision escalation failed to separate exponents")
    passed = p_top == 59 and float(g_top) < 0.835
    return CheckReport(
        claim_id="p59-exponent",
        parameters={"prime_bound": prime_bound, "precision_bits": prec},
        observed={"argmax": p_top, "g_max": float(g_top), "runner_up_gap": float(g_top - g_second)},
        bound=0.835,
        passed=passed,
        witness=None if passed else {"argmax": p_top, "g_max": float(g_top)},
    )


def monitor_lower_bound(
    p: int, k: int, n_max: int, policy: EscalationPolicy = DEFAULT_POLICY
) -> CheckReport:
    """Informational: min over n <= n_max of vp(H(n,k)) + k log_p n.

    The additive constant in the known lower bound is unspecified, so this
    reports the observed minimum and never fails.
    """
    vals = vp_H_sweep(n_max, k, p, policy)
    best = None
    arg = None
    for n, nu in vals.items():
        slack = nu + k * math.log(n, p)
        if best is None or slack < best:
            best, arg = slack, n
    return CheckReport(
        claim_id="lower-bound-monitor",
        parameters={"p": p, "k": k, "n_max": n_max},
        observed={"min_slack": best, "argmin": arg},
        bound=None,
        passed=True,
    )
