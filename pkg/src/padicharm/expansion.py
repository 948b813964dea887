"""Digit-local modular expansion of H(n, k).

For a digit prefix a0..a_{t+v} extending the root digits of k - 1, the
quantities computed here are

  h_prime_mod : sum of 1/(j_1 ... j_k) over k-element selections of
      (depth w, unit j) items, j drawn from the coprime block of the
      length-(w+1) prefix, with the depth indices summing to the fixed
      budget U + v,
  h_p_mod     : h_prime of the parent plus the root-block unit times the
      reciprocal sum over the prefix's own coprime block,
  sigma_mod   : the p-power weighted sum of h_p terms along the prefix,

all reduced mod p^M.  These drive both an independent valuation method
(vp_H_expansion) and the membership test for deep tree levels.

Reciprocal power sums over the coprime sequence c_p are the workhorse.
The sequence is periodic in blocks of p - 1 consecutive units, so a
prefix sum splits into full blocks plus a short tail; the full blocks
are collapsed through the p-adic binomial series of (pq + m)^(-r),
leaving exact power sums of the block index q, which are polynomial in
the block count.  That keeps the cost polynomial in the precision even
when the prefix length is astronomically large, which is what makes
tree levels beyond Stirling feasibility reachable at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .core import (
    DigitString,
    PrecisionError,
    SizeCapError,
    bp_count,
    cp,
    is_prime,
    pi_p_mod,
    structure_constants,
    to_digits,
    vp_int,
)

__all__ = [
    "ExpansionTerm",
    "ExpansionVerdict",
    "recip_power_sum",
    "recip_esym",
    "h_prime_mod",
    "h_p_mod",
    "sigma_mod",
    "expansion_terms",
    "vp_H_expansion",
]

# Below this block count the direct scan is cheaper than the closed form.
_DIRECT_LIMIT = 4096


@lru_cache(maxsize=None)
def _stirling2_rows(j_max: int) -> tuple[tuple[int, ...], ...]:
    """Second-kind Stirling triangle up to row j_max."""
    rows = [(1,)]
    for j in range(1, j_max + 1):
        prev = rows[-1]
        row = [0] * (j + 1)
        for i in range(1, j + 1):
            row[i] = (prev[i - 1] if i - 1 < len(prev) else 0) + i * (
                prev[i] if i < len(prev) else 0
            )
        rows.append(tuple(row))
    return tuple(rows)


@lru_cache(maxsize=512)
def _index_power_sums(Q: int, j_max: int) -> tuple[int, ...]:
    """Exact sums of q^j over q = 0..Q-1 for j = 0..j_max.

    q^j is expanded in falling factorials so each sum is a single
    binomial coefficient; everything stays in exact integers.
    """
    s2 = _stirling2_rows(j_max)
    fact = [math.factorial(i) for i in range(j_max + 1)]
    out = []
    for j in range(j_max + 1):
        total = 0
        for i in range(j + 1):
            coeff = s2[j][i]
            if coeff:
                total += coeff * fact[i] * math.comb(Q, i + 1)
        out.append(total)
    return tuple(out)


@lru_cache(maxsize=None)
def _unit_power_sum(p: int, M: int, u: int) -> int:
    """Sum of m^(-u) over the units m = 1..p-1, mod p^M."""
    mod = p ** M
    return sum(pow(m, -u, mod) for m in range(1, p)) % mod


def _recip_power_sum_direct(B: int, r: int, p: int, M: int) -> int:
    mod = p ** M
    total = 0
    for i in range(1, B + 1):
        total = (total + pow(cp(i, p), -r, mod)) % mod
    return total


def _recip_power_sum_closed(B: int, r: int, p: int, M: int) -> int:
    """Block decomposition of sum_{i<=B} cp(i)^(-r) mod p^M.

    Full blocks contribute sum_j binom(-r, j) p^j T(r+j) F_j where T is a
    unit power sum and F_j the exact power sum of block indices; the
    partial block is summed directly.
    """
    mod = p ** M
    Q, m0 = divmod(B, p - 1)
    total = 0
    if Q:
        F = _index_power_sums(Q, M - 1)
        pj = 1
        for j in range(M):
            c = math.comb(r + j - 1, j)
            term = c % mod * _unit_power_sum(p, M, r + j) % mod
            term = term * (F[j] % mod) % mod * pj % mod
            total = (total - term if j & 1 else total + term) % mod
            pj = pj * p % mod
    base = p * Q % mod
    for m in range(1, m0 + 1):
        total = (total + pow(base + m, -r, mod)) % mod
    return total


@lru_cache(maxsize=65536)
def recip_power_sum(B: int, r: int, p: int, M: int) -> int:
    """sum_{i=1}^{B} cp(i)^(-r) mod p^M, for any block count B >= 0."""
    if B < 0:
        raise ValueError(f"B must be nonnegative, got {B}")
    if r < 1 or M < 1:
        raise ValueError(f"need r >= 1 and M >= 1, got r={r}, M={M}")
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if B <= _DIRECT_LIMIT:
        return _recip_power_sum_direct(B, r, p, M)
    return _recip_power_sum_closed(B, r, p, M)


def _recip_esym_direct(B: int, m_max: int, p: int, M: int) -> list[int]:
    mod = p ** M
    e = [0] * (m_max + 1)
    e[0] = 1
    for i in range(1, B + 1):
        inv = pow(cp(i, p), -1, mod)
        for d in range(min(i, m_max), 0, -1):
            e[d] = (e[d] + e[d - 1] * inv) % mod
    return e


def _recip_esym_newton(B: int, m_max: int, p: int, M: int) -> list[int]:
    """Elementary symmetric sums from power sums via Newton's identities.

    Dividing by m loses vp(m) digits of precision when p divides m, so the
    whole run is padded by vp(m_max!) extra digits up front; each division
    is checked to be exact.
    """
    pad = vp_int(math.factorial(m_max), p) if m_max > 1 else 0
    Mw = M + pad
    modw = p ** Mw
    ps = [0] + [recip_power_sum(B, r, p, Mw) for r in range(1, m_max + 1)]
    e = [0] * (m_max + 1)
    e[0] = 1
    for m in range(1, m_max + 1):
        acc = 0
        sign = 1
        for r in range(1, m + 1):
            acc += sign * e[m - r] * ps[r]
            sign = -sign
        acc %= modw
        alpha = vp_int(m, p) if m % p == 0 else 0
        if alpha:
            if acc % p ** alpha:
                raise PrecisionError(
                    f"inexact division by {m} in symmetric-sum recursion"
                )
            acc //= p ** alpha
        e[m] = acc * pow(m // p ** alpha, -1, modw) % modw
    mod = p ** M
    return [x % mod for x in e]


def recip_esym(B: int, m_max: int, p: int, M: int) -> list[int]:
    """e_0..e_{m_max} of the reciprocals 1/cp(1), ..., 1/cp(B), mod p^M."""
    if m_max < 0:
        raise ValueError(f"m_max must be nonnegative, got {m_max}")
    m_max = min(m_max, B)
    if m_max == 0:
        return [1]
    if B <= _DIRECT_LIMIT:
        return _recip_esym_direct(B, m_max, p, M)
    return _recip_esym_newton(B, m_max, p, M)


def _require_extension(prefix: DigitString, k: int) -> tuple:
    sc = structure_constants(k, prefix.p)
    if not prefix.extends(sc.root_digits):
        raise ValueError(
            f"prefix {prefix} does not extend the root digits "
            f"{sc.root_digits} of k-1"
        )
    return sc


def h_prime_mod(prefix: DigitString, k: int, M: int) -> int:
    """Budget-constrained selection sum over the prefix's item pool.

    Items are pairs (w, j) with w in [0, len(prefix)-1] and j in the
    coprime block of the length-(w+1) prefix; a selection picks k distinct
    items whose depths sum to exactly U + v and contributes the product of
    the modular inverses of its units.  Groups enter a (count, depth-sum)
    DP through their elementary symmetric sums, so group size never costs
    more than the degree actually reachable within the budget.
    """
    if M < 1:
        raise ValueError(f"M must be positive, got {M}")
    sc = _require_extension(prefix, k)
    p = prefix.p
    v = len(prefix) - sc.t - 1
    budget = sc.U + v
    mod = p ** M
    dp = [[0] * (budget + 1) for _ in range(k + 1)]
    dp[0][0] = 1
    for w in range(sc.t + v + 1):
        B = bp_count(prefix.prefix(w + 1))
        cap = k if w == 0 else min(k, budget // w)
        m_top = min(cap, B)
        if m_top == 0:
            continue
        ep = recip_esym(B, m_top, p, M)
        new = [row[:] for row in dp]
        for c in range(k):
            row = dp[c]
            for W in range(budget + 1):
                val = row[W]
                if not val:
                    continue
                top = min(m_top, k - c) if w == 0 else min(
                    m_top, k - c, (budget - W) // w
                )
                for mu in range(1, top + 1):
                    new[c + mu][W + mu * w] = (
                        new[c + mu][W + mu * w] + val * ep[mu]
                    ) % mod
        dp = new
    return dp[k][budget]


def _h_prime_streamed(prefix: DigitString, k: int, M: int, item_cap: int = 200_000) -> int:
    """Item-by-item reference DP; cost is linear in value(prefix)."""
    sc = _require_extension(prefix, k)
    p = prefix.p
    v = len(prefix) - sc.t - 1
    budget = sc.U + v
    if prefix.value > item_cap:
        raise SizeCapError(
            f"streamed path over {prefix.value} items exceeds cap {item_cap}"
        )
    mod = p ** M
    dp = [[0] * (budget + 1) for _ in range(k + 1)]
    dp[0][0] = 1
    for w in range(sc.t + v + 1):
        B = bp_count(prefix.prefix(w + 1))
        for i in range(1, B + 1):
            inv = pow(cp(i, p), -1, mod)
            for c in range(k - 1, -1, -1):
                row = dp[c]
                for W in range(budget - w, -1, -1):
                    if row[W]:
                        dp[c + 1][W + w] = (dp[c + 1][W + w] + row[W] * inv) % mod
    return dp[k][budget]


def h_p_mod(prefix: DigitString, k: int, M: int) -> int:
    """h_prime of the parent plus the unit times the block reciprocal sum.

    Always a residue (never needs to invert a multiple of p), which is the
    integrality fact everything downstream leans on.
    """
    sc = _require_extension(prefix, k)
    if len(prefix) < sc.t + 2:
        raise ValueError(
            f"prefix must extend the root by at least one digit, got {prefix}"
        )
    p = prefix.p
    mod = p ** M
    head = h_prime_mod(prefix.parent(), k, M)
    tail = pi_p_mod(k, p, M) * recip_power_sum(bp_count(prefix), 1, p, M)
    return (head + tail) % mod


def sigma_mod(prefix: DigitString, k: int, M: int) -> int:
    """p-power weighted sum of the h_p terms along the prefix, mod p^M."""
    sc = _require_extension(prefix, k)
    if len(prefix) < sc.t + 2:
        raise ValueError(
            f"prefix must extend the root by at least one digit, got {prefix}"
        )
    p = prefix.p
    mod = p ** M
    u = len(prefix) - sc.t - 2
    total = 0
    pv = 1
    for v in range(u + 1):
        total = (total + h_p_mod(prefix.prefix(sc.t + v + 2), k, M) * pv) % mod
        pv = pv * p % mod
    return total


@dataclass(frozen=True)
class ExpansionTerm:
    """One h_p term of the expansion, with its working precision."""

    prefix: DigitString
    prec: int
    residue: int


@dataclass(frozen=True)
class ExpansionVerdict:
    """Either an exact valuation or a lower bound.

    A lower bound means every computed term vanished to the tail
    threshold; the true valuation is then undetermined by this module
    alone and equals s - t - k*s + U at least.
    """

    exact_valuation: int | None = None
    lower_bound: int | None = None

    def __post_init__(self) -> None:
        if (self.exact_valuation is None) == (self.lower_bound is None):
            raise ValueError("exactly one of exact/lower bound must be set")

    @property
    def is_exact(self) -> bool:
        return self.exact_valuation is not None

    @property
    def value(self) -> int:
        v = self.exact_valuation if self.is_exact else self.lower_bound
        assert v is not None
        return v


def _expansion_setup(n: int, k: int, p: int):
    d = to_digits(n, p)
    sc = structure_constants(k, p)
    if not d.extends(sc.root_digits):
        raise ValueError(
            f"digit string of n={n} does not start with the digits of k-1={k - 1}"
        )
    s = len(d) - 1
    if s < sc.t + 1:
        raise ValueError(f"n={n} needs at least {sc.t + 2} digits in base {p}")
    return d, sc, s


def expansion_terms(n: int, k: int, p: int, guard: int = 4) -> list[ExpansionTerm]:
    """The h_p terms feeding vp_H_expansion, at a shared precision."""
    d, sc, s = _expansion_setup(n, k, p)
    M = (s - sc.t) + max(guard, 1)
    return [
        ExpansionTerm(
            prefix=d.prefix(sc.t + v + 2),
            prec=M,
            residue=h_p_mod(d.prefix(sc.t + v + 2), k, M),
        )
        for v in range(s - sc.t)
    ]


def vp_H_expansion(n: int, k: int, p: int, guard: int = 4) -> ExpansionVerdict:
    """vp(H(n, k)) from the digit-local expansion.

    Scans the accumulated weighted sum for the first index v where its
    valuation is exactly v; later terms carry at least v + 1 powers of p
    and cannot disturb it, so the valuation U + v - k*s is exact.  If the
    whole scan stays above its index, only the tail bound remains.
    """
    d, sc, s = _expansion_setup(n, k, p)
    M = (s - sc.t) + max(guard, 1)
    mod = p ** M
    acc = 0
    pv = 1
    for v in range(s - sc.t):
        acc = (acc + h_p_mod(d.prefix(sc.t + v + 2), k, M) * pv) % mod
        pv = pv * p % mod
        if acc and vp_int(acc, p) <= v:
            return ExpansionVerdict(exact_valuation=sc.U + vp_int(acc, p) - k * s)
    return ExpansionVerdict(lower_bound=(s - sc.t) - k * s + sc.U)
