"""Exact multiple harmonic sums and their p-adic valuations.

H(n, k) sums 1/(i_1 * ... * i_k) over increasing k-tuples from [1, n].
Two independent routes are provided:

  * exact_H: exact Fraction arithmetic via the row recurrence
    H(n, k) = H(n-1, k) + H(n-1, k-1) / n,
  * vp_H: bounded-precision modular arithmetic through unsigned Stirling
    numbers of the first kind, using
    vp(H(n, k)) = vp(s(n+1, k+1)) - vp(n!).

The modular route never trusts its precision guess: a zero residue only
says the valuation is at least the working precision, so it escalates
and retries until the residue pins the valuation exactly.

Exact rationals are fractions.Fraction values and stay normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    PrecisionError,
    SizeCapError,
    ilog,
    is_prime,
    vp_factorial,
    vp_int,
)

__all__ = [
    "EscalationPolicy",
    "DEFAULT_POLICY",
    "DEFAULT_EXACT_CAP",
    "exact_H",
    "exact_H_table",
    "stirling",
    "stirling_mod",
    "vp_H",
    "vp_H_with_guard",
    "vp_H_sweep",
]

DEFAULT_EXACT_CAP = 4096


@dataclass(frozen=True)
class EscalationPolicy:
    """Controls how the modular route grows its working precision."""

    initial_guard: int = 8
    growth_factor: int = 2
    max_modulus_bits: int = 1 << 24

    def __post_init__(self) -> None:
        if self.initial_guard < 1:
            raise ValueError("initial_guard must be positive")
        if self.growth_factor < 2:
            raise ValueError("growth_factor must be at least 2")
        if self.max_modulus_bits < 8:
            raise ValueError("max_modulus_bits too small to be useful")


DEFAULT_POLICY = EscalationPolicy()


def _check_range(n: int, k: int) -> None:
    if n < 0 or k < 0:
        raise ValueError(f"n and k must be nonnegative, got n={n}, k={k}")
    if k > n:
        raise ValueError(f"k must not exceed n, got n={n}, k={k}")


def exact_H(n: int, k: int, cap: int = DEFAULT_EXACT_CAP) -> Fraction:
    """Exact H(n, k) as a reduced Fraction; H(n, 0) = 1.

    n is soft-capped (default 4096) because the denominators grow like
    lcm(1..n)^k; raise the cap explicitly for bigger sweeps.
    """
    _check_range(n, k)
    if n > cap:
        raise SizeCapError(f"n={n} exceeds exact-arithmetic cap {cap}")
    row = [Fraction(1)] + [Fraction(0)] * k
    for m in range(1, n + 1):
        for j in range(min(k, m), 0, -1):
            row[j] += row[j - 1] / m
    return row[k]


def exact_H_table(
    n_max: int, k_max: int, cap: int = DEFAULT_EXACT_CAP
) -> list[list[Fraction]]:
    """Rows H(n, 0..min(n, k_max)) for n = 0..n_max, one shared sweep."""
    _check_range(n_max, 0)
    if n_max > cap:
        raise SizeCapError(f"n_max={n_max} exceeds exact-arithmetic cap {cap}")
    row = [Fraction(1)] + [Fraction(0)] * k_max
    out = [row[:1]]
    for m in range(1, n_max + 1):
        for j in range(min(k_max, m), 0, -1):
            row[j] += row[j - 1] / m
        out.append(row[: min(m, k_max) + 1])
    return out


def _stirling_row(n: int, k: int, mod: int | None = None) -> list[int]:
    """Row s(n, 0..k) of unsigned first-kind Stirling numbers.

    Single-row sweep of s(n+1, m) = s(n, m-1) + n * s(n, m); only O(k)
    residues are alive at any time.
    """
    row = [0] * (k + 1)
    row[0] = 1
    if mod is None:
        for i in range(n):
            for m in range(min(k, i + 1), 0, -1):
                row[m] = row[m - 1] + i * row[m]
            row[0] = i * row[0]
    else:
        for i in range(n):
            for m in range(min(k, i + 1), 0, -1):
                row[m] = (row[m - 1] + i * row[m]) % mod
            row[0] = i * row[0] % mod
    return row


def stirling(n: int, k: int, cap: int = DEFAULT_EXACT_CAP) -> int:
    """Unsigned Stirling number of the first kind s(n, k), exactly.

    Counts permutations of n elements with exactly k cycles; k = 0 gives 0
    for n >= 1 by convention, k > n is rejected.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    if n > cap:
        raise SizeCapError(f"n={n} exceeds exact-arithmetic cap {cap}")
    return _stirling_row(n, k)[k]


def stirling_mod(
    n: int,
    k: int,
    p: int,
    M: int,
    max_modulus_bits: int = DEFAULT_POLICY.max_modulus_bits,
) -> int:
    """s(n, k) mod p^M by the same single-row sweep, scalar ops only."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    if M < 1:
        raise ValueError(f"M must be positive, got {M}")
    if not is_prime(p):
        raise ValueError(f"modulus base must be prime, got {p}")
    if M * math.log2(p) > max_modulus_bits:
        raise PrecisionError(
            f"modulus p^M = {p}^{M} exceeds the {max_modulus_bits}-bit cap"
        )
    return _stirling_row(n, k, mod=p ** M)[k]


def _initial_guard(n: int, k: int, p: int, policy: EscalationPolicy) -> int:
    # Heuristic start only; correctness never depends on it because a zero
    # residue forces escalation.
    return (k + 1) * (ilog(n, p) + 1) + policy.initial_guard


def vp_H_with_guard(
    n: int, k: int, p: int, policy: EscalationPolicy = DEFAULT_POLICY
) -> tuple[int, int]:
    """vp(H(n, k)) plus the guard that finally pinned it.

    Working precision is vp(n!) + guard; a residue of zero mod p^M only
    bounds the valuation from below, so the guard grows geometrically
    until the residue is nonzero.  H(n, k) > 0 guarantees termination
    short of the modulus-bit cap.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    _check_range(n, k)
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    F = vp_factorial(n, p)
    guard = _initial_guard(n, k, p, policy)
    while True:
        M = F + guard
        residue = stirling_mod(
            n + 1, k + 1, p, M, max_modulus_bits=policy.max_modulus_bits
        )
        if residue:
            return vp_int(residue, p) - F, guard
        guard *= policy.growth_factor


def vp_H(n: int, k: int, p: int, policy: EscalationPolicy = DEFAULT_POLICY) -> int:
    """Exact finite vp(H(n, k)) via the modular Stirling route."""
    return vp_H_with_guard(n, k, p, policy)[0]


def vp_H_sweep(
    n_max: int, k: int, p: int, policy: EscalationPolicy = DEFAULT_POLICY
) -> dict[int, int]:
    """vp(H(n, k)) for every n in [k, n_max] from one shared row sweep.

    Uses a single modulus sized for n_max; any zero residue along the way
    falls back to the per-value escalating route, so results always agree
    with vp_H.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if n_max < k:
        raise ValueError(f"n_max must be at least k, got {n_max}")
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    M = vp_factorial(n_max, p) + _initial_guard(n_max, k, p, policy)
    if M * math.log2(p) > policy.max_modulus_bits:
        raise PrecisionError(
            f"sweep modulus {p}^{M} exceeds the {policy.max_modulus_bits}-bit cap"
        )
    mod = p ** M
    row = [0] * (k + 2)
    row[0] = 1
    out: dict[int, int] = {}
    for i in range(n_max + 1):
        for m in range(min(k + 1, i + 1), 0, -1):
            row[m] = (row[m - 1] + i * row[m]) % mod
        row[0] = i * row[0] % mod
        n = i  # row now holds s(n + 1, .)
        if n >= k:
            residue = row[k + 1]
            if residue:
                out[n] = vp_int(residue, p) - vp_factorial(n, p)
            else:
                out[n] = vp_H(n, k, p, policy)
    return out
