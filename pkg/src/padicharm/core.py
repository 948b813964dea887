"""Base-p digit strings and the closed-form quantities attached to them.

Digit vectors are big endian: digits[0] is the most significant digit and
must be nonzero, so value(<a0,...,av>) = sum_i a_i * p^(v-i).  Everything
here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

__all__ = [
    "SizeCapError",
    "PrecisionError",
    "EngineDisagreement",
    "InfiniteValuation",
    "INFINITE",
    "Valuation",
    "DigitString",
    "StructureConstants",
    "is_prime",
    "to_digits",
    "from_digits",
    "digit_sum",
    "ilog",
    "cp",
    "vp_int",
    "vp",
    "free_p",
    "vp_factorial",
    "bp_count",
    "bp_block",
    "a_p_set",
    "a_p_set_by_filter",
    "structure_constants",
    "v_p_max",
    "pi_p_mod",
]


class SizeCapError(ValueError):
    """An input exceeds the configured exact-arithmetic cap."""


class PrecisionError(RuntimeError):
    """A modular computation exhausted its allowed precision."""


class EngineDisagreement(RuntimeError):
    """Two independent valuation engines returned different results."""


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 3.3 * 10^24."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d = n - 1
    r = (d & -d).bit_length() - 1
    d >>= r
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"modulus must be prime, got {p}")


class InfiniteValuation:
    """Valuation of zero.  Compares above every integer; no arithmetic."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "oo"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, InfiniteValuation)

    def __hash__(self) -> int:
        return hash("InfiniteValuation")

    def __gt__(self, other: object) -> bool:
        if isinstance(other, InfiniteValuation):
            return False
        if isinstance(other, int):
            return True
        return NotImplemented

    def __ge__(self, other: object) -> bool:
        if isinstance(other, (InfiniteValuation, int)):
            return True
        return NotImplemented

    def __lt__(self, other: object) -> bool:
        if isinstance(other, (InfiniteValuation, int)):
            return False
        return NotImplemented

    def __le__(self, other: object) -> bool:
        if isinstance(other, InfiniteValuation):
            return True
        if isinstance(other, int):
            return False
        return NotImplemented


INFINITE = InfiniteValuation()

Valuation = Union[int, InfiniteValuation]


@dataclass(frozen=True)
class DigitString:
    """Big-endian base-p digit vector with nonzero leading digit."""

    p: int
    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        _require_prime(self.p)
        if not self.digits:
            raise ValueError("digit string must be nonempty")
        if self.digits[0] == 0:
            raise ValueError("leading digit must be nonzero")
        if any(not 0 <= d < self.p for d in self.digits):
            raise ValueError(f"digits must lie in [0, {self.p - 1}]: {self.digits}")

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.digits)

    def __str__(self) -> str:
        body = ",".join(str(d) for d in self.digits)
        return f"<{body}>_{self.p}"

    @property
    def value(self) -> int:
        acc = 0
        for d in self.digits:
            acc = acc * self.p + d
        return acc

    @property
    def digit_sum(self) -> int:
        return sum(self.digits)

    def prefix(self, length: int) -> "DigitString":
        if not 1 <= length <= len(self.digits):
            raise ValueError(f"prefix length {length} out of range")
        return DigitString(self.p, self.digits[:length])

    def parent(self) -> "DigitString":
        if len(self.digits) < 2:
            raise ValueError("a single digit has no parent")
        return DigitString(self.p, self.digits[:-1])

    def child(self, digit: int) -> "DigitString":
        return DigitString(self.p, self.digits + (digit,))

    def extends(self, other: "DigitString") -> bool:
        return (
            self.p == other.p
            and len(self.digits) >= len(other.digits)
            and self.digits[: len(other.digits)] == other.digits
        )


def to_digits(n: int, p: int) -> DigitString:
    """Base-p digit string of a positive integer, most significant first.

    Rejects n = 0 (no digit string with nonzero leading digit exists).
    """
    _require_prime(p)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    digits = []
    while n:
        n, d = divmod(n, p)
        digits.append(d)
    return DigitString(p, tuple(reversed(digits)))


def from_digits(d: DigitString) -> int:
    """Inverse of to_digits."""
    return d.value


def digit_sum(n: int, p: int) -> int:
    """Sum of base-p digits of n >= 1."""
    return to_digits(n, p).digit_sum


def ilog(n: int, p: int) -> int:
    """floor(log_p n) for n >= 1."""
    return len(to_digits(n, p)) - 1


def cp(i: int, p: int) -> int:
    """The i-th positive integer not divisible by p (i >= 1).

    Closed form: i plus the number of multiples of p skipped so far.

    >>> cp(3, 3)
    4
    >>> cp(5, 2)
    9
    """
    _require_prime(p)
    if i < 1:
        raise ValueError(f"index must be positive, got {i}")
    return i + (i - 1) // (p - 1)


def vp_int(x: int, p: int) -> int:
    """p-adic valuation of a nonzero integer.

    Strips p-power chunks of doubling size, so the divmod count stays
    logarithmic in the result even for residues divisible by p^100000.
    """
    if x == 0:
        raise ValueError("valuation of zero is infinite; use vp")
    x = abs(x)
    if x % p:
        return 0
    v = 0
    e, pe = 1, p
    while x % pe == 0:
        x //= pe
        v += e
        e, pe = e * 2, pe * pe
    while e > 1:
        e //= 2
        pe = p ** e
        if x % pe == 0:
            x //= pe
            v += e
    return v


def vp(q: Union[int, Fraction], p: int, denominator: int | None = None) -> Valuation:
    """p-adic valuation of a rational; INFINITE exactly for q = 0.

    Accepts an int, a Fraction, or a (numerator, denominator) pair via the
    optional third argument.
    """
    _require_prime(p)
    if denominator is not None:
        q = Fraction(q, denominator)
    if q == 0:
        return INFINITE
    if isinstance(q, int):
        return vp_int(q, p)
    return vp_int(q.numerator, p) - vp_int(q.denominator, p)


def free_p(m: int, p: int) -> int:
    """m with every factor of p removed; never divisible by p."""
    _require_prime(p)
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    return m // p ** vp_int(m, p)


def vp_factorial(n: int, p: int) -> int:
    """vp(n!) by Legendre's formula (n - digit_sum(n)) / (p - 1)."""
    _require_prime(p)
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if n == 0:
        return 0
    return (n - digit_sum(n, p)) // (p - 1)


def bp_count(d: DigitString) -> int:
    """Value of d minus the value of its parent (0 for a missing parent).

    Counts how many new coprime-sequence indices the last digit opens up.
    """
    v = d.value
    return v - v // d.p


def bp_block(d: DigitString) -> tuple[int, Iterator[int]]:
    """Count and lazily streamed members of the coprime block of d.

    The members are cp(1), ..., cp(count); the iterator never materializes
    them, which matters because the count grows like value(d) * (1 - 1/p).
    """
    count = bp_count(d)
    p = d.p
    return count, (cp(i, p) for i in range(1, count + 1))


def a_p_set(n: int, v: int, p: int) -> list[int]:
    """All m in [1, n] with vp(m) = s - v, where s + 1 = digit length of n.

    Computed from the coprime block of the length-(v+1) digit prefix; the
    direct filter a_p_set_by_filter must give the same answer.
    """
    d = to_digits(n, p)
    s = len(d) - 1
    if not 0 <= v <= s:
        raise ValueError(f"v must lie in [0, {s}], got {v}")
    count = bp_count(d.prefix(v + 1))
    scale = p ** (s - v)
    return [cp(i, p) * scale for i in range(1, count + 1)]


def a_p_set_by_filter(n: int, v: int, p: int) -> list[int]:
    """Reference filter for a_p_set; linear scan over [1, n]."""
    d = to_digits(n, p)
    s = len(d) - 1
    if not 0 <= v <= s:
        raise ValueError(f"v must lie in [0, {s}], got {v}")
    return [m for m in range(1, n + 1) if vp_int(m, p) == s - v]


@dataclass(frozen=True)
class StructureConstants:
    """Digit-level constants attached to a pair (p, k), k >= 2.

    t is the index of the last digit of k-1, U the weighted block count
    plus t + 1, and W = U - t - 1 the level offset used by the tree.
    """

    p: int
    k: int
    t: int
    root_digits: DigitString
    U: int
    W: int


def structure_constants(k: int, p: int) -> StructureConstants:
    """Constants of the digit machinery for k >= 2 (k = 1 is rejected)."""
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    root = to_digits(k - 1, p)
    t = len(root) - 1
    U = sum(bp_count(root.prefix(v + 1)) * v for v in range(t + 1)) + t + 1
    return StructureConstants(p=p, k=k, t=t, root_digits=root, U=U, W=U - t - 1)


def v_p_max(k: int, p: int, s: int) -> int:
    """Largest vp(i_1 * ... * i_k) over increasing k-tuples below p^(s+1).

    Valid for n whose digit string extends the root digits of k - 1 with
    s >= t + 1; equals k*s - U.
    """
    sc = structure_constants(k, p)
    if s < sc.t + 1:
        raise ValueError(f"s must be at least t + 1 = {sc.t + 1}, got {s}")
    return k * s - sc.U


def pi_p_mod(k: int, p: int, M: int) -> int:
    """Inverse mod p^M of the product of the root coprime blocks.

    The product runs over the blocks of every root digit prefix; it is a
    unit mod p, so the inverse exists for every M >= 1.
    """
    if M < 1:
        raise ValueError(f"M must be positive, got {M}")
    sc = structure_constants(k, p)
    mod = p ** M
    prod = 1
    for v in range(sc.t + 1):
        count = bp_count(sc.root_digits.prefix(v + 1))
        for i in range(1, count + 1):
            prod = prod * cp(i, p) % mod
    return pow(prod, -1, mod)
