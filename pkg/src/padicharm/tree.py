"""Level-by-level construction of the digit tree attached to (p, k).

Level u holds digit strings of length t + 1 + u extending the digits of
k - 1; level 0 is the root alone.  A child joins level u + 1 when the
weighted sum of its h_p terms gains one more power of p, equivalently
when vp(H(child_value, k)) clears W - (k-1)s + 1 for its digit length.
Both tests are implemented; in dual mode they arbitrate each other and
any mismatch aborts the build with the offending digit string.

Rejected children whose parent is a node are kept as leaves: they pin
exact valuations for every integer whose digits run through them.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .core import (
    DigitString,
    EngineDisagreement,
    StructureConstants,
    cp,
    pi_p_mod,
    structure_constants,
)
from .expansion import h_prime_mod, recip_power_sum
from .report import CheckReport
from .valuation import DEFAULT_POLICY, EscalationPolicy, vp_H

__all__ = [
    "ChildStats",
    "PTree",
    "FSequence",
    "build_tree",
    "child_stats",
    "f_sequence",
    "validate_ptree",
]

# Stirling-route membership cost grows superlinearly with the child value;
# these defaults keep dual checking inside interactive budgets while still
# spot-verifying every shallow level.
DUAL_VALUE_CAP = 60_000
SPOT_VALUE_CAP = 200_000
SPOT_MAX_LEVEL = 10


@dataclass
class ChildStats:
    """Child counts over nodes whose children are fully determined."""

    counts: dict[DigitString, int]
    min_children: int | None
    max_children: int | None
    determined: int

    @property
    def girth(self) -> int | None:
        """Smallest determined child count; the branching floor."""
        return self.min_children


@dataclass
class PTree:
    """Built digit tree: leveled node lists plus rejected children.

    status is "complete" when an empty level was observed (the final empty
    level is kept in levels), else "truncated" at max_depth.
    """

    p: int
    k: int
    constants: StructureConstants
    levels: list[list[DigitString]]
    leaves: list[DigitString]
    status: str
    max_depth: int
    engine: str
    guard: int
    dual_checks: int = 0
    stats: ChildStats | None = None

    @property
    def node_count(self) -> int:
        return sum(len(level) for level in self.levels)

    @property
    def truncated_at(self) -> int | None:
        return None if self.status == "complete" else len(self.levels) - 1

    def node_values(self) -> set[int]:
        return {ds.value for level in self.levels for ds in level}

    def leaf_values(self) -> set[int]:
        return {ds.value for ds in self.leaves}


def _membership_threshold(sc: StructureConstants, k: int, child_len: int) -> int:
    s = child_len - 1
    return sc.W - (k - 1) * s + 1


def build_tree(
    p: int,
    k: int,
    max_depth: int = 32,
    engine: str = "both",
    *,
    guard: int = 4,
    policy: EscalationPolicy = DEFAULT_POLICY,
    workers: int = 1,
    dual_value_cap: int = DUAL_VALUE_CAP,
    spot_value_cap: int = SPOT_VALUE_CAP,
    spot_max_level: int = SPOT_MAX_LEVEL,
) -> PTree:
    """Build the digit tree of (p, k) down to max_depth levels.

    engine "expansion" tests membership through the weighted h_p sums,
    "stirling" through vp_H, "both" runs the two and aborts on mismatch.
    In dual mode the Stirling side is only exercised up to dual_value_cap
    (plus one spot check per level up to spot_max_level), since its cost
    grows with the child value itself; the expansion side always runs.
    Children are evaluated in increasing digit order and the result does
    not depend on the worker count.
    """
    if engine not in ("stirling", "expansion", "both"):
        raise ValueError(f"unknown engine {engine!r}")
    if max_depth < 0:
        raise ValueError(f"max_depth must be nonnegative, got {max_depth}")
    sc = structure_constants(k, p)
    use_exp = engine in ("expansion", "both")
    use_st = engine in ("stirling", "both")

    prec = max_depth + 1 + max(guard, 2)
    mod = p ** prec
    pi = pi_p_mod(k, p, prec) if use_exp else 0

    root = sc.root_digits
    levels: list[list[DigitString]] = [[root]]
    # internal frontier entries: (digit string, value, sigma residue)
    frontier: list[tuple[DigitString, int, int]] = [(root, root.value, 0)]
    leaves: list[DigitString] = []
    status = "truncated"
    dual_checks = 0

    for u in range(max_depth):
        if not frontier:
            break
        threshold = _membership_threshold(sc, k, len(frontier[0][0]) + 1)
        pu = pow(p, u, mod)
        # one Stirling spot check per shallow level, decided up front so the
        # outcome cannot depend on scheduling
        spot_key = None
        if engine == "both" and u <= spot_max_level:
            first_value = frontier[0][1] * p
            if dual_value_cap < first_value <= spot_value_cap:
                spot_key = (0, 0)

        def expand(node_index: int, entry=None):
            node, value, sigma = entry
            results = []
            head = h_prime_mod(node, k, prec) if use_exp else 0
            base = (p - 1) * value
            block_sum = recip_power_sum(base, 1, p, prec) if use_exp else 0
            for b in range(p):
                child = node.child(b)
                child_value = value * p + b
                member_exp = member_st = None
                child_sigma = 0
                if use_exp:
                    if b:
                        block_sum_b = (
                            block_sum + pow(cp(base + b, p), -1, mod)
                        ) % mod
                    else:
                        block_sum_b = block_sum
                    block_sum = block_sum_b
                    hp = (head + pi * block_sum_b) % mod
                    child_sigma = (sigma + hp * pu) % mod
                    member_exp = child_sigma % p ** (u + 1) == 0
                if use_st and (
                    engine == "stirling"
                    or child_value <= dual_value_cap
                    or (node_index, b) == spot_key
                ):
                    member_st = vp_H(child_value, k, p, policy) >= threshold
                if member_exp is not None and member_st is not None:
                    if member_exp != member_st:
                        raise EngineDisagreement(
                            f"engines disagree on {child}: "
                            f"expansion={member_exp}, stirling={member_st}"
                        )
                member = member_exp if member_exp is not None else member_st
                results.append(
                    (
                        child,
                        child_value,
                        child_sigma,
                        member,
                        member_exp is not None and member_st is not None,
                    )
                )
            return results

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                batches = list(
                    pool.map(expand, range(len(frontier)), frontier)
                )
        else:
            batches = [expand(i, entry) for i, entry in enumerate(frontier)]

        next_frontier = []
        for batch in batches:
            for child, child_value, child_sigma, member, dual in batch:
                if dual:
                    dual_checks += 1
                if member:
                    next_frontier.append((child, child_value, child_sigma))
                else:
                    leaves.append(child)
        levels.append([entry[0] for entry in next_frontier])
        frontier = next_frontier
        if not frontier:
            status = "complete"
            break

    tree = PTree(
        p=p,
        k=k,
        constants=sc,
        levels=levels,
        leaves=sorted(leaves, key=lambda ds: (len(ds), ds.value)),
        status=status,
        max_depth=max_depth,
        engine=engine,
        guard=guard,
        dual_checks=dual_checks,
    )
    tree.stats = child_stats(tree)
    return tree


def child_stats(tree: PTree) -> ChildStats:
    """Counts over nodes whose level was actually expanded."""
    if not tree.levels or not tree.levels[0]:
        raise ValueError("tree has no nodes")
    counts: dict[DigitString, int] = {}
    for u in range(len(tree.levels) - 1):
        per_parent = {node: 0 for node in tree.levels[u]}
        for child in tree.levels[u + 1]:
            per_parent[child.parent()] += 1
        counts.update(per_parent)
    if counts:
        values = counts.values()
        return ChildStats(counts, min(values), max(values), len(counts))
    return ChildStats({}, None, None, 0)


@dataclass(frozen=True)
class FSequence:
    """The 2-adic branch bits: the unique surviving digit per level."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.bits or self.bits[0] != 1:
            raise ValueError("bit sequence must start with 1")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)


def f_sequence(S: int, *, guard: int = 4) -> FSequence:
    """Bits f_0..f_S for p = 2, k = 2.

    f_s is 1 exactly when appending digit 1 keeps the membership
    inequality vp(H(<f_0..f_{s-1},1>, 2)) >= 1 - s; the tree for (2, 2)
    branches exactly once per level, so the other digit is taken
    otherwise (and is verified to pass).
    """
    if S < 0:
        raise ValueError(f"S must be nonnegative, got {S}")
    p, k = 2, 2
    prec = S + 2 + max(guard, 2)
    mod = p ** prec
    pi = pi_p_mod(k, p, prec)
    bits = [1]
    digits = DigitString(p, (1,))
    value = 1
    sigma = 0
    for s in range(1, S + 1):
        head = h_prime_mod(digits, k, prec)
        base = value  # (p - 1) * value
        chosen = None
        for b in (1, 0):
            block_sum = recip_power_sum(base + b, 1, p, prec)
            hp = (head + pi * block_sum) % mod
            cand_sigma = (sigma + hp * pow(p, s - 1, mod)) % mod
            if cand_sigma % p ** s == 0:
                chosen = (b, cand_sigma)
                break
        if chosen is None:
            raise EngineDisagreement(
                f"no surviving digit at level {s}; branching invariant broken"
            )
        b, sigma = chosen
        bits.append(b)
        digits = digits.child(b)
        value = value * p + b
    return FSequence(tuple(bits))


def validate_ptree(tree: PTree) -> CheckReport:
    """Structural axioms: root present, prefix agreement, parent closure,
    and leaf consistency.  Reports the first violation."""
    sc = tree.constants
    root = sc.root_digits
    params = {"p": tree.p, "k": tree.k, "levels": len(tree.levels)}

    def fail(axiom: str, detail: str, item=None) -> CheckReport:
        witness = {"axiom": axiom, "detail": detail}
        if item is not None:
            witness["item"] = str(item)
        return CheckReport(
            claim_id="ptree-axioms",
            parameters=params,
            observed={"checked": tree.node_count + len(tree.leaves)},
            bound=None,
            passed=False,
            witness=witness,
        )

    if not tree.levels or tree.levels[0] != [root]:
        return fail("root", "level 0 must hold exactly the root digits")
    node_set = {ds for level in tree.levels for ds in level}
    for u, level in enumerate(tree.levels):
        for ds in level:
            if len(ds) != len(root) + u:
                return fail("levels", f"length mismatch at level {u}", ds)
            if not ds.extends(root):
                return fail("prefix-agreement", "node does not extend the root", ds)
            if u > 0 and ds.parent() not in node_set:
                return fail("parent-closure", "parent of node is not a node", ds)
    if tree.status == "complete" and tree.levels[-1]:
        return fail("completeness", "complete status requires an empty last level")
    for leaf in tree.leaves:
        if leaf in node_set:
            return fail("leaves", "leaf is also a node", leaf)
        if len(leaf) < len(root) + 1 or leaf.parent() not in node_set:
            return fail("leaves", "leaf parent is not a node", leaf)
        if not leaf.extends(root):
            return fail("leaves", "leaf does not extend the root", leaf)
    return CheckReport(
        claim_id="ptree-axioms",
        parameters=params,
        observed={"nodes": tree.node_count, "leaves": len(tree.leaves)},
        bound=None,
        passed=True,
    )
