import random

import pytest

from padicharm.core import DigitString
from padicharm.tree import (
    FSequence,
    build_tree,
    child_stats,
    f_sequence,
    validate_ptree,
)
from padicharm.valuation import vp_H


@pytest.fixture(scope="module")
def t32():
    return build_tree(3, 2, 32)


@pytest.fixture(scope="module")
def t22():
    return build_tree(2, 2, 12)


def test_t22_is_a_single_chain(t22):
    assert t22.status == "truncated"
    assert [len(level) for level in t22.levels] == [1] * 13
    stats = t22.stats
    assert stats.min_children == stats.max_children == 1
    assert stats.determined == 12


def test_t32_complete_with_8_nodes(t32):
    assert t32.status == "complete"
    assert t32.node_count == 8
    assert t32.levels[-1] == []
    assert t32.stats.max_children <= 2
    assert t32.stats.girth == 0  # complete finite tree: some node has no child


def test_levels_are_sorted_and_prefix_closed(t32):
    for level in t32.levels:
        values = [ds.value for ds in level]
        assert values == sorted(values)
    report = validate_ptree(t32)
    assert report.passed, report.witness


def test_leaves_partition(t32):
    nodes = t32.node_values()
    for leaf in t32.leaves:
        assert leaf.value not in nodes
        assert leaf.parent().value in nodes


def test_engine_modes_agree():
    a = build_tree(3, 4, 8, engine="expansion")
    b = build_tree(3, 4, 8, engine="stirling")
    c = build_tree(3, 4, 8, engine="both")
    assert a.levels == b.levels == c.levels
    assert a.leaves == b.leaves == c.leaves
    assert a.status == b.status == c.status == "complete"


@pytest.mark.parametrize("p, k, depth", [(2, 2, 8), (2, 5, 8), (3, 3, 5), (3, 5, 5), (3, 7, 5)])
def test_membership_equivalence_exhaustive(p, k, depth):
    # dual mode with an unreachable cap checks every membership both ways
    tree = build_tree(p, k, depth, engine="both", dual_value_cap=10 ** 9)
    expanded = sum(len(level) for level in tree.levels[:-1])
    assert tree.dual_checks == p * expanded


def test_validate_rejects_missing_parent(t32):
    broken = build_tree(3, 2, 32)
    broken.levels[2] = [ds for ds in broken.levels[2] if ds != broken.levels[2][0]]
    report = validate_ptree(broken)
    assert not report.passed
    assert report.witness["axiom"] == "parent-closure"


def test_validate_rejects_wrong_root():
    tree = build_tree(2, 2, 4)
    tree.levels[0] = [DigitString(2, (1, 0))]
    report = validate_ptree(tree)
    assert not report.passed


def test_validate_rejects_leaf_that_is_a_node(t32):
    broken = build_tree(3, 2, 32)
    broken.leaves.append(broken.levels[1][0])
    report = validate_ptree(broken)
    assert not report.passed
    assert report.witness["axiom"] == "leaves"


def test_child_stats_empty_for_unexpanded_tree():
    tree = build_tree(3, 2, 0)
    stats = child_stats(tree)
    assert stats.determined == 0
    assert stats.min_children is None and stats.girth is None


def test_f_sequence_examples():
    assert f_sequence(0).bits == (1,)
    assert f_sequence(2).bits == (1, 1, 0)
    assert str(f_sequence(2)) == "110"


def test_f_sequence_matches_tree_levels():
    f = f_sequence(10)
    tree = build_tree(2, 2, 10)
    assert [len(level) for level in tree.levels] == [1] * 11
    for u, level in enumerate(tree.levels):
        assert level[0].digits == f.bits[: u + 1]


def test_f_sequence_validation():
    with pytest.raises(ValueError):
        FSequence((0, 1))
    with pytest.raises(ValueError):
        f_sequence(-1)


def test_worker_count_does_not_change_the_tree():
    from padicharm.cli import tree_document

    solo = build_tree(3, 3, 6, workers=1)
    pooled = build_tree(3, 3, 6, workers=4)
    assert tree_document(solo) == tree_document(pooled)


def _extend_randomly(rng, digits, p, extra):
    for _ in range(extra):
        digits = digits + (rng.randrange(p),)
    return digits


@pytest.mark.parametrize("p, k, depth", [(2, 2, 12), (3, 2, 32)])
def test_interior_prefixes_bound_the_valuation(p, k, depth):
    # digit strings passing through a node at position r keep
    # vp(H(n, k)) >= W + r - k*s + 1
    rng = random.Random(2024)
    tree = build_tree(p, k, depth)
    sc = tree.constants
    nodes = [ds for level in tree.levels[1:] for ds in level]
    checked = 0
    while checked < 60:
        node = rng.choice(nodes)
        digits = _extend_randomly(rng, node.digits, p, rng.randint(0, 3))
        n = DigitString(p, digits).value
        if n > 50_000:
            continue
        r = len(node) - 1
        s = len(digits) - 1
        assert vp_H(n, k, p) >= sc.W + r - k * s + 1
        checked += 1


@pytest.mark.parametrize("p, k, depth", [(2, 2, 12), (3, 2, 32)])
def test_leaf_prefixes_pin_the_valuation(p, k, depth):
    # first exit at a leaf at position r forces vp(H(n, k)) = W + r - k*s
    rng = random.Random(2025)
    tree = build_tree(p, k, depth)
    sc = tree.constants
    checked = 0
    while checked < 60:
        leaf = rng.choice(tree.leaves)
        digits = _extend_randomly(rng, leaf.digits, p, rng.randint(0, 3))
        n = DigitString(p, digits).value
        if n > 50_000:
            continue
        r = len(leaf) - 1
        s = len(digits) - 1
        assert vp_H(n, k, p) == sc.W + r - k * s
        checked += 1


def test_build_rejects_bad_engine():
    with pytest.raises(ValueError):
        build_tree(3, 2, 4, engine="psychic")
