"""Exact p-adic valuations of multiple harmonic sums H(n, k), the digit
trees that organize them, and a verifier for the claims they satisfy."""

__version__ = "0.1.0"

from .core import (
    INFINITE,
    DigitString,
    EngineDisagreement,
    InfiniteValuation,
    PrecisionError,
    SizeCapError,
    StructureConstants,
    a_p_set,
    bp_block,
    bp_count,
    cp,
    digit_sum,
    free_p,
    from_digits,
    is_prime,
    pi_p_mod,
    structure_constants,
    to_digits,
    v_p_max,
    vp,
    vp_factorial,
    vp_int,
)
from .expansion import (
    ExpansionTerm,
    ExpansionVerdict,
    expansion_terms,
    h_p_mod,
    h_prime_mod,
    recip_esym,
    recip_power_sum,
    sigma_mod,
    vp_H_expansion,
)
from .report import CheckReport
from .tree import (
    ChildStats,
    FSequence,
    PTree,
    build_tree,
    child_stats,
    f_sequence,
    validate_ptree,
)
from .valuation import (
    DEFAULT_POLICY,
    EscalationPolicy,
    exact_H,
    exact_H_table,
    stirling,
    stirling_mod,
    vp_H,
    vp_H_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
