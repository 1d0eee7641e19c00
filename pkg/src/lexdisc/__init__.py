"""Exact-arithmetic toolkit for interval-splitting discrepancy analysis.

Submodules:
    qnum        exact arithmetic in the ring generated by 2^(1/m)
    baskets     multiset data model and cyclic-interval classification
    lexmerge    the merge engine, trace export, and strategy reversal
    strategy    replay and discrepancy evaluation of splitting strategies
    strategies  closed-form bounds and classical baseline constructions
    verify      structural lemma checkers over merge traces
    optimizer   exhaustive minimax search over split schedules for small n
    cli         command-line entry point
"""

__all__ = [
    "qnum",
    "baskets",
    "lexmerge",
    "strategy",
    "strategies",
    "verify",
    "optimizer",
    "cli",
]
