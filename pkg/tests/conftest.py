"""Shared builders for hand-made deductions used across the test suite."""

from impdag.deduction import Deduction, Node, Rule, build
from impdag.formula import parse_infix


def mk(node_id: int, formula: str, rule: str, height: int, children=()) -> Node:
    return Node(node_id, parse_infix(formula), Rule[rule], height, tuple(children))


def sep_stuck_dag() -> Deduction:
    """Two derivations of a -> b joined by a separation node under one
    discharge; neither branch choice empties the root assignment."""
    return build(
        [
            mk(1, "g -> a -> b", "I", 0, [2]),
            mk(2, "a -> b", "S", 1, [3, 4]),
            mk(3, "a -> b", "I", 2, [5]),
            mk(4, "a -> b", "E", 2, [6, 7]),
            mk(5, "b", "LEAF", 3),
            mk(6, "g", "LEAF", 3),
            mk(7, "g -> a -> b", "LEAF", 3),
        ],
        root=1,
    )


def sep_proof_dag() -> Deduction:
    """The same two-branch separation under one more discharge; choosing the
    first branch empties the root assignment."""
    return build(
        [
            mk(1, "b -> g -> a -> b", "I", 0, [2]),
            mk(2, "g -> a -> b", "I", 1, [3]),
            mk(3, "a -> b", "S", 2, [4, 5]),
            mk(4, "a -> b", "I", 3, [6]),
            mk(5, "a -> b", "E", 3, [7, 8]),
            mk(6, "b", "LEAF", 4),
            mk(7, "g", "LEAF", 4),
            mk(8, "g -> a -> b", "LEAF", 4),
        ],
        root=1,
    )


def sep_all_closed_dag() -> Deduction:
    """A 9-node dag whose separation node joins two genuinely different
    closed derivations of a -> b; every maximal thread is closed."""
    return build(
        [
            mk(1, "(g -> a -> b) -> b -> g -> a -> b", "I", 0, [2]),
            mk(2, "b -> g -> a -> b", "I", 1, [3]),
            mk(3, "g -> a -> b", "I", 2, [4]),
            mk(4, "a -> b", "S", 3, [5, 6]),
            mk(5, "a -> b", "I", 4, [7]),
            mk(6, "a -> b", "E", 4, [8, 9]),
            mk(7, "b", "LEAF", 5),
            mk(8, "g", "LEAF", 5),
            mk(9, "g -> a -> b", "LEAF", 5),
        ],
        root=1,
    )


def merge_pair_tree() -> Deduction:
    """A leveled tree holding two same-level derivations of a -> b, one by
    introduction and one by elimination, joined under an elimination root.
    Compressing it must merge the pair into a single separation node."""
    return build(
        [
            mk(1, "a -> b", "E", 0, [2, 3]),
            mk(2, "g -> a -> b", "I", 1, [4]),
            mk(3, "(g -> a -> b) -> a -> b", "I", 1, [5]),
            mk(4, "a -> b", "I", 2, [6]),
            mk(5, "a -> b", "E", 2, [7, 8]),
            mk(6, "b", "LEAF", 3),
            mk(7, "g", "LEAF", 3),
            mk(8, "g -> a -> b", "LEAF", 3),
        ],
        root=1,
    )


def diamond_dag() -> Deduction:
    """Root elimination whose two premises share one leaf."""
    return build(
        [
            mk(1, "a", "E", 0, [2, 3]),
            mk(2, "a", "R", 1, [4]),
            mk(3, "a -> a", "I", 1, [4]),
            mk(4, "a", "LEAF", 2),
        ],
        root=1,
    )
