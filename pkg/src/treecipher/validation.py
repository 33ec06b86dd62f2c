"""Input checks shared by the estimators and the command line."""
from __future__ import annotations

from typing import Iterable

from .tree import LabeledTree, load_tree

__all__ = ["check_tree", "check_dataset", "check_relation", "check_pairs"]

RELATIONS = ("topo", "label", "cipher")


def check_tree(x) -> LabeledTree:
    """Accept a :class:`LabeledTree`, its text form, or its nested JSON dict."""
    if isinstance(x, LabeledTree):
        return x
    if isinstance(x, str):
        return load_tree(x)
    if isinstance(x, dict):
        return LabeledTree.from_nested(x)
    raise TypeError(f"expected a tree, its text form or a nested dict, got {type(x).__name__}")


def check_dataset(X: Iterable, allow_empty: bool = False) -> list[LabeledTree]:
    if isinstance(X, (str, dict, LabeledTree)):
        raise TypeError("expected a sequence of trees, got a single tree")
    trees = [check_tree(x) for x in X]
    if not trees and not allow_empty:
        raise ValueError("dataset is empty")
    return trees


def check_relation(relation: str, allowed: tuple[str, ...] = RELATIONS) -> str:
    if relation not in allowed:
        raise ValueError(f"relation must be one of {allowed}, got {relation!r}")
    return relation


def check_pairs(X: Iterable) -> list[tuple[LabeledTree, LabeledTree]]:
    pairs = []
    for i, item in enumerate(X):
        if isinstance(item, (str, dict, LabeledTree)) or len(item) != 2:
            raise ValueError(f"item {i} is not a pair of trees")
        pairs.append((check_tree(item[0]), check_tree(item[1])))
    return pairs
