"""Frequent subtree patterns over a tree dataset.

The dataset is hung under one synthetic root, the resulting super-tree is
compressed under the chosen relation, and every compressed vertex gets the
set of dataset indices whose tree contains that pattern (its origin). The
origin of a vertex is the union of the origins of its parents, so a single
top-down pass suffices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dag import compress, decompress, topological_order
from .dagrw import compress_rw, decompress_rw
from .tree import LabeledTree, SignatureRegistry, canonical_classes, serialize_tree

__all__ = [
    "SUPER_ROOT",
    "PatternEntry",
    "PatternReport",
    "CompressedDataset",
    "build_super_tree",
    "compress_dataset",
    "mine",
    "pattern_counts",
    "table_summary",
    "escape_label",
    "unescape_label",
]

SUPER_ROOT = "⊤"
RELATIONS = ("topo", "cipher", "label")


def escape_label(label: str) -> str:
    if label == SUPER_ROOT or label.startswith("\\"):
        return "\\" + label
    return label


def unescape_label(label: str) -> str:
    return label[1:] if label.startswith("\\") else label


def build_super_tree(dataset: list[LabeledTree]) -> tuple[LabeledTree, list[int]]:
    """Join the dataset under a root labelled :data:`SUPER_ROOT`.

    Returns the super-tree and the node id of each dataset root in it.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    labels = [SUPER_ROOT]
    children: list[list[int]] = [[]]
    roots = []
    for t in dataset:
        offset = len(labels)
        roots.append(offset)
        children[0].append(offset)
        labels.extend(escape_label(a) for a in t.labels)
        children.extend([c + offset for c in kids] for kids in t.children)
    return LabeledTree(labels, children), roots


@dataclass
class CompressedDataset:
    """Compressed super-tree with per-vertex origins."""

    relation: str
    n_trees: int
    n_vertices: int
    edges: list[tuple[int, int]]
    source: int
    origin: list[frozenset[int]]
    _pattern: object = field(repr=False, compare=False, default=None)

    def pattern(self, vertex: int) -> LabeledTree:
        """Representative subtree of ``vertex`` with data labels restored."""
        t = self._pattern(vertex)
        return t.relabel([unescape_label(a) for a in t.labels])


def compress_dataset(
    dataset: list[LabeledTree], relation: str, step_limit: int | None = None
) -> CompressedDataset:
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}")
    sup, roots = build_super_tree(dataset)
    n = len(dataset)
    if relation == "cipher":
        d = compress_rw(sup, step_limit)
        nv = len(d.vertices)
        edges = [(e.source, e.target) for e in d.edges]
        root_vertex = {e.node: e.target for e in d.edges if e.source == d.source}
        start = [root_vertex[r] for r in roots]
        source = d.source

        def pattern(v: int) -> LabeledTree:
            return decompress_rw(d, v)
    else:
        registry = SignatureRegistry()
        code = canonical_classes(sup, relation, registry).code
        d = compress(sup, relation, registry)
        vertex_of = {v.class_code: i for i, v in enumerate(d.vertices)}
        nv = len(d.vertices)
        edges = [(a, b) for a, b, _ in d.edges]
        start = [vertex_of[code[r]] for r in roots]
        source = d.source

        def pattern(v: int) -> LabeledTree:
            return decompress(d, v)

    origin: list[set[int]] = [set() for _ in range(nv)]
    for i, v in enumerate(start):
        origin[v].add(i)
    out: list[list[int]] = [[] for _ in range(nv)]
    for a, b in edges:
        out[a].append(b)
    for a in topological_order(nv, edges, source):
        if a == source:
            continue
        for b in out[a]:
            origin[b] |= origin[a]
    return CompressedDataset(relation, n, nv, edges, source, [frozenset(o) for o in origin], pattern)


@dataclass(frozen=True)
class PatternEntry:
    pattern: str
    size: int
    origin: tuple[int, ...]
    frequency: float

    def to_json(self) -> dict:
        return {
            "pattern": self.pattern,
            "size": self.size,
            "origin": list(self.origin),
            "frequency": self.frequency,
        }


@dataclass
class PatternReport:
    relation: str
    n_trees: int
    min_support: float
    threshold: int
    total_patterns: int
    entries: list[PatternEntry]

    def to_json(self) -> dict:
        return {
            "relation": self.relation,
            "n_trees": self.n_trees,
            "min_support": self.min_support,
            "threshold_count": self.threshold,
            "total_patterns": self.total_patterns,
            "frequent_patterns": len(self.entries),
            "entries": [e.to_json() for e in self.entries],
        }

    def csv_rows(self) -> list[list]:
        return [[e.pattern, e.size, e.frequency, len(e.origin)] for e in self.entries]


def _threshold(min_support: float, n: int) -> int:
    if not 0 < min_support <= 1:
        raise ValueError("min_support must lie in (0, 1]")
    # tolerance keeps e.g. 0.05 * 20 from rounding up to 2
    return max(1, math.ceil(min_support * n - 1e-9))


def mine(
    dataset: list[LabeledTree],
    relation: str = "cipher",
    min_support: float = 0.05,
    step_limit: int | None = None,
) -> PatternReport:
    """Patterns found in at least ``min_support`` of the trees.

    >>> from treecipher.tree import parse_tree
    >>> rep = mine([parse_tree("a(b)"), parse_tree("x(y)")], "cipher", 1.0)
    >>> [(e.pattern, e.frequency) for e in rep.entries]
    [('a(b)', 1.0), ('b', 1.0)]
    """
    threshold = _threshold(min_support, len(dataset))
    cd = compress_dataset(dataset, relation, step_limit)
    entries = []
    for v in range(cd.n_vertices):
        if v == cd.source or len(cd.origin[v]) < threshold:
            continue
        t = cd.pattern(v)
        entries.append(
            PatternEntry(serialize_tree(t), len(t), tuple(sorted(cd.origin[v])), len(cd.origin[v]) / cd.n_trees)
        )
    entries.sort(key=lambda e: (-len(e.origin), -e.size, e.pattern))
    return PatternReport(relation, cd.n_trees, min_support, threshold, cd.n_vertices - 1, entries)


def pattern_counts(dataset: list[LabeledTree], step_limit: int | None = None) -> dict[str, int]:
    """Distinct patterns per relation (the synthetic root excluded)."""
    return {r: compress_dataset(dataset, r, step_limit).n_vertices - 1 for r in RELATIONS}


def table_summary(
    dataset: list[LabeledTree], min_support: float = 0.05, step_limit: int | None = None
) -> dict[str, dict[str, int]]:
    """Pattern counts and frequent-pattern counts for each relation."""
    threshold = _threshold(min_support, len(dataset))
    out = {}
    for r in RELATIONS:
        cd = compress_dataset(dataset, r, step_limit)
        frequent = sum(1 for v in range(cd.n_vertices) if v != cd.source and len(cd.origin[v]) >= threshold)
        out[r] = {"patterns": cd.n_vertices - 1, "frequent": frequent}
    return out
