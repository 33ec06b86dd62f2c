"""Labelled rooted unordered trees.

Nodes are dense integers numbered in preorder (root is 0), so the subtree of
``u`` always occupies the contiguous id range ``u .. u + size(u) - 1``. Every
constructor renumbers its input into that form. Child order is storage order
only; nothing in the package gives it meaning.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

__all__ = [
    "LabeledTree",
    "TopoStats",
    "CanonicalSignature",
    "SignatureRegistry",
    "TreeSyntaxError",
    "parse_tree",
    "serialize_tree",
    "compute_stats",
    "canonical_classes",
    "read_dataset",
    "load_tree",
    "format_label",
]

_BARE_LABEL = re.compile(r"[A-Za-z0-9_.+\-]+")


class TreeSyntaxError(ValueError):
    """Raised by :func:`parse_tree`; ``offset`` is a byte offset into the UTF-8 input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class LabeledTree:
    """Immutable labelled rooted tree.

    Build it from ``labels`` and ``children`` lists indexed by an arbitrary
    node numbering with node ``root`` as the root; the stored tree is
    renumbered in preorder following the given child order.
    """

    __slots__ = ("labels", "parent", "children", "_sizes", "_depths")

    def __init__(self, labels: Sequence[str], children: Sequence[Sequence[int]], root: int = 0):
        n = len(labels)
        if n == 0:
            raise ValueError("a tree has at least one node")
        if len(children) != n:
            raise ValueError("labels and children must have the same length")
        order: list[int] = []
        seen = [False] * n
        stack = [root]
        while stack:
            u = stack.pop()
            if not 0 <= u < n:
                raise ValueError(f"child id {u} out of range")
            if seen[u]:
                raise ValueError(f"node {u} reached twice: not a tree")
            seen[u] = True
            order.append(u)
            stack.extend(reversed(children[u]))
        if len(order) != n:
            raise ValueError("tree is not connected")
        new_id = {old: i for i, old in enumerate(order)}
        self.labels: tuple[str, ...] = tuple(str(labels[old]) for old in order)
        self.children: tuple[tuple[int, ...], ...] = tuple(
            tuple(new_id[c] for c in children[old]) for old in order
        )
        parent = [-1] * n
        for u, kids in enumerate(self.children):
            for c in kids:
                parent[c] = u
        self.parent: tuple[int, ...] = tuple(parent)
        self._sizes: tuple[int, ...] | None = None
        self._depths: tuple[int, ...] | None = None

    @classmethod
    def from_parents(cls, labels: Sequence[str], parents: Sequence[int]) -> "LabeledTree":
        """Build from a parent array (``-1`` for the root); children keep id order."""
        n = len(labels)
        if len(parents) != n:
            raise ValueError("labels and parents must have the same length")
        children: list[list[int]] = [[] for _ in range(n)]
        roots = [u for u, p in enumerate(parents) if p < 0]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        for u, p in enumerate(parents):
            if p >= 0:
                if p >= n:
                    raise ValueError(f"parent id {p} out of range")
                children[p].append(u)
        return cls(labels, children, root=roots[0])

    @classmethod
    def from_nested(cls, obj: dict) -> "LabeledTree":
        """Build from the JSON form ``{"label": str, "children": [...]}``."""
        labels: list[str] = []
        children: list[list[int]] = []
        stack = [(obj, -1)]
        while stack:
            node, parent = stack.pop()
            if not isinstance(node, dict) or "label" not in node:
                raise ValueError("each JSON node needs a 'label'")
            u = len(labels)
            labels.append(str(node["label"]))
            children.append([])
            if parent >= 0:
                children[parent].append(u)
            for child in reversed(node.get("children", [])):
                stack.append((child, u))
        return cls(labels, children)

    def to_nested(self) -> dict:
        nodes = [{"label": lab, "children": []} for lab in self.labels]
        for u, kids in enumerate(self.children):
            nodes[u]["children"] = [nodes[c] for c in kids]
        return nodes[0]

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledTree):
            return NotImplemented
        return self.labels == other.labels and self.children == other.children

    def __hash__(self) -> int:
        return hash((self.labels, self.children))

    def __repr__(self) -> str:
        text = serialize_tree(self)
        if len(text) > 60:
            text = text[:57] + "..."
        return f"LabeledTree({text!r})"

    @property
    def root(self) -> int:
        return 0

    @property
    def sizes(self) -> tuple[int, ...]:
        """Subtree size of every node."""
        if self._sizes is None:
            sizes = [1] * len(self)
            for u in range(len(self) - 1, 0, -1):
                sizes[self.parent[u]] += sizes[u]
            self._sizes = tuple(sizes)
        return self._sizes

    @property
    def depths(self) -> tuple[int, ...]:
        if self._depths is None:
            depth = [0] * len(self)
            for u in range(1, len(self)):
                depth[u] = depth[self.parent[u]] + 1
            self._depths = tuple(depth)
        return self._depths

    def alphabet(self) -> set[str]:
        return set(self.labels)

    def is_leaf(self, u: int) -> bool:
        return not self.children[u]

    def subtree(self, u: int) -> "LabeledTree":
        """The subtree rooted at ``u``, renumbered so that ``u`` becomes 0."""
        if u == 0:
            return self
        stop = u + self.sizes[u]
        return LabeledTree(
            self.labels[u:stop],
            [[c - u for c in self.children[w]] for w in range(u, stop)],
        )

    def subtree_nodes(self, u: int) -> range:
        return range(u, u + self.sizes[u])

    def relabel(self, labels: Sequence[str]) -> "LabeledTree":
        """Same topology and numbering, new labels."""
        if len(labels) != len(self):
            raise ValueError("one label per node expected")
        return LabeledTree(list(labels), self.children)


@dataclass(frozen=True)
class TopoStats:
    size: int
    height: int
    degree: int
    depth: tuple[int, ...]


def compute_stats(t: LabeledTree) -> TopoStats:
    depth = t.depths
    return TopoStats(
        size=len(t),
        height=max(depth),
        degree=max(len(c) for c in t.children),
        depth=depth,
    )


class SignatureRegistry:
    """Hash-consing table mapping canonical encodings to integer class codes.

    Share one registry between trees whose classes must be comparable. A
    registry is not thread-safe; confine each one to a single thread.
    """

    def __init__(self) -> None:
        self._table: dict[tuple, int] = {}

    def __len__(self) -> int:
        return len(self._table)

    def intern(self, key: tuple) -> int:
        code = self._table.get(key)
        if code is None:
            code = len(self._table)
            self._table[key] = code
        return code


@dataclass(frozen=True)
class CanonicalSignature:
    relation: str
    code: tuple[int, ...]

    @property
    def n_classes(self) -> int:
        return len(set(self.code))


RELATIONS = ("topo", "label")


def canonical_classes(
    t: LabeledTree, relation: str = "topo", registry: SignatureRegistry | None = None
) -> CanonicalSignature:
    """Per-node class codes for unlabelled (``topo``) or labelled (``label``) isomorphism."""
    if relation not in RELATIONS:
        raise ValueError(f"relation must be one of {RELATIONS}, got {relation!r}")
    if registry is None:
        registry = SignatureRegistry()
    codes = [0] * len(t)
    for u in range(len(t) - 1, -1, -1):
        kids = tuple(sorted(codes[c] for c in t.children[u]))
        if relation == "topo":
            codes[u] = registry.intern(("t", kids))
        else:
            codes[u] = registry.intern(("l", t.labels[u], kids))
    return CanonicalSignature(relation, tuple(codes))


def format_label(label: str) -> str:
    if _BARE_LABEL.fullmatch(label):
        return label
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_tree(t: LabeledTree) -> str:
    out: list[str] = []
    # (node, next child index) frames
    stack: list[list[int]] = [[0, 0]]
    out.append(format_label(t.labels[0]))
    while stack:
        frame = stack[-1]
        u, i = frame
        kids = t.children[u]
        if i < len(kids):
            out.append("(" if i == 0 else ",")
            frame[1] += 1
            c = kids[i]
            out.append(format_label(t.labels[c]))
            stack.append([c, 0])
        else:
            if kids:
                out.append(")")
            stack.pop()
    return "".join(out)


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def offset(self, pos: int | None = None) -> int:
        pos = self.pos if pos is None else pos
        return len(self.text[:pos].encode("utf-8"))

    def skip_ws(self) -> None:
        text = self.text
        while self.pos < len(text) and text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def label(self) -> str:
        self.skip_ws()
        text = self.text
        if self.pos >= len(text):
            raise TreeSyntaxError("expected a label, found end of input", self.offset())
        if text[self.pos] == '"':
            start = self.pos
            self.pos += 1
            buf: list[str] = []
            while True:
                if self.pos >= len(text):
                    raise TreeSyntaxError("unterminated quoted label", self.offset(start))
                ch = text[self.pos]
                if ch == "\\":
                    if self.pos + 1 >= len(text):
                        raise TreeSyntaxError("dangling escape", self.offset())
                    buf.append(text[self.pos + 1])
                    self.pos += 2
                elif ch == '"':
                    self.pos += 1
                    return "".join(buf)
                else:
                    buf.append(ch)
                    self.pos += 1
        m = _BARE_LABEL.match(text, self.pos)
        if m is None:
            raise TreeSyntaxError(f"expected a label, found {text[self.pos]!r}", self.offset())
        self.pos = m.end()
        return m.group()


def parse_tree(text: str) -> LabeledTree:
    """Parse ``label ( "(" tree ("," tree)* ")" )?``.

    Bare labels use ``[A-Za-z0-9_.+-]``; anything else must be double-quoted
    with backslash escapes. Whitespace outside quotes is ignored.

    >>> serialize_tree(parse_tree("a(b, c(d))"))
    'a(b,c(d))'
    """
    sc = _Scanner(text)
    if sc.peek() == "":
        raise TreeSyntaxError("empty input", sc.offset())
    labels: list[str] = []
    children: list[list[int]] = []
    open_nodes: list[int] = []

    def new_node() -> int:
        u = len(labels)
        labels.append(sc.label())
        children.append([])
        if open_nodes:
            children[open_nodes[-1]].append(u)
        return u

    last = new_node()
    while True:
        ch = sc.peek()
        if ch == "(":
            sc.pos += 1
            open_nodes.append(last)
            last = new_node()
        elif ch == ",":
            if not open_nodes:
                raise TreeSyntaxError("unexpected ',' at top level", sc.offset())
            sc.pos += 1
            last = new_node()
        elif ch == ")":
            if not open_nodes:
                raise TreeSyntaxError("unbalanced ')'", sc.offset())
            sc.pos += 1
            last = open_nodes.pop()
        elif ch == "":
            if open_nodes:
                raise TreeSyntaxError("unbalanced parentheses: expected ',' or ')'", sc.offset())
            break
        else:
            raise TreeSyntaxError(f"unexpected character {ch!r}", sc.offset())
    return LabeledTree(labels, children)


def load_tree(text: str) -> LabeledTree:
    """Parse either the bracket text form or the JSON object form."""
    import json

    stripped = text.strip()
    if stripped.startswith("{"):
        return LabeledTree.from_nested(json.loads(stripped))
    return parse_tree(stripped)


def iter_dataset_lines(lines: Iterable[str]) -> Iterator[str]:
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            yield line


def read_dataset(path) -> list[LabeledTree]:
    """One tree per line; blank lines and ``#`` comments are skipped."""
    with open(path, encoding="utf-8") as fh:
        return [load_tree(line) for line in iter_dataset_lines(fh)]
