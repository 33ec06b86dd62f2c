"""Classical DAG compression of trees under unlabelled or labelled isomorphism."""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .tree import LabeledTree, SignatureRegistry, canonical_classes

__all__ = [
    "PLACEHOLDER",
    "Dag",
    "DagVertex",
    "MalformedDagError",
    "compress",
    "decompress",
    "dag_stats",
]

PLACEHOLDER = "·"


class MalformedDagError(ValueError):
    pass


@dataclass(frozen=True)
class DagVertex:
    class_code: int
    label: str | None
    repr: int


@dataclass
class Dag:
    relation: str
    vertices: list[DagVertex]
    edges: list[tuple[int, int, int]]  # (from, to, multiplicity)
    source: int = 0
    tree_size: int | None = field(default=None, compare=False)

    def out_edges(self) -> list[list[tuple[int, int]]]:
        out: list[list[tuple[int, int]]] = [[] for _ in self.vertices]
        for a, b, m in self.edges:
            out[a].append((b, m))
        return out

    def to_json(self) -> dict:
        verts = []
        for i, v in enumerate(self.vertices):
            item: dict = {"id": i, "repr": v.repr}
            if v.label is not None:
                item["label"] = v.label
            verts.append(item)
        return {
            "relation": self.relation,
            "vertices": verts,
            "edges": [{"from": a, "to": b, "mult": m} for a, b, m in self.edges],
            "source": self.source,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Dag":
        try:
            relation = obj["relation"]
            raw = sorted(obj["vertices"], key=lambda v: v["id"])
            if [v["id"] for v in raw] != list(range(len(raw))):
                raise MalformedDagError("vertex ids must be 0..n-1")
            vertices = [DagVertex(v["id"], v.get("label"), v.get("repr", -1)) for v in raw]
            edges = [(e["from"], e["to"], e.get("mult", 1)) for e in obj["edges"]]
            source = obj.get("source", 0)
        except (KeyError, TypeError) as exc:
            raise MalformedDagError(f"bad DAG JSON: {exc}") from exc
        return cls(relation, vertices, edges, source)

    def to_dot(self) -> str:
        lines = ["digraph dag {"]
        for i, v in enumerate(self.vertices):
            text = v.label if v.label is not None else str(i)
            lines.append(f'  v{i} [label="{_dot_escape(text)}"];')
        for a, b, m in self.edges:
            lines.append(f'  v{a} -> v{b} [label="{m}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def compress(
    t: LabeledTree, relation: str = "topo", registry: SignatureRegistry | None = None
) -> Dag:
    """Quotient of ``t`` by subtree isomorphism, with multiplicity edges.

    Vertex ``i`` is the ``i``-th class met in preorder; its representative is
    the first node of that class, so the source (the root class) is vertex 0.
    """
    sig = canonical_classes(t, relation, registry)
    vertex_of: dict[int, int] = {}
    vertices: list[DagVertex] = []
    for u in range(len(t)):
        code = sig.code[u]
        if code not in vertex_of:
            vertex_of[code] = len(vertices)
            label = t.labels[u] if relation == "label" else None
            vertices.append(DagVertex(code, label, u))
    edges: list[tuple[int, int, int]] = []
    for a, v in enumerate(vertices):
        counts = Counter(vertex_of[sig.code[c]] for c in t.children[v.repr])
        for b in sorted(counts):
            edges.append((a, b, counts[b]))
    return Dag(relation, vertices, edges, 0, tree_size=len(t))


def topological_order(n: int, edges, source: int) -> list[int]:
    """Kahn order from ``source``; raises if the graph has a cycle or another source."""
    indeg = [0] * n
    out: list[list[int]] = [[] for _ in range(n)]
    for a, b, *_ in edges:
        if not (0 <= a < n and 0 <= b < n):
            raise MalformedDagError(f"edge ({a}, {b}) references a missing vertex")
        indeg[b] += 1
        out[a].append(b)
    sources = [v for v in range(n) if indeg[v] == 0]
    if sources != [source]:
        raise MalformedDagError(f"expected unique source {source}, found {sources}")
    order = []
    queue = deque([source])
    while queue:
        a = queue.popleft()
        order.append(a)
        for b in out[a]:
            indeg[b] -= 1
            if indeg[b] == 0:
                queue.append(b)
    if len(order) != n:
        raise MalformedDagError("graph has a cycle")
    return order


def decompress(d: Dag, vertex: int | None = None) -> LabeledTree:
    """Rebuild a tree from ``d`` (or the subtree pattern rooted at ``vertex``).

    Topological DAGs carry no labels, so every node gets :data:`PLACEHOLDER`.
    """
    topological_order(len(d.vertices), d.edges, d.source)
    for a, b, m in d.edges:
        if m < 1:
            raise MalformedDagError(f"edge ({a}, {b}) has multiplicity {m}")
    out = d.out_edges()
    start = d.source if vertex is None else vertex
    labels: list[str] = []
    children: list[list[int]] = []
    stack = [(start, -1)]
    while stack:
        a, parent = stack.pop()
        u = len(labels)
        lab = d.vertices[a].label
        labels.append(PLACEHOLDER if lab is None else lab)
        children.append([])
        if parent >= 0:
            children[parent].append(u)
        expanded = [b for b, m in out[a] for _ in range(m)]
        for b in reversed(expanded):
            stack.append((b, u))
    return LabeledTree(labels, children)


def dag_stats(d: Dag) -> dict:
    vertex_count = len(d.vertices)
    edge_count = sum(m for _, _, m in d.edges)
    size = d.tree_size if d.tree_size is not None else expanded_size(d)
    return {
        "vertex_count": vertex_count,
        "edge_count": edge_count,
        "compaction_ratio": vertex_count / size,
    }


def expanded_size(d: Dag) -> int:
    """Node count of the tree encoded by ``d`` (number of source-rooted paths)."""
    order = topological_order(len(d.vertices), d.edges, d.source)
    out = d.out_edges()
    size = [1] * len(d.vertices)
    for a in reversed(order):
        size[a] += sum(m * size[b] for b, m in out[a])
    return size[d.source]
