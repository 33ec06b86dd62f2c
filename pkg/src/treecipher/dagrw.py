"""Lossless DAG compression under tree ciphering (DAG-RW).

Vertices are ciphering classes of subtrees. Each vertex keeps the label of
its section node, and each edge carries the cipher that turns the labels of
the pointed class representative into those of the actual child subtree.
Composing ciphers along a source-rooted path recovers every label.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .dag import MalformedDagError, compress, topological_order
from .solver import Verdict, is_ciphering_isomorphic
from .tree import LabeledTree, SignatureRegistry, canonical_classes

__all__ = ["Cipher", "RwVertex", "RwEdge", "DagRw", "compress_rw", "decompress_rw", "rw_stats"]


@dataclass(frozen=True)
class Cipher:
    kind: str  # "Identity" or "Table"
    table: tuple[tuple[str, str], ...] = ()

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "Cipher":
        if all(a == b for a, b in mapping.items()):
            return IDENTITY
        return cls("Table", tuple(sorted(mapping.items())))

    def as_dict(self) -> dict[str, str] | None:
        return None if self.kind == "Identity" else dict(self.table)

    def to_json(self) -> dict:
        if self.kind == "Identity":
            return {"kind": "Identity"}
        return {"kind": "Table", "table": [[a, b] for a, b in self.table]}

    @classmethod
    def from_json(cls, obj: dict) -> "Cipher":
        kind = obj.get("kind")
        if kind == "Identity":
            return IDENTITY
        if kind == "Table":
            return cls("Table", tuple((str(a), str(b)) for a, b in obj.get("table", [])))
        raise MalformedDagError(f"unknown cipher kind {kind!r}")

    def render(self) -> str:
        if self.kind == "Identity":
            return "id"
        return ";".join(f"{a}→{b}" for a, b in self.table)


IDENTITY = Cipher("Identity")


@dataclass(frozen=True)
class RwVertex:
    class_id: int
    label: str
    section: int


@dataclass(frozen=True)
class RwEdge:
    source: int
    target: int
    cipher: Cipher
    node: int = -1  # child node of the source section, when known


@dataclass
class DagRw:
    vertices: list[RwVertex]
    edges: list[RwEdge]
    source: int = 0
    unknown_tests: int = field(default=0, compare=False)

    def to_json(self) -> dict:
        return {
            "relation": "cipher",
            "vertices": [
                {"id": i, "label": v.label, "section": v.section, "class_id": v.class_id}
                for i, v in enumerate(self.vertices)
            ],
            "edges": [{"from": e.source, "to": e.target, "cipher": e.cipher.to_json()} for e in self.edges],
            "source": self.source,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DagRw":
        try:
            raw = sorted(obj["vertices"], key=lambda v: v["id"])
            if [v["id"] for v in raw] != list(range(len(raw))):
                raise MalformedDagError("vertex ids must be 0..n-1")
            vertices = [RwVertex(v.get("class_id", v["id"]), str(v["label"]), v.get("section", -1)) for v in raw]
            edges = [RwEdge(e["from"], e["to"], Cipher.from_json(e["cipher"])) for e in obj["edges"]]
            source = obj.get("source", 0)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, MalformedDagError):
                raise
            raise MalformedDagError(f"bad DAG-RW JSON: {exc}") from exc
        return cls(vertices, edges, source)

    def to_dot(self) -> str:
        lines = ["digraph dagrw {"]
        for i, v in enumerate(self.vertices):
            lines.append(f'  v{i} [label="{_esc(v.label)}"];')
        for e in self.edges:
            lines.append(f'  v{e.source} -> v{e.target} [label="{_esc(e.cipher.render())}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _esc(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _cipher_invariant(t: LabeledTree, u: int, registry: SignatureRegistry) -> int:
    """Class code of ``T(u)`` with each label replaced by its count in ``T(u)``.

    Equal for cipher-equivalent subtrees, so it safely narrows the pairwise tests.
    """
    sub = t.subtree(u)
    counts: dict[str, int] = {}
    for a in sub.labels:
        counts[a] = counts.get(a, 0) + 1
    return canonical_classes(sub.relabel([str(counts[a]) for a in sub.labels]), "label", registry).code[0]


def compress_rw(t: LabeledTree, step_limit: int | None = None) -> DagRw:
    """Compress ``t`` by ciphering classes.

    Unlabelled classes are visited in topological order of the unlabelled
    DAG. For each class, the candidate nodes are the children of the current
    section nodes, taken in preorder; each one joins the first existing
    ciphering class (in creation order) it is equivalent to, or founds a new
    one. A pairwise test that hits ``step_limit`` counts as non-equivalent,
    which may cost compression but never correctness.
    """
    registry = SignatureRegistry()
    topo_code = canonical_classes(t, "topo", registry).code
    label_code = canonical_classes(t, "label", registry).code
    topo_dag = compress(t, "topo", registry)
    class_index = {v.class_code: i for i, v in enumerate(topo_dag.vertices)}
    order = topological_order(len(topo_dag.vertices), topo_dag.edges, topo_dag.source)

    inv_registry = SignatureRegistry()
    vertices = [RwVertex(class_index[topo_code[0]], t.labels[0], 0)]
    vertex_of_section = {0: 0}
    candidates: dict[int, list[int]] = {}
    for c in t.children[0]:
        candidates.setdefault(class_index[topo_code[c]], []).append(c)
    edges: list[RwEdge] = []
    unknown = 0

    for q in order:
        if q == topo_dag.source:
            continue
        members = sorted(candidates.pop(q, []))
        reps: list[tuple[int, int, int]] = []  # (vertex id, section node, invariant)
        for u in members:
            inv = _cipher_invariant(t, u, inv_registry)
            target = None
            cipher = IDENTITY
            for vid, r, rinv in reps:
                if rinv != inv:
                    continue
                if label_code[r] == label_code[u]:
                    target = vid
                    break
                res = is_ciphering_isomorphic(t.subtree(r), t.subtree(u), step_limit=step_limit, trace=False)
                if res.verdict is Verdict.ISOMORPHIC:
                    target, cipher = vid, Cipher.from_mapping(res.cipher)
                    break
                if res.verdict is Verdict.UNKNOWN:
                    unknown += 1
            if target is None:
                target = len(vertices)
                vertices.append(RwVertex(q, t.labels[u], u))
                vertex_of_section[u] = target
                reps.append((target, u, inv))
                for c in t.children[u]:
                    candidates.setdefault(class_index[topo_code[c]], []).append(c)
            edges.append(RwEdge(vertex_of_section[t.parent[u]], target, cipher, u))
    edges.sort(key=lambda e: (e.source, e.node))
    return DagRw(vertices, edges, 0, unknown_tests=unknown)


def _validate(d: DagRw) -> tuple[list[int], list[list[RwEdge]]]:
    n = len(d.vertices)
    order = topological_order(n, [(e.source, e.target) for e in d.edges], d.source)
    out: list[list[RwEdge]] = [[] for _ in range(n)]
    has_identity_in = [False] * n
    for e in d.edges:
        out[e.source].append(e)
        if e.cipher.kind == "Identity":
            has_identity_in[e.target] = True
        else:
            table = e.cipher.table
            if len({a for a, _ in table}) != len(table) or len({b for _, b in table}) != len(table):
                raise MalformedDagError(f"edge {e.source}->{e.target}: cipher is not a bijection")
    for v in range(n):
        if v != d.source and not has_identity_in[v]:
            raise MalformedDagError(f"vertex {v} has no identity in-edge")
    alphabet: list[set[str]] = [set() for _ in range(n)]
    for v in reversed(order):
        alpha = {d.vertices[v].label}
        for e in out[v]:
            child = alphabet[e.target]
            if e.cipher.kind == "Identity":
                alpha |= child
            else:
                table = dict(e.cipher.table)
                if set(table) != child:
                    raise MalformedDagError(f"edge {e.source}->{e.target}: cipher domain mismatch")
                alpha.update(table.values())
        alphabet[v] = alpha
    return order, out


def decompress_rw(d: DagRw, vertex: int | None = None) -> LabeledTree:
    """Rebuild the tree by composing edge ciphers along source-rooted paths.

    With ``vertex``, rebuild only the class representative of that vertex.
    """
    _, out = _validate(d)
    labels: list[str] = []
    children: list[list[int]] = []
    # (vertex, parent node, composed cipher or None for identity)
    stack: list[tuple[int, int, dict[str, str] | None]] = [(d.source if vertex is None else vertex, -1, None)]
    while stack:
        v, parent, comp = stack.pop()
        u = len(labels)
        lab = d.vertices[v].label
        labels.append(lab if comp is None else comp[lab])
        children.append([])
        if parent >= 0:
            children[parent].append(u)
        for e in reversed(out[v]):
            table = e.cipher.as_dict()
            if table is None:
                nxt = comp
            elif comp is None:
                nxt = table
            else:
                nxt = {a: comp[b] for a, b in table.items()}
            stack.append((e.target, u, nxt))
    return LabeledTree(labels, children)


def rw_stats(d: DagRw) -> dict:
    return {
        "vertex_count": len(d.vertices),
        "edge_count": len(d.edges),
        "cipher_payload": sum(len(e.cipher.table) for e in d.edges),
        "identity_edge_count": sum(1 for e in d.edges if e.cipher.kind == "Identity"),
    }
