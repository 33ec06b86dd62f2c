"""Tree ciphering isomorphism.

Two trees are cipher-isomorphic when some tree isomorphism between them maps
labels through a bijection (the cipher). The solver first narrows the search
with deductions on topology and labels, which partition the unmapped nodes
into *bags* (node sets that must map onto each other) and *collections*
(same-label node sets that must map onto same-size sets wholesale), then
explores what is left by backtracking in the order that keeps the
enumeration tree smallest: bags before collections, smallest bag first,
collections by largest set size then fewest sets.
"""
from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, Mapping, Sequence

from .tree import LabeledTree, SignatureRegistry, canonical_classes

__all__ = [
    "Bijection",
    "Bag",
    "Collection",
    "SearchState",
    "SearchTrace",
    "IsoResult",
    "Verdict",
    "ext_bij",
    "map_nodes",
    "split_children",
    "deduction_phase",
    "search_space_size",
    "next_candidates",
    "backtrack",
    "is_ciphering_isomorphic",
    "verify_ciphering",
    "find_isomorphism",
]


class Verdict(str, Enum):
    ISOMORPHIC = "Isomorphic"
    NOT_ISOMORPHIC = "NotIsomorphic"
    UNKNOWN = "Unknown"


class Bijection:
    """Partial bijection kept as a pair of mutually inverse dicts."""

    __slots__ = ("forward", "backward")

    def __init__(self, pairs: Mapping | None = None):
        self.forward: dict = {}
        self.backward: dict = {}
        for a, b in (pairs or {}).items():
            if not self.extend(a, b):
                raise ValueError(f"pairs are not a bijection at {a!r} -> {b!r}")

    def extend(self, a: Hashable, b: Hashable) -> bool:
        image = self.forward.get(a)
        if image is not None:
            return image == b
        if b in self.backward:
            return False
        self.forward[a] = b
        self.backward[b] = a
        return True

    def copy(self) -> "Bijection":
        new = Bijection.__new__(Bijection)
        new.forward = dict(self.forward)
        new.backward = dict(self.backward)
        return new

    def __contains__(self, a) -> bool:
        return a in self.forward

    def __getitem__(self, a):
        return self.forward[a]

    def get(self, a, default=None):
        return self.forward.get(a, default)

    def __len__(self) -> int:
        return len(self.forward)

    def __repr__(self) -> str:
        return f"Bijection({self.forward!r})"


def ext_bij(psi: Bijection, a, b) -> bool:
    """Extend ``psi`` with ``a -> b`` if compatible; ``psi`` is unchanged on failure."""
    return psi.extend(a, b)


class Bag:
    __slots__ = ("b1", "b2")

    def __init__(self, b1: set[int], b2: set[int]):
        self.b1 = b1
        self.b2 = b2

    def __len__(self) -> int:
        return len(self.b1)

    def __repr__(self) -> str:
        return f"Bag({sorted(self.b1)}, {sorted(self.b2)})"


class Collection:
    """Same-label node sets on each side, keyed by label.

    A label occurs at most once per side within one collection: every way a
    collection is built or split hands the pieces of one set to different
    collections.
    """

    __slots__ = ("c1", "c2")

    def __init__(self, c1: dict[str, set[int]], c2: dict[str, set[int]]):
        self.c1 = c1
        self.c2 = c2

    def support(self) -> list[int]:
        return sorted({len(p) for p in self.c1.values()})

    def count(self, n: int) -> int:
        return sum(1 for p in self.c1.values() if len(p) == n)

    def balanced(self) -> bool:
        return _size_profile(self.c1) == _size_profile(self.c2)

    def __bool__(self) -> bool:
        return bool(self.c1) or bool(self.c2)

    def __repr__(self) -> str:
        c1 = {a: sorted(p) for a, p in self.c1.items()}
        c2 = {b: sorted(q) for b, q in self.c2.items()}
        return f"Collection({c1}, {c2})"


def _size_profile(side: dict[str, set[int]]) -> Counter:
    return Counter(len(p) for p in side.values())


class SearchState:
    """Partial mapping, partial cipher and the partition of unmapped nodes.

    ``loc1[u]`` / ``loc2[v]`` hold the id of the bag or collection that
    contains the node, or -1 once the node is mapped.
    """

    def __init__(self, t1: LabeledTree, t2: LabeledTree):
        self.t1 = t1
        self.t2 = t2
        self.phi = Bijection()
        self.f = Bijection()
        self.bags: dict[int, Bag] = {}
        self.colls: dict[int, Collection] = {}
        self.loc1 = [-1] * len(t1)
        self.loc2 = [-1] * len(t2)
        self.next_id = 0

    def copy(self) -> "SearchState":
        new = SearchState.__new__(SearchState)
        new.t1 = self.t1
        new.t2 = self.t2
        new.phi = self.phi.copy()
        new.f = self.f.copy()
        new.bags = {k: Bag(set(b.b1), set(b.b2)) for k, b in self.bags.items()}
        new.colls = {
            k: Collection({a: set(p) for a, p in c.c1.items()}, {b: set(q) for b, q in c.c2.items()})
            for k, c in self.colls.items()
        }
        new.loc1 = list(self.loc1)
        new.loc2 = list(self.loc2)
        new.next_id = self.next_id
        return new

    def add_bag(self, b1: set[int], b2: set[int]) -> int:
        cid = self.next_id
        self.next_id += 1
        self.bags[cid] = Bag(b1, b2)
        for u in b1:
            self.loc1[u] = cid
        for v in b2:
            self.loc2[v] = cid
        return cid

    def add_collection(self, c1: dict[str, set[int]], c2: dict[str, set[int]]) -> int:
        cid = self.next_id
        self.next_id += 1
        self.colls[cid] = Collection(c1, c2)
        for p in c1.values():
            for u in p:
                self.loc1[u] = cid
        for q in c2.values():
            for v in q:
                self.loc2[v] = cid
        return cid

    @property
    def bags_list(self) -> list[Bag]:
        return [self.bags[k] for k in sorted(self.bags)]

    @property
    def collections_list(self) -> list[Collection]:
        return [self.colls[k] for k in sorted(self.colls)]

    def is_complete(self) -> bool:
        return not self.bags and not self.colls and len(self.phi) == len(self.t1)


@dataclass
class SearchTrace:
    snapshots: list[tuple[str, int]] = field(default_factory=list)
    states_visited: int = 0
    deductions: Counter = field(default_factory=Counter)
    n_after_deductions: int | None = None
    map_calls_deduction: int = 0

    def sizes(self) -> list[int]:
        return [n for _, n in self.snapshots]

    def phase_sizes(self) -> list[int]:
        """Sizes at the end of each deduction phase (histogram through rules)."""
        phases = ("A", "B", "C", "D", "collections", "deductions")
        return [n for tag, n in self.snapshots if tag in phases]

    def to_json(self) -> dict:
        return {
            "snapshots": [[tag, n] for tag, n in self.snapshots],
            "states_visited": self.states_visited,
            "deductions": dict(sorted(self.deductions.items())),
            "n_after_deductions": self.n_after_deductions,
        }


@dataclass
class IsoResult:
    verdict: Verdict
    mapping: dict[int, int] | None = None
    cipher: dict[str, str] | None = None
    trace: SearchTrace | None = None

    @property
    def isomorphic(self) -> bool:
        return self.verdict is Verdict.ISOMORPHIC

    def to_json(self, with_trace: bool = False) -> dict:
        out: dict = {"verdict": self.verdict.value}
        if self.mapping is not None:
            out["mapping"] = [[u, v] for u, v in sorted(self.mapping.items())]
        if self.cipher is not None:
            out["cipher"] = [[a, b] for a, b in sorted(self.cipher.items())]
        if self.trace is not None:
            out["states_visited"] = self.trace.states_visited
            if with_trace:
                out["snapshots"] = [[tag, n] for tag, n in self.trace.snapshots]
        return out


def search_space_size(state: SearchState) -> int:
    """Number of completions of the partial mapping allowed by the bags and collections."""
    fact = math.factorial
    total = 1
    for bag in state.bags.values():
        total *= fact(len(bag))
    for coll in state.colls.values():
        for n, k in _size_profile(coll.c1).items():
            total *= fact(k) * fact(n) ** k
    return total


class _Inconsistent(Exception):
    """A forced deduction contradicted the current partial ciphering."""


class _Engine:
    """Mutating operations on a :class:`SearchState`, with counters."""

    def __init__(self, t1: LabeledTree, t2: LabeledTree, trace: SearchTrace | None = None):
        self.t1 = t1
        self.t2 = t2
        self.trace = trace if trace is not None else SearchTrace()

    # -- mapping nodes ---------------------------------------------------

    def map_nodes(self, st: SearchState, u: int, v: int) -> bool:
        t1, t2 = self.t1, self.t2
        while True:
            self.trace.deductions["map_nodes"] += 1
            if not st.f.extend(t1.labels[u], t2.labels[v]):
                return False
            mapped = st.phi.get(u)
            if mapped is not None:
                if mapped != v:
                    return False
            else:
                if v in st.phi.backward:
                    return False
                if not self._take_out(st, u, v):
                    return False
                st.phi.extend(u, v)
                if not self.split_children(st, {u}, {v}):
                    return False
            pu, pv = t1.parent[u], t2.parent[v]
            if pu < 0 or pv < 0:
                return pu == pv
            if st.phi.get(pu) == pv:
                return True
            u, v = pu, pv

    def _take_out(self, st: SearchState, u: int, v: int) -> bool:
        """Remove ``u`` and ``v`` from their shared container before mapping them."""
        cid = st.loc1[u]
        if cid < 0 or cid != st.loc2[v]:
            return False
        st.loc1[u] = st.loc2[v] = -1
        bag = st.bags.get(cid)
        if bag is not None:
            bag.b1.discard(u)
            bag.b2.discard(v)
            if not bag.b1:
                del st.bags[cid]
            return True
        coll = st.colls[cid]
        p = coll.c1.get(self.t1.labels[u])
        q = coll.c2.get(self.t2.labels[v])
        if p is None or q is None or len(p) != len(q):
            st.loc1[u], st.loc2[v] = cid, cid
            return False
        del coll.c1[self.t1.labels[u]]
        del coll.c2[self.t2.labels[v]]
        if not coll:
            del st.colls[cid]
        rest1, rest2 = p - {u}, q - {v}
        if rest1:
            st.add_bag(rest1, rest2)
        return True

    # -- splitting ---------------------------------------------------------

    def split_children(self, st: SearchState, s1: set[int], s2: set[int]) -> bool:
        t1, t2 = self.t1, self.t2
        work = deque([(s1, s2)])
        while work:
            a1, a2 = work.popleft()
            self.trace.deductions["split_children"] += 1
            ch1 = {c for w in a1 for c in t1.children[w]}
            ch2 = {c for w in a2 for c in t2.children[w]}
            if len(ch1) != len(ch2):
                return False
            if not ch1:
                continue
            touched = {st.loc1[c] for c in ch1} | {st.loc2[c] for c in ch2}
            touched.discard(-1)
            for cid in sorted(touched):
                bag = st.bags.get(cid)
                if bag is not None:
                    bu = bag.b1 & ch1
                    bv = bag.b2 & ch2
                    if len(bu) != len(bv):
                        return False
                    if bu and len(bu) < len(bag.b1):
                        rest1, rest2 = bag.b1 - bu, bag.b2 - bv
                        del st.bags[cid]
                        st.add_bag(bu, bv)
                        st.add_bag(rest1, rest2)
                        work.append((bu, bv))
                        work.append((rest1, rest2))
                    continue
                coll = st.colls.get(cid)
                if coll is None:
                    continue
                for n in coll.support():
                    in1: dict[str, set[int]] = {}
                    out1: dict[str, set[int]] = {}
                    for a, p in list(coll.c1.items()):
                        if len(p) != n:
                            continue
                        pu = p & ch1
                        if pu and len(pu) < n:
                            in1[a] = pu
                            out1[a] = p - pu
                            del coll.c1[a]
                    in2: dict[str, set[int]] = {}
                    out2: dict[str, set[int]] = {}
                    for b, q in list(coll.c2.items()):
                        if len(q) != n:
                            continue
                        qv = q & ch2
                        if qv and len(qv) < n:
                            in2[b] = qv
                            out2[b] = q - qv
                            del coll.c2[b]
                    if not in1 and not in2:
                        continue
                    if _size_profile(in1) != _size_profile(in2) or _size_profile(out1) != _size_profile(out2):
                        return False
                    st.add_collection(in1, in2)
                    st.add_collection(out1, out2)
                    work.append((set().union(*in1.values()), set().union(*in2.values())))
                    work.append((set().union(*out1.values()), set().union(*out2.values())))
                if not coll.balanced():
                    return False
                if not coll:
                    del st.colls[cid]
        return True

    # -- deduction rules -------------------------------------------------

    def rule_single_bags(self, st: SearchState) -> bool:
        """Map the two nodes of every bag of size one."""
        changed = False
        while True:
            singles = [cid for cid, bag in st.bags.items() if len(bag) == 1]
            if not singles:
                return changed
            bag = st.bags[min(singles)]
            (u,) = bag.b1
            (v,) = bag.b2
            self.trace.deductions["rule1"] += 1
            if not self.map_nodes(st, u, v):
                raise _Inconsistent
            changed = True

    def rule_mapped_labels(self, st: SearchState) -> bool:
        """Separate sets whose label is already mapped from the rest of their collection."""
        changed = False
        fwd, bwd = st.f.forward, st.f.backward
        for cid in sorted(st.colls):
            coll = st.colls[cid]
            pairs = []
            for a in coll.c1:
                if a in fwd:
                    pairs.append((a, fwd[a]))
            for b in coll.c2:
                if b in bwd and bwd[b] not in coll.c1:
                    raise _Inconsistent
            if not pairs:
                continue
            for a, b in pairs:
                p, q = coll.c1.get(a), coll.c2.get(b)
                if q is None or len(p) != len(q):
                    raise _Inconsistent
            if len(pairs) == len(coll.c1) == 1:
                continue
            del st.colls[cid]
            rest1 = dict(coll.c1)
            rest2 = dict(coll.c2)
            for a, b in pairs:
                st.add_collection({a: rest1.pop(a)}, {b: rest2.pop(b)})
            if rest1 or rest2:
                st.add_collection(rest1, rest2)
            self.trace.deductions["rule2"] += 1
            changed = True
        return changed

    def rule_forced_labels(self, st: SearchState) -> bool:
        """Map labels when all sets of one size share a label on each side."""
        changed = False
        for cid in sorted(st.colls):
            coll = st.colls[cid]
            for n in coll.support():
                labels1 = [a for a, p in coll.c1.items() if len(p) == n]
                labels2 = [b for b, q in coll.c2.items() if len(q) == n]
                if len(labels1) != 1 or len(labels2) != 1:
                    continue
                a, b = labels1[0], labels2[0]
                if st.f.get(a) == b:
                    continue
                if not st.f.extend(a, b):
                    raise _Inconsistent
                self.trace.deductions["rule3"] += 1
                changed = True
        return changed

    def rule_unique_size(self, st: SearchState) -> bool:
        """Turn a size class holding a single set per side into a bag."""
        changed = False
        for cid in sorted(st.colls):
            coll = st.colls[cid]
            for n, k in sorted(_size_profile(coll.c1).items()):
                if k != 1:
                    continue
                (a,) = [a for a, p in coll.c1.items() if len(p) == n]
                (b,) = [b for b, q in coll.c2.items() if len(q) == n]
                if not st.f.extend(a, b):
                    raise _Inconsistent
                p = coll.c1.pop(a)
                q = coll.c2.pop(b)
                st.add_bag(p, q)
                self.trace.deductions["rule4"] += 1
                changed = True
            if not coll:
                del st.colls[cid]
        return changed

    def run_rules(self, st: SearchState, record: bool = False) -> bool:
        """Apply the four rules round-robin until none fires; False on contradiction."""
        rules = (
            ("rule1", self.rule_single_bags),
            ("rule2", self.rule_mapped_labels),
            ("rule3", self.rule_forced_labels),
            ("rule4", self.rule_unique_size),
        )
        last = search_space_size(st) if record else None
        try:
            while True:
                progress = False
                for tag, rule in rules:
                    if rule(st):
                        progress = True
                        if record:
                            size = search_space_size(st)
                            if size != last:
                                self.trace.snapshots.append((tag, size))
                                last = size
                if not progress:
                    return True
        except _Inconsistent:
            return False

    def _apply_rule1_only(self, st: SearchState) -> bool:
        try:
            self.rule_single_bags(st)
        except _Inconsistent:
            return False
        return True

    # -- deduction phase -------------------------------------------------

    def deduce(self, st: SearchState, topo1: Sequence[int], topo2: Sequence[int]) -> bool:
        t1, t2 = self.t1, self.t2
        snap = self.trace.snapshots

        # A. label histograms
        count1, count2 = Counter(t1.labels), Counter(t2.labels)
        hist1 = Counter(count1.values())
        hist2 = Counter(count2.values())
        if hist1 != hist2:
            return False
        by_freq1: dict[int, set[int]] = {}
        by_freq2: dict[int, set[int]] = {}
        for u, a in enumerate(t1.labels):
            by_freq1.setdefault(count1[a], set()).add(u)
        for v, b in enumerate(t2.labels):
            by_freq2.setdefault(count2[b], set()).add(v)
        for n in sorted(by_freq1):
            st.add_bag(by_freq1[n], by_freq2[n])
        snap.append(("A", search_space_size(st)))

        # B. depth
        if not self._refine(st, t1.depths, t2.depths):
            return False
        if not self._apply_rule1_only(st):
            return False
        snap.append(("B", search_space_size(st)))

        # C. unlabelled isomorphism class
        if not self._refine(st, topo1, topo2):
            return False
        if not self._apply_rule1_only(st):
            return False
        snap.append(("C", search_space_size(st)))

        # D. parents, shallow bags first so parent bags are final
        for cid in sorted(st.bags, key=lambda k: (t1.depths[min(st.bags[k].b1)], k)):
            bag = st.bags.get(cid)
            if bag is None:
                continue
            groups1: dict[tuple, set[int]] = {}
            groups2: dict[tuple, set[int]] = {}
            for u in bag.b1:
                groups1.setdefault(self._parent_key1(st, u), set()).add(u)
            for v in bag.b2:
                groups2.setdefault(self._parent_key2(st, v), set()).add(v)
            if len(groups1) == 1 and groups1.keys() == groups2.keys():
                continue
            if groups1.keys() != groups2.keys():
                return False
            del st.bags[cid]
            for key in sorted(groups1):
                if len(groups1[key]) != len(groups2[key]):
                    return False
                st.add_bag(groups1[key], groups2[key])
        if not self._apply_rule1_only(st):
            return False
        snap.append(("D", search_space_size(st)))

        # bags to collections
        for cid in sorted(st.bags):
            bag = st.bags.pop(cid)
            c1: dict[str, set[int]] = {}
            c2: dict[str, set[int]] = {}
            for u in sorted(bag.b1):
                c1.setdefault(t1.labels[u], set()).add(u)
            for v in sorted(bag.b2):
                c2.setdefault(t2.labels[v], set()).add(v)
            if _size_profile(c1) != _size_profile(c2):
                return False
            st.add_collection(c1, c2)
        snap.append(("collections", search_space_size(st)))

        ok = self.run_rules(st, record=True)
        if ok:
            snap.append(("deductions", search_space_size(st)))
        return ok

    def _parent_key1(self, st: SearchState, u: int) -> tuple:
        p = self.t1.parent[u]
        if p < 0:
            return ("root",)
        if st.loc1[p] >= 0:
            return ("c", st.loc1[p])
        return ("m", p)

    def _parent_key2(self, st: SearchState, v: int) -> tuple:
        p = self.t2.parent[v]
        if p < 0:
            return ("root",)
        if st.loc2[p] >= 0:
            return ("c", st.loc2[p])
        return ("m", st.phi.backward[p])

    def _refine(self, st: SearchState, key1: Sequence, key2: Sequence) -> bool:
        """Split every bag by a per-node key; the two sides must agree on group sizes."""
        for cid in sorted(st.bags):
            bag = st.bags[cid]
            g1: dict = {}
            g2: dict = {}
            for u in bag.b1:
                g1.setdefault(key1[u], set()).add(u)
            for v in bag.b2:
                g2.setdefault(key2[v], set()).add(v)
            if g1.keys() != g2.keys():
                return False
            if len(g1) == 1:
                continue
            del st.bags[cid]
            for k in sorted(g1):
                if len(g1[k]) != len(g2[k]):
                    return False
                st.add_bag(g1[k], g2[k])
        return True

    # -- backtracking ------------------------------------------------------

    def candidates(self, st: SearchState):
        """Return ``(flag, container id, choices)`` for the next branching point."""
        if st.bags:
            cid = min(st.bags, key=lambda k: (len(st.bags[k]), min(st.bags[k].b1)))
            bag = st.bags[cid]
            u = min(bag.b1)
            return "bags", cid, [(u, v) for v in sorted(bag.b2)]
        if st.colls:
            best = None
            for cid, coll in st.colls.items():
                n = max(len(p) for p in coll.c1.values())
                k = coll.count(n)
                pivot = min(min(p) for p in coll.c1.values() if len(p) == n)
                key = (-n, k, pivot)
                if best is None or key < best[0]:
                    best = (key, cid, n)
            _, cid, n = best
            coll = st.colls[cid]
            a = min((a for a, p in coll.c1.items() if len(p) == n), key=lambda a: min(coll.c1[a]))
            bs = sorted((b for b, q in coll.c2.items() if len(q) == n), key=lambda b: min(coll.c2[b]))
            return "collections", cid, [(a, b) for b in bs]
        return "empty", None, []

    def apply_choice(self, st: SearchState, flag: str, cid: int, choice) -> bool:
        if flag == "bags":
            u, v = choice
            if not self.map_nodes(st, u, v):
                return False
        else:
            a, b = choice
            if not st.f.extend(a, b):
                return False
            coll = st.colls[cid]
            p = coll.c1.pop(a)
            q = coll.c2.pop(b)
            if not coll:
                del st.colls[cid]
            st.add_bag(p, q)
        return self.run_rules(st)

    def backtrack(self, st: SearchState, step_limit: int | None = None) -> tuple[Verdict, SearchState | None]:
        trace = self.trace
        trace.states_visited += 1
        # frames: [pristine state, flag, container id, choices, next index]
        stack: list[list] = []
        current = st
        while True:
            flag, cid, choices = self.candidates(current)
            if flag == "empty":
                return Verdict.ISOMORPHIC, current
            stack.append([current, flag, cid, choices, 0])
            current = None
            while stack:
                frame = stack[-1]
                saved, flag, cid, choices, i = frame
                if i >= len(choices):
                    stack.pop()
                    continue
                if step_limit is not None and trace.states_visited >= step_limit:
                    return Verdict.UNKNOWN, None
                frame[4] = i + 1
                trace.states_visited += 1
                trial = saved.copy()
                if self.apply_choice(trial, flag, cid, choices[i]):
                    current = trial
                    break
            if current is None:
                return Verdict.NOT_ISOMORPHIC, None


def map_nodes(state: SearchState, u: int, v: int) -> bool:
    """Map ``u`` to ``v`` and propagate to children and ancestors.

    On failure the state may be partially modified; callers restore a copy.
    """
    return _Engine(state.t1, state.t2).map_nodes(state, u, v)


def split_children(state: SearchState, s1: set[int], s2: set[int]) -> bool:
    return _Engine(state.t1, state.t2).split_children(state, set(s1), set(s2))


def deduction_phase(
    t1: LabeledTree,
    t2: LabeledTree,
    trace: SearchTrace | None = None,
    registry: SignatureRegistry | None = None,
) -> SearchState | None:
    """Run the deduction steps; ``None`` means the trees are not cipher-isomorphic.

    The caller is expected to have checked unlabelled isomorphism already.
    """
    registry = registry if registry is not None else SignatureRegistry()
    topo1 = canonical_classes(t1, "topo", registry).code
    topo2 = canonical_classes(t2, "topo", registry).code
    engine = _Engine(t1, t2, trace)
    st = SearchState(t1, t2)
    before = engine.trace.deductions["map_nodes"]
    ok = engine.deduce(st, topo1, topo2)
    engine.trace.map_calls_deduction = engine.trace.deductions["map_nodes"] - before
    if not ok:
        return None
    engine.trace.n_after_deductions = search_space_size(st)
    return st


def next_candidates(state: SearchState) -> tuple[str, list]:
    """Next branching point: ``("bags", [(u, v), ...])``,
    ``("collections", [(P, Q), ...])`` with frozenset node sets, or ``("empty", [])``."""
    flag, cid, choices = _Engine(state.t1, state.t2).candidates(state)
    if flag != "collections":
        return flag, choices
    coll = state.colls[cid]
    return flag, [(frozenset(coll.c1[a]), frozenset(coll.c2[b])) for a, b in choices]


def backtrack(
    state: SearchState, step_limit: int | None = None, trace: SearchTrace | None = None
) -> IsoResult:
    engine = _Engine(state.t1, state.t2, trace)
    verdict, final = engine.backtrack(state.copy(), step_limit)
    if verdict is Verdict.ISOMORPHIC:
        return IsoResult(verdict, dict(final.phi.forward), dict(final.f.forward), engine.trace)
    return IsoResult(verdict, trace=engine.trace)


def is_ciphering_isomorphic(
    t1: LabeledTree,
    t2: LabeledTree,
    step_limit: int | None = None,
    trace: bool = True,
) -> IsoResult:
    """Decide whether a tree ciphering from ``t1`` onto ``t2`` exists.

    >>> from treecipher.tree import parse_tree
    >>> r = is_ciphering_isomorphic(parse_tree("a(b,b)"), parse_tree("x(y,y)"))
    >>> r.verdict.value, r.cipher
    ('Isomorphic', {'a': 'x', 'b': 'y'})
    """
    tr = SearchTrace()
    registry = SignatureRegistry()
    if len(t1) != len(t2):
        return IsoResult(Verdict.NOT_ISOMORPHIC, trace=tr if trace else None)
    root1 = canonical_classes(t1, "topo", registry).code[0]
    root2 = canonical_classes(t2, "topo", registry).code[0]
    if root1 != root2:
        return IsoResult(Verdict.NOT_ISOMORPHIC, trace=tr if trace else None)
    state = deduction_phase(t1, t2, tr, registry)
    if state is None:
        return IsoResult(Verdict.NOT_ISOMORPHIC, trace=tr if trace else None)
    engine = _Engine(t1, t2, tr)
    verdict, final = engine.backtrack(state, step_limit)
    keep = tr if trace else None
    if verdict is Verdict.ISOMORPHIC:
        return IsoResult(verdict, dict(final.phi.forward), dict(final.f.forward), keep)
    return IsoResult(verdict, trace=keep)


def verify_ciphering(
    t1: LabeledTree,
    t2: LabeledTree,
    mapping: Mapping[int, int] | Sequence[int],
    cipher: Mapping[str, str],
) -> bool:
    """Check that ``mapping`` is a tree isomorphism whose label relation is ``cipher``."""
    if len(t1) != len(t2):
        return False
    if not isinstance(mapping, Mapping):
        mapping = dict(enumerate(mapping))
    if sorted(mapping) != list(range(len(t1))):
        return False
    if sorted(mapping.values()) != list(range(len(t2))):
        return False
    if mapping[0] != 0:
        return False
    for u in range(1, len(t1)):
        if mapping[t1.parent[u]] != t2.parent[mapping[u]]:
            return False
    if set(cipher) != t1.alphabet() or set(cipher.values()) != t2.alphabet():
        return False
    if len(set(cipher.values())) != len(cipher):
        return False
    return all(cipher[t1.labels[u]] == t2.labels[mapping[u]] for u in range(len(t1)))


def find_isomorphism(t1: LabeledTree, t2: LabeledTree, relation: str) -> dict[int, int] | None:
    """A witness mapping for unlabelled (``topo``) or labelled (``label``) isomorphism."""
    registry = SignatureRegistry()
    c1 = canonical_classes(t1, relation, registry).code
    c2 = canonical_classes(t2, relation, registry).code
    if len(t1) != len(t2) or c1[0] != c2[0]:
        return None
    mapping = {0: 0}
    stack = [(0, 0)]
    while stack:
        u, v = stack.pop()
        kids1 = sorted(t1.children[u], key=lambda c: c1[c])
        kids2 = sorted(t2.children[v], key=lambda c: c2[c])
        for a, b in zip(kids1, kids2):
            mapping[a] = b
            stack.append((a, b))
    return mapping
