"""Random labelled trees and tree pairs for testing and benchmarks.

Randomness comes from numpy's PCG64 generator seeded through
``SeedSequence``. One independent stream is spawned per purpose (topology,
label choice, shuffles), so changing how one of them is consumed leaves the
others untouched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .solver import Verdict, is_ciphering_isomorphic
from .tree import LabeledTree

__all__ = [
    "GenSpec",
    "GenerationFailure",
    "gen_tree",
    "gen_iso_pair",
    "gen_noniso_pair",
    "gen_pair",
    "instance_seed",
    "n_labels",
]

PAIR_KINDS = ("iso", "noniso", "single")
_TOPOLOGY, _LABELS, _SHUFFLE = range(3)


class GenerationFailure(RuntimeError):
    """No non-isomorphic relabelling was found within the retry budget."""


@dataclass(frozen=True)
class GenSpec:
    n: int
    p: float
    seed: int = 0
    pair_kind: str = "single"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")
        if self.pair_kind not in PAIR_KINDS:
            raise ValueError(f"pair_kind must be one of {PAIR_KINDS}")


def n_labels(n: int, p: float) -> int:
    """Number of distinct labels N = max(floor(p n), 1)."""
    return max(math.floor(p * n + 1e-9), 1)


def instance_seed(seed: int, *keys: int) -> int:
    """Derive a 64-bit seed for one instance of a seeded experiment grid."""
    ss = np.random.SeedSequence([seed, *keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _streams(seed: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(3)]


def _random_parents(n: int, rng: np.random.Generator) -> list[int]:
    parents = [-1]
    for i in range(1, n):
        parents.append(int(rng.integers(0, i)))
    return parents


def _random_labels(n: int, big_n: int, rng: np.random.Generator) -> list[str]:
    values = rng.integers(1, big_n + 1, size=n)
    distinct = rng.choice(n, size=big_n, replace=False)
    for k, node in enumerate(distinct):
        values[node] = k + 1
    return [str(int(v)) for v in values]


def gen_tree(spec: GenSpec) -> LabeledTree:
    """Random recursive tree with N = max(floor(p n), 1) distinct labels "1".."N"."""
    streams = _streams(spec.seed)
    parents = _random_parents(spec.n, streams[_TOPOLOGY])
    labels = _random_labels(spec.n, n_labels(spec.n, spec.p), streams[_LABELS])
    return LabeledTree.from_parents(labels, parents)


def gen_iso_pair(spec: GenSpec) -> tuple[LabeledTree, LabeledTree]:
    """A tree and a copy with every child list shuffled."""
    t1 = gen_tree(spec)
    rng = _streams(spec.seed)[_SHUFFLE]
    children = []
    for kids in t1.children:
        order = rng.permutation(len(kids))
        children.append([kids[i] for i in order])
    return t1, LabeledTree(t1.labels, children)


def gen_noniso_pair(spec: GenSpec, max_retries: int = 100) -> tuple[LabeledTree, LabeledTree]:
    """A tree and a relabelling of it with the same label histogram but no tree ciphering.

    Labels are shuffled across nodes, which keeps every label's count, and
    the shuffle is redrawn while the two trees remain cipher-isomorphic.
    """
    big_n = n_labels(spec.n, spec.p)
    if not 1 < big_n < spec.n:
        raise ValueError("a non-isomorphic pair needs 1 < floor(p n) < n")
    t1 = gen_tree(spec)
    rng = _streams(spec.seed)[_SHUFFLE]
    for _ in range(max_retries):
        order = rng.permutation(spec.n)
        t2 = t1.relabel([t1.labels[i] for i in order])
        if is_ciphering_isomorphic(t1, t2, trace=False).verdict is Verdict.NOT_ISOMORPHIC:
            return t1, t2
    raise GenerationFailure(f"no non-isomorphic relabelling after {max_retries} shuffles")


def gen_pair(spec: GenSpec, max_retries: int = 100) -> tuple[LabeledTree, LabeledTree | None]:
    if spec.pair_kind == "iso":
        return gen_iso_pair(spec)
    if spec.pair_kind == "noniso":
        return gen_noniso_pair(spec, max_retries)
    return gen_tree(spec), None
