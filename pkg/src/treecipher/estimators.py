"""scikit-learn style wrappers around compression, mining and ciphering tests."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .dag import Dag, compress, decompress
from .dagrw import DagRw, compress_rw, decompress_rw
from .miner import mine
from .solver import Verdict, find_isomorphism, is_ciphering_isomorphic
from .tree import LabeledTree, SignatureRegistry, canonical_classes, parse_tree
from .validation import check_dataset, check_pairs, check_relation

__all__ = ["TreeCompressor", "SubtreePatternMiner", "CipheringClassifier"]


def _check_fitted(est, attr: str) -> None:
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")


class TreeCompressor(TransformerMixin, BaseEstimator):
    """Compress each tree into a DAG under ``relation``.

    ``transform`` returns a list of :class:`Dag` (topo, label) or
    :class:`DagRw` (cipher) objects and ``inverse_transform`` rebuilds trees.
    The transformer is stateless; ``fit`` only validates its parameters.
    """

    def __init__(self, relation: str = "cipher", step_limit: int | None = None):
        self.relation = relation
        self.step_limit = step_limit

    def fit(self, X=None, y=None):
        check_relation(self.relation)
        if self.step_limit is not None and self.step_limit < 1:
            raise ValueError("step_limit must be positive")
        if X is not None:
            check_dataset(X, allow_empty=True)
        self.fitted_ = True
        return self

    def transform(self, X) -> list:
        _check_fitted(self, "fitted_")
        trees = check_dataset(X, allow_empty=True)
        if self.relation == "cipher":
            return [compress_rw(t, self.step_limit) for t in trees]
        return [compress(t, self.relation) for t in trees]

    def inverse_transform(self, D) -> list[LabeledTree]:
        _check_fitted(self, "fitted_")
        out = []
        for d in D:
            if isinstance(d, DagRw):
                out.append(decompress_rw(d))
            elif isinstance(d, Dag):
                out.append(decompress(d))
            else:
                raise TypeError(f"expected Dag or DagRw, got {type(d).__name__}")
        return out


class _PatternIndex:
    """Finds whether a tree holds a subtree equivalent to a given pattern."""

    def __init__(self, relation: str, step_limit: int | None):
        self.relation = relation
        self.step_limit = step_limit
        self.registry = SignatureRegistry()

    def codes(self, t: LabeledTree) -> tuple[int, ...]:
        rel = "label" if self.relation == "label" else "topo"
        return canonical_classes(t, rel, self.registry).code

    def contains(self, t: LabeledTree, codes, pattern: LabeledTree, pcode: int) -> bool:
        if self.relation != "cipher":
            return pcode in codes
        for u, c in enumerate(codes):
            if c != pcode:
                continue
            res = is_ciphering_isomorphic(t.subtree(u), pattern, self.step_limit, trace=False)
            if res.verdict is Verdict.ISOMORPHIC:
                return True
        return False


class SubtreePatternMiner(TransformerMixin, BaseEstimator):
    """Learn the frequent subtree patterns of a dataset; encode trees by pattern presence.

    After ``fit``, ``patterns_`` lists the frequent patterns (most frequent
    first) and ``report_`` holds the full :class:`~treecipher.miner.PatternReport`.
    ``transform`` maps each tree to a 0/1 row telling which patterns it holds.

    >>> m = SubtreePatternMiner(relation="cipher", min_support=1.0)
    >>> m.fit_transform(["a(b,b)", "x(y,y)"]).tolist()
    [[1, 1], [1, 1]]
    """

    def __init__(self, relation: str = "cipher", min_support: float = 0.05, step_limit: int | None = None):
        self.relation = relation
        self.min_support = min_support
        self.step_limit = step_limit

    def fit(self, X, y=None):
        check_relation(self.relation)
        trees = check_dataset(X)
        self.report_ = mine(trees, self.relation, self.min_support, self.step_limit)
        self.patterns_ = [e.pattern for e in self.report_.entries]
        self.n_patterns_ = len(self.patterns_)
        return self

    def transform(self, X) -> np.ndarray:
        _check_fitted(self, "report_")
        trees = check_dataset(X, allow_empty=True)
        index = _PatternIndex(self.relation, self.step_limit)
        pats = [parse_tree(p) for p in self.patterns_]
        pcodes = [index.codes(p)[0] for p in pats]
        out = np.zeros((len(trees), len(pats)), dtype=np.int8)
        for i, t in enumerate(trees):
            codes = index.codes(t)
            for j, (p, pc) in enumerate(zip(pats, pcodes)):
                out[i, j] = index.contains(t, codes, p, pc)
        return out

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        _check_fitted(self, "report_")
        return np.asarray(self.patterns_, dtype=object)


class CipheringClassifier(BaseEstimator):
    """Predict whether each pair of trees is equivalent under ``relation``.

    ``predict`` returns a boolean array; pairs that hit ``step_limit`` are
    reported as not equivalent and counted in ``n_unknown_``.
    """

    def __init__(self, relation: str = "cipher", step_limit: int | None = None):
        self.relation = relation
        self.step_limit = step_limit

    def fit(self, X=None, y=None):
        check_relation(self.relation)
        self.fitted_ = True
        return self

    def predict(self, X) -> np.ndarray:
        _check_fitted(self, "fitted_")
        pairs = check_pairs(X)
        out = np.zeros(len(pairs), dtype=bool)
        self.n_unknown_ = 0
        for i, (a, b) in enumerate(pairs):
            if self.relation == "cipher":
                verdict = is_ciphering_isomorphic(a, b, self.step_limit, trace=False).verdict
                self.n_unknown_ += verdict is Verdict.UNKNOWN
                out[i] = verdict is Verdict.ISOMORPHIC
            else:
                out[i] = find_isomorphism(a, b, self.relation) is not None
        return out
