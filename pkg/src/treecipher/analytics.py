"""Exact model of the size of the backtracking tree.

A system is a sequence of ``(n, alpha)`` pairs: ``alpha`` interchangeable
blocks of ``n`` nodes explored one after the other. ``a_n`` counts the states
needed to enumerate all permutations of ``n`` nodes, and :func:`f_variadic`
chains such enumerations. The root state is not counted by the model; add
one when comparing with ``states_visited``.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Sequence

__all__ = [
    "a_n",
    "a_n_series",
    "a_pq",
    "f_variadic",
    "delta_f",
    "state_bound",
    "optimal_order_key",
    "optimal_order",
    "swap_sort",
    "model_system",
    "model_upper_bound",
]


@lru_cache(maxsize=None)
def _a_table(n: int) -> tuple[int, ...]:
    vals = [0, 0]
    for k in range(2, n + 1):
        vals.append(k * (1 + vals[-1]))
    return tuple(vals)


def a_n(n: int) -> int:
    """States to enumerate the permutations of ``n`` nodes: a_1 = 0, a_n = n(1 + a_{n-1})."""
    if n < 1:
        raise ValueError("n must be positive")
    return _a_table(n)[n]


def a_n_series(n: int) -> Fraction:
    """Closed form n! * sum_{i=1}^{n-1} 1/i!, in exact rationals."""
    if n < 1:
        raise ValueError("n must be positive")
    return factorial(n) * sum((Fraction(1, factorial(i)) for i in range(1, n)), Fraction(0))


def a_pq(p: int, q: int) -> int:
    """States to pair two blocks of sizes ``p`` and ``q``, smaller block first."""
    if p < 1 or q < 1:
        raise ValueError("p and q must be positive")
    lo, hi = min(p, q), max(p, q)
    return a_n(lo) + factorial(lo) * a_n(hi)


def _check_pairs(seq: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    pairs = [(int(n), int(alpha)) for n, alpha in seq]
    if not pairs:
        raise ValueError("system must contain at least one pair")
    for n, alpha in pairs:
        if n < 1 or alpha < 1:
            raise ValueError(f"invalid pair ({n}, {alpha})")
    return pairs


def f_variadic(seq: Sequence[tuple[int, int]]) -> int:
    """f((n1,a1), rest) = a1 * (a_{n1} + n1! * f(rest)), f((n,a)) = a * a_n."""
    pairs = _check_pairs(seq)
    n, alpha = pairs[-1]
    acc = alpha * a_n(n)
    for n, alpha in reversed(pairs[:-1]):
        acc = alpha * (a_n(n) + factorial(n) * acc)
    return acc


def delta_f(m: int, n: int, alpha: int, beta: int) -> int:
    """f((m,alpha),(n,beta)) - f((n,beta),(m,alpha)); positive means (n,beta) should go first."""
    return beta * a_n(n) * (alpha * factorial(m) - 1) - alpha * a_n(m) * (beta * factorial(n) - 1)


def state_bound(n_after: int) -> int:
    """ceil(N * 2437/709), where 2437/709 slightly exceeds 2(e - 1)."""
    if n_after < 1:
        raise ValueError("N must be at least 1")
    return -(-n_after * 2437 // 709)


def optimal_order_key(pair: tuple[int, int]) -> tuple:
    """Bags (alpha = 1) by increasing size, then collections by decreasing n and increasing alpha."""
    n, alpha = pair
    return (alpha > 1, n if alpha == 1 else -n, alpha)


def optimal_order(seq: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    return sorted(seq, key=optimal_order_key)


def swap_sort(seq: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Bubble sort that swaps neighbours whenever the swap lowers f."""
    out = list(seq)
    changed = True
    while changed:
        changed = False
        for i in range(len(out) - 1):
            (m, alpha), (n, beta) = out[i], out[i + 1]
            if delta_f(m, n, alpha, beta) > 0:
                out[i], out[i + 1] = out[i + 1], out[i]
                changed = True
    return out


def model_system(state) -> list[tuple[int, int]]:
    """Pairs describing the branching left in a solver state, in exploration order.

    Each bag of size n gives (n, 1). A collection with alpha sets of size
    n >= 2 gives (n, alpha), (n, alpha - 1), ..., (n, 1): pick the partner of
    one set, then enumerate the bag this creates. Sets of size one behave as
    a bag of their count.
    """
    bags = sorted(len(b) for b in state.bags.values())
    blocks = []
    singles = []
    for coll in state.colls.values():
        sizes: dict[int, int] = {}
        for p in coll.c1.values():
            sizes[len(p)] = sizes.get(len(p), 0) + 1
        for n, alpha in sizes.items():
            if n == 1:
                singles.append(alpha)
            else:
                blocks.append((n, alpha))
    system = [(n, 1) for n in bags]
    for n, alpha in sorted(blocks, key=lambda p: (-p[0], p[1])):
        system.extend((n, k) for k in range(alpha, 0, -1))
    system.extend((k, 1) for k in sorted(singles))
    return system


def model_upper_bound(state) -> int:
    """1 + f of the state's system: the root plus the modelled search states."""
    system = model_system(state)
    return 1 + (f_variadic(system) if system else 0)
