"""Independent reference implementations used as test oracles.

Each one is deliberately naive: exhaustive where the production code is clever.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, product

from hlsynth.dfg import Dfg


def optimal_length(dfg: Dfg, allocation: dict[str, int]) -> int:
    """Minimum schedule length with unit latencies, by exhaustive search over
    every resource-feasible subset of ready operations at every step."""
    ops = [n.id for n in dfg.operations()]
    preds = {n: {e.src for e in dfg.operands(n) if e.src in ops} for n in ops}
    kind = {n: dfg.node(n).kind.value for n in ops}

    @lru_cache(maxsize=None)
    def best(done: frozenset) -> int:
        if len(done) == len(ops):
            return 0
        ready = [n for n in ops if n not in done and preds[n] <= done]
        result = len(ops) + 1
        for r in range(1, len(ready) + 1):
            for pick in combinations(ready, r):
                use: dict[str, int] = {}
                for n in pick:
                    use[kind[n]] = use.get(kind[n], 0) + 1
                if all(use[k] <= allocation[k] for k in use):
                    result = min(result, 1 + best(done | frozenset(pick)))
        return result

    return best(frozenset())


def longest_path(dfg: Dfg, latency: dict[str, int]) -> int:
    """Critical path by enumerating every source-to-sink path."""
    ops = {n.id for n in dfg.operations()}
    succ: dict[int, list[int]] = {n.id: [] for n in dfg.nodes}
    for e in dfg.edges:
        succ[e.src].append(e.dst)

    def walk(n: int) -> int:
        here = latency[dfg.node(n).kind.value] if n in ops else 0
        return here + max((walk(m) for m in succ[n]), default=0)

    return max((walk(n.id) for n in dfg.nodes), default=0)


def max_live(lifetimes: dict[int, tuple[int, int]]) -> int:
    """Largest number of lifetimes covering a single step."""
    if not lifetimes:
        return 0
    lo = min(a for a, _ in lifetimes.values())
    hi = max(b for _, b in lifetimes.values())
    return max(sum(a <= t <= b for a, b in lifetimes.values()) for t in range(lo, hi + 1))


def brute_primes(minterms: set[int], n: int) -> set[tuple[int, int]]:
    """All prime implicants as (mask, value) pairs, by enumerating every cube."""
    cubes = []
    for pattern in product((0, 1, None), repeat=n):
        mask = value = 0
        for bit in pattern:
            mask = (mask << 1) | (bit is not None)
            value = (value << 1) | (bit or 0)
        rows = {r for r in range(1 << n) if r & mask == value}
        if rows <= minterms and rows:
            cubes.append((mask, value, frozenset(rows)))
    return {
        (m, v) for m, v, rows in cubes
        if not any(rows < other for _, _, other in cubes)
    }
