"""Exact minimizers for the feature-selection objective.

Two routes with different scaling: vectorized full enumeration (reference
values, n <= 24) and depth-first branch and bound with an admissible
term-wise bound (n <= 30, optionally stopping at a relative optimality gap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problem import FeatureSelectionInstance

BRUTE_FORCE_MAX_N = 24
BRANCH_AND_BOUND_MAX_N = 30
_CHUNK = 1 << 18  # enumeration block size; bounds peak memory


@dataclass(frozen=True)
class ExactSolution:
    """Minimizer (lowest-index tie-break), its value, and solver bookkeeping.

    gap_at_termination is the relative optimality gap still open when the
    solver stopped (0.0 when it proved optimality); nodes counts enumerated
    states for brute force and visited search nodes for branch and bound.
    """

    minimizer: tuple[int, ...]
    value: float
    method: str
    gap_at_termination: float
    nodes: int


def _terms(inst: FeatureSelectionInstance) -> tuple[np.ndarray, list[tuple[int, int, float]]]:
    """Signed objective terms: linear vector w (w_i = -(1-a) Q_ii) and
    (i, j, a*Q_ij) pair triples."""
    a = inst.alpha
    w = -(1.0 - a) * inst.q.diagonal()
    pairs = [(i, j, a * v) for (i, j, v) in inst.q.offdiagonal()]
    return w, pairs


def brute_force_min(inst: FeatureSelectionInstance) -> ExactSolution:
    """Global minimum by full enumeration of all 2**n bitstrings.

    Ties resolve to the lowest basis index (qubit 0 = LSB), i.e. the first
    bitstring in counting order that attains the minimum.
    """
    n = inst.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"n={n} exceeds the enumeration cap of {BRUTE_FORCE_MAX_N}")
    w, pairs = _terms(inst)
    best_val = math.inf
    best_idx = 0
    for start in range(0, 1 << n, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, 1 << n))
        bits = ((idx[:, None] >> np.arange(n)) & 1).astype(np.float64)
        vals = bits @ w
        for i, j, c in pairs:
            vals += c * bits[:, i] * bits[:, j]
        k = int(np.argmin(vals))  # argmin takes the first occurrence: lowest index
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_idx = int(idx[k])
    x = tuple((best_idx >> i) & 1 for i in range(n))
    return ExactSolution(
        minimizer=x, value=best_val, method="brute-force",
        gap_at_termination=0.0, nodes=1 << n,
    )


def compute_gap(z_bound: float, z_best: float) -> float:
    """Relative optimality gap |z_bound - z_best| / |z_best|.

    Undefined for incumbents at (numerical) zero; callers must handle that
    case themselves (branch and bound falls back to exhaustion).
    """
    if abs(z_best) < 1e-12:
        raise ValueError("optimality gap is undefined for an incumbent at zero")
    return abs(z_bound - z_best) / abs(z_best)


def branch_and_bound_min(
    inst: FeatureSelectionInstance, gap_tolerance: float = 0.0
) -> ExactSolution:
    """Depth-first branch and bound over x_0, x_1, ... in index order.

    The bound at a node sums the decided terms plus min(0, contribution) of
    every term that still involves a free variable; each term is relaxed
    independently, so the bound never exceeds the true subtree minimum.
    With gap_tolerance == 0 the returned value equals the brute-force
    minimum; with a positive tolerance the search stops as soon as the
    relative gap between the incumbent and the best open bound is within it.
    """
    n = inst.n
    if n > BRANCH_AND_BOUND_MAX_N:
        raise ValueError(f"n={n} exceeds the branch-and-bound cap of {BRANCH_AND_BOUND_MAX_N}")
    if gap_tolerance < 0:
        raise ValueError("gap_tolerance must be >= 0")
    w, pairs = _terms(inst)
    # pair_by_late[j] lists (i, c) with i < j: when x_j is the last of the two
    # to be decided, term c*x_i*x_j becomes decided.
    pair_by_late: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i, j, c in pairs:
        pair_by_late[j].append((i, c))

    def greedy_assignment() -> tuple[int, ...]:
        x = [0] * n
        for d in range(n):
            g = w[d] + sum(c for i, c in pair_by_late[d] if x[i])
            x[d] = 1 if g < 0 else 0
        return tuple(x)

    def value_of(x) -> float:
        total = float(np.dot(w, x))
        for i, j, c in pairs:
            if x[i] and x[j]:
                total += c
        return total

    def bound_of(x, depth) -> float:
        """Admissible lower bound for the subtree fixing x[:depth]."""
        total = 0.0
        for i in range(depth):
            if x[i]:
                total += w[i]
        for i in range(depth, n):
            total += min(0.0, w[i])
        for i, j, c in pairs:
            if j < depth:
                if x[i] and x[j]:
                    total += c
            elif i < depth:
                # x_i decided, x_j free: term becomes c*x_i, switchable off.
                total += min(0.0, c * x[i])
            else:
                total += min(0.0, c)
        return total

    incumbent = greedy_assignment()
    z_best = value_of(incumbent)
    nodes = 0
    gap_now = math.inf

    # Stack of (depth, partial assignment, bound at push time). Children are
    # pushed counter-greedy first so the greedy branch pops first.
    root = (0,) * n
    stack: list[tuple[int, tuple[int, ...], float]] = [(0, root, bound_of(root, 0))]
    while stack:
        if abs(z_best) >= 1e-12:
            z_bound = min(min(b for _, _, b in stack), z_best)
            gap_now = compute_gap(z_bound, z_best)
            if gap_now <= gap_tolerance:
                break
        depth, x, bound = stack.pop()
        nodes += 1
        if bound >= z_best:  # cannot strictly improve the incumbent
            continue
        if depth == n:
            # bound at full depth is the exact value
            z_best = bound
            incumbent = x
            continue
        g = w[depth] + sum(c for i, c in pair_by_late[depth] if x[i])
        first = 1 if g < 0 else 0
        for child_bit in (1 - first, first):
            child = x[:depth] + (child_bit,) + x[depth + 1:]
            b = bound_of(child, depth + 1)
            if b < z_best:
                stack.append((depth + 1, child, b))

    if not stack:
        gap_now = 0.0  # search exhausted: optimality proven
    return ExactSolution(
        minimizer=incumbent, value=z_best, method="branch-and-bound",
        gap_at_termination=float(gap_now), nodes=nodes,
    )
