"""0-1 knapsack selection of tasks for local execution.

Maximizes the summed degree of execution of the kept tasks subject to the
node's load capacity.  Loads are continuous, so they are discretized by
rounding UP to a fixed resolution grid before the exact dynamic program
runs; ceiling keeps every returned selection feasible for the true loads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class OracleSizeError(ValueError):
    """Raised when the exhaustive oracle is asked for too many items."""


@dataclass
class KnapsackInstance:
    """Items of (task_id, doe, load) with a capacity and a load grid step."""

    items: list  # of (task_id, doe, load)
    capacity: float
    resolution: float = 0.01

    def __post_init__(self):
        # zero capacity is legal, it just offloads everything
        self.capacity = max(float(self.capacity), 0.0)
        if self.resolution <= 0.0:
            raise ValueError("resolution must be > 0")

    def discretized(self):
        """(ids, values, integer weights, integer capacity), sorted by id.

        Weights are ceiled onto the grid so any selection that fits the
        integer capacity also fits the true capacity.
        """
        items = sorted(self.items, key=lambda it: it[0])
        ids = [it[0] for it in items]
        values = np.array([it[1] for it in items], dtype=float)
        weights = np.array(
            [max(0, math.ceil(it[2] / self.resolution - 1e-9)) for it in items],
            dtype=np.int64)
        cap = int(math.floor(self.capacity / self.resolution + 1e-9))
        return ids, values, weights, max(cap, 0)


@dataclass
class KnapsackSolution:
    """Partition of the items into a kept set and an offload set."""

    local_set: tuple
    offload_set: tuple
    objective: float
    used_load: float

    @classmethod
    def empty(cls) -> "KnapsackSolution":
        return cls(local_set=(), offload_set=(), objective=0.0, used_load=0.0)


def _finish(instance: KnapsackInstance, ids, chosen_idx) -> KnapsackSolution:
    chosen = set(chosen_idx)
    local, offload = [], []
    objective = 0.0
    used = 0.0
    by_id = {it[0]: it for it in instance.items}
    for j, task_id in enumerate(ids):
        if j in chosen:
            local.append(task_id)
            objective += by_id[task_id][1]
            used += by_id[task_id][2]
        else:
            offload.append(task_id)
    return KnapsackSolution(local_set=tuple(local), offload_set=tuple(offload),
                            objective=objective, used_load=used)


def solve(instance: KnapsackInstance) -> KnapsackSolution:
    """Exact dynamic program over the discretized loads.

    When several selections reach the optimal objective the backtracking
    drops the largest-id items first, preferring sets of small task ids.
    """
    if not instance.items:
        return KnapsackSolution.empty()
    ids, values, weights, cap = instance.discretized()
    k = len(ids)
    # dp[u]: best value with capacity u; keep[j][u]: item j taken at u
    dp = np.zeros(cap + 1, dtype=float)
    keep = np.zeros((k, cap + 1), dtype=bool)
    for j in range(k):
        w, v = int(weights[j]), values[j]
        if w > cap:
            continue
        if w == 0:
            if v > 0.0:
                dp += v
                keep[j, :] = True
            continue
        cand = dp[:-w] + v
        better = cand > dp[w:]
        keep[j, w:] = better
        np.copyto(dp[w:], cand, where=better)
    # backtrack from the last item: inclusion only where strictly better
    u = cap
    chosen = []
    for j in range(k - 1, -1, -1):
        if keep[j, u]:
            chosen.append(j)
            u -= int(weights[j])
    return _finish(instance, ids, chosen)


def brute_force(instance: KnapsackInstance) -> KnapsackSolution:
    """Exhaustive enumeration over the same discretized loads.

    Differential-test oracle for solve(); limited to 20 items.  Value sums
    are accumulated item by item in id order, matching the DP's addition
    order so objectives agree exactly, not just approximately.
    """
    k = len(instance.items)
    if k > 20:
        raise OracleSizeError(f"oracle limited to 20 items, got {k}")
    if k == 0:
        return KnapsackSolution.empty()
    ids, values, weights, cap = instance.discretized()
    n_masks = 1 << k
    masks = np.arange(n_masks, dtype=np.int64)
    total_v = np.zeros(n_masks, dtype=float)
    total_w = np.zeros(n_masks, dtype=np.int64)
    for j in range(k):
        has = ((masks >> j) & 1).astype(bool)
        total_v[has] += values[j]
        total_w[has] += weights[j]
    feasible = total_w <= cap
    best = np.max(total_v[feasible])
    tied = np.flatnonzero(feasible & (total_v == best))
    if len(tied) > 1:
        # lexicographically smallest local_set by task id
        def as_tuple(mask):
            return tuple(j for j in range(k) if (mask >> j) & 1)
        winner = min((as_tuple(int(m)) for m in tied))
    else:
        winner = tuple(j for j in range(k) if (int(tied[0]) >> j) & 1)
    return _finish(instance, ids, winner)
