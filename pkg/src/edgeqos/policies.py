"""Destination selection and the baseline eviction policies.

Decision B picks the peer that hosts an offloaded task, either the least
loaded neighbor or the one with the cheapest link.  The Random, Last and
Greedy baselines replace the knapsack for comparison runs and are capped
by an offload ceiling per trigger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CLOUD, Topology

MIN_LOAD = "min_load"
MIN_COST = "min_cost"

BASELINE_NONE = "none"
RANDOM = "random"
LAST = "last"
GREEDY = "greedy"

_BASELINES = (BASELINE_NONE, RANDOM, LAST, GREEDY)


@dataclass
class PolicyConfig:
    """Which eviction policy runs and where evicted tasks go.

    Baselines always send tasks to the least-loaded peer, so a non-none
    baseline forces the min-load destination rule.
    """

    destination_rule: str = MIN_LOAD
    baseline: str = BASELINE_NONE
    ceiling: float = 0.10

    def __post_init__(self):
        if self.destination_rule not in (MIN_LOAD, MIN_COST):
            raise ValueError(f"unknown destination rule {self.destination_rule!r}")
        if self.baseline not in _BASELINES:
            raise ValueError(f"unknown baseline {self.baseline!r}")
        if not 0.0 < self.ceiling <= 1.0:
            raise ValueError(f"ceiling must be in (0,1], got {self.ceiling}")
        if self.baseline != BASELINE_NONE:
            self.destination_rule = MIN_LOAD


def select_destination(origin: int, topology: Topology, loads: dict,
                       rule: str = MIN_LOAD) -> int:
    """Peer node for an offloaded task, or CLOUD when no peer exists.

    Ties are broken toward the smallest node id, which the sorted neighbor
    list provides for free.
    """
    neighbors = topology.neighbors(origin)
    if not neighbors:
        return CLOUD
    if rule == MIN_LOAD:
        best, best_load = neighbors[0], loads.get(neighbors[0], 0.0)
        for k in neighbors[1:]:
            load = loads.get(k, 0.0)
            if load < best_load:
                best, best_load = k, load
        return best
    if rule == MIN_COST:
        best, best_cc = neighbors[0], topology.cc(origin, neighbors[0])
        for k in neighbors[1:]:
            cost = topology.cc(origin, k)
            if cost < best_cc:
                best, best_cc = k, cost
        return best
    raise ValueError(f"unknown destination rule {rule!r}")


def baseline_evict(queue, baseline: str, ceiling: float,
                   rng: np.random.Generator) -> list:
    """Tasks a baseline policy offloads from the waiting queue.

    ``queue`` must already exclude the running head task.  The eviction
    count is floor(ceiling * len(queue)), so short queues evict nothing.
    """
    count = math.floor(ceiling * len(queue))
    if count <= 0 or baseline == BASELINE_NONE:
        return []
    tasks = list(queue)
    if baseline == RANDOM:
        picked = rng.choice(len(tasks), size=count, replace=False)
        return [tasks[i] for i in sorted(picked)]
    if baseline == LAST:
        return tasks[-count:]
    if baseline == GREEDY:
        ranked = sorted(tasks, key=lambda t: (-t.l, t.id))
        return ranked[:count]
    raise ValueError(f"unknown baseline {baseline!r}")
