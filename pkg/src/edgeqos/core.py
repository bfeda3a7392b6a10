"""Domain types shared by all modules: tasks, nodes, topology, epochs, decisions."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class ConfigurationError(ValueError):
    """Raised when a configuration value is outside its allowed range."""


class Decision(str, Enum):
    LOCAL = "local"
    OFFLOAD = "offload"


#: Virtual destination used when no peer node is eligible.
CLOUD = -1
#: Destination marker for tasks that were never offloaded.
NONE = -2


@dataclass
class Task:
    """A unit of work described by data dependency, load and deadline scores.

    All three characteristics live in [0, 1]; a low ``dl`` means a more
    urgent deadline.
    """

    id: int
    dd: float
    l: float
    dl: float
    arrival_time: int
    origin_node: int
    # runtime bookkeeping
    enqueued_tick: int = 0
    offloaded: bool = False
    reoffloadable: bool = True

    def __post_init__(self):
        for name in ("dd", "l", "dl"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"task {name} must be in [0,1], got {v}")
        if self.arrival_time < 0:
            raise ConfigurationError("arrival_time must be nonnegative")


@dataclass
class EpochStats:
    """Aggregates of one completed batch of tasks."""

    rt: float
    tp: float
    task_count: int
    duration: int


@dataclass
class DecisionRecord:
    """One local/offload decision with the costs that judge it."""

    task_id: int
    node_id: int
    decision: Decision
    destination: int  # node id, CLOUD or NONE
    lc: float
    oc: float
    tick: int

    def __post_init__(self):
        if self.decision == Decision.OFFLOAD and self.destination == NONE:
            raise ValueError("offload decision requires a destination")


class Topology:
    """Weighted undirected graph of node ids with per-edge communication costs.

    Costs are symmetric and strictly positive; the graph is connected by
    construction.  An optional cloud cost covers the virtual Cloud
    destination used when a node has no eligible peer.
    """

    def __init__(self, node_ids, edges, cloud_cc: float | None = None):
        self.node_ids = set(node_ids)
        self._edges: dict[tuple[int, int], float] = {}
        self._neighbors: dict[int, list[int]] = {i: [] for i in self.node_ids}
        self._sorted: dict[int, list[int]] = {}
        for (i, k), cost in edges.items():
            self.add_edge(i, k, cost)
        self.cloud_cc = cloud_cc

    def add_edge(self, i: int, k: int, cost: float) -> None:
        if cost <= 0.0:
            raise ConfigurationError(f"communication cost must be > 0, got {cost}")
        if i == k:
            raise ConfigurationError("self edges are not allowed")
        key = (min(i, k), max(i, k))
        if key not in self._edges:
            self._neighbors[i].append(k)
            self._neighbors[k].append(i)
            self._sorted.clear()
        self._edges[key] = cost

    def cc(self, i: int, k: int) -> float:
        return self._edges[(min(i, k), max(i, k))]

    def has_edge(self, i: int, k: int) -> bool:
        return (min(i, k), max(i, k)) in self._edges

    def neighbors(self, i: int) -> list[int]:
        cached = self._sorted.get(i)
        if cached is None:
            cached = self._sorted[i] = sorted(self._neighbors[i])
        return cached

    @property
    def edges(self) -> dict[tuple[int, int], float]:
        return dict(self._edges)

    def is_connected(self) -> bool:
        if not self.node_ids:
            return False
        start = next(iter(self.node_ids))
        seen = {start}
        frontier = deque([start])
        while frontier:
            i = frontier.popleft()
            for k in self._neighbors[i]:
                if k not in seen:
                    seen.add(k)
                    frontier.append(k)
        return seen == self.node_ids


@dataclass
class NodeState:
    """An edge node: FIFO task queue, capacity and epoch bookkeeping.

    The head of the queue is the task currently being executed; it is never
    preempted.  ``rt_window`` and ``tp_window`` are attached by the
    simulator (see :mod:`edgeqos.qos`).
    """

    id: int
    capacity_L: float
    queue: deque = field(default_factory=deque)
    rt_window: object = None
    tp_window: object = None
    # epoch accumulator: tasks completed this epoch, sum of their rt, start tick
    epoch_count: int = 0
    epoch_rt_sum: float = 0.0
    epoch_start: int = 0
    # running maximum of raw response times, used as the rt normalizer
    rt_max: float = 0.0
    head_remaining: int | None = None
    fresh_epoch: bool = False
    # counters
    generated: int = 0
    completed: int = 0
    offloaded_out: int = 0

    def queue_load(self) -> float:
        return sum(t.l for t in self.queue)


def generate_task(rng: np.random.Generator, tick: int, task_id: int = 0,
                  origin_node: int = 0) -> Task:
    """Draw a task with dd, l, dl independently uniform on [0, 1)."""
    dd, l, dl = rng.random(3)
    return Task(id=task_id, dd=float(dd), l=float(l), dl=float(dl),
                arrival_time=tick, origin_node=origin_node, enqueued_tick=tick)


def build_topology(n: int, kind: str, rng: np.random.Generator,
                   cloud_cc: float | None = None) -> Topology:
    """Build a connected topology of ``n`` nodes with uniform costs in (0, 1].

    ``kind`` is ``"complete"`` or ``"random:<p>"``.  Random graphs are made
    connected by first laying down a random spanning tree, then adding each
    remaining edge with probability p.
    """
    if n < 2:
        raise ConfigurationError(f"topology needs at least 2 nodes, got {n}")

    def draw_cc() -> float:
        # 1 - U[0,1) lands in (0, 1], keeping costs strictly positive
        return 1.0 - float(rng.random())

    topo = Topology(range(n), {}, cloud_cc=cloud_cc)
    if kind == "complete":
        for i in range(n):
            for k in range(i + 1, n):
                topo.add_edge(i, k, draw_cc())
        return topo

    if kind.startswith("random:"):
        try:
            p = float(kind.split(":", 1)[1])
        except ValueError:
            raise ConfigurationError(f"bad topology kind {kind!r}")
        if not 0.0 < p <= 1.0:
            raise ConfigurationError(f"edge probability must be in (0,1], got {p}")
        # random spanning tree: attach every node to a random earlier one
        for i in range(1, n):
            k = int(rng.integers(0, i))
            topo.add_edge(i, k, draw_cc())
        for i in range(n):
            for k in range(i + 1, n):
                if not topo.has_edge(i, k) and rng.random() < p:
                    topo.add_edge(i, k, draw_cc())
        return topo

    raise ConfigurationError(f"unknown topology kind {kind!r}")


def service_ticks(load: float, service_scale: float) -> int:
    """Ticks the head task occupies the node: ceil(load * scale), at least 1."""
    return max(1, math.ceil(load * service_scale))
