"""Discrete-event engine for the edge ecosystem.

Synchronous global ticks: tasks arrive in small batches, each node serves
its queue head without preemption, epochs of completed tasks feed the QoS
windows, and whenever the fused violation probability crosses the trigger
a node re-plans its queue (knapsack under the model, eviction under the
baselines) and ships the rejected tasks to peers.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (CLOUD, NONE, ConfigurationError, Decision, DecisionRecord,
                   NodeState, Topology, build_topology, generate_task,
                   service_ticks)
from .doe import (expert_rule_batch, forward_batch, generate_expert_dataset,
                  init_network, train)
from .knapsack import KnapsackInstance, solve
from .metrics import (ConfusionCounts, CostLedger, NoDataError, aprf,
                      average_cost, classify_decision, local_cost,
                      offload_cost, run_cost)
from .policies import BASELINE_NONE, PolicyConfig, baseline_evict, select_destination
from .qos import QosConfig, fuse_probabilities, violation_probabilities

NODE_COUNTS = (5, 10, 20, 50, 100)


@dataclass
class SimConfig:
    """Everything one experiment campaign needs, with experiment defaults."""

    n_nodes: int = 20
    itrs: int = 100
    n_experiments: int = 100
    seed: int = 42
    topology_kind: str = "complete"
    qos: QosConfig = field(default_factory=QosConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    b: float = 0.5
    arrival_min: int = 1
    arrival_max: int = 1
    arrival_rate_min: float = 0.26
    arrival_rate_max: float = 0.62
    service_scale: float = 5.0
    transit_scale: float = 3.0
    capacity_min: float = 5.0
    capacity_max: float = 10.0
    cloud_cc: float = 0.8
    knapsack_resolution: float = 0.01
    subtract_running: bool = True
    doe_source: str = "ann"  # "ann" or "rule"
    doe_hidden: int = 8
    doe_rows: int = 5000
    doe_epochs: int = 6000
    doe_lr: float = 0.5

    def validate(self) -> None:
        if self.n_nodes < 2:
            raise ConfigurationError("n_nodes must be >= 2")
        if self.itrs < 1:
            raise ConfigurationError("itrs must be >= 1")
        if self.n_experiments < 1:
            raise ConfigurationError("n_experiments must be >= 1")
        if not 0.0 <= self.b <= 1.0:
            raise ConfigurationError(f"b must be in [0,1], got {self.b}")
        if self.arrival_min < 0 or self.arrival_max < self.arrival_min:
            raise ConfigurationError("arrival range must satisfy 0 <= min <= max")
        if not 0.0 <= self.arrival_rate_min <= self.arrival_rate_max <= 1.0:
            raise ConfigurationError("arrival rates must satisfy 0 <= min <= max <= 1")
        if self.service_scale <= 0.0:
            raise ConfigurationError("service_scale must be > 0")
        if self.transit_scale < 0.0:
            raise ConfigurationError("transit_scale must be >= 0")
        if not 5.0 <= self.capacity_min <= self.capacity_max <= 10.0:
            raise ConfigurationError("capacity range must lie within [5,10]")
        if self.cloud_cc <= 0.0:
            raise ConfigurationError("cloud_cc must be > 0")
        if self.doe_source not in ("ann", "rule"):
            raise ConfigurationError(f"unknown doe_source {self.doe_source!r}")


@dataclass
class ExperimentResult:
    """Per-run record of decisions, confusion counts and realized costs."""

    index: int
    confusion: ConfusionCounts
    ledger: CostLedger
    decisions: list
    cost: float | None
    offload_pct: float
    generated: int
    completed: int
    offloaded: int
    triggers: int


@dataclass
class CampaignResult:
    """Aggregates over a campaign's independent experiments."""

    n_nodes: int
    itrs: int
    policy: PolicyConfig
    seed: int
    accuracy: float | None
    precision: float | None
    recall: float | None
    f_measure: float | None
    avg_cost: float | None
    offload_pct: float
    costs: list = field(default_factory=list)
    confusion: ConfusionCounts = field(default_factory=ConfusionCounts)


class Simulation:
    """Mutable state of one experiment run; one instance per run."""

    def __init__(self, cfg: SimConfig, experiment_index: int, doe_scorer):
        cfg.validate()
        self.cfg = cfg
        self.doe_scorer = doe_scorer
        base = np.random.SeedSequence(cfg.seed ^ experiment_index)
        ss_topo, ss_arrival, ss_task, ss_policy = base.spawn(4)
        self.rng_topology = np.random.default_rng(ss_topo)
        self.rng_arrivals = np.random.default_rng(ss_arrival)
        self.rng_tasks = np.random.default_rng(ss_task)
        self.rng_policy = np.random.default_rng(ss_policy)

        self.topology = build_topology(cfg.n_nodes, cfg.topology_kind,
                                       self.rng_topology, cloud_cc=cfg.cloud_cc)
        self.nodes: dict[int, NodeState] = {}
        for node_id in range(cfg.n_nodes):
            cap = float(self.rng_topology.uniform(cfg.capacity_min, cfg.capacity_max))
            node = NodeState(id=node_id, capacity_L=cap,
                             rt_window=cfg.qos.make_window(),
                             tp_window=cfg.qos.make_window())
            self.nodes[node_id] = node
        # heterogeneous demand: each node keeps its own arrival intensity
        self.arrival_rates = {
            nid: float(self.rng_topology.uniform(cfg.arrival_rate_min,
                                                 cfg.arrival_rate_max))
            for nid in range(cfg.n_nodes)}
        self.node_order = sorted(self.nodes)

        self.tick = 0
        self.task_counter = 0
        self.transit: dict[int, list] = {}
        self.inbound_load = {nid: 0.0 for nid in self.node_order}
        self.queue_load = {nid: 0.0 for nid in self.node_order}
        self.decision_log: list[DecisionRecord] = []
        self.ledger = CostLedger()
        self.confusion = ConfusionCounts()
        self.generated_total = 0
        self.completed_total = 0
        self.offloaded_total = 0
        self.in_transit = 0
        self.triggers = 0

    # -- tick phases -------------------------------------------------------

    def step(self) -> None:
        """Advance the whole ecosystem by one tick."""
        tick = self.tick
        self._deliver_transits(tick)
        self._arrivals(tick)
        self._serve(tick)
        self._evaluate_triggers(tick)
        self.tick += 1

    def _deliver_transits(self, tick: int) -> None:
        for dest_id, task in self.transit.pop(tick, []):
            task.enqueued_tick = tick
            task.reoffloadable = False
            self.nodes[dest_id].queue.append(task)
            self.queue_load[dest_id] += task.l
            self.inbound_load[dest_id] -= task.l
            self.in_transit -= 1

    def _arrivals(self, tick: int) -> None:
        cfg = self.cfg
        fixed_batch = cfg.arrival_min == cfg.arrival_max
        for node_id in self.node_order:
            if self.rng_arrivals.random() >= self.arrival_rates[node_id]:
                continue
            if fixed_batch:
                batch = cfg.arrival_min
            else:
                batch = int(self.rng_arrivals.integers(cfg.arrival_min,
                                                       cfg.arrival_max + 1))
            node = self.nodes[node_id]
            for _ in range(batch):
                self.task_counter += 1
                task = generate_task(self.rng_tasks, tick,
                                     task_id=self.task_counter, origin_node=node_id)
                node.queue.append(task)
                self.queue_load[node_id] += task.l
                node.generated += 1
                self.generated_total += 1

    def _serve(self, tick: int) -> None:
        for node_id in self.node_order:
            node = self.nodes[node_id]
            if not node.queue:
                continue
            if node.head_remaining is None:
                node.head_remaining = service_ticks(node.queue[0].l,
                                                    self.cfg.service_scale)
            node.head_remaining -= 1
            if node.head_remaining <= 0:
                task = node.queue.popleft()
                self.queue_load[node_id] -= task.l
                node.head_remaining = None
                self._complete(node, task, tick)

    def _complete(self, node: NodeState, task, tick: int) -> None:
        cfg = self.cfg
        raw_rt = float(tick - task.enqueued_tick + 1)
        node.rt_max = max(node.rt_max, raw_rt)
        node.epoch_count += 1
        node.epoch_rt_sum += raw_rt / node.rt_max
        node.completed += 1
        self.completed_total += 1
        if not task.offloaded:
            self.ledger.local_costs.append(local_cost(task.l, cfg.b))
        if node.epoch_count >= cfg.qos.epoch_batch:
            duration = max(1, tick - node.epoch_start)
            node.rt_window.push(node.epoch_rt_sum / node.epoch_count)
            node.tp_window.push(min(node.epoch_count / duration / cfg.qos.max_tp, 1.0))
            node.epoch_count = 0
            node.epoch_rt_sum = 0.0
            node.epoch_start = tick
            node.fresh_epoch = True

    def _evaluate_triggers(self, tick: int) -> None:
        cfg = self.cfg
        for node_id in self.node_order:
            node = self.nodes[node_id]
            if not node.fresh_epoch:
                continue
            node.fresh_epoch = False
            probs = violation_probabilities(node.rt_window, node.tp_window, cfg.qos)
            if probs is None:
                continue
            p_qos = fuse_probabilities(probs[0], probs[1], cfg.qos.w_rt, cfg.qos.w_tp)
            if p_qos >= cfg.qos.p_trig:
                self.triggers += 1
                self._decide(node, tick)

    # -- decisions ---------------------------------------------------------

    def _decide(self, node: NodeState, tick: int) -> None:
        """Decision A (which tasks leave) and Decision B (where they go)."""
        cfg = self.cfg
        queue = list(node.queue)
        tail = queue[1:]  # the running head is never preempted
        if not tail:
            return
        eligible = [t for t in tail if t.reoffloadable]
        if not eligible:
            return

        if cfg.policy.baseline == BASELINE_NONE:
            committed = sum(t.l for t in tail if not t.reoffloadable)
            if cfg.subtract_running:
                committed += queue[0].l
            capacity = node.capacity_L - committed
            X = np.array([[t.dd, t.l, t.dl] for t in eligible], dtype=float)
            scores = self.doe_scorer(X)
            items = [(t.id, float(s), t.l) for t, s in zip(eligible, scores)]
            solution = solve(KnapsackInstance(items=items, capacity=capacity,
                                              resolution=cfg.knapsack_resolution))
            offload_ids = set(solution.offload_set)
        else:
            evicted = baseline_evict(eligible, cfg.policy.baseline,
                                     cfg.policy.ceiling, self.rng_policy)
            offload_ids = {t.id for t in evicted}

        loads = {nid: self.queue_load[nid] + self.inbound_load[nid]
                 for nid in self.node_order}
        # the load view only moves when an offload commits, so the selected
        # destination can be reused for every decision in between
        dest = select_destination(node.id, self.topology, loads,
                                  cfg.policy.destination_rule)
        cc = cfg.cloud_cc if dest == CLOUD else self.topology.cc(node.id, dest)
        for task in eligible:
            lc = local_cost(task.l, cfg.b)
            oc = offload_cost(task.l, cfg.b, cc)
            if task.id in offload_ids:
                self.confusion.add(classify_decision(Decision.OFFLOAD, lc, oc))
                self.decision_log.append(DecisionRecord(
                    task.id, node.id, Decision.OFFLOAD, dest, lc, oc, tick))
                self.ledger.offload_ccs.append(cc)
                task.offloaded = True
                delay = max(1, math.ceil(cc * cfg.transit_scale))
                self.transit.setdefault(tick + delay, []).append((dest, task))
                loads[dest] += task.l
                if dest != CLOUD:
                    self.inbound_load[dest] += task.l
                self.queue_load[node.id] -= task.l
                node.offloaded_out += 1
                self.offloaded_total += 1
                self.in_transit += 1
                dest = select_destination(node.id, self.topology, loads,
                                          cfg.policy.destination_rule)
                cc = (cfg.cloud_cc if dest == CLOUD
                      else self.topology.cc(node.id, dest))
            else:
                self.confusion.add(classify_decision(Decision.LOCAL, lc, oc))
                self.decision_log.append(DecisionRecord(
                    task.id, node.id, Decision.LOCAL, NONE, lc, oc, tick))
        if offload_ids:
            node.queue = deque(t for t in node.queue if t.id not in offload_ids)

    def finalize_costs(self) -> None:
        """Commit the local cost of tasks still waiting when the run ends.

        A task that was never offloaded is committed to local execution the
        moment it stays, so its b*l is charged even if the run stops before
        it completes; otherwise a policy could look cheap by letting queues
        balloon.  Offloaded tasks were already charged at offload time.
        """
        for node in self.nodes.values():
            for task in node.queue:
                if not task.offloaded:
                    self.ledger.local_costs.append(local_cost(task.l, self.cfg.b))

    # -- invariants --------------------------------------------------------

    def conservation_holds(self) -> bool:
        queued = sum(len(n.queue) for n in self.nodes.values())
        return self.generated_total == self.completed_total + queued + self.in_transit


def _train_default_network(cfg: SimConfig):
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0xD0E]))
    data = generate_expert_dataset(cfg.doe_rows, rng)
    net = init_network(rng, hidden=cfg.doe_hidden)
    return train(net, data, epochs=cfg.doe_epochs, lr=cfg.doe_lr, rng=rng)


def build_scorer(cfg: SimConfig, doe_net=None):
    """Batch scorer mapping an (n, 3) characteristics matrix to DoE values."""
    if cfg.doe_source == "rule":
        return expert_rule_batch
    net = doe_net if doe_net is not None else _train_default_network(cfg)
    return lambda X: forward_batch(net, X)


def run_experiment(cfg: SimConfig, experiment_index: int,
                   doe_scorer=None) -> ExperimentResult:
    """One seeded run of ``cfg.itrs`` ticks from a fresh ecosystem."""
    if doe_scorer is None:
        doe_scorer = build_scorer(cfg)
    sim = Simulation(cfg, experiment_index, doe_scorer)
    for _ in range(cfg.itrs):
        sim.step()
    sim.finalize_costs()
    try:
        cost = run_cost(sim.ledger)
    except NoDataError:
        cost = None
    offload_pct = (100.0 * sim.offloaded_total / sim.generated_total
                   if sim.generated_total else 0.0)
    return ExperimentResult(
        index=experiment_index, confusion=sim.confusion, ledger=sim.ledger,
        decisions=sim.decision_log, cost=cost, offload_pct=offload_pct,
        generated=sim.generated_total, completed=sim.completed_total,
        offloaded=sim.offloaded_total, triggers=sim.triggers)


def run_campaign(cfg: SimConfig, doe_scorer=None) -> CampaignResult:
    """E independent experiments aggregated into campaign-level metrics."""
    cfg.validate()
    if doe_scorer is None:
        doe_scorer = build_scorer(cfg)
    confusion = ConfusionCounts()
    costs = []
    generated = 0
    offloaded = 0
    for index in range(cfg.n_experiments):
        res = run_experiment(cfg, index, doe_scorer)
        confusion.merge(res.confusion)
        if res.cost is not None:
            costs.append(res.cost)
        generated += res.generated
        offloaded += res.offloaded
    if confusion.total > 0:
        a, p, r, f = aprf(confusion)
    else:
        a = p = r = f = None
    avg = average_cost(costs) if costs else None
    # pooled over the campaign: per-run ratios carry a small-sample bias
    offload_pct = 100.0 * offloaded / generated if generated else 0.0
    return CampaignResult(
        n_nodes=cfg.n_nodes, itrs=cfg.itrs, policy=replace(cfg.policy),
        seed=cfg.seed, accuracy=a, precision=p, recall=r, f_measure=f,
        avg_cost=avg, offload_pct=offload_pct,
        costs=costs, confusion=confusion)
