"""Decision-correctness ground truth, confusion metrics and cost aggregates.

A local decision is right when the local execution cost undercuts what the
offload would have cost against the would-be peer; the four confusion
counters and the accuracy/precision/recall/F suite follow from there.  Run
cost averages the realized local costs and doubled communication costs
over all handled tasks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Decision


class NoDataError(ValueError):
    """Raised when a metric is requested over zero classified decisions."""


class UndefinedBaselineError(ValueError):
    """Raised when a relative difference is taken against a zero baseline."""


#: Marker for sub-metrics whose denominator is empty (never silently 0 or 1).
UNDEFINED = None


@dataclass
class ConfusionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def add(self, label: str) -> None:
        setattr(self, label, getattr(self, label) + 1)

    def merge(self, other: "ConfusionCounts") -> None:
        self.tp += other.tp
        self.tn += other.tn
        self.fp += other.fp
        self.fn += other.fn


@dataclass
class CostLedger:
    """Realized costs of an experiment: lc per local task, cc per offload."""

    local_costs: list = field(default_factory=list)
    offload_ccs: list = field(default_factory=list)

    @property
    def lambda1(self) -> int:
        return len(self.local_costs)

    @property
    def lambda2(self) -> int:
        return len(self.offload_ccs)


def local_cost(l: float, b: float) -> float:
    """Cost of executing a task locally: b * l."""
    return b * l


def offload_cost(l: float, b: float, cc: float) -> float:
    """Cost of offloading a task: b * l plus twice the communication cost."""
    if cc <= 0.0:
        raise ValueError(f"communication cost must be > 0, got {cc}")
    return b * l + 2.0 * cc


def classify_decision(decision: Decision, lc: float, oc: float) -> str:
    """Confusion label for one decision given both costs.

    Exact cost ties count the decision as correct; either choice is
    cost-neutral there.
    """
    if decision == Decision.LOCAL:
        return "tp" if lc <= oc else "fp"
    return "tn" if lc >= oc else "fn"


def aprf(c: ConfusionCounts):
    """(accuracy, precision, recall, F-measure) from the counters.

    Sub-metrics with an empty denominator come back as UNDEFINED rather
    than a fabricated 0 or 1.
    """
    if c.total == 0:
        raise NoDataError("no classified decisions")
    a = (c.tp + c.tn) / c.total
    p = c.tp / (c.tp + c.fp) if c.tp + c.fp > 0 else UNDEFINED
    r = c.tp / (c.tp + c.fn) if c.tp + c.fn > 0 else UNDEFINED
    if p is UNDEFINED or r is UNDEFINED or p + r == 0.0:
        f = UNDEFINED
    else:
        f = 2.0 * p * r / (p + r)
    return a, p, r, f


def run_cost(ledger: CostLedger) -> float:
    """Mean cost per handled task: (sum lc + 2 * sum cc) / (l1 + l2)."""
    total = ledger.lambda1 + ledger.lambda2
    if total == 0:
        raise NoDataError("cost ledger is empty")
    return (sum(ledger.local_costs) + 2.0 * sum(ledger.offload_ccs)) / total


def average_cost(costs) -> float:
    """Mean run cost over a campaign's experiments."""
    costs = list(costs)
    if not costs:
        raise NoDataError("no experiment costs")
    return sum(costs) / len(costs)


def relative_difference(ac_model: float, ac_alternative: float) -> float:
    """Percent difference of the model's average cost vs an alternative.

    Negative means the model is cheaper than the alternative.
    """
    if ac_alternative <= 0.0:
        raise UndefinedBaselineError("alternative average cost must be > 0")
    return (ac_model - ac_alternative) / ac_alternative * 100.0
