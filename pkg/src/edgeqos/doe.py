"""Degree-of-execution estimation with a three-layer feed-forward network.

The network maps a task's (dd, l, dl) characteristics to a score in (0, 1)
expressing how necessary local execution is.  Training data comes from a
documented monotone rule standing in for expert labels: high data
dependency, low load and a relaxed deadline mean the task should stay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class CorruptedModelError(ValueError):
    """Raised when network weights are not finite."""


class TrainingError(RuntimeError):
    """Raised when the training loss diverges."""


def sigmoid(a):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-a))


def expert_rule(dd: float, l: float, dl: float) -> float:
    """Monotone labeling rule: mean of dd, 1-l and 1-dl, clamped to [0,1]."""
    return min(max((dd + (1.0 - l) + (1.0 - dl)) / 3.0, 0.0), 1.0)


def expert_rule_batch(X: np.ndarray) -> np.ndarray:
    vals = (X[:, 0] + (1.0 - X[:, 1]) + (1.0 - X[:, 2])) / 3.0
    return np.clip(vals, 0.0, 1.0)


@dataclass
class TrainingSet:
    """Rows of ((dd, l, dl), target) pairs as two aligned arrays."""

    inputs: np.ndarray   # (n, 3)
    labels: np.ndarray   # (n,)

    def __len__(self) -> int:
        return len(self.labels)

    def split(self, holdout_fraction: float = 0.2):
        """Leading/trailing split into (train, heldout) sets."""
        cut = int(round(len(self) * (1.0 - holdout_fraction)))
        return (TrainingSet(self.inputs[:cut], self.labels[:cut]),
                TrainingSet(self.inputs[cut:], self.labels[cut:]))


@dataclass
class DoeNetwork:
    """Weights of the 3-input, CC-hidden, 1-output sigmoid network."""

    hidden_weights: np.ndarray   # (CC, M)
    hidden_biases: np.ndarray    # (CC,)
    output_weights: np.ndarray   # (CC,)
    output_bias: float

    @property
    def hidden_units(self) -> int:
        return self.hidden_weights.shape[0]

    @property
    def inputs(self) -> int:
        return self.hidden_weights.shape[1]

    def check_finite(self) -> None:
        if not (np.all(np.isfinite(self.hidden_weights))
                and np.all(np.isfinite(self.hidden_biases))
                and np.all(np.isfinite(self.output_weights))
                and np.isfinite(self.output_bias)):
            raise CorruptedModelError("network weights are not finite")

    def copy(self) -> "DoeNetwork":
        return DoeNetwork(self.hidden_weights.copy(), self.hidden_biases.copy(),
                          self.output_weights.copy(), float(self.output_bias))


def init_network(rng: np.random.Generator, hidden: int = 8, inputs: int = 3) -> DoeNetwork:
    """Uniform [-0.5, 0.5] initialization for run-to-run reproducibility."""
    return DoeNetwork(
        hidden_weights=rng.uniform(-0.5, 0.5, size=(hidden, inputs)),
        hidden_biases=rng.uniform(-0.5, 0.5, size=hidden),
        output_weights=rng.uniform(-0.5, 0.5, size=hidden),
        output_bias=float(rng.uniform(-0.5, 0.5)),
    )


def forward_batch(net: DoeNetwork, X: np.ndarray) -> np.ndarray:
    """Scores for an (n, 3) matrix of task characteristics."""
    net.check_finite()
    z = sigmoid(X @ net.hidden_weights.T + net.hidden_biases)
    return sigmoid(z @ net.output_weights + net.output_bias)


def forward(net: DoeNetwork, dd: float, l: float, dl: float) -> float:
    """Degree of execution for one task; always in (0, 1)."""
    return float(forward_batch(net, np.array([[dd, l, dl]], dtype=float))[0])


def generate_expert_dataset(n_rows: int, rng: np.random.Generator) -> TrainingSet:
    """Uniform inputs on [0,1]^3 labeled by the expert rule."""
    if n_rows < 1:
        raise ValueError("need at least one row")
    X = rng.random((n_rows, 3))
    return TrainingSet(inputs=X, labels=expert_rule_batch(X))


#: Labels are clipped this far away from 0/1 before the logit transform.
LOGIT_CLIP = 0.01


def logit_targets(labels: np.ndarray, clip: float = LOGIT_CLIP) -> np.ndarray:
    p = np.clip(labels, clip, 1.0 - clip)
    return np.log(p / (1.0 - p))


def training_loss(net: DoeNetwork, X: np.ndarray, targets: np.ndarray) -> float:
    """Squared error between the output pre-activation and logit targets.

    Regressing in logit space keeps the output-layer gradient free of the
    vanishing sigmoid-derivative factor, so extreme labels near 0 and 1 are
    actually reached instead of being undershot.
    """
    z = sigmoid(X @ net.hidden_weights.T + net.hidden_biases)
    pre = z @ net.output_weights + net.output_bias
    with np.errstate(over="ignore"):
        return float(np.mean((pre - logit_targets(targets)) ** 2))


def gradients(net: DoeNetwork, X: np.ndarray, targets: np.ndarray):
    """Training-loss gradients for every weight group.

    Returns (loss, grad_hidden_weights, grad_hidden_biases,
    grad_output_weights, grad_output_bias).
    """
    n = len(targets)
    z = sigmoid(X @ net.hidden_weights.T + net.hidden_biases)
    pre = z @ net.output_weights + net.output_bias
    err = pre - logit_targets(targets)
    with np.errstate(over="ignore"):
        loss = float(np.mean(err ** 2))
    # output layer
    go = (2.0 / n) * err
    grad_wo = z.T @ go
    grad_bo = float(np.sum(go))
    # hidden layer
    ga = np.outer(go, net.output_weights) * z * (1.0 - z)
    grad_wh = ga.T @ X
    grad_bh = ga.sum(axis=0)
    return loss, grad_wh, grad_bh, grad_wo, grad_bo


def evaluate_mse(net: DoeNetwork, data: TrainingSet) -> float:
    y = forward_batch(net, data.inputs)
    return float(np.mean((y - data.labels) ** 2))


def train(net: DoeNetwork, data: TrainingSet, epochs: int = 6000,
          lr: float = 0.5, rng: np.random.Generator | None = None) -> DoeNetwork:
    """Full-batch gradient descent on the logit-space loss; returns a copy.

    ``rng`` shuffles the data once up front (full-batch updates make the
    order irrelevant, but the shuffle decouples training from any structure
    in row order).  Raises TrainingError if the loss stops being finite.
    """
    if len(data) == 0:
        raise ValueError("training data is empty")
    if lr <= 0.0:
        raise ValueError("learning rate must be > 0")
    X, t = data.inputs, data.labels
    if rng is not None:
        order = rng.permutation(len(t))
        X, t = X[order], t[order]
    out = net.copy()
    for epoch in range(epochs):
        loss, gwh, gbh, gwo, gbo = gradients(out, X, t)
        if not np.isfinite(loss):
            raise TrainingError(f"loss diverged at epoch {epoch}: {loss}")
        out.hidden_weights -= lr * gwh
        out.hidden_biases -= lr * gbh
        out.output_weights -= lr * gwo
        out.output_bias -= lr * gbo
    return out


def save_network(net: DoeNetwork, path) -> None:
    """Flat text format: header "M CC", then one line per weight row."""
    net.check_finite()
    lines = [f"{net.inputs} {net.hidden_units}"]
    for row in net.hidden_weights:
        lines.append(" ".join(repr(float(v)) for v in row))
    lines.append(" ".join(repr(float(v)) for v in net.hidden_biases))
    lines.append(" ".join(repr(float(v)) for v in net.output_weights))
    lines.append(repr(float(net.output_bias)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_network(path) -> DoeNetwork:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    m, cc = (int(v) for v in lines[0].split())
    if len(lines) != cc + 4:
        raise CorruptedModelError(f"expected {cc + 4} lines, got {len(lines)}")
    rows = [np.array([float(v) for v in ln.split()]) for ln in lines[1:]]
    net = DoeNetwork(
        hidden_weights=np.vstack(rows[:cc]),
        hidden_biases=rows[cc],
        output_weights=rows[cc + 1],
        output_bias=float(rows[cc + 2][0]),
    )
    if net.hidden_weights.shape != (cc, m) or len(net.hidden_biases) != cc \
            or len(net.output_weights) != cc:
        raise CorruptedModelError("weight shapes do not match the header")
    net.check_finite()
    return net
