"""Per-node streaming estimation of the QoS-violation probability.

Response-time and throughput samples are collected per epoch (a batch of
completed tasks) into sliding windows.  Kernel density estimation over the
windows gives the probability of each parameter violating its threshold,
and the two probabilities are fused through a weighted geometric-mean odds
form that favours low values.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

#: Probabilities are clamped to [EPS, 1-EPS] before fusion.
EPS = 1e-6

GAUSSIAN = "gaussian"
EPANECHNIKOV = "epanechnikov"

_GAUSS_NORM = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


class UndefinedEpochError(ValueError):
    """Raised for epoch statistics over an empty batch or zero duration."""


class InsufficientDataError(ValueError):
    """Raised when a density estimate is requested from an empty window."""


class InvalidStepError(ValueError):
    """Raised when the incremental estimator gets a step index < 1."""


def gaussian_kernel(u):
    return _GAUSS_NORM * np.exp(-0.5 * np.square(u))


def epanechnikov_kernel(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - np.square(u)), 0.0)


_KERNELS = {GAUSSIAN: gaussian_kernel, EPANECHNIKOV: epanechnikov_kernel}


def _erf_scalar(x: float) -> float:
    if x == 0.0:
        return 0.0
    sign = 1.0 if x > 0.0 else -1.0
    ax = abs(x)
    t = 1.0 / (1.0 + 0.3275911 * ax)
    poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741
            + t * (-1.453152027 + t * 1.061405429))))
    return sign * (1.0 - poly * math.exp(-ax * ax))


def erf_approx(x):
    """Error function via the Abramowitz-Stegun rational polynomial.

    Absolute error stays below 1.5e-7, small against the 1e-6 clamp applied
    to the probabilities built on top of it.
    """
    if isinstance(x, (int, float)):
        return _erf_scalar(float(x))
    x = np.asarray(x, dtype=float)
    sign = np.sign(x)
    ax = np.abs(x)
    t = 1.0 / (1.0 + 0.3275911 * ax)
    poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741
            + t * (-1.453152027 + t * 1.061405429))))
    res = sign * (1.0 - poly * np.exp(-np.square(ax)))
    if res.ndim == 0:
        return float(res)
    return res


@dataclass
class KdeWindow:
    """Sliding window of up to W samples with a kernel density estimator.

    ``h`` fixes the bandwidth; when None, a Silverman-style rule
    1.06 * std * n^(-1/5) with a 0.01 floor is applied per query.
    """

    W: int
    h: float | None = None
    kernel: str = GAUSSIAN
    samples: deque = field(default_factory=deque)

    def __post_init__(self):
        if self.W < 1:
            raise ValueError(f"window size must be >= 1, got {self.W}")
        if self.h is not None and self.h <= 0.0:
            raise ValueError(f"bandwidth must be > 0, got {self.h}")
        if self.kernel not in _KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        self.samples = deque(self.samples, maxlen=self.W)

    def push(self, value: float) -> None:
        self.samples.append(float(value))

    def __len__(self) -> int:
        return len(self.samples)

    def bandwidth(self) -> float:
        if self.h is not None:
            return self.h
        n = len(self.samples)
        if n < 2:
            return 0.01
        mean = sum(self.samples) / n
        var = sum((v - mean) ** 2 for v in self.samples) / n
        return max(0.01, 1.06 * math.sqrt(var) * n ** (-0.2))


@dataclass
class QosConfig:
    """Thresholds, fusion weights and trigger settings for the monitor.

    A single global threshold covers both parameters unless per-parameter
    thresholds are set explicitly.
    """

    th: float = 0.3
    th_rt: float | None = None
    th_tp: float | None = None
    w_rt: float = 0.5
    w_tp: float = 0.5
    p_trig: float = 0.5
    min_samples: int = 3
    window: int = 50
    bandwidth: float | None = None
    kernel: str = EPANECHNIKOV
    # epochs are short batches so the windows fill within a 100-tick run
    epoch_batch: int = 2
    # throughput reference rate; saturated service sits below th relative
    # to it, so sustained congestion registers as a throughput violation
    max_tp: float = 1.2

    def __post_init__(self):
        for name in ("th", "th_rt", "th_tp"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {v}")
        if self.w_rt < 0.0 or self.w_tp < 0.0:
            raise ValueError("fusion weights must be nonnegative")
        if abs(self.w_rt + self.w_tp - 1.0) > 1e-9:
            raise ValueError("fusion weights must sum to 1")
        if not 0.0 <= self.p_trig <= 1.0:
            raise ValueError(f"p_trig must be in [0,1], got {self.p_trig}")
        if self.min_samples < 1:
            raise ValueError("min_samples must be >= 1")
        if self.epoch_batch < 1:
            raise ValueError("epoch_batch must be >= 1")

    @property
    def threshold_rt(self) -> float:
        return self.th if self.th_rt is None else self.th_rt

    @property
    def threshold_tp(self) -> float:
        return self.th if self.th_tp is None else self.th_tp

    def make_window(self) -> KdeWindow:
        return KdeWindow(W=self.window, h=self.bandwidth, kernel=self.kernel)


def epoch_rt(rts) -> float:
    """Mean response time over one epoch's completed tasks."""
    if len(rts) == 0:
        raise UndefinedEpochError("epoch response time needs at least one task")
    return float(sum(rts)) / len(rts)


def epoch_tp(task_count: int, duration: int, max_tp: float | None = None) -> float:
    """Epoch throughput |T| / E_D, optionally normalized by ``max_tp``.

    With ``max_tp`` given, the raw rate is divided by it and clipped to 1 so
    the result stays in [0, 1].
    """
    if duration <= 0:
        raise UndefinedEpochError("epoch duration must be > 0")
    raw = task_count / duration
    if max_tp is None:
        return raw
    return min(raw / max_tp, 1.0)


def kde_pdf(window: KdeWindow, x: float) -> float:
    """Batch kernel density estimate at ``x`` over the window samples."""
    n = len(window)
    if n == 0:
        raise InsufficientDataError("kde_pdf needs a nonempty window")
    h = window.bandwidth()
    data = np.fromiter(window.samples, dtype=float)
    k = _KERNELS[window.kernel]((x - data) / h)
    return float(np.sum(k)) / (n * h)


def kde_pdf_incremental(prev_estimate: float, new_sample: float, x: float,
                        j: int, h: float, kernel: str = GAUSSIAN) -> float:
    """One step of the incremental density recursion at query point ``x``.

    After j samples the estimate is ((j-1)/j) * previous + K_j / (j*h);
    absorbing a full window this way reproduces the batch estimate.
    ``prev_estimate`` is ignored at j=1 (its factor is zero).
    """
    if j < 1:
        raise InvalidStepError(f"step index must be >= 1, got {j}")
    k = float(_KERNELS[kernel](np.float64(x - new_sample) / h))
    return ((j - 1) / j) * prev_estimate + k / (j * h)


def kde_cdf(window: KdeWindow, x: float) -> float:
    """Cumulative probability at ``x`` as a mean of Gaussian kernel cdfs.

    Always uses the Gaussian kernel regardless of the window's pdf kernel:
    the cdf of a Gaussian mixture has the closed error-function form, which
    the compact-support kernels lack.
    """
    n = len(window)
    if n == 0:
        raise InsufficientDataError("kde_cdf needs a nonempty window")
    scale = window.bandwidth() * _SQRT2
    total = 0.0
    for sample in window.samples:
        total += 0.5 * (1.0 + _erf_scalar((x - sample) / scale))
    return total / n


def violation_probabilities(rt_window: KdeWindow, tp_window: KdeWindow,
                            cfg: QosConfig):
    """(P_RT, P_TP) from the two windows, or None while not ready.

    P_RT is the probability of the response time exceeding its threshold,
    P_TP the probability of the throughput falling below its threshold.
    Both are clamped to [EPS, 1-EPS].
    """
    if len(rt_window) < cfg.min_samples or len(tp_window) < cfg.min_samples:
        return None
    p_rt = 1.0 - kde_cdf(rt_window, cfg.threshold_rt)
    p_tp = kde_cdf(tp_window, cfg.threshold_tp)
    clamp = lambda p: min(max(p, EPS), 1.0 - EPS)
    return clamp(p_rt), clamp(p_tp)


def fuse_probabilities(p_rt: float, p_tp: float, w_rt: float, w_tp: float) -> float:
    """Weighted geometric-mean fusion of the two violation probabilities.

    Evaluates p^w * q^v / (p^w * q^v + (1-p)^w * (1-q)^v); with equal
    weights this is the classic log-odds pooling that keeps low values
    influential.  Inputs are expected pre-clamped away from 0 and 1.
    """
    num = p_rt ** w_rt * p_tp ** w_tp
    den = num + (1.0 - p_rt) ** w_rt * (1.0 - p_tp) ** w_tp
    return num / den
