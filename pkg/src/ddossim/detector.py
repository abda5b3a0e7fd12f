"""Sliding-window traffic monitoring and the three attack detectors.

Approximate methods: buffer-full (the normal-operation tier l1 is at
capacity) and the ratio rule (short-time average exceeds (1+r) times the
extended-time average).  Accurate method: a hypothesis-testing pipeline on
per-second packet arrival rates -- an upper-confidence-bound gate on the
current mean, then a pooled t-test and Levene's test against the lagged
baseline, flagging if either rejects.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .buffer import BufferState
from .stats import (SummaryStats, TestResult, ks_normality, levene_test,
                    sample_mean, t_test_pooled, upper_conf_bound)

__all__ = [
    "Method",
    "DetectorConfig",
    "SlidingWindow",
    "DetectionOutcome",
    "MPAR_ALPHA",
    "window_push",
    "window_average",
    "detect_ratio",
    "detect_buffer",
    "detect_statistical",
    "Detector",
    "run_detection",
]

# One-sided significance used for the maximum-packet-arrival-rate gate.
MPAR_ALPHA = 0.025


class Method(enum.Enum):
    BUFFER_FULL = "buffer_full"
    RATIO = "ratio"
    STATISTICAL = "statistical"


ALL_METHODS = (Method.STATISTICAL, Method.RATIO, Method.BUFFER_FULL)


@dataclass(frozen=True)
class DetectorConfig:
    w_s: float = 10.0          # short window, seconds
    w_l: float = 45.0          # long window, seconds
    r: float = 0.6             # ratio-rule tolerance
    c: float = 45.0            # look-back to the last correct traffic level, seconds
    alpha: float = 0.05
    baseline_len: int = 30     # per-second samples in the statistical baseline
    methods: tuple[Method, ...] = ALL_METHODS

    def validate(self) -> None:
        if not 0 < self.w_s < self.w_l:
            raise ValueError("need 0 < w_s < w_l")
        if self.r <= 0:
            raise ValueError("r must be > 0")
        if self.c < self.w_s:
            raise ValueError("look-back c must be >= w_s")
        if not 0 < self.alpha < 0.5:
            raise ValueError("alpha must be in (0, 0.5)")
        if self.baseline_len < 8:
            raise ValueError("baseline_len must be >= 8")
        if not self.methods:
            raise ValueError("at least one detection method must be enabled")


class SlidingWindow:
    """Fixed-capacity window over per-slot aggregates with an incremental sum."""

    __slots__ = ("capacity", "contents", "running_sum")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("window capacity must be >= 1")
        self.capacity = capacity
        self.contents: deque[int] = deque()
        self.running_sum = 0

    def push(self, value: int) -> None:
        if len(self.contents) == self.capacity:
            self.running_sum -= self.contents.popleft()
        self.contents.append(value)
        self.running_sum += value

    def average(self) -> float:
        if not self.contents:
            raise ValueError("window not warmed up")
        return self.running_sum / len(self.contents)

    @property
    def is_full(self) -> bool:
        return len(self.contents) == self.capacity

    def clear(self) -> None:
        self.contents.clear()
        self.running_sum = 0

    def __len__(self) -> int:
        return len(self.contents)


def window_push(win: SlidingWindow, value: int) -> SlidingWindow:
    win.push(value)
    return win


def window_average(win: SlidingWindow) -> float:
    return win.average()


def detect_ratio(short_avg: float, long_avg: float, r: float) -> bool:
    """Ratio rule: short-time average strictly above (1+r) * long-time average."""
    if long_avg <= 0:
        return False
    return short_avg > (1.0 + r) * long_avg


def detect_buffer(buffer: BufferState) -> bool:
    return buffer.is_l1_full()


def detect_statistical(baseline_par: list[float], current_par: list[float],
                       alpha: float = 0.05) -> tuple[bool, list[TestResult]]:
    """Hypothesis-testing detection on packet-arrival-rate samples.

    Records a K-S normality check of the baseline, gates on the upper
    confidence bound of the baseline mean (MPAR, alpha = 0.025), then runs
    the pooled t-test and Levene's test; the attack flag is raised if
    either rejects at the given alpha.
    """
    if len(baseline_par) < 8 or len(current_par) < 2:
        raise ValueError("statistical detection needs >= 8 baseline and >= 2 current samples")
    details: list[TestResult] = []
    base = SummaryStats.from_sample(baseline_par)
    if base.stddev > 0:
        details.append(ks_normality(baseline_par, alpha))
    cur_mean = sample_mean(current_par)
    if base.stddev == 0.0:
        # degenerate baseline: only the threshold comparison is meaningful
        return cur_mean > base.mean, details
    t_x = upper_conf_bound(base, MPAR_ALPHA).upper
    if cur_mean <= t_x:
        return False, details
    t_res = t_test_pooled(baseline_par, current_par, alpha)
    lev_res = levene_test(baseline_par, current_par, alpha)
    details += [t_res, lev_res]
    return t_res.reject or lev_res.reject, details


@dataclass
class DetectionOutcome:
    detected: bool
    t_hat: float = 0.0
    method: Optional[Method] = None
    details: list[TestResult] = field(default_factory=list)


class Detector:
    """Per-run detection state machine over a slotted traffic feed.

    Feed one aggregate per slot via observe(); the first enabled method to
    fire is reported (priority statistical > ratio > buffer-full within a
    slot).  The statistical method is re-evaluated whenever a one-second
    arrival bucket completes; its baseline is the block of buckets ending
    c seconds in the past.  While an episode (measurement/filtering) is in
    progress the caller freeze()s the detector: monitoring continues, but
    against baselines pinned at the fire, so attack traffic cannot poison
    the reference level; unfreeze() resumes normal rotation afterwards.
    """

    def __init__(self, cfg: DetectorConfig, slot_dt: float):
        cfg.validate()
        self.cfg = cfg
        self.slot_dt = slot_dt
        self.short = SlidingWindow(max(1, round(cfg.w_s / slot_dt)))
        self.long = SlidingWindow(max(2, round(cfg.w_l / slot_dt)))
        self._slots_per_bucket = max(1, round(1.0 / slot_dt))
        self._bucket_acc = 0
        self._bucket_fill = 0
        self._c_buckets = max(1, round(cfg.c))
        self._ws_buckets = max(2, round(cfg.w_s))
        self.buckets: deque[int] = deque(maxlen=self._c_buckets + cfg.baseline_len)
        self._lambda_bar_ring: deque[float] = deque(maxlen=max(1, round(cfg.c / slot_dt)))
        self.stat_checks = 0
        self.stat_positives = 0
        self._slot = 0
        self._frozen = False
        self._frozen_baseline: Optional[list[float]] = None
        self._frozen_lambda_bar = 0.0
        self._fresh_buckets = 0
        self._frozen_appended = 0

    @property
    def frozen(self) -> bool:
        return self._frozen

    def baseline_lambda_bar(self) -> float:
        """Long-window average from c seconds back, in packets per slot.

        While frozen this is the value snapshotted at freeze time, so the
        attack cannot poison the reference level.
        """
        if self._frozen:
            return self._frozen_lambda_bar
        if self._lambda_bar_ring:
            return self._lambda_bar_ring[0]
        if len(self.long):
            return self.long.average()
        return 0.0

    def freeze(self) -> None:
        """Pin the baseline at its current value when an episode starts.

        Monitoring continues against the pinned long-window average and
        the pinned statistical baseline; the long window itself stops
        updating until unfreeze().
        """
        if self._frozen:
            return
        self._frozen = True
        self._frozen_lambda_bar = self.baseline_lambda_bar_unfrozen()
        if len(self.buckets) == self.buckets.maxlen:
            self._frozen_baseline = [float(v)
                                     for v in list(self.buckets)[:self.cfg.baseline_len]]
        else:
            self._frozen_baseline = None
        self._fresh_buckets = 0
        self._frozen_appended = 0

    def baseline_lambda_bar_unfrozen(self) -> float:
        if self._lambda_bar_ring:
            return self._lambda_bar_ring[0]
        if len(self.long):
            return self.long.average()
        return 0.0

    def unfreeze(self) -> None:
        """Resume normal monitoring after restoration.

        All buckets collected during the episode are discarded along with
        the pre-fire excursion, so the baseline picks up exactly where it
        left off and episode traffic never rotates into it.
        """
        self._frozen = False
        self._frozen_baseline = None
        for _ in range(min(self._frozen_appended, len(self.buckets))):
            self.buckets.pop()
        self._frozen_appended = 0
        self.reset_after_episode()

    def reset_short(self) -> None:
        """Drop stale short-window contents (used when monitoring resumes)."""
        self.short.clear()

    def rearm(self) -> None:
        """Require fresh post-filter traffic before the next fire.

        Called when a filter is (re)activated: clears the short window and
        restarts the fresh-bucket count, so the excursion that caused the
        fire cannot immediately re-trigger the ratio or statistical method.
        """
        self.short.clear()
        self._fresh_buckets = 0

    def reset_after_episode(self) -> None:
        """Re-arm after a measurement/filtering episode.

        Clears the short window and discards the trailing w_s arrival
        buckets -- the excursion that triggered the fire -- so the same
        frozen data cannot re-fire instantly and attack-era buckets never
        rotate into the baseline.  The statistical method re-arms once
        fresh buckets refill the gap.
        """
        self.short.clear()
        for _ in range(min(self._ws_buckets, len(self.buckets))):
            self.buckets.pop()
        self._bucket_acc = 0
        self._bucket_fill = 0

    def observe(self, aggregate: int,
                buffer: Optional[BufferState] = None) -> tuple[Optional[Method], list[TestResult]]:
        cfg = self.cfg
        fired: Optional[Method] = None
        details: list[TestResult] = []

        self._bucket_acc += aggregate
        self._bucket_fill += 1
        if self._bucket_fill == self._slots_per_bucket:
            self.buckets.append(self._bucket_acc)
            self._bucket_acc = 0
            self._bucket_fill = 0
            if self._frozen:
                self._fresh_buckets += 1
                self._frozen_appended += 1
            baseline: Optional[list[float]] = None
            if self._frozen:
                if self._frozen_baseline is not None and self._fresh_buckets >= self._ws_buckets:
                    baseline = self._frozen_baseline
            elif len(self.buckets) == self.buckets.maxlen:
                baseline = [float(v) for v in list(self.buckets)[:cfg.baseline_len]]
            if Method.STATISTICAL in cfg.methods and baseline is not None:
                current = [float(v) for v in list(self.buckets)[-self._ws_buckets:]]
                hit, details = detect_statistical(baseline, current, cfg.alpha)
                self.stat_checks += 1
                if hit:
                    self.stat_positives += 1
                    fired = Method.STATISTICAL

        self.short.push(aggregate)
        if not self._frozen:
            self.long.push(aggregate)
            if self.long.is_full:
                self._lambda_bar_ring.append(self.long.average())

        if fired is None and Method.RATIO in cfg.methods and self.short.is_full:
            if self._frozen:
                if detect_ratio(self.short.average(), self._frozen_lambda_bar, cfg.r):
                    fired = Method.RATIO
            elif self.long.is_full:
                if detect_ratio(self.short.average(), self.long.average(), cfg.r):
                    fired = Method.RATIO
        if fired is None and Method.BUFFER_FULL in cfg.methods and buffer is not None:
            # backlog net of the slot's service, so a single coarse-slot
            # arrival batch cannot trip the detector under normal load
            if buffer.is_l1_backlogged():
                fired = Method.BUFFER_FULL

        self._slot += 1
        return fired, details


def run_detection(slots: Iterable, cfg: DetectorConfig, slot_dt: float,
                  buffers: Optional[Iterable[BufferState]] = None) -> DetectionOutcome:
    """Run the detector over a time-ordered slot feed until the first fire.

    slots yields SlotTraffic records; buffers, when given, yields the
    buffer state after the matching slot (for the buffer-full method).
    """
    det = Detector(cfg, slot_dt)
    buf_iter = iter(buffers) if buffers is not None else None
    for slot in slots:
        buf = next(buf_iter) if buf_iter is not None else None
        fired, details = det.observe(slot.aggregate, buf)
        if fired is not None:
            t_hat = (slot.slot_index + 1) * slot_dt
            return DetectionOutcome(detected=True, t_hat=t_hat, method=fired,
                                    details=details)
    return DetectionOutcome(detected=False)
