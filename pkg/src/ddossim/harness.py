"""End-to-end scenario execution and batch aggregation.

run_once drives the whole pipeline for one seed: generate a slot, apply
the active filter, step the buffer, feed the detector, and on a fire
open a measurement episode (per-source attribution on for w_s seconds),
classify, activate the filter, and watch for restoration.  Monitoring
continues while the filter is active, pinned against the baseline frozen
at the fire: if the residual traffic still looks abnormal the pipeline
re-measures and widens the block set, so a false alarm just before the
attack cannot blind the run, and a partial first classification is
progressively repaired.  Restoration releases the filter and resumes
normal baseline rotation.
"""

from __future__ import annotations

import dataclasses
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .buffer import BufferState, step
from .detector import Detector, DetectorConfig, Method
from .identifier import (FilterState, apply_filter, estimate_attack_rate,
                         identify_by_history, identify_greedy, measure_per_source)
from .stats import sample_mean, sample_stddev
from .traffic import ScenarioConfig, TrafficStream, build_sources

__all__ = [
    "RunMetrics",
    "MetricSummary",
    "BatchStats",
    "run_once",
    "run_batch",
    "sweep_window",
    "declare_restored",
    "RestorationMonitor",
    "ROW_FIELDS",
]

ROW_FIELDS = [
    "detected", "detection_time", "detection_method", "restore_time",
    "correctly_identified_attackers", "legal_filtered", "packets_dropped",
    "max_buffer_level", "max_buffer_time", "false_alarms",
    "ratio_fires", "stat_checks", "stat_positives", "seed",
]

# numeric RunMetrics fields aggregated by run_batch
BATCH_FIELDS = [
    "detection_time", "restore_time", "correctly_identified_attackers",
    "legal_filtered", "packets_dropped", "max_buffer_level", "max_buffer_time",
]


@dataclass
class RunMetrics:
    detected: bool
    detection_time: Optional[float]        # seconds after t*
    detection_method: Optional[str]
    restore_time: Optional[float]          # seconds after t*, None if never restored
    correctly_identified_attackers: int
    legal_filtered: int
    packets_dropped: int
    max_buffer_level: int
    max_buffer_time: float
    false_alarms: int                      # detector fires before t*
    ratio_fires: int                       # ratio-rule fires, any time in the run
    stat_checks: int
    stat_positives: int
    seed: int

    def as_row(self) -> dict:
        d = dataclasses.asdict(self)
        return {k: d[k] for k in ROW_FIELDS}


@dataclass(frozen=True)
class MetricSummary:
    min: float
    avg: float
    ci95_halfwidth: float
    n: int


@dataclass
class BatchStats:
    n_runs: int
    detected_rate: float
    metrics: dict[str, MetricSummary]


class RestorationMonitor:
    """Tracks the sustained restoration condition during a filtering episode.

    Restored once the buffer backlog (net of each slot's service) has
    stayed below l1 for w_s consecutive seconds while the traffic admitted
    over those w_s seconds is at most (1+r) times the frozen baseline
    rate.  Backlog rather than raw occupancy, for the same reason the
    buffer-full detector uses it: at coarse slot sizes one slot's arrival
    batch can exceed l1 on its own under normal load.
    """

    def __init__(self, l1: int, baseline_rate: float, r: float,
                 w_s: float, slot_dt: float):
        self.l1 = l1
        self.ws_slots = max(1, round(w_s / slot_dt))
        self.threshold_sum = (1.0 + r) * baseline_rate * w_s
        self._admitted: deque[int] = deque(maxlen=self.ws_slots)
        self._admitted_sum = 0
        self._occ_ok = 0

    def update(self, backlog: int, admitted: int) -> bool:
        if len(self._admitted) == self.ws_slots:
            self._admitted_sum -= self._admitted[0]
        self._admitted.append(admitted)
        self._admitted_sum += admitted
        self._occ_ok = self._occ_ok + 1 if backlog < self.l1 else 0
        return (self._occ_ok >= self.ws_slots
                and len(self._admitted) == self.ws_slots
                and self._admitted_sum <= self.threshold_sum)


def declare_restored(backlogs: Sequence[int], admitted: Sequence[int],
                     l1: int, baseline_rate: float, cfg: DetectorConfig,
                     slot_dt: float, t_star: float = 0.0) -> Optional[float]:
    """First time (relative to t_star) the restoration condition holds."""
    mon = RestorationMonitor(l1, baseline_rate, cfg.r, cfg.w_s, slot_dt)
    for i, (occ, adm) in enumerate(zip(backlogs, admitted)):
        if mon.update(occ, adm):
            return (i + 1) * slot_dt - t_star
    return None


def _check_configs(scenario: ScenarioConfig, cfg: DetectorConfig) -> None:
    scenario.validate()
    cfg.validate()
    if cfg.w_l >= scenario.t_star:
        raise ValueError("long window w_l must warm up before the attack onset t_star")
    if Method.STATISTICAL in cfg.methods:
        warmup = cfg.c + cfg.baseline_len
        if warmup >= scenario.t_star:
            raise ValueError("statistical baseline warm-up must finish before t_star")


def run_once(scenario: ScenarioConfig, detector_cfg: DetectorConfig,
             id_method: str = "greedy", seed: Optional[int] = None) -> RunMetrics:
    """Execute one complete scenario and collect its metrics."""
    _check_configs(scenario, detector_cfg)
    if id_method not in ("greedy", "history"):
        raise ValueError(f"unknown identification method {id_method!r}")
    if seed is None:
        seed = scenario.seed

    ss = np.random.SeedSequence(seed)
    rng_traffic, rng_split = (np.random.default_rng(s) for s in ss.spawn(2))
    sources = build_sources(scenario)
    stream = TrafficStream(sources, scenario.n_slots, scenario.slot_dt,
                           rng_traffic, rng_split)
    buf = BufferState(scenario.l1, scenario.l2)
    det = Detector(detector_cfg, scenario.slot_dt)

    dt = scenario.slot_dt
    service = scenario.mu * dt
    ws_slots = max(1, round(detector_cfg.w_s / dt))
    truth_attackers = frozenset(scenario.attacker_ids())
    all_active_ids = [s.id for s in sources]

    phase = "monitor"
    filt: Optional[FilterState] = None
    measure_slots: list = []
    restoration: Optional[RestorationMonitor] = None
    episode_primary = False
    t_hat = 0.0
    baseline_rate = 0.0

    detection_time: Optional[float] = None
    detection_method: Optional[str] = None
    restore_time: Optional[float] = None
    first_blocked: Optional[frozenset[int]] = None
    false_alarms = 0
    ratio_fires = 0

    for i in range(scenario.n_slots):
        t_end = (i + 1) * dt
        want_ps = phase == "measure" or filt is not None
        slot = stream.slot(i, want_per_source=want_ps)
        if filt is not None:
            slot = apply_filter(filt, slot, truth_attackers)
        out = step(buf, slot.aggregate, service)
        fired, _details = det.observe(slot.aggregate, buf)

        if restoration is not None and restoration.update(buf.post_service_occupancy,
                                                          out.admitted):
            # sustained-normal condition met: release the filter
            if episode_primary and restore_time is None:
                restore_time = t_end - scenario.t_star
            filt.released_at = t_end
            filt = None
            restoration = None
            episode_primary = False
            det.unfreeze()
            phase = "monitor"
            continue

        if phase == "measure":
            measure_slots.append(slot)
            if len(measure_slots) == ws_slots:
                window = (t_hat, t_hat + detector_cfg.w_s)
                m = measure_per_source(measure_slots, window, source_ids=all_active_ids)
                total_packets = sum(s.aggregate for s in measure_slots)
                total_rate = total_packets / detector_cfg.w_s
                budget = estimate_attack_rate(total_rate, baseline_rate)
                if id_method == "history":
                    pre_active = {s.id for s in sources
                                  if s.active_from <= t_hat - detector_cfg.c}
                    cls = identify_by_history(m, pre_active, budget)
                else:
                    cls = identify_greedy(m, budget)
                if filt is None:
                    filt = FilterState(blocked=cls.attackers, activated_at=t_end)
                    restoration = RestorationMonitor(scenario.l1, baseline_rate,
                                                     detector_cfg.r,
                                                     detector_cfg.w_s, dt)
                else:
                    # re-measurement of residual traffic: widen the block set
                    filt = FilterState(blocked=filt.blocked | cls.attackers,
                                       activated_at=filt.activated_at,
                                       cumulative_filtered=filt.cumulative_filtered)
                if episode_primary and first_blocked is None:
                    first_blocked = filt.blocked
                det.rearm()
                phase = "filter"
        elif fired is not None:
            # a fire in the monitor phase opens an episode; one during
            # filtering means the residual still looks abnormal, so measure
            # again and extend the block set
            if phase == "monitor":
                det.freeze()
                baseline_rate = det.baseline_lambda_bar() / dt
                if t_end < scenario.t_star:
                    false_alarms += 1
            if fired is Method.RATIO:
                ratio_fires += 1
            if t_end >= scenario.t_star and detection_time is None:
                latency = t_end - scenario.t_star
                if fired is Method.STATISTICAL:
                    # a statistical fire is raised when its one-second
                    # arrival sample completes; latency counts from the
                    # start of that sample
                    latency = max(0.0, latency - 1.0)
                detection_time = latency
                detection_method = fired.value
                episode_primary = True
            t_hat = t_end
            measure_slots = []
            phase = "measure"

    correct = len(first_blocked & truth_attackers) if first_blocked else 0
    wrong = len(first_blocked - truth_attackers) if first_blocked else 0
    return RunMetrics(
        detected=detection_time is not None,
        detection_time=detection_time,
        detection_method=detection_method,
        restore_time=restore_time,
        correctly_identified_attackers=correct,
        legal_filtered=wrong,
        packets_dropped=buf.cumulative_dropped,
        max_buffer_level=buf.peak_occupancy,
        max_buffer_time=buf.peak_slot * dt,
        false_alarms=false_alarms,
        ratio_fires=ratio_fires,
        stat_checks=det.stat_checks,
        stat_positives=det.stat_positives,
        seed=seed,
    )


def batch_seeds(base_seed: int, n_runs: int) -> list[int]:
    """Independent per-run seeds derived deterministically from base_seed."""
    state = np.random.SeedSequence(base_seed).generate_state(n_runs, dtype=np.uint64)
    return [int(s) for s in state]


def _summarize(values: list[float]) -> MetricSummary:
    n = len(values)
    if n == 0:
        return MetricSummary(min=float("nan"), avg=float("nan"),
                             ci95_halfwidth=float("nan"), n=0)
    avg = sample_mean(values)
    half = 0.0
    if n >= 2:
        half = 1.96 * sample_stddev(values) / (n ** 0.5)
    return MetricSummary(min=min(values), avg=avg, ci95_halfwidth=half, n=n)


def run_batch(scenario: ScenarioConfig, detector_cfg: DetectorConfig,
              id_method: str, n_runs: int, base_seed: int) -> tuple[BatchStats, list[RunMetrics]]:
    """Repeat run_once over independent seeds and aggregate min/avg/CI95."""
    if n_runs < 2:
        raise ValueError("batch needs n_runs >= 2")
    runs = [run_once(scenario, detector_cfg, id_method, seed=s)
            for s in batch_seeds(base_seed, n_runs)]
    metrics = {}
    for name in BATCH_FIELDS:
        values = [float(getattr(r, name)) for r in runs
                  if getattr(r, name) is not None]
        metrics[name] = _summarize(values)
    detected_rate = sum(r.detected for r in runs) / n_runs
    return BatchStats(n_runs=n_runs, detected_rate=detected_rate, metrics=metrics), runs


def sweep_window(scenario: ScenarioConfig, detector_cfg: DetectorConfig,
                 id_method: str, ws_values: Sequence[float],
                 runs_per_value: int = 1, base_seed: int = 0) -> list[tuple[float, list[RunMetrics]]]:
    """One run-set per short-window size, with the analysis window tied to it."""
    if not ws_values:
        raise ValueError("sweep needs at least one window value")
    rows = []
    for w_s in ws_values:
        cfg = dataclasses.replace(detector_cfg, w_s=w_s)
        seeds = batch_seeds(base_seed, runs_per_value)
        runs = [run_once(scenario, cfg, id_method, seed=s) for s in seeds]
        rows.append((w_s, runs))
    return rows
