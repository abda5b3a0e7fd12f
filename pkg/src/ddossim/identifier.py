"""Attack-source identification and per-source filtering.

After detection, per-source traffic is measured over the analysis window;
the aggregate attack rate is estimated as measured total minus the lagged
baseline, and the suspected-attacker set is the descending-rate prefix
whose rate sum stays within that budget.  The history variant first
exempts every source that was already active before the attack.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .traffic import SlotTraffic

__all__ = [
    "PerSourceMeasurement",
    "Classification",
    "FilterState",
    "measure_per_source",
    "estimate_attack_rate",
    "identify_greedy",
    "identify_by_history",
    "apply_filter",
]


@dataclass(frozen=True)
class PerSourceMeasurement:
    start: float                    # seconds
    end: float                      # seconds
    rates: dict[int, float]         # source id -> measured packets/sec

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class Classification:
    attackers: frozenset[int]       # suspected attack sources (to be blocked)
    legal: frozenset[int]           # everything else in the active set

    def __post_init__(self):
        if self.attackers & self.legal:
            raise ValueError("attacker and legal sets must be disjoint")


@dataclass
class FilterState:
    blocked: frozenset[int]
    activated_at: float
    released_at: Optional[float] = None
    cumulative_filtered: int = 0


def measure_per_source(slots: Iterable[SlotTraffic], window: tuple[float, float],
                       source_ids: Optional[Iterable[int]] = None) -> PerSourceMeasurement:
    """Aggregate per-source counts over the window into packets/sec rates.

    Sources listed in source_ids but absent from every slot get rate 0.
    """
    start, end = window
    duration = end - start
    slots = list(slots)
    if duration <= 0 or not slots:
        raise ValueError("empty measurement window")
    counts: dict[int, int] = {}
    for slot in slots:
        if slot.per_source is None:
            raise ValueError(f"slot {slot.slot_index} lacks per-source counts")
        for sid, c in slot.per_source.items():
            counts[sid] = counts.get(sid, 0) + c
    rates = {sid: c / duration for sid, c in counts.items()}
    if source_ids is not None:
        for sid in source_ids:
            rates.setdefault(sid, 0.0)
    return PerSourceMeasurement(start=start, end=end, rates=rates)


def estimate_attack_rate(total_rate: float, baseline_rate: float) -> float:
    """Aggregate attack-rate estimate: measured total minus baseline, clamped at 0."""
    if total_rate < 0 or baseline_rate < 0:
        raise ValueError("rates must be >= 0")
    return max(0.0, total_rate - baseline_rate)


def _greedy_prefix(items: list[tuple[int, float]], budget: float) -> set[int]:
    """Longest descending-rate prefix whose rate sum stays within budget.

    Ties on rate break by ascending source id; iteration stops at the
    first source that would push the sum past the budget.
    """
    picked: set[int] = set()
    total = 0.0
    for sid, rate in sorted(items, key=lambda kv: (-kv[1], kv[0])):
        if total + rate > budget:
            break
        total += rate
        picked.add(sid)
    return picked


def identify_greedy(measurement: PerSourceMeasurement,
                    attack_rate_budget: float) -> Classification:
    if attack_rate_budget < 0:
        raise ValueError("budget must be >= 0")
    items = list(measurement.rates.items())
    attackers = _greedy_prefix(items, attack_rate_budget)
    legal = set(measurement.rates) - attackers
    return Classification(attackers=frozenset(attackers), legal=frozenset(legal))


def identify_by_history(measurement: PerSourceMeasurement,
                        pre_attack_active: Iterable[int],
                        attack_rate_budget: float) -> Classification:
    """Greedy identification restricted to sources with no pre-attack history."""
    if attack_rate_budget < 0:
        raise ValueError("budget must be >= 0")
    exempt = set(pre_attack_active)
    candidates = [(sid, r) for sid, r in measurement.rates.items() if sid not in exempt]
    attackers = _greedy_prefix(candidates, attack_rate_budget)
    legal = set(measurement.rates) - attackers
    return Classification(attackers=frozenset(attackers), legal=frozenset(legal))


def apply_filter(filter_state: FilterState, slot: SlotTraffic,
                 attacker_ids: frozenset[int] = frozenset()) -> SlotTraffic:
    """Discard counts from blocked sources before buffer admission.

    attacker_ids (ground-truth attacking ids) is only used to keep the
    legal/attack aggregate split of the returned record consistent.
    """
    if not filter_state.blocked:
        return slot
    if slot.per_source is None:
        raise ValueError(f"slot {slot.slot_index} lacks per-source counts while filter is active")
    removed_legal = 0
    removed_attack = 0
    kept: dict[int, int] = {}
    for sid, c in slot.per_source.items():
        if sid in filter_state.blocked:
            if sid in attacker_ids:
                removed_attack += c
            else:
                removed_legal += c
        else:
            kept[sid] = c
    removed = removed_legal + removed_attack
    filter_state.cumulative_filtered += removed
    return SlotTraffic(slot_index=slot.slot_index,
                       aggregate=slot.aggregate - removed,
                       legal_aggregate=slot.legal_aggregate - removed_legal,
                       attack_aggregate=slot.attack_aggregate - removed_attack,
                       per_source=kept)
