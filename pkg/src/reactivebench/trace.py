"""Measurement traces produced by running an update script on a runtime."""

from __future__ import annotations

from dataclasses import dataclass

from .live import LiveCounts


@dataclass(frozen=True)
class TraceSample:
    """One script update's worth of measurements.

    ``work`` is the runtime's unit of derived-value effort: computed
    recomputations for the signal runtime, subject emissions for the
    observable baseline, selector evaluations for the store baseline.
    ``notifications`` counts observer deliveries: effect runs, handler
    deliveries, or subscriber checks respectively. ``elapsed_s`` is wall
    clock and is the only nondeterministic field.
    """

    update_index: int
    work: int
    notifications: int
    elapsed_s: float
    live: LiveCounts


@dataclass(frozen=True)
class RunTrace:
    """All samples for one (runtime, scenario) pair.

    ``samples`` holds script-length x repetitions entries; counters repeat
    identically across repetitions, elapsed times do not. The cumulative
    fields cover the instance's whole life including build-phase work (e.g.
    store subscription priming), which per-update samples do not see.
    """

    runtime: str
    spec_digest: str
    samples: tuple[TraceSample, ...]
    terminal_value: int
    final_live: LiveCounts
    cumulative_work: int = 0
    cumulative_notifications: int = 0

    def work_samples(self) -> list[int]:
        return [s.work for s in self.samples]

    def notification_samples(self) -> list[int]:
        return [s.notifications for s in self.samples]

    def elapsed_samples(self) -> list[float]:
        return [s.elapsed_s for s in self.samples]

    def live_object_samples(self) -> list[int]:
        return [s.live.object_total() for s in self.samples]

    def work_total(self) -> int:
        return sum(s.work for s in self.samples)

    def notifications_total(self) -> int:
        return sum(s.notifications for s in self.samples)
