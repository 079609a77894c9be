"""Eager observable-chain baseline: behavior subjects, map/combine, manual
subscriptions.

This runtime is deliberately glitch-prone: emissions propagate depth-first
and unbatched, each operator re-emits on every upstream notification, and a
two-input combine emits once per input notification using the latest values.
Every derived subject retains one subscription per upstream edge, and those
subscriptions (plus any explicit consumer subscriptions) stay alive until
someone remembers to unsubscribe. The instrumentation counters make both
properties visible.
"""

from __future__ import annotations

from collections.abc import Callable
from typing import Any

from .live import LiveCounts

__all__ = ["ClosedSubjectError", "ObservableContext", "Subject", "Subscription"]


class ClosedSubjectError(RuntimeError):
    """Raised when a value is emitted on a closed subject."""


class Subscription:
    """Handle for one retained observer registration."""

    __slots__ = ("subject", "handler", "active")

    def __init__(self, subject: "Subject", handler: Callable[[Any], None]):
        self.subject = subject
        self.handler = handler
        self.active = True

    def unsubscribe(self) -> None:
        """Detach the handler. Unsubscribing twice is a no-op."""
        if not self.active:
            return
        self.active = False
        self.subject._subscribers.remove(self)
        self.subject._ctx._live_subscriptions -= 1


class Subject:
    """Behavior-style subject: holds a current value, replays it on subscribe."""

    __slots__ = ("_ctx", "value", "closed", "emit_count", "_subscribers", "_upstream")

    def __init__(self, ctx: "ObservableContext", initial: Any):
        self._ctx = ctx
        self.value = initial
        self.closed = False
        #: number of next() calls on this subject (the initial value is not an emission)
        self.emit_count = 0
        self._subscribers: list[Subscription] = []
        self._upstream: list[Subscription] = []  # operator-held subscriptions

    def next(self, value: Any) -> None:
        """Store ``value`` and synchronously notify subscribers in order."""
        if self.closed:
            raise ClosedSubjectError("emission on closed subject")
        self.value = value
        self.emit_count += 1
        self._ctx.emissions += 1
        for sub in list(self._subscribers):
            if sub.active:
                self._ctx.notifications += 1
                sub.handler(value)

    def subscribe(self, handler: Callable[[Any], None]) -> Subscription:
        """Attach a handler; it immediately receives the current value."""
        sub = self._attach(handler)
        self._ctx.notifications += 1
        handler(self.value)
        return sub

    def _attach(self, handler: Callable[[Any], None]) -> Subscription:
        if self.closed:
            raise ClosedSubjectError("subscription on closed subject")
        sub = Subscription(self, handler)
        self._subscribers.append(sub)
        self._ctx._live_subscriptions += 1
        return sub

    def close(self) -> None:
        if self.closed:
            return
        self.closed = True
        self._ctx._live_subjects -= 1


class ObservableContext:
    """Factory and counter hub for one observable network."""

    def __init__(self) -> None:
        self._live_subjects = 0
        self._live_subscriptions = 0
        self._edges = 0
        #: total next() calls across all subjects
        self.emissions = 0
        #: total handler deliveries (operator-internal and explicit)
        self.notifications = 0

    def subject(self, initial: Any) -> Subject:
        self._live_subjects += 1
        return Subject(self, initial)

    def map(self, src: Subject, fn: Callable[[Any], Any]) -> Subject:
        """Derived subject re-emitting ``fn(v)`` for every upstream emission."""
        derived = self.subject(fn(src.value))
        link = src._attach(lambda v: derived.next(fn(v)))
        derived._upstream.append(link)
        self._edges += 1
        return derived

    def combine(self, a: Subject, b: Subject, fn: Callable[[Any, Any], Any]) -> Subject:
        """Derived subject emitting on EVERY input notification, using the
        latest value of both inputs. The source of diamond glitches."""
        derived = self.subject(fn(a.value, b.value))

        def refresh(_v: Any) -> None:
            derived.next(fn(a.value, b.value))

        la = a._attach(refresh)
        lb = b._attach(refresh)
        derived._upstream.extend((la, lb))
        self._edges += 2
        return derived

    def dispose_subject(self, subject: Subject) -> None:
        """Tear one subject down properly: drop upstream links, then close."""
        for link in subject._upstream:
            link.unsubscribe()
        self._edges -= len(subject._upstream)
        subject._upstream.clear()
        subject.close()

    def live_counts(self) -> LiveCounts:
        return LiveCounts(
            nodes=self._live_subjects,
            edges=self._edges,
            effects=0,
            subscriptions=self._live_subscriptions,
        )
