"""Store baseline: dispatch/reducer state snapshots with memoized selectors
and full-cycle notification.

Every dispatch that changes state produces a fresh immutable snapshot, and
every subscriber is checked on every dispatch regardless of which branch of
the state changed. Selectors memoize on the snapshot reference, so a new
snapshot re-evaluates every selector reachable from a checked subscriber
exactly once, while a reducer that returns the same reference short-circuits
everything. Past snapshots are retained (journal-style), which is the
runtime's characteristic source of live-object growth under sustained
dispatching.
"""

from __future__ import annotations

from collections.abc import Callable
from typing import Any

__all__ = ["MemoSelector", "Store", "StoreSubscription"]


class MemoSelector:
    """Projection of the state snapshot, memoized on snapshot identity."""

    __slots__ = ("projection", "eval_count", "_last_state", "_last_output", "_has_output")

    def __init__(self, projection: Callable[[Any], Any]):
        self.projection = projection
        self.eval_count = 0
        self._last_state: Any = None
        self._last_output: Any = None
        self._has_output = False

    def evaluate(self, state: Any) -> Any:
        if self._has_output and state is self._last_state:
            return self._last_output
        self.eval_count += 1
        out = self.projection(state)
        self._last_state = state
        self._last_output = out
        self._has_output = True
        return out


class StoreSubscription:
    __slots__ = ("store", "selector", "handler", "active", "_last_output", "_primed")

    def __init__(self, store: "Store", selector: MemoSelector, handler: Callable[[Any], None]):
        self.store = store
        self.selector = selector
        self.handler = handler
        self.active = True
        self._last_output: Any = None
        self._primed = False

    def unsubscribe(self) -> None:
        if not self.active:
            return
        self.active = False
        self.store._subscriptions.remove(self)


class Store:
    """Centralized state container with full-cycle change notification.

    ``on_new_snapshot`` runs after a dispatch swaps in a changed snapshot and
    before subscribers are checked; deep selector graphs use it to evaluate
    composed selectors in dependency order so demand-driven evaluation never
    recurses deeply. Memoization makes the evaluation counts identical either
    way.
    """

    def __init__(
        self,
        initial_state: Any,
        reducer: Callable[[Any, Any], Any],
        on_new_snapshot: Callable[[Any], None] | None = None,
    ):
        self.state = initial_state
        self.reducer = reducer
        self.on_new_snapshot = on_new_snapshot
        self.dispatch_count = 0
        #: subscriber checks performed across all dispatches (full-cycle: one
        #: per active subscription per dispatch)
        self.check_count = 0
        #: past snapshots retained after being replaced
        self.history: list[Any] = []
        self._subscriptions: list[StoreSubscription] = []
        self._selectors: list[MemoSelector] = []

    def selector(self, projection: Callable[[Any], Any]) -> MemoSelector:
        sel = MemoSelector(projection)
        self._selectors.append(sel)
        return sel

    def subscribe(self, selector: MemoSelector, handler: Callable[[Any], None]) -> StoreSubscription:
        """Attach a consumer. The handler fires immediately with the current
        selection, then again only when the selector's output changes."""
        sub = StoreSubscription(self, selector, handler)
        self._subscriptions.append(sub)
        out = selector.evaluate(self.state)
        sub._last_output = out
        sub._primed = True
        handler(out)
        return sub

    def dispatch(self, action: Any) -> None:
        """Reduce the action into a new snapshot and notify all subscribers.

        Reducer errors propagate and leave the state unchanged. A reducer
        returning the previous snapshot reference skips selector work but
        still performs one check per subscriber.
        """
        new_state = self.reducer(self.state, action)
        self.dispatch_count += 1
        if new_state is not self.state:
            self.history.append(self.state)
            self.state = new_state
            if self.on_new_snapshot is not None:
                self.on_new_snapshot(new_state)
        for sub in list(self._subscriptions):
            if not sub.active:
                continue
            self.check_count += 1
            out = sub.selector.evaluate(self.state)
            if sub._primed and out == sub._last_output:
                continue
            sub._last_output = out
            sub._primed = True
            sub.handler(out)

    def selector_eval_total(self) -> int:
        return sum(sel.eval_count for sel in self._selectors)

    def subscription_count(self) -> int:
        return sum(1 for s in self._subscriptions if s.active)
