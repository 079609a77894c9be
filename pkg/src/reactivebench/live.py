"""Live-object accounting shared by all three runtimes.

Counters stand in for heap measurements: every runtime reports how many
nodes, edges, effect observers, and retained explicit subscriptions it is
currently keeping alive. The signal runtime's subscription count is zero by
construction; the baselines accumulate real subscription objects that must
be torn down by hand.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LiveCounts:
    """Snapshot of live objects. Immutable so snapshots compare by value."""

    nodes: int = 0
    edges: int = 0
    effects: int = 0
    subscriptions: int = 0

    def object_total(self) -> int:
        """Total live objects used by memory-ratio comparisons.

        Effect observers are runtime-internal bookkeeping and are excluded;
        the ratio contrasts data nodes, edges, and retained subscriptions.
        """
        return self.nodes + self.edges + self.subscriptions

    def as_dict(self) -> dict[str, int]:
        return {
            "nodes": self.nodes,
            "edges": self.edges,
            "effects": self.effects,
            "subscriptions": self.subscriptions,
        }
