"""Directly-follows graphs with artificial start/end nodes.

The graph is stored as a dense integer weight matrix over the sorted activity
alphabet plus two reserved indices, which is the layout the cut-cost kernels
consume directly.
"""
from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .errors import DualminerError
from .event_log import END_ACTIVITY, START_ACTIVITY, EventLog


class Dfg:
    """Weighted directly-follows graph over ``activities`` plus START/END.

    ``weights`` has shape (n+2, n+2) with activity indices 0..n-1 in sorted
    name order, START at n and END at n+1.  Edges into START or out of END
    are structurally impossible and rejected.
    """

    __slots__ = ("activities", "weights", "_index", "_closure")

    def __init__(self, activities: Iterable[str], weights: np.ndarray):
        self.activities = tuple(sorted(activities))
        n = len(self.activities)
        weights = np.asarray(weights, dtype=np.int64)
        if weights.shape != (n + 2, n + 2):
            raise ValueError(f"weight matrix shape {weights.shape} does not match {n} activities")
        if (weights < 0).any():
            raise ValueError("edge weights must be non-negative")
        if weights[:, n].any() or weights[n + 1, :].any():
            raise ValueError("edges into START or out of END are not allowed")
        self.weights = weights.copy()
        self.weights.setflags(write=False)
        self._index = {a: i for i, a in enumerate(self.activities)}
        self._index[START_ACTIVITY] = n
        self._index[END_ACTIVITY] = n + 1
        self._closure = None

    # -- construction --------------------------------------------------

    @classmethod
    def from_edges(cls, activities: Iterable[str], edges: Mapping[tuple[str, str], int]) -> "Dfg":
        acts = tuple(sorted(activities))
        n = len(acts)
        index = {a: i for i, a in enumerate(acts)}
        index[START_ACTIVITY] = n
        index[END_ACTIVITY] = n + 1
        weights = np.zeros((n + 2, n + 2), dtype=np.int64)
        for (u, v), w in edges.items():
            weights[index[u], index[v]] = w
        return cls(acts, weights)

    # -- basic queries --------------------------------------------------

    @property
    def size(self) -> int:
        """Number of activities, reserved nodes excluded."""
        return len(self.activities)

    @property
    def start_index(self) -> int:
        return len(self.activities)

    @property
    def end_index(self) -> int:
        return len(self.activities) + 1

    def node_index(self, node: str) -> int:
        try:
            return self._index[node]
        except KeyError:
            raise DualminerError(f"unknown node {node!r}") from None

    def edge_weight(self, source: str, target: str) -> int:
        return int(self.weights[self.node_index(source), self.node_index(target)])

    def edges(self) -> dict[tuple[str, str], int]:
        names = self.activities + (START_ACTIVITY, END_ACTIVITY)
        rows, cols = np.nonzero(self.weights)
        return {(names[r], names[c]): int(self.weights[r, c]) for r, c in zip(rows, cols)}

    def node_frequency(self, node: str) -> int:
        """Total occurrences of an activity = total weight flowing into it."""
        i = self.node_index(node)
        if i >= self.start_index:
            raise DualminerError("node frequency is defined for activities only")
        return int(self.weights[:, i].sum())

    @property
    def trace_count(self) -> int:
        return int(self.weights[self.start_index, :].sum())

    def scaled(self, factor: int) -> "Dfg":
        if factor <= 0 or factor != int(factor):
            raise ValueError("scale factor must be a positive integer")
        return Dfg(self.activities, self.weights * int(factor))

    # -- reachability -----------------------------------------------------

    def closure(self) -> np.ndarray:
        """Boolean matrix of one-or-more-edge reachability."""
        if self._closure is None:
            adj = (self.weights > 0).astype(np.int32)
            reach = adj.copy()
            # squaring doubles the covered path length each round
            for _ in range(max(1, reach.shape[0].bit_length())):
                new = ((reach + reach @ reach) > 0).astype(np.int32)
                if (new == reach).all():
                    break
                reach = new
            self._closure = reach.astype(bool)
            self._closure.setflags(write=False)
        return self._closure

    def reachable(self, source: str, target: str) -> bool:
        """True iff a directed path of at least one positive-weight edge exists."""
        return bool(self.closure()[self.node_index(source), self.node_index(target)])

    # -- export -----------------------------------------------------------

    def to_dot(self) -> str:
        lines = ["digraph dfg {", "  rankdir=LR;"]
        names = self.activities + (START_ACTIVITY, END_ACTIVITY)
        labels = {START_ACTIVITY: "start", END_ACTIVITY: "end"}
        for name in names:
            shape = "circle" if name in labels else "box"
            lines.append(f'  "{name}" [label="{labels.get(name, name)}", shape={shape}];')
        for (u, v), w in sorted(self.edges().items()):
            lines.append(f'  "{u}" -> "{v}" [label="{w}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"Dfg({len(self.activities)} activities, {int((self.weights > 0).sum())} edges)"


def build_dfg(log: EventLog) -> Dfg:
    """Count immediate-succession pairs over START/END-padded traces."""
    activities = tuple(sorted(log.alphabet))
    n = len(activities)
    index = {a: i for i, a in enumerate(activities)}
    start, end = n, n + 1
    weights = np.zeros((n + 2, n + 2), dtype=np.int64)
    for seq, count in log.variant_counts().items():
        previous = start
        for activity in seq:
            current = index[activity]
            weights[previous, current] += count
            previous = current
        weights[previous, end] += count
    return Dfg(activities, weights)


def reachable(graph: Dfg, source: str, target: str) -> bool:
    return graph.reachable(source, target)
