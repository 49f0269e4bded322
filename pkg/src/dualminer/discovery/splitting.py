"""Split an event log into the two sub-logs induced by a chosen cut."""
from __future__ import annotations

from collections import Counter

from ..event_log import EventLog
from .cuts import Cut
from ..process_tree import Operator


def split_logs(log: EventLog, cut: Cut) -> tuple[EventLog, EventLog]:
    """Route each trace's events to the cut's sides.

    Events outside the cut's activities are dropped up front.  The per-operator
    rules keep every surviving event on its own side, so both sub-log alphabets
    shrink strictly, which is what makes the recursion terminate.
    """
    sigma1, sigma2 = cut.sigma1, cut.sigma2
    part1: Counter = Counter()
    part2: Counter = Counter()
    for seq, count in log.variant_counts().items():
        trace = tuple(a for a in seq if a in sigma1 or a in sigma2)
        if cut.operator is Operator.SEQ:
            position = _best_seq_split(trace, sigma1)
            part1[tuple(a for a in trace[:position] if a in sigma1)] += count
            part2[tuple(a for a in trace[position:] if a in sigma2)] += count
        elif cut.operator is Operator.XOR:
            count1 = sum(1 for a in trace if a in sigma1)
            if count1 * 2 >= len(trace):
                part1[tuple(a for a in trace if a in sigma1)] += count
            else:
                part2[tuple(a for a in trace if a in sigma2)] += count
        elif cut.operator is Operator.AND:
            part1[tuple(a for a in trace if a in sigma1)] += count
            part2[tuple(a for a in trace if a in sigma2)] += count
        else:
            for side, segment in _loop_segments(trace, sigma1):
                (part1 if side == 1 else part2)[segment] += count
    return EventLog.from_variants(part1), EventLog.from_variants(part2)


def _best_seq_split(trace: tuple[str, ...], sigma1: frozenset[str]) -> int:
    """Earliest position minimizing side-2 events before it plus side-1 events after."""
    best_position = 0
    best_cost = sum(1 for a in trace if a in sigma1)
    cost = best_cost
    for position, activity in enumerate(trace, start=1):
        cost += 1 if activity not in sigma1 else -1
        if cost < best_cost:
            best_cost = cost
            best_position = position
    return best_position


def _loop_segments(trace: tuple[str, ...], sigma1: frozenset[str]):
    """Maximal runs of same-side events; missing do-runs at the borders are empty."""
    if not trace:
        yield 1, ()
        return
    segments: list[tuple[int, tuple[str, ...]]] = []
    side = 1 if trace[0] in sigma1 else 2
    run: list[str] = []
    for activity in trace:
        current = 1 if activity in sigma1 else 2
        if current != side:
            segments.append((side, tuple(run)))
            run = []
            side = current
        run.append(activity)
    segments.append((side, tuple(run)))
    if segments[0][0] == 2:
        yield 1, ()
    yield from segments
    if segments[-1][0] == 2:
        yield 1, ()
