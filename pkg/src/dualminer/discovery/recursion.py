"""The recursive discovery loop: base cases, cut selection, splitting."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..dfg import build_dfg
from ..event_log import EventLog
from ..process_tree import TAU, Leaf, Node, Operator, ProcessTree
from .cuts import Cut, DiscoveryParams, cut_cost, find_optimal_cut
from .splitting import split_logs

log = logging.getLogger(__name__)


@dataclass
class DiscoveryStats:
    """Per-run record of every cut decision (cut, overall cost, cost on the
    desirable graph alone)."""

    decisions: list[tuple[Cut, float, float]] = field(default_factory=list)

    @property
    def cut_count(self) -> int:
        return len(self.decisions)


def base_case(log_plus: EventLog, recurse: Optional[Callable[[EventLog], ProcessTree]] = None):
    """The tree for trivial logs, or None when a cut is needed.

    Logs mixing empty and non-empty traces yield an exclusive choice between
    tau and the remainder; ``recurse`` supplies the remainder's subtree and
    defaults to retrying the closed-form base cases.
    """
    total = log_plus.total_traces
    if total == 0:
        return TAU
    variants = log_plus.variant_counts()
    empties = variants.get((), 0)
    if empties == total:
        return TAU
    if empties > 0:
        rest = EventLog.from_variants({seq: c for seq, c in variants.items() if seq})
        subtree = (recurse or _closed_base_case)(rest)
        return Node(Operator.XOR, (TAU, subtree))
    alphabet = log_plus.alphabet
    if len(alphabet) == 1:
        (activity,) = alphabet
        if all(seq == (activity,) for seq in variants):
            return Leaf(activity)
        return Node(Operator.LOOP, (Leaf(activity), TAU))
    return None


def _closed_base_case(log_plus: EventLog) -> ProcessTree:
    tree = base_case(log_plus)
    if tree is None:
        raise ValueError("remainder needs a cut; pass an explicit recurse callback")
    return tree


def discover(log_plus: EventLog, log_minus: EventLog, params: DiscoveryParams) -> ProcessTree:
    """Mine a process tree that supports log_plus while avoiding log_minus."""
    return discover_with_stats(log_plus, log_minus, params)[0]


def discover_with_stats(log_plus: EventLog, log_minus: EventLog,
                        params: DiscoveryParams) -> tuple[ProcessTree, DiscoveryStats]:
    stats = DiscoveryStats()
    foreign = log_minus.alphabet - log_plus.alphabet
    if foreign:
        log.warning("ignoring %d undesirable-log activities never seen in the desirable log: %s",
                    len(foreign), sorted(foreign))
    tree = _discover(log_plus, log_minus, params, stats)
    return tree, stats


def _discover(log_plus: EventLog, log_minus: EventLog, params: DiscoveryParams,
              stats: DiscoveryStats) -> ProcessTree:
    trivial = base_case(log_plus, recurse=lambda rest: _discover(
        rest, _strip_empties(log_minus), params, stats))
    if trivial is not None:
        return trivial

    log_minus = log_minus.project(log_plus.alphabet)
    g_plus = build_dfg(log_plus)
    g_minus = build_dfg(log_minus)
    cut, cost = find_optimal_cut(g_plus, g_minus, params)
    stats.decisions.append((cut, cost, cut_cost(g_plus, cut, params.sup)))
    plus1, plus2 = split_logs(log_plus, cut)
    minus1, minus2 = split_logs(log_minus, cut)
    left = _discover(plus1, minus1, params, stats)
    right = _discover(plus2, minus2, params, stats)
    return Node(cut.operator, (left, right))


def _strip_empties(event_log: EventLog) -> EventLog:
    return EventLog.from_variants(
        {seq: c for seq, c in event_log.variant_counts().items() if seq})
