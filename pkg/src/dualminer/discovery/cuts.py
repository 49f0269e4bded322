"""Binary cuts of a directly-follows graph and their cost-based ranking.

A cut assigns every activity to one of two sides and carries one of the four
block operators.  Each operator classifies the possible edges of the graph into
forbidden, mandatory and optional groups; observed forbidden weight is the
deviation cost, absent mandatory relations are charged ``sup`` times a strength
(min of the endpoints' total in/out weight for activity pairs, the trace count
for a side that lost its START/END connection).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from ..dfg import Dfg
from ..errors import DualminerError
from ..process_tree import Operator
from . import kernels
from .kernels import OP_AND, OP_LOOP, OP_SEQ, OP_XOR, GraphArrays

_OP_CODE = {Operator.SEQ: OP_SEQ, Operator.XOR: OP_XOR, Operator.AND: OP_AND, Operator.LOOP: OP_LOOP}
_OP_PRIORITY = {Operator.SEQ: 0, Operator.XOR: 1, Operator.AND: 2, Operator.LOOP: 3}
_SYMMETRIC = (Operator.XOR, Operator.AND)


@dataclass(frozen=True)
class Cut:
    """Operator plus a disjoint bipartition of the activity set."""

    operator: Operator
    sigma1: frozenset[str]
    sigma2: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "sigma1", frozenset(self.sigma1))
        object.__setattr__(self, "sigma2", frozenset(self.sigma2))
        if not self.sigma1 or not self.sigma2:
            raise DualminerError("both cut sides must be non-empty")
        if self.sigma1 & self.sigma2:
            raise DualminerError("cut sides must be disjoint")

    def __repr__(self):
        s1 = ",".join(sorted(self.sigma1))
        s2 = ",".join(sorted(self.sigma2))
        return f"Cut({self.operator.value} {{{s1}}} {{{s2}}})"


@dataclass(frozen=True)
class CutTypeSpec:
    """Edge/relation classification of one operator over the node classes
    START, END, side 1, side 2, start-activities(side 1), end-activities(side 1)."""

    forbidden: tuple[str, ...]
    mandatory: tuple[str, ...]
    optional: tuple[str, ...]


CUT_TYPE_SPECS = {
    Operator.SEQ: CutTypeSpec(
        forbidden=("edges side2->side1",),
        mandatory=("reachability a->b for every pair (a, b) in side1 x side2",),
        optional=("edges side1->side2", "edges within side1", "edges within side2",
                  "START edges", "END edges"),
    ),
    Operator.XOR: CutTypeSpec(
        forbidden=("edges side1->side2", "edges side2->side1"),
        mandatory=("each side has an edge from START", "each side has an edge to END"),
        optional=("edges within side1", "edges within side2", "START edges", "END edges"),
    ),
    Operator.AND: CutTypeSpec(
        forbidden=(),
        mandatory=("edge (a, b) for every pair (a, b) in side1 x side2",
                   "edge (b, a) for every pair (a, b) in side1 x side2",
                   "each side has an edge from START", "each side has an edge to END"),
        optional=("edges within side1", "edges within side2", "START edges", "END edges"),
    ),
    Operator.LOOP: CutTypeSpec(
        forbidden=("edges START->side2", "edges side2->END",
                   "edges side1->side2 not leaving an end-activity of side1",
                   "edges side2->side1 not entering a start-activity of side1"),
        mandatory=("edge (e, b) for every end-activity e of side1 and every observed redo entry b",
                   "edge (b, s) for every observed redo exit b and every start-activity s of side1"),
        optional=("edges within side1", "edges within side2",
                  "edges end-activities(side1)->side2", "edges side2->start-activities(side1)",
                  "START edges into side1", "END edges out of side1"),
    ),
}


@dataclass(frozen=True)
class DiscoveryParams:
    """Tuning knobs of the recursive search."""

    sup: float = 0.2
    ratio: float = 0.0
    exhaustive_limit: int = 12
    search_restarts: int = 24
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.sup <= 1.0:
            raise DualminerError(f"sup must lie in [0, 1], got {self.sup}")
        if not 0.0 <= self.ratio <= 1.0:
            raise DualminerError(f"ratio must lie in [0, 1], got {self.ratio}")
        if self.exhaustive_limit < 2:
            raise DualminerError("exhaustive_limit must be at least 2")
        if self.search_restarts < 1:
            raise DualminerError("search_restarts must be at least 1")


# --- single-cut costs -------------------------------------------------------


def _check_cut(graph: Dfg, cut: Cut) -> None:
    sigma = cut.sigma1 | cut.sigma2
    if sigma != set(graph.activities):
        raise DualminerError(
            f"cut covers {sorted(sigma)} but the graph alphabet is {sorted(graph.activities)}")


def _membership(activities: tuple[str, ...], sides: Iterable[frozenset[str]]) -> np.ndarray:
    rows = []
    for side in sides:
        rows.append([1 if a in side else 0 for a in activities])
    return np.asarray(rows, dtype=np.uint8)


def _single(graph: Dfg, cut: Cut) -> tuple[int, int]:
    _check_cut(graph, cut)
    arrays = GraphArrays.from_dfg(graph, graph.activities)
    m1 = _membership(graph.activities, [cut.sigma1])
    ops = np.asarray([_OP_CODE[cut.operator]], dtype=np.int8)
    dev, mis = kernels.evaluate_cuts(arrays, m1, ops)
    return int(dev[0]), int(mis[0])


def dev_cost(graph: Dfg, cut: Cut) -> float:
    """Total weight of edges the cut type forbids."""
    return float(_single(graph, cut)[0])


def mis_cost(graph: Dfg, cut: Cut, sup: float) -> float:
    """sup-scaled total strength of the cut type's unsatisfied mandatory relations."""
    if not 0.0 <= sup <= 1.0:
        raise DualminerError(f"sup must lie in [0, 1], got {sup}")
    return sup * _single(graph, cut)[1]


def cut_cost(graph: Dfg, cut: Cut, sup: float) -> float:
    if not 0.0 <= sup <= 1.0:
        raise DualminerError(f"sup must lie in [0, 1], got {sup}")
    dev, mis = _single(graph, cut)
    return dev + sup * mis


def overall_cost(g_plus: Dfg, g_minus: Dfg, cut: Cut, sup: float, ratio: float) -> float:
    """cost on the desirable graph minus ratio times cost on the undesirable one.

    The undesirable graph is restricted to edges between the cut's activities
    (plus START/END); anything else it mentions is ignored.
    """
    if not 0.0 <= sup <= 1.0:
        raise DualminerError(f"sup must lie in [0, 1], got {sup}")
    if not 0.0 <= ratio <= 1.0:
        raise DualminerError(f"ratio must lie in [0, 1], got {ratio}")
    _check_cut(g_plus, cut)
    scorer = _CutScorer(g_plus, g_minus, sup, ratio)
    return scorer.float_costs([cut])[0]


# --- batch scoring -----------------------------------------------------------


class _CutScorer:
    """Scores batches of cuts over a fixed graph pair.

    Keeps integer aggregates so that ranking can use exact rational arithmetic:
    tie-breaks stay stable and uniformly scaled weights can never flip an argmin
    through float rounding.
    """

    def __init__(self, g_plus: Dfg, g_minus: Optional[Dfg], sup: float, ratio: float):
        self.activities = g_plus.activities
        self.plus = GraphArrays.from_dfg(g_plus, self.activities)
        self.minus = GraphArrays.from_dfg(g_minus, self.activities) if g_minus is not None else None
        self.sup = sup
        self.ratio = ratio
        sup_frac = Fraction(sup)
        ratio_frac = Fraction(ratio)
        sn, sd = sup_frac.numerator, sup_frac.denominator
        rn, rd = ratio_frac.numerator, ratio_frac.denominator
        # ov_cost * (sd*rd) as exact integers
        self._c_dev_p = sd * rd
        self._c_mis_p = sn * rd
        self._c_dev_m = -rn * sd
        self._c_mis_m = -rn * sn

    def _batch(self, cuts: list[Cut]) -> tuple[np.ndarray, ...]:
        m1 = _membership(self.activities, (c.sigma1 for c in cuts))
        ops = np.asarray([_OP_CODE[c.operator] for c in cuts], dtype=np.int8)
        dev_p, mis_p = kernels.evaluate_cuts(self.plus, m1, ops)
        if self.minus is not None:
            dev_m, mis_m = kernels.evaluate_cuts(self.minus, m1, ops)
        else:
            dev_m = np.zeros_like(dev_p)
            mis_m = np.zeros_like(mis_p)
        return dev_p, mis_p, dev_m, mis_m

    def exact_keys(self, cuts: list[Cut]) -> list[int]:
        dev_p, mis_p, dev_m, mis_m = self._batch(cuts)
        return [
            self._c_dev_p * int(dp) + self._c_mis_p * int(mp)
            + self._c_dev_m * int(dm) + self._c_mis_m * int(mm)
            for dp, mp, dm, mm in zip(dev_p, mis_p, dev_m, mis_m)
        ]

    def float_costs(self, cuts: list[Cut]) -> list[float]:
        dev_p, mis_p, dev_m, mis_m = self._batch(cuts)
        return [
            (int(dp) + self.sup * int(mp)) - self.ratio * (int(dm) + self.sup * int(mm))
            for dp, mp, dm, mm in zip(dev_p, mis_p, dev_m, mis_m)
        ]


def _tie_break(cut: Cut) -> tuple:
    return (_OP_PRIORITY[cut.operator], len(cut.sigma1), tuple(sorted(cut.sigma1)))


# --- candidate generation ------------------------------------------------------


def enumerate_cuts(g_plus: Dfg, params: DiscoveryParams, g_minus: Optional[Dfg] = None) -> list[Cut]:
    """All candidate cuts for an alphabet within the exhaustive limit, otherwise
    the local optima reached by seeded hill-climbing under the overall cost."""
    n = g_plus.size
    if n < 2:
        raise DualminerError("cut enumeration requires at least two activities")
    if n <= params.exhaustive_limit:
        return _exhaustive_cuts(g_plus.activities)
    return _local_search_cuts(g_plus, params, g_minus)


def _exhaustive_cuts(activities: tuple[str, ...]) -> list[Cut]:
    n = len(activities)
    cuts = []
    # bit 0 pinned to side 1 so unordered bipartitions appear once
    for operator in (Operator.SEQ, Operator.XOR, Operator.AND, Operator.LOOP):
        for mask in range((1 << (n - 1)) - 1):
            bits = (mask << 1) | 1
            side1 = frozenset(activities[i] for i in range(n) if bits >> i & 1)
            side2 = frozenset(activities) - side1
            cuts.append(Cut(operator, side1, side2))
            if operator not in _SYMMETRIC:
                cuts.append(Cut(operator, side2, side1))
    return cuts


def _local_search_cuts(g_plus: Dfg, params: DiscoveryParams, g_minus: Optional[Dfg]) -> list[Cut]:
    activities = g_plus.activities
    n = len(activities)
    scorer = _CutScorer(g_plus, g_minus, params.sup, params.ratio)
    rng = random.Random(params.seed)

    seeds = _structural_seeds(g_plus)
    target = len(seeds) + params.search_restarts
    while len(seeds) < target:
        bits = rng.getrandbits(n)
        if 0 < bits.bit_count() < n:
            seeds.append(frozenset(activities[i] for i in range(n) if bits >> i & 1))

    full = frozenset(activities)
    found: list[Cut] = []
    seen: set[tuple] = set()
    for side1 in seeds:
        for operator in (Operator.SEQ, Operator.XOR, Operator.AND, Operator.LOOP):
            orientations = [side1] if operator in _SYMMETRIC else [side1, full - side1]
            for start_side in orientations:
                cut = _hill_climb(Cut(operator, start_side, full - start_side), activities, scorer)
                canonical = cut.sigma1
                if operator in _SYMMETRIC:
                    canonical = min(cut.sigma1, cut.sigma2, key=sorted)
                key = (cut.operator, canonical)
                if key not in seen:
                    seen.add(key)
                    found.append(cut)
    return found


def _structural_seeds(g_plus: Dfg) -> list[frozenset[str]]:
    """Bipartition seeds from the component structure of the activity subgraph."""
    activities = g_plus.activities
    n = len(activities)
    adj = g_plus.weights[:n, :n] > 0
    seeds: list[frozenset[str]] = []

    # weakly connected components: one component against the rest
    undirected = adj | adj.T
    unvisited = set(range(n))
    components = []
    while unvisited:
        root = min(unvisited)
        stack = [root]
        component = {root}
        unvisited.discard(root)
        while stack:
            v = stack.pop()
            for w in np.nonzero(undirected[v])[0]:
                if w in unvisited:
                    unvisited.discard(int(w))
                    component.add(int(w))
                    stack.append(int(w))
        components.append(component)
    if len(components) > 1:
        for component in components:
            if 0 < len(component) < n:
                seeds.append(frozenset(activities[i] for i in sorted(component)))

    # strongly connected condensation, topological prefixes
    reach = g_plus.closure()[:n, :n]
    mutual = reach & reach.T
    assigned = [-1] * n
    groups: list[list[int]] = []
    for v in range(n):
        if assigned[v] >= 0:
            continue
        group = [v]
        assigned[v] = len(groups)
        for w in range(v + 1, n):
            if assigned[w] < 0 and mutual[v, w]:
                group.append(w)
                assigned[w] = len(groups)
        groups.append(group)
    order = sorted(range(len(groups)),
                   key=lambda g: (-int(reach[groups[g][0], :].sum()), groups[g][0]))
    prefix: set[int] = set()
    for g in order[:-1]:
        prefix |= set(groups[g])
        if 0 < len(prefix) < n:
            seeds.append(frozenset(activities[i] for i in sorted(prefix)))

    # halves of the sorted alphabet as a neutral fallback
    seeds.append(frozenset(activities[: max(1, n // 2)]))
    out, seen = [], set()
    for s in seeds:
        if s not in seen and 0 < len(s) < n:
            seen.add(s)
            out.append(s)
    return out


def _hill_climb(cut: Cut, activities: tuple[str, ...], scorer: _CutScorer) -> Cut:
    full = frozenset(activities)
    current = cut
    current_key = scorer.exact_keys([current])[0]
    while True:
        neighbors = []
        for activity in activities:
            if activity in current.sigma1:
                if len(current.sigma1) == 1:
                    continue
                side1 = current.sigma1 - {activity}
            else:
                if len(current.sigma2) == 1:
                    continue
                side1 = current.sigma1 | {activity}
            neighbors.append(Cut(current.operator, side1, full - side1))
        if not neighbors:
            return current
        keys = scorer.exact_keys(neighbors)
        best = min(range(len(neighbors)), key=lambda i: (keys[i], _tie_break(neighbors[i])))
        if keys[best] < current_key:
            current, current_key = neighbors[best], keys[best]
        else:
            return current


def find_optimal_cut(g_plus: Dfg, g_minus: Optional[Dfg], params: DiscoveryParams) -> tuple[Cut, float]:
    """The candidate with minimal overall cost.

    Ties fall to operator priority SEQ, XOR, AND, LOOP, then to the smaller,
    then lexicographically smaller first side.
    """
    candidates = enumerate_cuts(g_plus, params, g_minus)
    scorer = _CutScorer(g_plus, g_minus, params.sup, params.ratio)
    keys = scorer.exact_keys(candidates)
    best = min(range(len(candidates)), key=lambda i: (keys[i], _tie_break(candidates[i])))
    cost = scorer.float_costs([candidates[best]])[0]
    return candidates[best], cost
