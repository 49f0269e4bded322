"""Batch cut-cost kernels.

Evaluating the candidate set is the hot loop of discovery: one recursion over an
n-activity graph scores up to 6 * (2**(n-1) - 1) bipartitions.  The kernel takes
a graph in dense integer-array form plus a membership matrix of candidate sides
and returns, per candidate, the deviating-edge weight and the total strength of
missing mandatory relations (unscaled by sup).  Everything is int64 arithmetic,
so the numba and numpy twins agree bit for bit.

Backend selection: DUALMINER_KERNEL=numpy forces the vectorized numpy path,
DUALMINER_KERNEL=numba forces the jitted path (import error if unavailable).
Default is numba when importable.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

OP_SEQ = 0
OP_XOR = 1
OP_AND = 2
OP_LOOP = 3

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on stripped installs
    numba = None
    HAS_NUMBA = False


def active_backend() -> str:
    choice = os.environ.get("DUALMINER_KERNEL", "").strip().lower()
    if choice in ("numba", "numpy"):
        if choice == "numba" and not HAS_NUMBA:
            raise RuntimeError("DUALMINER_KERNEL=numba but numba is not importable")
        return choice
    return "numba" if HAS_NUMBA else "numpy"


@dataclass(frozen=True)
class GraphArrays:
    """A DFG flattened to the arrays the kernels consume.

    All arrays are indexed by a shared activity ordering so that two graphs
    (the desirable and undesirable one) can be scored against the same cuts.
    """

    wa: np.ndarray        # (n, n) activity-to-activity weights
    start_w: np.ndarray   # (n,) START -> a
    end_w: np.ndarray     # (n,) a -> END
    out_w: np.ndarray     # (n,) total outgoing weight incl. END
    in_w: np.ndarray      # (n,) total incoming weight incl. START
    reach: np.ndarray     # (n, n) uint8, one-or-more-edge reachability
    n_traces: int

    @classmethod
    def from_dfg(cls, graph, activities: tuple[str, ...]) -> "GraphArrays":
        """Embed ``graph`` into the index space of ``activities``.

        Activities absent from the graph become zero rows/columns; edges of the
        graph touching activities outside the ordering are dropped.
        """
        n = len(activities)
        wa = np.zeros((n, n), dtype=np.int64)
        start_w = np.zeros(n, dtype=np.int64)
        end_w = np.zeros(n, dtype=np.int64)
        position = {a: i for i, a in enumerate(activities)}
        kept = [(a, position[a]) for a in graph.activities if a in position]
        gw = graph.weights
        si, ei = graph.start_index, graph.end_index
        for a, ia in kept:
            ga = graph.node_index(a)
            start_w[ia] = gw[si, ga]
            end_w[ia] = gw[ga, ei]
            for b, ib in kept:
                wa[ia, ib] = gw[ga, graph.node_index(b)]
        n_traces = int(start_w.sum()) + int(gw[si, ei])
        out_w = wa.sum(axis=1) + end_w
        in_w = wa.sum(axis=0) + start_w
        reach = _closure(wa)
        return cls(wa, start_w, end_w, out_w, in_w, reach, n_traces)


def _closure(wa: np.ndarray) -> np.ndarray:
    reach = (wa > 0).astype(np.int32)
    for _ in range(max(1, reach.shape[0].bit_length())):
        new = ((reach + reach @ reach) > 0).astype(np.int32)
        if (new == reach).all():
            break
        reach = new
    return reach.astype(np.uint8)


def evaluate_cuts(arrays: GraphArrays, m1: np.ndarray, ops: np.ndarray,
                  backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Score candidate cuts against one graph.

    ``m1`` is a (C, n) uint8 membership matrix for the first side; the second
    side is its complement.  Returns int64 arrays (dev, mis_strength).
    """
    m1 = np.ascontiguousarray(m1, dtype=np.uint8)
    ops = np.ascontiguousarray(ops, dtype=np.int8)
    if m1.ndim != 2 or m1.shape[0] != ops.shape[0]:
        raise ValueError("membership matrix and operator vector disagree")
    if backend is None:
        backend = active_backend()
    if backend == "numba":
        return _evaluate_numba(
            arrays.wa, arrays.start_w, arrays.end_w, arrays.out_w, arrays.in_w,
            arrays.reach, np.int64(arrays.n_traces), m1, ops)
    return _evaluate_numpy(arrays, m1, ops)


# --- pure numpy path ---------------------------------------------------------

def _evaluate_numpy(arrays: GraphArrays, m1: np.ndarray, ops: np.ndarray):
    wa = arrays.wa
    n = wa.shape[0]
    c = m1.shape[0]
    dev = np.zeros(c, dtype=np.int64)
    mis = np.zeros(c, dtype=np.int64)
    if n == 0 or c == 0:
        return dev, mis

    a1 = m1.astype(np.int64)
    a2 = 1 - a1
    minmat = np.minimum(arrays.out_w[:, None], arrays.in_w[None, :])
    missing_pair = np.where(wa == 0, minmat, 0)
    unreachable_pair = np.where(arrays.reach == 0, minmat, 0)
    traces = np.int64(arrays.n_traces)

    def both(rows, left, mat, right):
        return np.einsum("ca,ab,cb->c", left[rows], mat, right[rows], dtype=np.int64)

    def side_boundary_mis(rows):
        miss = np.zeros(rows.sum(), dtype=np.int64)
        for side in (a1[rows], a2[rows]):
            miss += traces * (side @ arrays.start_w == 0)
            miss += traces * (side @ arrays.end_w == 0)
        return miss

    rows = ops == OP_SEQ
    if rows.any():
        dev[rows] = both(rows, a2, wa, a1)
        mis[rows] = both(rows, a1, unreachable_pair, a2)

    rows = ops == OP_XOR
    if rows.any():
        dev[rows] = both(rows, a1, wa, a2) + both(rows, a2, wa, a1)
        mis[rows] = side_boundary_mis(rows)

    rows = ops == OP_AND
    if rows.any():
        mis[rows] = (both(rows, a1, missing_pair, a2)
                     + both(rows, a2, missing_pair, a1)
                     + side_boundary_mis(rows))

    rows = ops == OP_LOOP
    if rows.any():
        d1, d2 = a1[rows], a2[rows]
        starters = d1 * (arrays.start_w > 0)[None, :]
        enders = d1 * (arrays.end_w > 0)[None, :]
        non_starters = d1 - starters
        non_enders = d1 - enders
        has_edge = (wa > 0).astype(np.int64)
        dev[rows] = (d2 @ arrays.start_w
                     + d2 @ arrays.end_w
                     + np.einsum("ca,ab,cb->c", non_enders, wa, d2, dtype=np.int64)
                     + np.einsum("ca,ab,cb->c", d2, wa, non_starters, dtype=np.int64))
        redo_entries = d2 * ((enders @ has_edge) > 0)
        redo_exits = d2 * ((starters @ has_edge.T) > 0)
        mis[rows] = (np.einsum("ce,eb,cb->c", enders, missing_pair, redo_entries, dtype=np.int64)
                     + np.einsum("cb,bs,cs->c", redo_exits, missing_pair, starters, dtype=np.int64))

    return dev, mis


# --- numba path ----------------------------------------------------------------

def _kernel(wa, start_w, end_w, out_w, in_w, reach, n_traces, m1, ops):
    c = m1.shape[0]
    n = m1.shape[1]
    dev = np.zeros(c, dtype=np.int64)
    mis = np.zeros(c, dtype=np.int64)
    for k in range(c):
        op = ops[k]
        d = np.int64(0)
        m = np.int64(0)
        if op == OP_SEQ:
            for a in range(n):
                if m1[k, a] == 1:
                    for b in range(n):
                        if m1[k, b] == 0:
                            d += wa[b, a]
                            if reach[a, b] == 0:
                                m += min(out_w[a], in_w[b])
        elif op == OP_XOR or op == OP_AND:
            s1_start = False
            s1_end = False
            s2_start = False
            s2_end = False
            for a in range(n):
                if m1[k, a] == 1:
                    s1_start = s1_start or start_w[a] > 0
                    s1_end = s1_end or end_w[a] > 0
                else:
                    s2_start = s2_start or start_w[a] > 0
                    s2_end = s2_end or end_w[a] > 0
            if not s1_start:
                m += n_traces
            if not s1_end:
                m += n_traces
            if not s2_start:
                m += n_traces
            if not s2_end:
                m += n_traces
            for a in range(n):
                if m1[k, a] == 1:
                    for b in range(n):
                        if m1[k, b] == 0:
                            if op == OP_XOR:
                                d += wa[a, b] + wa[b, a]
                            else:
                                if wa[a, b] == 0:
                                    m += min(out_w[a], in_w[b])
                                if wa[b, a] == 0:
                                    m += min(out_w[b], in_w[a])
        else:  # OP_LOOP
            for b in range(n):
                if m1[k, b] == 0:
                    d += start_w[b] + end_w[b]
            for a in range(n):
                if m1[k, a] == 1:
                    a_starts = start_w[a] > 0
                    a_ends = end_w[a] > 0
                    for b in range(n):
                        if m1[k, b] == 0:
                            if not a_ends:
                                d += wa[a, b]
                            if not a_starts:
                                d += wa[b, a]
            for b in range(n):
                if m1[k, b] == 0:
                    entered = False
                    exits = False
                    for a in range(n):
                        if m1[k, a] == 1:
                            if end_w[a] > 0 and wa[a, b] > 0:
                                entered = True
                            if start_w[a] > 0 and wa[b, a] > 0:
                                exits = True
                    if entered:
                        for e in range(n):
                            if m1[k, e] == 1 and end_w[e] > 0 and wa[e, b] == 0:
                                m += min(out_w[e], in_w[b])
                    if exits:
                        for s in range(n):
                            if m1[k, s] == 1 and start_w[s] > 0 and wa[b, s] == 0:
                                m += min(out_w[b], in_w[s])
        dev[k] = d
        mis[k] = m
    return dev, mis


if HAS_NUMBA:
    _evaluate_numba = numba.njit(cache=True, nogil=True)(_kernel)
else:  # pragma: no cover
    _evaluate_numba = _kernel
