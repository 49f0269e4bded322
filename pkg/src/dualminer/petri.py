"""Workflow Petri nets: tree conversion, token replay, PNML serialization."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Optional
from xml.sax.saxutils import quoteattr

from .errors import PetriNetError, PnmlError
from .process_tree import Leaf, Node, Operator, ProcessTree, Tau

Marking = dict  # place id -> token count, places with zero tokens omitted


@dataclass(frozen=True)
class Transition:
    tid: str
    label: Optional[str]  # None marks a silent transition


class PetriNet:
    """A workflow net: unique source and sink place, bipartite arcs."""

    __slots__ = ("places", "transitions", "pre", "post", "initial_marking", "final_marking",
                 "_by_id")

    def __init__(self, places, transitions, arcs, initial_marking, final_marking):
        self.places = tuple(places)
        self.transitions = tuple(transitions)
        place_set = set(self.places)
        tids = [t.tid for t in self.transitions]
        self._by_id = {t.tid: t for t in self.transitions}
        if len(self._by_id) != len(tids) or place_set & set(tids):
            raise PetriNetError("place and transition ids must be unique")
        pre: dict[str, list[str]] = {tid: [] for tid in tids}
        post: dict[str, list[str]] = {tid: [] for tid in tids}
        for source, target in arcs:
            if source in place_set and target in pre:
                pre[target].append(source)
            elif source in pre and target in place_set:
                post[source].append(target)
            else:
                raise PetriNetError(f"arc {source}->{target} does not connect a place and a transition")
        self.pre = {tid: tuple(v) for tid, v in pre.items()}
        self.post = {tid: tuple(v) for tid, v in post.items()}
        self.initial_marking = dict(initial_marking)
        self.final_marking = dict(final_marking)
        _validate_workflow_structure(self)

    @property
    def arcs(self) -> list[tuple[str, str]]:
        out = []
        for tid in sorted(self.pre):
            out.extend((p, tid) for p in self.pre[tid])
            out.extend((tid, p) for p in self.post[tid])
        return sorted(out)

    def transition(self, tid: str) -> Transition:
        return self._by_id[tid]

    def label(self, tid: str) -> Optional[str]:
        return self._by_id[tid].label

    def labels(self) -> frozenset[str]:
        return frozenset(t.label for t in self.transitions if t.label is not None)

    def __repr__(self):
        return f"PetriNet({len(self.places)} places, {len(self.transitions)} transitions)"


def _validate_workflow_structure(net: PetriNet) -> None:
    has_in = {p: False for p in net.places}
    has_out = {p: False for p in net.places}
    for tid in net.pre:
        for p in net.pre[tid]:
            has_out[p] = True
        for p in net.post[tid]:
            has_in[p] = True
    sources = [p for p in net.places if not has_in[p]]
    sinks = [p for p in net.places if not has_out[p]]
    if len(sources) != 1 or len(sinks) != 1:
        raise PetriNetError(f"workflow net needs one source and one sink, found {sources} / {sinks}")
    if net.initial_marking != {sources[0]: 1} or net.final_marking != {sinks[0]: 1}:
        raise PetriNetError("initial/final markings must put one token on the source/sink")
    # every node on a path from source to sink
    forward = _nodes_reachable(net, sources[0], forwards=True)
    backward = _nodes_reachable(net, sinks[0], forwards=False)
    all_nodes = set(net.places) | set(net.pre)
    stranded = all_nodes - (forward & backward)
    if stranded:
        raise PetriNetError(f"nodes off every source-to-sink path: {sorted(stranded)}")


def _nodes_reachable(net: PetriNet, start: str, forwards: bool) -> set[str]:
    succ: dict[str, set[str]] = {}
    for tid in net.pre:
        for p in net.pre[tid]:
            succ.setdefault(p if forwards else tid, set()).add(tid if forwards else p)
        for p in net.post[tid]:
            succ.setdefault(tid if forwards else p, set()).add(p if forwards else tid)
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for nxt in succ.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


# --- replay -------------------------------------------------------------------


def enabled(net: PetriNet, marking: Marking) -> list[str]:
    """Transition ids whose input places all hold a token, in id order."""
    place_set = set(net.places)
    for place in marking:
        if place not in place_set:
            raise PetriNetError(f"marking references unknown place {place!r}")
    return [tid for tid in sorted(net.pre)
            if all(marking.get(p, 0) >= 1 for p in net.pre[tid])]


def fire(net: PetriNet, marking: Marking, tid: str) -> Marking:
    """Consume one token per input place, produce one per output place."""
    if tid not in net.pre:
        raise PetriNetError(f"unknown transition {tid!r}")
    if any(marking.get(p, 0) < 1 for p in net.pre[tid]):
        raise PetriNetError(f"transition {tid!r} is not enabled")
    out = dict(marking)
    for p in net.pre[tid]:
        out[p] -= 1
        if out[p] == 0:
            del out[p]
    for p in net.post[tid]:
        out[p] = out.get(p, 0) + 1
    return out


# --- tree conversion -------------------------------------------------------------


class _Builder:
    def __init__(self):
        self.places: list[str] = []
        self.transitions: list[Transition] = []
        self.arcs: list[tuple[str, str]] = []

    def place(self) -> str:
        pid = f"p{len(self.places)}"
        self.places.append(pid)
        return pid

    def transition(self, label: Optional[str]) -> str:
        tid = f"t{len(self.transitions)}"
        self.transitions.append(Transition(tid, label))
        return tid

    def wire(self, source: str, target: str) -> None:
        self.arcs.append((source, target))


def tree_to_petri(tree: ProcessTree) -> PetriNet:
    """Sound construction; the net's visible language equals the tree's."""
    builder = _Builder()
    source = builder.place()
    sink = builder.place()
    _build(tree, builder, source, sink)
    return PetriNet(builder.places, builder.transitions, builder.arcs,
                    {source: 1}, {sink: 1})


def _build(tree: ProcessTree, b: _Builder, pin: str, pout: str) -> None:
    if isinstance(tree, (Leaf, Tau)):
        tid = b.transition(tree.activity if isinstance(tree, Leaf) else None)
        b.wire(pin, tid)
        b.wire(tid, pout)
        return
    operator = tree.operator
    if operator is Operator.SEQ:
        previous = pin
        for child in tree.children[:-1]:
            middle = b.place()
            _build(child, b, previous, middle)
            previous = middle
        _build(tree.children[-1], b, previous, pout)
    elif operator is Operator.XOR:
        for child in tree.children:
            _build(child, b, pin, pout)
    elif operator is Operator.AND:
        split = b.transition(None)
        join = b.transition(None)
        b.wire(pin, split)
        b.wire(join, pout)
        for child in tree.children:
            cin, cout = b.place(), b.place()
            b.wire(split, cin)
            b.wire(cout, join)
            _build(child, b, cin, cout)
    else:  # LOOP: silent entry/exit so the redo arc cannot bypass the do part
        do, redo = tree.children
        entry = b.transition(None)
        exit_ = b.transition(None)
        before, after = b.place(), b.place()
        b.wire(pin, entry)
        b.wire(entry, before)
        b.wire(after, exit_)
        b.wire(exit_, pout)
        _build(do, b, before, after)
        _build(redo, b, after, before)


# --- PNML ----------------------------------------------------------------------


def export_pnml(net: PetriNet) -> bytes:
    """PNML with deterministic element order; silent transitions carry no name."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<pnml>',
             '  <net id="net1" type="http://www.pnml.org/version-2009/grammar/pnmlcoremodel">',
             '    <page id="page1">']
    for pid in net.places:
        lines.append(f'      <place id={quoteattr(pid)}>')
        if net.initial_marking.get(pid):
            lines.append(f'        <initialMarking><text>{net.initial_marking[pid]}</text></initialMarking>')
        lines.append('      </place>')
    for t in net.transitions:
        if t.label is None:
            lines.append(f'      <transition id={quoteattr(t.tid)}/>')
        else:
            lines.append(f'      <transition id={quoteattr(t.tid)}>')
            lines.append(f'        <name><text>{_xml_escape(t.label)}</text></name>')
            lines.append('      </transition>')
    for index, (source, target) in enumerate(net.arcs):
        lines.append(f'      <arc id="a{index}" source={quoteattr(source)} target={quoteattr(target)}/>')
    lines.append('    </page>')
    lines.append('    <finalmarkings>')
    lines.append('      <marking>')
    for pid, count in sorted(net.final_marking.items()):
        lines.append(f'        <place idref={quoteattr(pid)}><text>{count}</text></place>')
    lines.append('      </marking>')
    lines.append('    </finalmarkings>')
    lines.append('  </net>')
    lines.append('</pnml>')
    return ("\n".join(lines) + "\n").encode("utf-8")


def _xml_escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_pnml(data: bytes | str) -> PetriNet:
    """Minimal reader: places, transitions, arcs, markings, silent-name convention."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise PnmlError(f"malformed PNML: {exc}") from exc
    net_el = None
    for element in root.iter():
        if _local(element.tag) == "net":
            net_el = element
            break
    if net_el is None:
        raise PnmlError("no <net> element found")

    places, transitions, arcs = [], [], []
    initial, final = {}, {}
    for element in net_el.iter():
        tag = _local(element.tag)
        if tag == "place":
            pid = element.get("id")
            if pid is None:
                if element.get("idref"):
                    continue  # final-marking reference, handled below
                raise PnmlError("place without id")
            places.append(pid)
            for child in element.iter():
                if _local(child.tag) == "initialMarking":
                    count = _marking_text(child)
                    if count:
                        initial[pid] = count
        elif tag == "transition":
            tid = element.get("id")
            if tid is None:
                raise PnmlError("transition without id")
            label = None
            for child in element.iter():
                if _local(child.tag) == "name":
                    text = "".join(t.text or "" for t in child.iter() if _local(t.tag) == "text")
                    text = text.strip()
                    if text and text.lower() != "tau":
                        label = text
            transitions.append(Transition(tid, label))
        elif tag == "arc":
            source, target = element.get("source"), element.get("target")
            if source is None or target is None:
                raise PnmlError("arc without source/target")
            arcs.append((source, target))
        elif tag == "marking":  # inside finalmarkings
            for child in element.iter():
                if _local(child.tag) == "place":
                    ref = child.get("idref")
                    count = _marking_text(child)
                    if ref and count:
                        final[ref] = count

    if not initial or not final:
        initial, final = _infer_markings(places, transitions, arcs, initial, final)
    try:
        return PetriNet(places, transitions, arcs, initial, final)
    except PetriNetError as exc:
        raise PnmlError(f"PNML net is not a workflow net: {exc}") from exc


def _marking_text(element) -> int:
    for t in element.iter():
        if _local(t.tag) == "text" and t.text and t.text.strip():
            try:
                return int(t.text.strip())
            except ValueError:
                raise PnmlError(f"bad marking count {t.text!r}") from None
    return 0


def _infer_markings(places, transitions, arcs, initial, final):
    targets = {t for _, t in arcs}
    sources = {s for s, _ in arcs}
    if not initial:
        roots = [p for p in places if p not in targets]
        if len(roots) != 1:
            raise PnmlError("cannot infer a unique source place")
        initial = {roots[0]: 1}
    if not final:
        leaves = [p for p in places if p not in sources]
        if len(leaves) != 1:
            raise PnmlError("cannot infer a unique sink place")
        final = {leaves[0]: 1}
    return initial, final
