"""Block-structured process trees: construction, text form, simulation."""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Union

from .errors import TreeArityError, TreeSyntaxError
from .event_log import EventLog, Trace


class Operator(enum.Enum):
    SEQ = "->"
    XOR = "X"
    AND = "+"
    LOOP = "*"


@dataclass(frozen=True)
class Leaf:
    activity: str

    def __post_init__(self):
        if not self.activity:
            raise ValueError("leaf activity must be non-empty")


@dataclass(frozen=True)
class Tau:
    pass


TAU = Tau()


@dataclass(frozen=True)
class Node:
    operator: Operator
    children: tuple["ProcessTree", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if self.operator is Operator.LOOP:
            if len(self.children) != 2:
                raise TreeArityError(f"loop nodes take exactly 2 children, got {len(self.children)}")
        elif len(self.children) < 2:
            raise TreeArityError(f"{self.operator.name} nodes take at least 2 children, got {len(self.children)}")


ProcessTree = Union[Leaf, Tau, Node]


def seq(*children: ProcessTree) -> Node:
    return Node(Operator.SEQ, children)


def xor(*children: ProcessTree) -> Node:
    return Node(Operator.XOR, children)


def par(*children: ProcessTree) -> Node:
    return Node(Operator.AND, children)


def loop(do: ProcessTree, redo: ProcessTree) -> Node:
    return Node(Operator.LOOP, (do, redo))


def leaves(tree: ProcessTree) -> frozenset[str]:
    """Activity labels occurring in the tree."""
    if isinstance(tree, Leaf):
        return frozenset((tree.activity,))
    if isinstance(tree, Tau):
        return frozenset()
    out: set[str] = set()
    for child in tree.children:
        out |= leaves(child)
    return frozenset(out)


# --- canonical text form -----------------------------------------------------

def _quote(name: str) -> str:
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def to_text(tree: ProcessTree) -> str:
    """Render as ->(...), X(...), +(...), *(...) with quoted leaves and bare tau."""
    if isinstance(tree, Tau):
        return "tau"
    if isinstance(tree, Leaf):
        return _quote(tree.activity)
    body = ", ".join(to_text(child) for child in tree.children)
    return f"{tree.operator.value}({body})"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise TreeSyntaxError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, token: str):
        if not self.text.startswith(token, self.pos):
            self.error(f"expected {token!r}")
        self.pos += len(token)

    def parse_tree(self) -> ProcessTree:
        self.skip_ws()
        if self.pos >= len(self.text):
            self.error("unexpected end of input")
        ch = self.text[self.pos]
        if ch == "'":
            return Leaf(self.parse_quoted())
        if self.text.startswith("tau", self.pos):
            self.pos += 3
            return TAU
        for operator in (Operator.SEQ, Operator.XOR, Operator.AND, Operator.LOOP):
            if self.text.startswith(operator.value + "(", self.pos):
                return self.parse_node(operator)
        self.error(f"unexpected character {ch!r}")

    def parse_quoted(self) -> str:
        self.expect("'")
        out = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    self.error("dangling escape")
                out.append(self.text[self.pos + 1])
                self.pos += 2
            elif ch == "'":
                self.pos += 1
                if not out:
                    self.error("empty activity name")
                return "".join(out)
            else:
                out.append(ch)
                self.pos += 1
        self.error("unterminated quoted name")

    def parse_node(self, operator: Operator) -> Node:
        self.expect(operator.value + "(")
        children = [self.parse_tree()]
        self.skip_ws()
        while self.pos < len(self.text) and self.text[self.pos] == ",":
            self.pos += 1
            children.append(self.parse_tree())
            self.skip_ws()
        self.expect(")")
        return Node(operator, tuple(children))


def parse_text(text: str) -> ProcessTree:
    parser = _Parser(text)
    tree = parser.parse_tree()
    parser.skip_ws()
    if parser.pos != len(text):
        parser.error("trailing input after tree")
    return tree


# --- simulation ---------------------------------------------------------------

def simulate(tree: ProcessTree, n: int, max_loop_unroll: int = 3, seed: int = 0) -> EventLog:
    """Sample ``n`` traces, uniform over structural choices, deterministic per seed."""
    if n < 0:
        raise ValueError("trace count must be non-negative")
    rng = random.Random(seed)
    return EventLog((Trace(_sample(tree, rng, max_loop_unroll)), 1) for _ in range(n))


def _sample(tree: ProcessTree, rng: random.Random, unroll: int) -> list[str]:
    if isinstance(tree, Tau):
        return []
    if isinstance(tree, Leaf):
        return [tree.activity]
    if tree.operator is Operator.SEQ:
        out: list[str] = []
        for child in tree.children:
            out.extend(_sample(child, rng, unroll))
        return out
    if tree.operator is Operator.XOR:
        return _sample(rng.choice(tree.children), rng, unroll)
    if tree.operator is Operator.AND:
        parts = [_sample(child, rng, unroll) for child in tree.children]
        return _interleave(parts, rng)
    do, redo = tree.children
    out = _sample(do, rng, unroll)
    for _ in range(rng.randint(0, unroll)):
        out.extend(_sample(redo, rng, unroll))
        out.extend(_sample(do, rng, unroll))
    return out


def _interleave(parts: list[list[str]], rng: random.Random) -> list[str]:
    # weighting by remaining lengths makes every interleaving equally likely
    remaining = [list(reversed(p)) for p in parts]
    out: list[str] = []
    while True:
        weights = [len(p) for p in remaining]
        total = sum(weights)
        if total == 0:
            return out
        pick = rng.randrange(total)
        for i, w in enumerate(weights):
            if pick < w:
                out.append(remaining[i].pop())
                break
            pick -= w
