"""Dataflow graphs built from width-checked BDL programs."""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from typing import Mapping

from .errors import CycleError
from .frontend import (
    Binary,
    Const,
    Expr,
    Program,
    Unary,
    Var,
    WidthReport,
    timed_assignments,
)


class OpKind(str, enum.Enum):
    INPUT = "input"
    CONST = "const"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    AND = "and"
    OR = "or"
    XOR = "xor"
    NOT = "not"
    SHL = "shl"
    SHR = "shr"
    OUTPUT = "output"

    def __str__(self):
        return self.value

    @property
    def is_operation(self) -> bool:
        return self not in (OpKind.INPUT, OpKind.CONST, OpKind.OUTPUT)

    @property
    def arity(self) -> int:
        if self in (OpKind.INPUT, OpKind.CONST):
            return 0
        if self in (OpKind.NOT, OpKind.OUTPUT):
            return 1
        return 2


OPERATION_KINDS = tuple(k for k in OpKind if k.is_operation)


@dataclass(frozen=True)
class Node:
    id: int
    kind: OpKind
    width: int
    payload: int | str | None = None  # constant value or port name


@dataclass(frozen=True)
class Edge:
    """A value flowing into operand ``pos`` of ``dst``.

    ``width`` is the number of low-order bits of the producer's value that the
    consumer actually sees (narrowing through variables truncates).
    """

    src: int
    dst: int
    pos: int
    width: int


@dataclass
class Dfg:
    nodes: list[Node] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    outputs: dict[str, int] = field(default_factory=dict)
    inputs: dict[str, int] = field(default_factory=dict)
    # (producer, consumer) pairs that cross assignment boundaries
    cycle_barriers: list[tuple[int, int]] = field(default_factory=list)
    ports: list[tuple[str, str, int]] = field(default_factory=list)
    name: str = "top"

    def __post_init__(self):
        self._reindex()

    def _reindex(self):
        self._operands: dict[int, list[Edge]] = {n.id: [] for n in self.nodes}
        self._consumers: dict[int, list[Edge]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            self._operands[e.dst].append(e)
            self._consumers[e.src].append(e)
        for lst in self._operands.values():
            lst.sort(key=lambda e: e.pos)

    def add_node(self, kind: OpKind, width: int, payload=None) -> Node:
        node = Node(len(self.nodes), kind, width, payload)
        self.nodes.append(node)
        self._operands[node.id] = []
        self._consumers[node.id] = []
        return node

    def add_edge(self, src: int, dst: int, pos: int, width: int) -> Edge:
        e = Edge(src, dst, pos, width)
        self.edges.append(e)
        self._operands[dst].append(e)
        self._operands[dst].sort(key=lambda x: x.pos)
        self._consumers[src].append(e)
        return e

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def operands(self, node_id: int) -> list[Edge]:
        return self._operands[node_id]

    def consumers(self, node_id: int) -> list[Edge]:
        return self._consumers[node_id]

    def operations(self) -> list[Node]:
        return [n for n in self.nodes if n.kind.is_operation]

    def validate(self) -> None:
        for n in self.nodes:
            positions = [e.pos for e in self.operands(n.id)]
            if positions != list(range(n.kind.arity)):
                raise ValueError(f"node {n.id} ({n.kind}) has operand positions {positions}")
        topo_order(self)


@dataclass(frozen=True)
class _Value:
    node: int
    width: int


def build_dfg(program: Program, widths: WidthReport, strength_reduce: bool = False) -> Dfg:
    """Translate a width-checked program into a dataflow graph.

    Every operator occurrence becomes its own node (no common-subexpression
    merging).  With ``strength_reduce``, multiplication by a power-of-two
    constant becomes a left shift.
    """
    dfg = Dfg(
        name=program.name,
        ports=[(p.name, p.direction, p.width) for p in program.ports],
    )
    env: dict[str, _Value] = {}
    for p in program.inputs:
        n = dfg.add_node(OpKind.INPUT, p.width, p.name)
        dfg.inputs[p.name] = n.id
        env[p.name] = _Value(n.id, p.width)

    def lower(expr: Expr, w: int, reads: list[int]) -> _Value:
        if isinstance(expr, Const):
            return _Value(dfg.add_node(OpKind.CONST, w, expr.value).id, w)
        if isinstance(expr, Var):
            value = env[expr.name]
            reads.append(value.node)
            return value
        if isinstance(expr, Unary):
            operand = lower(expr.operand, w, reads)
            node = dfg.add_node(OpKind.NOT, w)
            dfg.add_edge(operand.node, node.id, 0, min(w, operand.width))
            return _Value(node.id, w)
        assert isinstance(expr, Binary)
        kind = OpKind(expr.op)
        lhs_expr, rhs_expr = expr.lhs, expr.rhs
        if strength_reduce and kind is OpKind.MUL:
            if _is_pow2(rhs_expr):
                kind, rhs_expr = OpKind.SHL, Const(rhs_expr.value.bit_length() - 1)
            elif _is_pow2(lhs_expr):
                kind, lhs_expr, rhs_expr = OpKind.SHL, rhs_expr, Const(lhs_expr.value.bit_length() - 1)
        lhs = lower(lhs_expr, w, reads)
        rhs = lower(rhs_expr, w, reads)
        node = dfg.add_node(kind, w)
        dfg.add_edge(lhs.node, node.id, 0, min(w, lhs.width))
        dfg.add_edge(rhs.node, node.id, 1, min(w, rhs.width))
        return _Value(node.id, w)

    timed = timed_assignments(program.body)
    i = 0
    while i < len(timed):
        cycle = timed[i][0]
        updates = {}
        # all reads in a cycle see the environment committed by earlier cycles
        while i < len(timed) and timed[i][0] == cycle:
            a = timed[i][1]
            w = widths[a.expr]
            first_new = len(dfg.nodes)
            reads: list[int] = []
            value = lower(a.expr, w, reads)
            for src in sorted(set(reads)):
                if dfg.node(src).kind is OpKind.INPUT:
                    continue
                for e in dfg.consumers(src):
                    if e.dst >= first_new:
                        dfg.cycle_barriers.append((src, e.dst))
            updates[a.target] = _Value(value.node, min(value.width, program.width_of(a.target)))
            i += 1
        env.update(updates)

    for p in program.outputs:
        value = env.get(p.name)
        if value is None:
            # never assigned: the output holds zero
            value = _Value(dfg.add_node(OpKind.CONST, p.width, 0).id, p.width)
        out = dfg.add_node(OpKind.OUTPUT, p.width, p.name)
        dfg.add_edge(value.node, out.id, 0, min(p.width, value.width))
        dfg.outputs[p.name] = out.id
    return dfg


def _is_pow2(expr: Expr) -> bool:
    return isinstance(expr, Const) and expr.value > 0 and expr.value & (expr.value - 1) == 0


def topo_order(dfg: Dfg) -> list[int]:
    indegree = {n.id: len(dfg.operands(n.id)) for n in dfg.nodes}
    ready = [nid for nid, d in indegree.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        nid = heapq.heappop(ready)
        order.append(nid)
        for e in dfg.consumers(nid):
            indegree[e.dst] -= 1
            if indegree[e.dst] == 0:
                heapq.heappush(ready, e.dst)
    if len(order) != len(dfg.nodes):
        raise CycleError("dataflow graph contains a cycle")
    return order


def node_latency(node: Node, latencies: Mapping[str, int]) -> int:
    """Latency of ``node``; ``latencies`` is keyed by kind name (``"mul"``)."""
    if not node.kind.is_operation:
        return 0
    return latencies[node.kind.value]


def critical_path(dfg: Dfg, latencies: Mapping) -> int:
    """Longest latency-weighted path through the operation nodes."""
    finish: dict[int, int] = {}
    for nid in topo_order(dfg):
        ready = max((finish[e.src] for e in dfg.operands(nid)), default=0)
        finish[nid] = ready + node_latency(dfg.node(nid), latencies)
    return max(finish.values(), default=0)


def dfg_to_dot(dfg: Dfg) -> str:
    lines = [f'digraph "{dfg.name}" {{', "  rankdir=TB;"]
    for n in dfg.nodes:
        if n.kind in (OpKind.INPUT, OpKind.OUTPUT):
            label, shape = f"{n.payload}", "box"
        elif n.kind is OpKind.CONST:
            label, shape = f"{n.payload}", "plaintext"
        else:
            label, shape = f"{n.kind.value}#{n.id}", "ellipse"
        lines.append(f'  n{n.id} [label="{label}:{n.width}", shape={shape}];')
    for e in dfg.edges:
        lines.append(f"  n{e.src} -> n{e.dst} [label={e.pos}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
