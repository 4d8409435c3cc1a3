"""End-to-end synthesis of a BDL program."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .dfg import Dfg, build_dfg
from .errors import SemanticError
from .frontend import (
    Binary,
    Const,
    Expr,
    Program,
    Unary,
    Var,
    WidthReport,
    check_widths,
    parse_source,
    timed_assignments,
)
from .hls import (
    Binding,
    ResourceLibrary,
    Schedule,
    auto_allocate,
    bind,
    list_schedule,
)
from .logic import Gate, GateNetlist, _Namer
from .rtl import RtlDesign, build_design


@dataclass
class Synthesis:
    program: Program
    widths: WidthReport
    dfg: Dfg
    library: ResourceLibrary
    allocation: dict[str, int]
    schedule: Schedule
    binding: Binding
    design: RtlDesign


def synthesize(
    program: Program | str,
    allocation: Mapping[str, int] | None = None,
    library: ResourceLibrary | None = None,
    strength_reduce: bool = False,
) -> Synthesis:
    """Run frontend, scheduling, binding and RTL assembly.

    Without an ``allocation`` every kind gets its peak ASAP concurrency.
    """
    if isinstance(program, str):
        program = parse_source(program)
    library = library or ResourceLibrary.default()
    widths = check_widths(program)
    dfg = build_dfg(program, widths, strength_reduce=strength_reduce)
    alloc = dict(allocation) if allocation is not None else auto_allocate(dfg, library)
    schedule = list_schedule(dfg, library, alloc)
    binding = bind(dfg, schedule, alloc)
    design = build_design(dfg, schedule, binding)
    return Synthesis(program, widths, dfg, library, alloc, schedule, binding, design)


_BIT_GATES = {"and": "AND", "or": "OR", "xor": "XOR", "add": "XOR", "sub": "XOR", "mul": "AND"}


def lower_to_gates(program: Program | str) -> GateNetlist:
    """Gate netlist of a program whose ports and variables are all one bit wide.

    Arithmetic on single bits folds to gates (``+``/``-`` to XOR, ``*`` to
    AND).  Gates are created output by output in port order.
    """
    if isinstance(program, str):
        program = parse_source(program)
    wide = [d.name for d in (*program.ports, *program.locals) if d.width != 1]
    if wide:
        raise SemanticError(f"'{wide[0]}' is wider than one bit; gate lowering needs 1-bit signals")

    env: dict[str, Expr | None] = {p.name: Var(p.name) for p in program.inputs}
    env.update({d.name: None for d in (*program.outputs, *program.locals)})
    timed = timed_assignments(program.body)
    for cycle in sorted({c for c, _ in timed}):
        snapshot = dict(env)
        for c, a in timed:
            if c == cycle:
                env[a.target] = _substitute(a.expr, snapshot)

    netlist = GateNetlist([p.name for p in program.inputs], {})
    namer = _Namer([*netlist.inputs, *(p.name for p in program.outputs)])
    memo: dict[Expr, str] = {Var(n): n for n in netlist.inputs}

    def build(expr: Expr, out: str | None) -> str:
        if expr in memo:
            return memo[expr]
        if isinstance(expr, Const):
            net = out or namer.fresh(f"const{expr.value & 1}")
            netlist.constants[net] = expr.value & 1
        elif isinstance(expr, Unary):
            x = build(expr.operand, None)
            net = out or namer.fresh()
            netlist.gates.append(Gate("NOT", (x,), net))
        else:
            assert isinstance(expr, Binary)
            if expr.op not in _BIT_GATES:
                raise SemanticError(f"operator '{expr.op}' has no gate-level form")
            ins = (build(expr.lhs, None), build(expr.rhs, None))
            net = out or namer.fresh()
            netlist.gates.append(Gate(_BIT_GATES[expr.op], ins, net))
        memo[expr] = net
        return net

    for p in program.outputs:
        expr = env[p.name] if env[p.name] is not None else Const(0)
        netlist.outputs[p.name] = build(expr, p.name)
    netlist.validate()
    return netlist


def _substitute(expr: Expr, env: Mapping[str, Expr | None]) -> Expr:
    if isinstance(expr, Var):
        value = env[expr.name]
        return value if value is not None else Const(0)
    if isinstance(expr, Unary):
        return Unary(expr.op, _substitute(expr.operand, env))
    if isinstance(expr, Binary):
        return Binary(expr.op, _substitute(expr.lhs, env), _substitute(expr.rhs, env))
    return expr
