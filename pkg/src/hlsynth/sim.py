"""Behavioral interpretation, cycle-accurate RTL simulation and co-simulation.

The two cycle counts measure different things and are never compared: the
interpreter counts source-level cycles (one per assignment, ``par`` takes
the max, ``seq`` the sum) while the RTL simulator counts clock edges from the
``start`` pulse to ``done``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import InputError, WatchdogError
from .frontend import Binary, Const, Expr, Program, Unary, Var, cycle_count, timed_assignments
from .hls import Source
from .rtl import Mux, RtlDesign

# edges spent in IDLE sampling `start` before the first control step
START_OVERHEAD = 1

MASK64 = (1 << 64) - 1


class SplitMix64:
    """Steele/Lea/Flood SplitMix64; reproducible on every platform."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def bits(self, width: int) -> int:
        return self.next() >> (64 - width)


@dataclass(frozen=True)
class TraceRecord:
    cycle: int
    state: str
    control: str
    units: tuple[tuple[str, int, int], ...]  # (unit, node, value)
    registers: tuple[tuple[str, int], ...]  # values after the clock edge


@dataclass
class SimResult:
    outputs: dict[str, int]
    cycles: int
    trace: list[TraceRecord] | None = None


def _alu(kind: str, a: int, b: int, width: int) -> int:
    mask = (1 << width) - 1
    if kind == "add":
        return (a + b) & mask
    if kind == "sub":
        return (a - b) & mask
    if kind == "mul":
        return (a * b) & mask
    if kind == "and":
        return a & b
    if kind == "or":
        return a | b
    if kind == "xor":
        return a ^ b
    if kind == "not":
        return ~a & mask
    if kind == "shl":
        return (a << b) & mask if b < width else 0
    if kind == "shr":
        return a >> b if b < width else 0
    raise ValueError(kind)


def check_inputs(ports: list[tuple[str, int]], inputs: Mapping[str, int]) -> dict[str, int]:
    names = {n for n, _ in ports}
    extra = sorted(set(inputs) - names)
    if extra:
        raise InputError(f"unknown input '{extra[0]}'")
    values = {}
    for name, width in ports:
        if name not in inputs:
            raise InputError(f"missing input '{name}'")
        v = inputs[name]
        if not 0 <= v < 1 << width:
            raise InputError(f"input {name}={v} does not fit in {width} bits")
        values[name] = v
    return values


def evaluate(expr: Expr, env: Mapping[str, int], width: int) -> int:
    """Value of ``expr`` in ``width``-bit modular arithmetic."""
    mask = (1 << width) - 1
    if isinstance(expr, Const):
        return expr.value & mask
    if isinstance(expr, Var):
        return env[expr.name] & mask
    if isinstance(expr, Unary):
        return _alu("not", evaluate(expr.operand, env, width), 0, width)
    assert isinstance(expr, Binary)
    return _alu(expr.op, evaluate(expr.lhs, env, width), evaluate(expr.rhs, env, width), width)


def interpret(program: Program, inputs: Mapping[str, int]) -> SimResult:
    env = check_inputs([(p.name, p.width) for p in program.inputs], inputs)
    for decl in (*program.outputs, *program.locals):
        env[decl.name] = 0
    timed = timed_assignments(program.body)
    i = 0
    while i < len(timed):
        cycle = timed[i][0]
        updates = {}
        while i < len(timed) and timed[i][0] == cycle:
            a = timed[i][1]
            updates[a.target] = evaluate(a.expr, env, program.width_of(a.target))
            i += 1
        env.update(updates)
    return SimResult({p.name: env[p.name] for p in program.outputs}, cycle_count(program.body))


def simulate_rtl(design: RtlDesign, inputs: Mapping[str, int], trace: bool = False) -> SimResult:
    """Clock the design from reset through ``start`` until ``done`` rises.

    ``cycles`` counts clock edges after reset, i.e. the schedule length plus
    :data:`START_OVERHEAD`.
    """
    values = check_inputs(design.inputs, inputs)
    dp = design.datapath
    fsm = design.controller
    regs = {r.index: 0 for r in dp.registers}
    latches = {r.port: 0 for r in dp.latches}
    fu_out: dict[tuple[str, int], int] = {}

    def read(src: Source) -> int:
        mask = (1 << src.width) - 1
        if src.origin == "in":
            return latches[src.ref] & mask
        if src.origin == "reg":
            return regs[src.ref] & mask
        if src.origin == "const":
            return src.ref & mask
        return fu_out[src.ref] & mask

    def driven(target, word) -> int:
        d = dp.driver(target)
        if isinstance(d, Mux):
            return read(d.inputs[word.select(d.select)])
        return read(d.source)

    states = {s.name: s for s in fsm.states}
    successor = {a: b for a, b, _ in fsm.transitions}
    state, done, started = "IDLE", 0, False
    records = [] if trace else None
    limit = 10 * (design.length + 2)
    cycles = 0
    while True:
        st = states[state]
        word = st.word
        fu_out.clear()
        units = []
        if state == "IDLE":
            nxt = state
            if not started:
                started = True
                latches.update(values)
                done = word.done
                nxt = successor[state]
        else:
            active = dict(st.ops)
            for fu in dp.fus:
                operands = []
                for pos in range(1 if fu.kind == "not" else 2):
                    try:
                        operands.append(driven(("fu", fu.kind, fu.instance, pos), word))
                    except KeyError:
                        operands.append(0)
                result = _alu(fu.kind, operands[0], operands[-1], fu.width)
                fu_out[(fu.kind, fu.instance)] = result
                if fu.name in active:
                    units.append((fu.name, active[fu.name], result))
            updates = {
                r.index: driven(("reg", r.index), word)
                for r in dp.registers if word.enabled(r.enable)
            }
            regs.update(updates)
            if word.done:
                done = 1
            nxt = successor[state]
        cycles += 1
        if records is not None:
            snapshot = [(r.name, latches[r.port]) for r in dp.latches]
            snapshot += [(r.name, regs[r.index]) for r in dp.registers]
            records.append(TraceRecord(cycles, state, word.bits(fsm.select_widths), tuple(units), tuple(snapshot)))
        state = nxt
        if done:
            break
        if cycles >= limit:
            raise WatchdogError(f"done not reached within {limit} cycles")

    outputs = {name: read(dp.outputs[name]) for name, _ in design.outputs}
    return SimResult(outputs, cycles, records)


def format_trace(records: list[TraceRecord]) -> str:
    """Plain-text trace: one line per clock edge.

    ``cycle state control [unit#node=value ...] | register=value ...``
    """
    lines = ["# hlsynth rtl trace v1", "# cycle state control units | registers"]
    for rec in records:
        units = " ".join(f"{u}#{n}={v}" for u, n, v in rec.units)
        regs = " ".join(f"{k}={v}" for k, v in rec.registers)
        lines.append(f"{rec.cycle} {rec.state} {rec.control} {units} | {regs}".replace("  ", " "))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Mismatch:
    inputs: dict[str, int]
    expected: dict[str, int]
    actual: dict[str, int]


@dataclass
class CosimReport:
    vectors: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches


def corner_and_random_vectors(ports: list[tuple[str, int]], trials: int, seed: int) -> list[dict[str, int]]:
    vectors = [
        {n: 0 for n, _ in ports},
        {n: (1 << w) - 1 for n, w in ports},
    ]
    rng = SplitMix64(seed)
    for _ in range(trials):
        vectors.append({n: rng.bits(w) for n, w in ports})
    return vectors


def cosim(program: Program, design: RtlDesign, trials: int = 200, seed: int = 0) -> CosimReport:
    """Compare the interpreter with RTL simulation on seeded random vectors.

    The all-zeros and all-ones vectors are always checked first.
    """
    ports = [(p.name, p.width) for p in program.inputs]
    report = CosimReport()
    for vec in corner_and_random_vectors(ports, trials, seed):
        want = interpret(program, vec).outputs
        got = simulate_rtl(design, vec).outputs
        report.vectors += 1
        if want != got:
            report.mismatches.append(Mismatch(vec, want, got))
    return report
