"""FSM-plus-datapath assembly from a schedule and binding.

Protocol of a generated design (single rising clock edge, synchronous
active-high reset):

* In ``IDLE`` the controller waits for ``start``.  On ``start`` every input
  port is latched and the machine enters ``S1``.
* ``S1 .. SL`` execute the control steps.  At the end of ``SL`` the ``done``
  flag is set and the machine returns to ``IDLE``.
* ``done`` stays high until the next ``start``; outputs are driven from
  registers and are valid whenever ``done`` is high.

A design without operations has a single ``IDLE`` state and raises ``done``
on the edge that samples ``start``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

from .dfg import Dfg, OpKind
from .hls import Binding, Schedule, Source, interconnect, operand_source


@dataclass(frozen=True)
class FunctionalUnit:
    kind: str
    width: int
    instance: int

    @property
    def name(self) -> str:
        return f"{self.kind}{self.instance}"


@dataclass(frozen=True)
class Register:
    width: int
    index: int | None
    enable: str
    port: str | None = None  # set for input-port latches

    @property
    def name(self) -> str:
        return f"{self.port}_q" if self.port is not None else f"r{self.index}"


@dataclass(frozen=True)
class Mux:
    width: int
    inputs: tuple[Source, ...]
    select: str
    target: tuple

    def __post_init__(self):
        if len(self.inputs) < 2:
            raise ValueError("a mux needs at least two inputs")

    @property
    def input_count(self) -> int:
        return len(self.inputs)

    @property
    def select_width(self) -> int:
        return max(1, math.ceil(math.log2(self.input_count)))


@dataclass(frozen=True)
class Net:
    width: int
    name: str
    source: Source
    target: tuple


DatapathElement = FunctionalUnit | Register | Mux | Net


@dataclass(frozen=True)
class Activity:
    """Operation ``node`` occupies unit ``fu`` during a step."""

    fu: tuple[str, int]
    node: int
    operands: tuple[Source, ...]
    completes: bool


@dataclass
class Datapath:
    fus: list[FunctionalUnit]
    registers: list[Register]
    latches: list[Register]
    muxes: list[Mux]
    nets: list[Net]
    outputs: dict[str, Source]
    length: int
    activity: dict[int, list[Activity]] = field(default_factory=dict)
    writes: dict[int, list[tuple[int, Source]]] = field(default_factory=dict)

    @property
    def elements(self) -> list[DatapathElement]:
        return [*self.fus, *self.latches, *self.registers, *self.muxes, *self.nets]

    def fu(self, kind: str, instance: int) -> FunctionalUnit:
        for f in self.fus:
            if (f.kind, f.instance) == (kind, instance):
                return f
        raise KeyError((kind, instance))

    def register(self, index: int) -> Register:
        for r in self.registers:
            if r.index == index:
                return r
        raise KeyError(index)

    def driver(self, target: tuple) -> Mux | Net:
        for d in (*self.muxes, *self.nets):
            if d.target == target:
                return d
        raise KeyError(target)


def build_datapath(dfg: Dfg, schedule: Schedule, binding: Binding) -> Datapath:
    ic = interconnect(dfg, schedule, binding)

    unit_width: dict[tuple[str, int], int] = defaultdict(int)
    for nid, unit in binding.fu_bind.items():
        unit_width[unit] = max(unit_width[unit], dfg.node(nid).width)
    fus = [FunctionalUnit(k, w, i) for (k, i), w in sorted(unit_width.items())]
    registers = [
        Register(binding.register_width(r), r, f"en_r{r}")
        for r in sorted(set(binding.reg_bind.values()))
    ]
    latches = [
        Register(dfg.node(nid).width, None, "latch", name)
        for name, nid in dfg.inputs.items()
    ]

    muxes, nets = [], []
    for (kind, inst, pos), srcs in ic.fu_ports.items():
        target = ("fu", kind, inst, pos)
        width = unit_width[(kind, inst)]
        if len(srcs) > 1:
            muxes.append(Mux(width, tuple(srcs), f"sel_{kind}{inst}_{pos}", target))
        else:
            nets.append(Net(width, f"{kind}{inst}_in{pos}", srcs[0], target))
    for reg, srcs in ic.reg_inputs.items():
        target = ("reg", reg)
        width = binding.register_width(reg)
        if len(srcs) > 1:
            muxes.append(Mux(width, tuple(srcs), f"sel_r{reg}", target))
        else:
            nets.append(Net(width, f"r{reg}_d", srcs[0], target))

    activity: dict[int, list[Activity]] = defaultdict(list)
    writes: dict[int, list[tuple[int, Source]]] = defaultdict(list)
    for nid in sorted(schedule.start, key=lambda n: (schedule.start[n], n)):
        unit = binding.fu_bind[nid]
        operands = tuple(operand_source(dfg, binding, e) for e in dfg.operands(nid))
        for t in range(schedule.start[nid], schedule.finish(nid) + 1):
            activity[t].append(Activity(unit, nid, operands, t == schedule.finish(nid)))
        if nid in binding.reg_bind:
            writes[schedule.finish(nid)].append(
                (binding.reg_bind[nid], Source("fu", unit, dfg.node(nid).width))
            )

    return Datapath(
        fus, registers, latches, muxes, nets, dict(ic.outputs), schedule.length,
        dict(activity), dict(writes),
    )


@dataclass(frozen=True)
class ControlWord:
    selects: tuple[tuple[str, int], ...]
    enables: tuple[tuple[str, int], ...]
    latch: int
    done: int

    def bits(self, select_widths: dict[str, int]) -> str:
        parts = [format(v, f"0{select_widths[s]}b") for s, v in self.selects]
        parts += [str(v) for _, v in self.enables]
        parts += [str(self.latch), str(self.done)]
        return "".join(parts)

    def select(self, name: str) -> int:
        return dict(self.selects)[name]

    def enabled(self, name: str) -> bool:
        return bool(dict(self.enables)[name])


@dataclass(frozen=True)
class State:
    name: str
    code: int
    word: ControlWord
    ops: tuple[tuple[str, int], ...]  # (unit name, node id) active in this state


@dataclass
class ControllerFsm:
    states: list[State]
    transitions: list[tuple[str, str, str]]  # (from, to, condition)
    select_widths: dict[str, int]

    @property
    def state_width(self) -> int:
        return max(1, math.ceil(math.log2(len(self.states))))

    @property
    def word_width(self) -> int:
        return len(self.states[0].word.bits(self.select_widths))

    def state(self, name: str) -> State:
        for s in self.states:
            if s.name == name:
                return s
        raise KeyError(name)


def build_controller(schedule: Schedule, datapath: Datapath) -> ControllerFsm:
    """Binary-encoded linear controller: ``IDLE`` plus one state per step."""
    length = schedule.length
    select_widths = {m.select: m.select_width for m in datapath.muxes}
    reg_muxes = {m.target[1]: m for m in datapath.muxes if m.target[0] == "reg"}

    def word(t: int | None) -> ControlWord:
        sel = {m.select: 0 for m in datapath.muxes}
        en = {r.enable: 0 for r in datapath.registers}
        if t is not None:
            for act in datapath.activity.get(t, ()):
                kind, inst = act.fu
                for pos, src in enumerate(act.operands):
                    try:
                        d = datapath.driver(("fu", kind, inst, pos))
                    except KeyError:
                        continue
                    if isinstance(d, Mux):
                        sel[d.select] = d.inputs.index(src)
            for reg, src in datapath.writes.get(t, ()):
                en[f"en_r{reg}"] = 1
                if reg in reg_muxes:
                    sel[reg_muxes[reg].select] = reg_muxes[reg].inputs.index(src)
        return ControlWord(
            tuple(sel.items()), tuple(en.items()),
            latch=1 if t is None else 0,
            done=int(t == length if t is not None else length == 0),
        )

    states = [State("IDLE", 0, word(None), ())]
    for t in range(1, length + 1):
        ops = tuple((f"{a.fu[0]}{a.fu[1]}", a.node) for a in datapath.activity.get(t, ()))
        states.append(State(f"S{t}", t, word(t), ops))

    if length == 0:
        transitions = [("IDLE", "IDLE", "start")]
    else:
        transitions = [("IDLE", "S1", "start")]
        transitions += [(f"S{t}", f"S{t + 1}", "") for t in range(1, length)]
        transitions.append((f"S{length}", "IDLE", ""))
    return ControllerFsm(states, transitions, select_widths)


@dataclass
class RtlDesign:
    name: str
    ports: list[tuple[str, str, int]]
    datapath: Datapath
    controller: ControllerFsm

    @property
    def length(self) -> int:
        return self.datapath.length

    @property
    def inputs(self) -> list[tuple[str, int]]:
        return [(n, w) for n, d, w in self.ports if d == "in"]

    @property
    def outputs(self) -> list[tuple[str, int]]:
        return [(n, w) for n, d, w in self.ports if d == "out"]


def build_design(dfg: Dfg, schedule: Schedule, binding: Binding) -> RtlDesign:
    dp = build_datapath(dfg, schedule, binding)
    return RtlDesign(dfg.name, list(dfg.ports), dp, build_controller(schedule, dp))


@dataclass(frozen=True)
class RtlStats:
    fu_counts: dict[str, int]
    fus: int
    registers: int
    register_bits: int
    intermediate_registers: int  # registers some functional unit reads back
    latch_bits: int
    muxes: int
    mux_inputs: int
    states: int


def rtl_stats(design: RtlDesign) -> RtlStats:
    dp = design.datapath
    counts: dict[str, int] = defaultdict(int)
    for f in dp.fus:
        counts[f.kind] += 1
    return RtlStats(
        fu_counts=dict(sorted(counts.items())),
        fus=len(dp.fus),
        registers=len(dp.registers),
        register_bits=sum(r.width for r in dp.registers),
        intermediate_registers=len({
            src.ref for acts in dp.activity.values() for a in acts for src in a.operands if src.origin == "reg"
        }),
        latch_bits=sum(r.width for r in dp.latches),
        muxes=len(dp.muxes),
        mux_inputs=sum(m.input_count for m in dp.muxes),
        states=len(design.controller.states),
    )


def audit(design: RtlDesign, dfg: Dfg) -> list[str]:
    """Symbolically run the controller and check every operand read.

    Each register is tracked by the dataflow node whose value it holds.  A
    read is correct when the selected source carries exactly the operand the
    graph prescribes.  Returns a list of problems (empty when clean).
    """
    dp = design.datapath
    held: dict[int, int | None] = {r.index: None for r in dp.registers}
    problems = []

    def expected(edge) -> tuple:
        p = dfg.node(edge.src)
        if p.kind is OpKind.INPUT:
            return ("in", p.payload, edge.width)
        if p.kind is OpKind.CONST:
            return ("const", p.payload & ((1 << edge.width) - 1), edge.width)
        return ("reg", p.id, edge.width)

    def actual(src: Source) -> tuple:
        if src.origin == "reg":
            return ("reg", held.get(src.ref), src.width)
        return (src.origin, src.ref, src.width)

    def selected(target: tuple, word: ControlWord) -> Source | None:
        try:
            d = dp.driver(target)
        except KeyError:
            return None
        if isinstance(d, Mux):
            value = word.select(d.select)
            if value >= d.input_count:
                problems.append(f"{d.select}={value} out of range")
                return None
            return d.inputs[value]
        return d.source

    states = design.controller.states[1:]
    for i, st in enumerate(states):
        nxt = set(states[i + 1].ops) if i + 1 < len(states) else set()
        completing: dict[tuple[str, int], int] = {}
        for unit_name, nid in st.ops:
            node = dfg.node(nid)
            unit = next(f for f in dp.fus if f.name == unit_name)
            for e in dfg.operands(nid):
                src = selected(("fu", unit.kind, unit.instance, e.pos), st.word)
                if src is None or actual(src) != expected(e):
                    problems.append(f"{st.name}: node {nid} operand {e.pos} reads {src}, wants {expected(e)}")
            if (unit_name, nid) not in nxt:
                completing[(unit.kind, unit.instance)] = node.id
        updates = {}
        for reg in dp.registers:
            if not st.word.enabled(reg.enable):
                continue
            src = selected(("reg", reg.index), st.word)
            if src is None or src.origin != "fu" or src.ref not in completing:
                problems.append(f"{st.name}: {reg.name} loads {src} with no completing operation")
                continue
            node = completing[src.ref]
            if src.width != dfg.node(node).width:
                problems.append(f"{st.name}: {reg.name} loads node {node} at width {src.width}")
            updates[reg.index] = node
        held.update(updates)

    for name, oid in dfg.outputs.items():
        (e,) = dfg.operands(oid)
        src = dp.outputs[name]
        if actual(src) != expected(e):
            problems.append(f"output {name} reads {src}, wants {expected(e)}")
    return problems
