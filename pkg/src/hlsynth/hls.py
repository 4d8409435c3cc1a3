"""Allocation, scheduling and binding.

Control steps are 1-based.  An operation started at step ``t`` with latency
``L`` occupies its functional unit for steps ``t .. t+L-1`` and its result can
be consumed from step ``t+L`` on.  Operations are never chained inside a step.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

from .dfg import Dfg, Node, OpKind, OPERATION_KINDS, critical_path, topo_order
from .errors import AllocationError, DeadlineError, InfeasibleBinding

Allocation = dict  # resource kind name -> instance count


@dataclass(frozen=True)
class Resource:
    name: str
    latency: int = 1
    area: float = 1.0


_DEFAULT_RESOURCES = {
    "add": Resource("adder", 1, 2.0),
    "sub": Resource("subtractor", 1, 2.0),
    "mul": Resource("multiplier", 1, 8.0),
    "and": Resource("and", 1, 1.0),
    "or": Resource("or", 1, 1.0),
    "xor": Resource("xor", 1, 1.0),
    "not": Resource("inverter", 1, 0.5),
    "shl": Resource("left shifter", 1, 0.0),
    "shr": Resource("right shifter", 1, 0.0),
}


@dataclass
class ResourceLibrary:
    resources: dict[str, Resource] = field(default_factory=lambda: dict(_DEFAULT_RESOURCES))
    register_area: float = 1.0

    @classmethod
    def default(cls, latencies: Mapping[str, int] | None = None) -> "ResourceLibrary":
        lib = cls()
        for kind, lat in (latencies or {}).items():
            if kind not in lib.resources:
                raise KeyError(f"unknown resource kind '{kind}'")
            if lat < 1:
                raise ValueError(f"latency of '{kind}' must be at least 1")
            r = lib.resources[kind]
            lib.resources[kind] = Resource(r.name, lat, r.area)
        return lib

    @property
    def latencies(self) -> dict[str, int]:
        return {k: r.latency for k, r in self.resources.items()}

    def latency(self, node: Node) -> int:
        return self.resources[node.kind.value].latency if node.kind.is_operation else 0


@dataclass
class Schedule:
    start: dict[int, int]
    latency: dict[int, int]
    length: int

    def finish(self, node_id: int) -> int:
        """Last step during which the node occupies its unit."""
        return self.start[node_id] + self.latency[node_id] - 1

    def steps(self) -> dict[int, list[int]]:
        by_step = defaultdict(list)
        for nid, t in sorted(self.start.items(), key=lambda kv: (kv[1], kv[0])):
            by_step[t].append(nid)
        return dict(by_step)


@dataclass
class Binding:
    dfg: Dfg
    fu_bind: dict[int, tuple[str, int]] = field(default_factory=dict)
    reg_bind: dict[int, int] = field(default_factory=dict)
    lifetimes: dict[int, tuple[int, int]] = field(default_factory=dict)

    def instances(self) -> dict[str, int]:
        counts: dict[str, set] = defaultdict(set)
        for kind, inst in self.fu_bind.values():
            counts[kind].add(inst)
        return {k: len(v) for k, v in sorted(counts.items())}

    @property
    def register_count(self) -> int:
        return len(set(self.reg_bind.values()))

    def register_width(self, reg: int) -> int:
        return max(self.dfg.node(n).width for n, r in self.reg_bind.items() if r == reg)


def used_kinds(dfg: Dfg) -> list[str]:
    kinds = {n.kind.value for n in dfg.operations()}
    return [k.value for k in OPERATION_KINDS if k.value in kinds]


def _ready_step(dfg: Dfg, start: Mapping[int, int], latency: Mapping[int, int], nid: int) -> int:
    step = 1
    for e in dfg.operands(nid):
        if e.src in start:
            step = max(step, start[e.src] + latency[e.src])
    return step


def _latencies(dfg: Dfg, library: ResourceLibrary) -> dict[int, int]:
    return {n.id: library.latency(n) for n in dfg.operations()}


def _length(start: Mapping[int, int], latency: Mapping[int, int]) -> int:
    return max((start[n] + latency[n] - 1 for n in start), default=0)


def asap(dfg: Dfg, library: ResourceLibrary) -> Schedule:
    lat = _latencies(dfg, library)
    start: dict[int, int] = {}
    for nid in topo_order(dfg):
        if nid in lat:
            start[nid] = _ready_step(dfg, start, lat, nid)
    return Schedule(start, lat, _length(start, lat))


def alap(dfg: Dfg, library: ResourceLibrary, deadline: int) -> Schedule:
    lat = _latencies(dfg, library)
    cp = critical_path(dfg, library.latencies)
    if deadline < cp:
        raise DeadlineError(deadline, cp)
    start: dict[int, int] = {}
    for nid in reversed(topo_order(dfg)):
        if nid not in lat:
            continue
        latest_finish = deadline
        for e in dfg.consumers(nid):
            if e.dst in start:
                latest_finish = min(latest_finish, start[e.dst] - 1)
        start[nid] = latest_finish - lat[nid] + 1
    return Schedule(start, lat, deadline if start else 0)


def mobility(asap_schedule: Schedule, alap_schedule: Schedule) -> dict[int, int]:
    return {n: alap_schedule.start[n] - asap_schedule.start[n] for n in asap_schedule.start}


def _check_allocation(dfg: Dfg, allocation: Mapping[str, int]) -> None:
    for kind in used_kinds(dfg):
        if allocation.get(kind, 0) < 1:
            raise AllocationError(kind)


def list_schedule(dfg: Dfg, library: ResourceLibrary, allocation: Mapping[str, int]) -> Schedule:
    """Resource-constrained list scheduling.

    Ready operations are started in order of ascending mobility (ASAP/ALAP
    slack), ties broken by node id, until each kind's instances are used up.
    """
    _check_allocation(dfg, allocation)
    early = asap(dfg, library)
    prio = mobility(early, alap(dfg, library, early.length))
    lat = early.latency
    start: dict[int, int] = {}
    pending = set(lat)
    t = 1
    while pending:
        busy: dict[str, int] = defaultdict(int)
        for nid, s in start.items():
            if s <= t < s + lat[nid]:
                busy[dfg.node(nid).kind.value] += 1
        ready = [
            nid for nid in pending
            if all(e.src not in lat or (e.src in start and start[e.src] + lat[e.src] <= t)
                   for e in dfg.operands(nid))
        ]
        ready.sort(key=lambda nid: (prio[nid], nid))
        for nid in ready:
            kind = dfg.node(nid).kind.value
            if busy[kind] < allocation[kind]:
                busy[kind] += 1
                start[nid] = t
                pending.discard(nid)
        t += 1
    return Schedule(start, lat, _length(start, lat))


def auto_allocate(dfg: Dfg, library: ResourceLibrary) -> dict[str, int]:
    """Per-kind peak concurrency of the ASAP schedule."""
    sched = asap(dfg, library)
    return dict(_peak_usage(dfg, sched))


def _peak_usage(dfg: Dfg, schedule: Schedule) -> dict[str, int]:
    usage: dict[tuple[str, int], int] = defaultdict(int)
    for nid, s in schedule.start.items():
        for t in range(s, s + schedule.latency[nid]):
            usage[(dfg.node(nid).kind.value, t)] += 1
    peak: dict[str, int] = {}
    for (kind, _), count in usage.items():
        peak[kind] = max(peak.get(kind, 0), count)
    return {k: peak[k] for k in used_kinds(dfg)}


def bind_functional_units(
    dfg: Dfg, schedule: Schedule, allocation: Mapping[str, int] | None = None
) -> dict[int, tuple[str, int]]:
    """Left-edge binding of operations onto numbered unit instances (1-based)."""
    by_kind: dict[str, list[int]] = defaultdict(list)
    for nid in schedule.start:
        by_kind[dfg.node(nid).kind.value].append(nid)
    fu_bind = {}
    for kind, nids in by_kind.items():
        nids.sort(key=lambda n: (schedule.start[n], n))
        last_finish: list[int] = []  # index i -> last busy step of instance i+1
        for nid in nids:
            for i, end in enumerate(last_finish):
                if end < schedule.start[nid]:
                    break
            else:
                i = len(last_finish)
                last_finish.append(0)
                if allocation is not None and i + 1 > allocation.get(kind, 0):
                    raise InfeasibleBinding(f"{kind}: more than {allocation.get(kind, 0)} concurrent operations")
            last_finish[i] = schedule.finish(nid)
            fu_bind[nid] = (kind, i + 1)
    return dict(sorted(fu_bind.items()))


def value_lifetimes(dfg: Dfg, schedule: Schedule) -> dict[int, tuple[int, int]]:
    """Lifetime ``[birth, last use]`` of every value that must be stored.

    Inputs live from step 1; values feeding an output live to ``length + 1``.
    A multi-cycle consumer holds its operands until its last busy step.
    Values nobody reads get no entry.
    """
    out_step = schedule.length + 1
    lifetimes = {}
    for n in dfg.nodes:
        if n.kind is OpKind.INPUT:
            birth = 1
        elif n.id in schedule.start:
            birth = schedule.start[n.id] + schedule.latency[n.id]
        else:
            continue
        last = None
        for e in dfg.consumers(n.id):
            use = out_step if e.dst not in schedule.start else schedule.finish(e.dst)
            last = use if last is None else max(last, use)
        if last is not None:
            lifetimes[n.id] = (birth, last)
    return lifetimes


def left_edge(intervals: Mapping[int, tuple[int, int]]) -> dict[int, int]:
    """Assign closed intervals to the lowest-numbered free track (1-based)."""
    tracks: list[int] = []
    assignment = {}
    for key, (lo, hi) in sorted(intervals.items(), key=lambda kv: (kv[1][0], kv[0])):
        for i, end in enumerate(tracks):
            if end < lo:
                tracks[i] = hi
                assignment[key] = i + 1
                break
        else:
            tracks.append(hi)
            assignment[key] = len(tracks)
    return dict(sorted(assignment.items()))


def bind_registers(dfg: Dfg, schedule: Schedule) -> tuple[dict[int, int], dict[int, tuple[int, int]]]:
    """Share registers among operation results with disjoint lifetimes.

    Input ports are latched separately and do not take part in sharing.
    Returns ``(reg_bind, lifetimes)``.
    """
    lifetimes = value_lifetimes(dfg, schedule)
    stored = {n: iv for n, iv in lifetimes.items() if n in schedule.start}
    return left_edge(stored), lifetimes


def bind(dfg: Dfg, schedule: Schedule, allocation: Mapping[str, int] | None = None) -> Binding:
    reg_bind, lifetimes = bind_registers(dfg, schedule)
    return Binding(dfg, bind_functional_units(dfg, schedule, allocation), reg_bind, lifetimes)


# --- interconnect -----------------------------------------------------------

@dataclass(frozen=True)
class Source:
    """Where a datapath value comes from, truncated to ``width`` bits.

    ``origin`` is ``"in"`` (latched input port), ``"reg"`` (shared register),
    ``"const"`` or ``"fu"`` (functional-unit output, only for register inputs).
    """

    origin: str
    ref: object
    width: int


def operand_source(dfg: Dfg, binding: Binding, edge) -> Source:
    p = dfg.node(edge.src)
    if p.kind is OpKind.INPUT:
        return Source("in", p.payload, edge.width)
    if p.kind is OpKind.CONST:
        return Source("const", p.payload & ((1 << edge.width) - 1), edge.width)
    if p.id not in binding.reg_bind:
        raise InfeasibleBinding(f"value of node {p.id} is consumed but has no register")
    return Source("reg", binding.reg_bind[p.id], edge.width)


@dataclass
class Interconnect:
    fu_ports: dict[tuple[str, int, int], list[Source]]
    reg_inputs: dict[int, list[Source]]
    outputs: dict[str, Source]

    def mux_inputs(self) -> int:
        lists = [*self.fu_ports.values(), *self.reg_inputs.values()]
        return sum(len(s) for s in lists if len(s) > 1)


def interconnect(dfg: Dfg, schedule: Schedule, binding: Binding) -> Interconnect:
    """Distinct sources seen by each unit input and register, in order of first use."""
    fu_ports: dict[tuple[str, int, int], list[Source]] = {}
    reg_inputs: dict[int, list[Source]] = {}
    for nid in sorted(schedule.start, key=lambda n: (schedule.start[n], n)):
        kind, inst = binding.fu_bind[nid]
        for e in dfg.operands(nid):
            srcs = fu_ports.setdefault((kind, inst, e.pos), [])
            s = operand_source(dfg, binding, e)
            if s not in srcs:
                srcs.append(s)
    for nid in sorted(binding.reg_bind, key=lambda n: (schedule.finish(n), n)):
        kind, inst = binding.fu_bind[nid]
        srcs = reg_inputs.setdefault(binding.reg_bind[nid], [])
        s = Source("fu", (kind, inst), dfg.node(nid).width)
        if s not in srcs:
            srcs.append(s)
    outputs = {}
    for name, oid in dfg.outputs.items():
        (e,) = dfg.operands(oid)
        outputs[name] = operand_source(dfg, binding, e)
    return Interconnect(dict(sorted(fu_ports.items())), dict(sorted(reg_inputs.items())), outputs)


# --- checks and reports -----------------------------------------------------

def schedule_violations(dfg: Dfg, schedule: Schedule, allocation: Mapping[str, int] | None = None) -> list[str]:
    problems = []
    for e in dfg.edges:
        if e.src in schedule.start and e.dst in schedule.start:
            if schedule.start[e.dst] < schedule.start[e.src] + schedule.latency[e.src]:
                problems.append(f"edge {e.src}->{e.dst} violates dependence")
    for n in dfg.operations():
        if n.id not in schedule.start:
            problems.append(f"node {n.id} unscheduled")
        elif schedule.start[n.id] < 1:
            problems.append(f"node {n.id} starts before step 1")
    if allocation is not None:
        for kind, peak in _peak_usage(dfg, schedule).items():
            if peak > allocation.get(kind, 0):
                problems.append(f"{kind}: {peak} concurrent > {allocation.get(kind, 0)} allocated")
    return problems


def binding_violations(dfg: Dfg, schedule: Schedule, binding: Binding) -> list[str]:
    problems = []
    per_unit = defaultdict(list)
    for nid, unit in binding.fu_bind.items():
        if unit[0] != dfg.node(nid).kind.value:
            problems.append(f"node {nid} bound to a {unit[0]} unit")
        per_unit[unit].append((schedule.start[nid], schedule.finish(nid), nid))
    for unit, spans in per_unit.items():
        spans.sort()
        for (_, end, a), (begin, _, b) in zip(spans, spans[1:]):
            if begin <= end:
                problems.append(f"nodes {a} and {b} overlap on {unit[0]}{unit[1]}")
    per_reg = defaultdict(list)
    for nid, reg in binding.reg_bind.items():
        per_reg[reg].append((*binding.lifetimes[nid], nid))
    for reg, spans in per_reg.items():
        spans.sort()
        for (_, end, a), (begin, _, b) in zip(spans, spans[1:]):
            if begin <= end:
                problems.append(f"values {a} and {b} overlap in register {reg}")
    for nid, (birth, _) in binding.lifetimes.items():
        if nid in schedule.start and nid not in binding.reg_bind:
            problems.append(f"live value {nid} has no register")
    return problems


@dataclass
class CostReport:
    latency: int
    instances: dict[str, int]
    registers: int
    register_bits: int
    mux_inputs: int
    area: float


def estimate(schedule: Schedule, binding: Binding, library: ResourceLibrary) -> CostReport:
    instances = binding.instances()
    regs = sorted(set(binding.reg_bind.values()))
    area = sum(library.resources[k].area * c for k, c in instances.items())
    area += library.register_area * len(regs)
    return CostReport(
        latency=schedule.length,
        instances=instances,
        registers=len(regs),
        register_bits=sum(binding.register_width(r) for r in regs),
        mux_inputs=interconnect(binding.dfg, schedule, binding).mux_inputs(),
        area=area,
    )


def schedule_report(dfg: Dfg, schedule: Schedule, binding: Binding) -> dict:
    """JSON-ready schedule/binding report with a stable key order."""
    steps = []
    for t, nids in sorted(schedule.steps().items()):
        ops = [
            {"node": nid, "kind": dfg.node(nid).kind.value, "instance": binding.fu_bind[nid][1]}
            for nid in nids
        ]
        steps.append({"step": t, "ops": ops})
    registers = []
    for reg in sorted(set(binding.reg_bind.values())):
        values = [
            {"node": nid, "lifetime": list(binding.lifetimes[nid])}
            for nid, r in sorted(binding.reg_bind.items(), key=lambda kv: (binding.lifetimes[kv[0]], kv[0]))
            if r == reg
        ]
        registers.append({"register": reg, "width": binding.register_width(reg), "values": values})
    return {"steps": steps, "registers": registers, "length": schedule.length}
