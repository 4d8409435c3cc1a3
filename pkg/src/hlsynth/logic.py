"""Two-level logic synthesis.

Truth tables index their rows with the first input as the most significant
bit, so for inputs ``(A, B, C)`` row 6 is ``A=1, B=1, C=0``.  Implicants use
the same bit order: bit ``n-1-i`` of ``mask``/``value`` belongs to input ``i``.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Callable, Iterable, Mapping

from .errors import SizeError

MAX_TABLE_INPUTS = 10
MAX_EQUIV_INPUTS = 16

GATE_TYPES = ("AND", "OR", "NOT", "XOR", "NAND", "NOR", "XNOR")


@dataclass
class TruthTable:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    rows: dict[str, frozenset[int]]

    def __post_init__(self):
        self.inputs = tuple(self.inputs)
        self.outputs = tuple(self.outputs)
        if len(self.inputs) > MAX_TABLE_INPUTS:
            raise SizeError(f"{len(self.inputs)} inputs exceed the limit of {MAX_TABLE_INPUTS}")
        names = (*self.inputs, *self.outputs)
        if len(set(names)) != len(names):
            raise ValueError("input and output names must be distinct")
        self.rows = {o: frozenset(self.rows.get(o, ())) for o in self.outputs}
        limit = 1 << len(self.inputs)
        for o, ms in self.rows.items():
            bad = [m for m in ms if not 0 <= m < limit]
            if bad:
                raise ValueError(f"minterm {bad[0]} of '{o}' outside [0, {limit})")

    @classmethod
    def from_function(cls, inputs: Iterable[str], output: str, fn: Callable[..., int]) -> "TruthTable":
        inputs = tuple(inputs)
        n = len(inputs)
        ms = {r for r in range(1 << n) if fn(*row_bits(r, n))}
        return cls(inputs, (output,), {output: frozenset(ms)})

    @property
    def n(self) -> int:
        return len(self.inputs)

    def value(self, output: str, row: int) -> int:
        return int(row in self.rows[output])


def row_bits(row: int, n: int) -> tuple[int, ...]:
    return tuple((row >> (n - 1 - i)) & 1 for i in range(n))


@dataclass(frozen=True, order=True)
class Implicant:
    """A product term; ``mask`` marks cared inputs, ``value`` their polarity."""

    mask: int
    value: int
    n: int

    def __post_init__(self):
        if self.value & ~self.mask:
            raise ValueError("implicant value has bits outside its care mask")

    @classmethod
    def minterm(cls, m: int, n: int) -> "Implicant":
        return cls((1 << n) - 1, m, n)

    def covers(self, row: int) -> bool:
        return row & self.mask == self.value

    def minterms(self) -> list[int]:
        return [r for r in range(1 << self.n) if self.covers(r)]

    @property
    def literal_count(self) -> int:
        return bin(self.mask).count("1")

    def literals(self) -> list[tuple[int, int]]:
        """``(input index, polarity)`` pairs in input order."""
        out = []
        for i in range(self.n):
            bit = 1 << (self.n - 1 - i)
            if self.mask & bit:
                out.append((i, 1 if self.value & bit else 0))
        return out

    def format(self, names: Iterable[str]) -> str:
        names = list(names)
        lits = [names[i] + ("" if pol else "'") for i, pol in self.literals()]
        return "".join(lits) if lits else "1"


@dataclass(frozen=True)
class SopCover:
    inputs: tuple[str, ...]
    implicants: tuple[Implicant, ...]

    def __iter__(self):
        return iter(self.implicants)

    def __len__(self):
        return len(self.implicants)

    def evaluate(self, row: int) -> int:
        return int(any(imp.covers(row) for imp in self.implicants))

    @property
    def literal_count(self) -> int:
        return sum(imp.literal_count for imp in self.implicants)

    def format(self) -> str:
        if not self.implicants:
            return "0"
        return " + ".join(imp.format(self.inputs) for imp in self.implicants)


# --- minimization -----------------------------------------------------------

def canonical_sop(table: TruthTable, output: str) -> SopCover:
    n = table.n
    return SopCover(table.inputs, tuple(Implicant.minterm(m, n) for m in sorted(table.rows[output])))


def qm_primes(table: TruthTable, output: str) -> set[Implicant]:
    """All prime implicants of ``output`` by iterated merging of adjacent cubes."""
    n = table.n
    if n > MAX_TABLE_INPUTS:
        raise SizeError(f"{n} inputs exceed the limit of {MAX_TABLE_INPUTS}")
    full = (1 << n) - 1
    current = {(full, m) for m in table.rows[output]}
    primes: set[tuple[int, int]] = set()
    while current:
        groups: dict[tuple[int, int], list[int]] = defaultdict(list)
        for mask, value in current:
            groups[(mask, bin(value).count("1"))].append(value)
        merged, used = set(), set()
        for (mask, ones), values in groups.items():
            partners = groups.get((mask, ones + 1))
            if not partners:
                continue
            for a in values:
                for b in partners:
                    diff = a ^ b
                    if diff & (diff - 1) == 0:
                        merged.add((mask & ~diff, a & ~diff))
                        used.add((mask, a))
                        used.add((mask, b))
        primes |= current - used
        current = merged
    return {Implicant(mask, value, n) for mask, value in primes}


def _cover_order(imp: Implicant):
    return (-imp.mask, imp.value)


def select_cover(primes: Iterable[Implicant], table: TruthTable, output: str) -> SopCover:
    """Essential primes first, then greedy picks.

    The greedy step prefers the prime covering the most still-uncovered
    minterms, then fewer literals, then the smallest ``(mask, value)``.  It is
    not guaranteed minimal on cyclic covering problems.
    """
    on = set(table.rows[output])
    primes = sorted(set(primes))
    covered_by = {p: {m for m in on if p.covers(m)} for p in primes}
    essential = set()
    for m in on:
        owners = [p for p in primes if m in covered_by[p]]
        if len(owners) == 1:
            essential.add(owners[0])
    chosen = sorted(essential, key=_cover_order)
    remaining = on.difference(*(covered_by[p] for p in chosen)) if chosen else set(on)
    while remaining:
        best = min(
            (p for p in primes if p not in chosen),
            key=lambda p: (-len(covered_by[p] & remaining), p.literal_count, p.mask, p.value),
        )
        if not covered_by[best] & remaining:
            raise ValueError("primes do not cover the function")
        chosen.append(best)
        remaining -= covered_by[best]
    return SopCover(table.inputs, tuple(chosen))


def minimize(table: TruthTable, output: str) -> SopCover:
    return select_cover(qm_primes(table, output), table, output)


def is_prime(imp: Implicant, table: TruthTable, output: str) -> bool:
    """True if ``imp`` implies the function and no literal can be dropped."""
    on = table.rows[output]
    if any(m not in on for m in imp.minterms()):
        return False
    for i, _ in imp.literals():
        bit = 1 << (imp.n - 1 - i)
        wider = Implicant(imp.mask & ~bit, imp.value & ~bit, imp.n)
        if all(m in on for m in wider.minterms()):
            return False
    return True


# --- netlists ---------------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    type: str
    inputs: tuple[str, ...]
    output: str


@dataclass
class GateNetlist:
    """Gates over named nets.

    ``outputs`` maps each primary output to the net that drives it; usually
    the net carries the output's own name.  ``constants`` holds nets tied to
    0 or 1.
    """

    inputs: list[str]
    outputs: dict[str, str]
    gates: list[Gate] = field(default_factory=list)
    constants: dict[str, int] = field(default_factory=dict)

    def nets(self) -> list[str]:
        seen = dict.fromkeys(self.inputs)
        seen.update(dict.fromkeys(self.constants))
        for g in self.gates:
            seen.update(dict.fromkeys(g.inputs))
            seen[g.output] = None
        seen.update(dict.fromkeys(self.outputs.values()))
        return list(seen)

    def drivers(self) -> dict[str, object]:
        drivers: dict[str, object] = {}

        def claim(net, who):
            if net in drivers:
                raise ValueError(f"net '{net}' has more than one driver")
            drivers[net] = who

        for net in self.inputs:
            claim(net, "input")
        for net in self.constants:
            claim(net, "constant")
        for g in self.gates:
            claim(g.output, g)
        return drivers

    def topo_gates(self) -> list[Gate]:
        """Gates in dependency order; independent gates keep list order."""
        index = {g.output: i for i, g in enumerate(self.gates)}
        users = defaultdict(list)
        for i, g in enumerate(self.gates):
            for x in set(g.inputs):
                if x in index:
                    users[index[x]].append(i)
        pending = [len({x for x in g.inputs if x in index}) for g in self.gates]
        ready = [i for i, p in enumerate(pending) if p == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            i = heapq.heappop(ready)
            order.append(self.gates[i])
            for j in users[i]:
                pending[j] -= 1
                if pending[j] == 0:
                    heapq.heappush(ready, j)
        if len(order) != len(self.gates):
            raise ValueError("netlist is combinationally cyclic")
        return order

    def validate(self) -> None:
        drivers = self.drivers()
        for g in self.gates:
            if g.type not in GATE_TYPES:
                raise ValueError(f"unknown gate type {g.type}")
            want = 1 if g.type == "NOT" else None
            if (want and len(g.inputs) != want) or not g.inputs:
                raise ValueError(f"bad fan-in for {g.type} driving {g.output}")
            for x in g.inputs:
                if x not in drivers:
                    raise ValueError(f"net '{x}' is undriven")
        for name, net in self.outputs.items():
            if net not in drivers:
                raise ValueError(f"output '{name}' is undriven")
        self.topo_gates()

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = defaultdict(int)
        for g in self.gates:
            counts[g.type] += 1
        return dict(counts)


class _Namer:
    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)
        self.counter = 0

    def reserve(self, name: str) -> str:
        self.taken.add(name)
        return name

    def fresh(self, base: str | None = None) -> str:
        if base is not None and base not in self.taken:
            return self.reserve(base)
        while True:
            self.counter += 1
            name = f"{base or 'n'}{self.counter}" if base is None else f"{base}_{self.counter}"
            if name not in self.taken:
                return self.reserve(name)


def covers_to_aoi_netlist(covers: Mapping[str, SopCover], inputs: Iterable[str]) -> GateNetlist:
    """AND-OR-inverter realisation of several covers sharing input inverters."""
    inputs = list(inputs)
    namer = _Namer([*inputs, *covers])
    net = GateNetlist(inputs, {})
    inverted: dict[int, str] = {}
    complemented = sorted({i for c in covers.values() for imp in c for i, pol in imp.literals() if not pol})
    for i in complemented:
        inverted[i] = namer.fresh(f"{inputs[i]}_n")
        net.gates.append(Gate("NOT", (inputs[i],), inverted[i]))

    for out, cover in covers.items():
        if not cover.implicants:
            net.constants[out] = 0
            net.outputs[out] = out
            continue
        if any(imp.mask == 0 for imp in cover):
            net.constants[out] = 1
            net.outputs[out] = out
            continue
        single = len(cover.implicants) == 1
        terms = []
        for imp in cover:
            lits = [inputs[i] if pol else inverted[i] for i, pol in imp.literals()]
            if len(lits) == 1:
                terms.append(lits[0])
            else:
                t = out if single else namer.fresh()
                net.gates.append(Gate("AND", tuple(lits), t))
                terms.append(t)
        if single:
            net.outputs[out] = terms[0]
        else:
            net.gates.append(Gate("OR", tuple(terms), out))
            net.outputs[out] = out
    return net


def sop_to_aoi_netlist(cover: SopCover, input_names: Iterable[str], output_name: str) -> GateNetlist:
    return covers_to_aoi_netlist({output_name: cover}, input_names)


def synthesize_table(table: TruthTable, minimized: bool = True) -> tuple[dict[str, SopCover], GateNetlist]:
    covers = {
        o: minimize(table, o) if minimized else canonical_sop(table, o)
        for o in table.outputs
    }
    return covers, covers_to_aoi_netlist(covers, table.inputs)


# --- technology mapping -----------------------------------------------------

class _Builder:
    def __init__(self, netlist: GateNetlist):
        self.src = netlist
        self.namer = _Namer(netlist.nets())
        self.gates: list[Gate] = []
        self._inv: dict[str, str] = {}
        self._inverse_of: dict[str, str] = {}  # net -> net it is the complement of

    def gate(self, type_: str, ins: tuple[str, ...], out: str | None) -> str:
        out = out or self.namer.fresh()
        self.gates.append(Gate(type_, ins, out))
        return out

    # NAND2 primitives
    def nand(self, a, b, out=None):
        return self.gate("NAND", (a, b), out)

    def inv(self, x, out=None):
        if out is not None:
            y = self.nand(x, x, out)
        elif x in self._inverse_of:
            return self._inverse_of[x]
        elif x in self._inv:
            return self._inv[x]
        else:
            y = self._inv[x] = self.nand(x, x)
        self._inverse_of.setdefault(y, x)
        return y

    def and2(self, a, b, out=None):
        return self.inv(self.nand(a, b), out)

    def or2(self, a, b, out=None):
        return self.nand(self.inv(a), self.inv(b), out)

    def xor2(self, a, b, out=None):
        t = self.nand(a, b)
        return self.nand(self.nand(a, t), self.nand(b, t), out)

    def buf(self, x, out):
        return self.inv(self.inv(x), out)

    def tree(self, op2, nets, out=None):
        """Balanced reduction of ``nets`` with a two-input operator."""
        if len(nets) == 1:
            return self.buf(nets[0], out) if out else nets[0]
        if len(nets) == 2:
            return op2(nets[0], nets[1], out)
        half = (len(nets) + 1) // 2
        return op2(self.tree(op2, nets[:half]), self.tree(op2, nets[half:]), out)

    def halves(self, op2, final2, nets, out):
        """``final2`` applied to the ``op2``-reductions of both halves."""
        if len(nets) == 1:
            return final2(nets[0], nets[0], out)
        half = (len(nets) + 1) // 2
        return final2(self.tree(op2, nets[:half]), self.tree(op2, nets[half:]), out)


def _map_nand2(b: _Builder, g: Gate) -> None:
    ins, out = list(g.inputs), g.output
    if g.type == "NOT":
        b.inv(ins[0], out)
    elif g.type == "AND":
        b.tree(b.and2, ins, out)
    elif g.type == "OR":
        b.tree(b.or2, ins, out)
    elif g.type == "XOR":
        b.tree(b.xor2, ins, out)
    elif g.type == "NAND":
        b.halves(b.and2, b.nand, ins, out)
    elif g.type == "NOR":
        b.inv(b.tree(b.or2, ins), out)
    elif g.type == "XNOR":
        b.inv(b.tree(b.xor2, ins), out)
    else:
        raise ValueError(f"unknown gate type {g.type}")


def map_to_library(netlist: GateNetlist, target: str = "nand2") -> GateNetlist:
    """Re-express ``netlist`` in a target library.

    ``"nand2"`` produces two-input NAND gates only; ``"aoi"`` accepts any
    gate of the internal library and returns a copy.
    """
    if target == "aoi":
        return GateNetlist(list(netlist.inputs), dict(netlist.outputs), list(netlist.gates), dict(netlist.constants))
    if target != "nand2":
        raise ValueError(f"unknown target library '{target}'")
    b = _Builder(netlist)
    for g in netlist.topo_gates():
        _map_nand2(b, g)
    return GateNetlist(list(netlist.inputs), dict(netlist.outputs), _live(b.gates, netlist.outputs.values()),
                       dict(netlist.constants))


def _live(gates: list[Gate], roots: Iterable[str]) -> list[Gate]:
    """Drop gates whose outputs reach no primary output."""
    needed = set(roots)
    kept = []
    for g in reversed(gates):
        if g.output in needed:
            kept.append(g)
            needed.update(g.inputs)
    return kept[::-1]


def split_fanin(netlist: GateNetlist) -> GateNetlist:
    """Split gates wider than two inputs into balanced two-input trees."""
    b = _Builder(netlist)
    family = {"AND": "AND", "OR": "OR", "XOR": "XOR", "NAND": "AND", "NOR": "OR", "XNOR": "XOR"}
    for g in netlist.topo_gates():
        if len(g.inputs) <= 2:
            b.gates.append(g)
            continue
        base = family[g.type]

        def op2(x, y, out=None, t=base):
            return b.gate(t, (x, y), out)

        def final2(x, y, out, t=g.type):
            return b.gate(t, (x, y), out)

        if g.type == base:
            b.tree(op2, list(g.inputs), g.output)
        else:
            b.halves(op2, final2, list(g.inputs), g.output)
    return GateNetlist(list(netlist.inputs), dict(netlist.outputs), b.gates, dict(netlist.constants))


# --- evaluation -------------------------------------------------------------

def _apply(type_: str, vals: list[int], mask: int) -> int:
    if type_ == "NOT":
        return ~vals[0] & mask
    if type_ in ("AND", "NAND"):
        v = reduce(lambda x, y: x & y, vals)
    elif type_ in ("OR", "NOR"):
        v = reduce(lambda x, y: x | y, vals)
    else:
        v = reduce(lambda x, y: x ^ y, vals)
    return ~v & mask if type_ in ("NAND", "NOR", "XNOR") else v


def simulate(netlist: GateNetlist, vectors: Mapping[str, int], mask: int = 1) -> dict[str, int]:
    """Bit-parallel evaluation: each input carries one bit per pattern."""
    values = {net: vectors[net] & mask for net in netlist.inputs}
    for net, bit in netlist.constants.items():
        values[net] = mask if bit else 0
    for g in netlist.topo_gates():
        values[g.output] = _apply(g.type, [values[x] for x in g.inputs], mask)
    return {name: values[net] for name, net in netlist.outputs.items()}


def eval_netlist(netlist: GateNetlist, assignment: Mapping[str, int]) -> dict[str, int]:
    return simulate(netlist, assignment, 1)


@lru_cache(maxsize=None)
def input_vectors(n: int) -> tuple[int, ...]:
    """Exhaustive pattern vectors: bit ``r`` of vector ``i`` is input ``i`` on row ``r``."""
    rows = 1 << n
    repeat_all = (1 << rows) - 1
    vecs = []
    for i in range(n):
        k = 1 << (n - 1 - i)
        unit = ((1 << k) - 1) << k
        vecs.append(unit * (repeat_all // ((1 << 2 * k) - 1)))
    return tuple(vecs)


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    counterexample: tuple[int, ...] | None = None
    inputs: tuple[str, ...] = ()

    def __bool__(self):
        return self.equivalent

    @property
    def assignment(self) -> dict[str, int] | None:
        if self.counterexample is None:
            return None
        return dict(zip(self.inputs, self.counterexample))


def _table_vectors(table: TruthTable) -> dict[str, int]:
    return {o: sum(1 << m for m in ms) for o, ms in table.rows.items()}


def check_equivalence(a: GateNetlist, b: GateNetlist | TruthTable) -> EquivalenceResult:
    """Exhaustive comparison; reports the lowest-index mismatching row."""
    inputs = tuple(a.inputs)
    n = len(inputs)
    if n > MAX_EQUIV_INPUTS:
        raise SizeError(f"{n} inputs exceed the limit of {MAX_EQUIV_INPUTS}")
    other_inputs = b.inputs
    if sorted(other_inputs) != sorted(inputs):
        raise ValueError("primary inputs differ")
    other_outputs = b.outputs
    if sorted(other_outputs) != sorted(a.outputs):
        raise ValueError("primary outputs differ")
    mask = (1 << (1 << n)) - 1
    vecs = dict(zip(inputs, input_vectors(n)))
    va = simulate(a, vecs, mask)
    vb = _table_vectors(b) if isinstance(b, TruthTable) else simulate(b, vecs, mask)
    diff = 0
    for o in va:
        diff |= va[o] ^ vb[o]
    if not diff:
        return EquivalenceResult(True, None, inputs)
    row = (diff & -diff).bit_length() - 1
    return EquivalenceResult(False, row_bits(row, n), inputs)


def netlist_to_table(netlist: GateNetlist) -> TruthTable:
    n = len(netlist.inputs)
    mask = (1 << (1 << n)) - 1
    vecs = dict(zip(netlist.inputs, input_vectors(n)))
    out = simulate(netlist, vecs, mask)
    rows = {o: frozenset(r for r in range(1 << n) if v >> r & 1) for o, v in out.items()}
    return TruthTable(tuple(netlist.inputs), tuple(netlist.outputs), rows)


def netlist_to_json(netlist: GateNetlist) -> dict:
    return {
        "inputs": list(netlist.inputs),
        "outputs": [{"name": k, "net": v} for k, v in netlist.outputs.items()],
        "constants": [{"net": k, "value": v} for k, v in netlist.constants.items()],
        "gates": [
            {"type": g.type, "inputs": list(g.inputs), "output": g.output}
            for g in netlist.topo_gates()
        ],
    }
