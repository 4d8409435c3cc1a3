"""Text emitters and the PLA reader/writer.

All emitters are deterministic: two spaces of indentation, LF line endings,
and a one-line header carrying the tool version and a SHA-256 prefix of the
emitted object's canonical JSON.
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import Iterable, Mapping

from . import __version__
from .errors import FanInError, PlaFormatError
from .hls import Source
from .logic import Gate, GateNetlist, SopCover, TruthTable, netlist_to_json, row_bits
from .rtl import Mux, RtlDesign

FORMAT_VERSIONS = {"schedule-json": 1, "netlist-json": 1, "design-json": 1, "pla": 1, "trace": 1}

VERILOG_KEYWORDS = frozenset("""
always and assign automatic begin buf bufif0 bufif1 case casex casez cell cmos config deassign
default defparam design disable edge else end endcase endconfig endfunction endgenerate endmodule
endprimitive endspecify endtable endtask event for force forever fork function generate genvar
highz0 highz1 if ifnone incdir include initial inout input instance integer join large liblist
library localparam macromodule medium module nand negedge nmos nor noshowcancelled not notif0
notif1 or output parameter pmos posedge primitive pull0 pull1 pulldown pullup
pulsestyle_onevent pulsestyle_ondetect rcmos real realtime reg release repeat rnmos rpmos rtran
rtranif0 rtranif1 scalared showcancelled signed small specify specparam strong0 strong1 supply0
supply1 table task time tran tranif0 tranif1 tri tri0 tri1 triand trior trireg unsigned use
uwire vectored wait wand weak0 weak1 while wire wor xnor xor
""".split())

VHDL_KEYWORDS = frozenset("""
abs access after alias all and architecture array assert attribute begin block body buffer bus
case component configuration constant disconnect downto else elsif end entity exit file for
function generate generic group guarded if impure in inertial inout is label library linkage
literal loop map mod nand new next nor not null of on open or others out package port postponed
procedure process pure range record register reject rem report return rol ror select severity
signal shared sla sll sra srl subtype then to transport type unaffected units until use variable
wait when while with xnor xor bit std_logic structural
""".split())


def _digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


class _Names:
    """Collision-free legal identifiers for one emitted unit."""

    def __init__(self, reserved: Iterable[str], fold_case: bool = False, vhdl: bool = False):
        self.fold = fold_case
        self.vhdl = vhdl
        self.used = {self._key(r) for r in reserved}
        self.map: dict[str, str] = {}

    def _key(self, name: str) -> str:
        return name.lower() if self.fold else name

    def _legal(self, name: str) -> str:
        name = re.sub(r"[^A-Za-z0-9_]", "_", name) or "n"
        if not name[0].isalpha() and not (name[0] == "_" and not self.vhdl):
            name = "n" + name
        if self.vhdl:
            name = re.sub(r"_+", "_", name).rstrip("_") or "n"
            if not name[0].isalpha():
                name = "n" + name
        return name

    def add(self, name: str) -> str:
        if name in self.map:
            return self.map[name]
        base = self._legal(name)
        cand, k = base, 0
        while self._key(cand) in self.used:
            k += 1
            cand = f"{base}_{k}"
        self.used.add(self._key(cand))
        self.map[name] = cand
        return cand

    def __getitem__(self, name: str) -> str:
        return self.map[name]


# --- gate-level Verilog -----------------------------------------------------

_VERILOG_PRIMS = {"AND": "and", "OR": "or", "NOT": "not", "XOR": "xor",
                  "NAND": "nand", "NOR": "nor", "XNOR": "xnor"}


def _netlist_names(netlist: GateNetlist, gates: list[Gate], reserved, fold=False, vhdl=False):
    reserved = set(reserved) | {f"Gate{i}" for i in range(1, len(gates) + 1)}
    names = _Names(reserved, fold, vhdl)
    for net in netlist.inputs:
        names.add(net)
    for po in netlist.outputs:
        names.add(po)
    for net in netlist.nets():
        names.add(net)
    return names


def emit_verilog_netlist(netlist: GateNetlist, module_name: str) -> str:
    gates = netlist.topo_gates()
    names = _netlist_names(netlist, gates, VERILOG_KEYWORDS)
    mod = _Names(VERILOG_KEYWORDS).add(module_name)
    ins = [names[n] for n in netlist.inputs]
    outs = [names[o] for o in netlist.outputs]
    ports = set(netlist.inputs) | set(netlist.outputs)
    internal = [names[n] for n in netlist.nets() if n not in ports]

    lines = [f"// Generated by hlsynth {__version__} (netlist sha256 {_digest(netlist_to_json(netlist))})"]
    lines.append(f"module {mod} ({', '.join(ins + outs)});")
    if ins:
        lines.append(f"  input {', '.join(ins)};")
    if outs:
        lines.append(f"  output {', '.join(outs)};")
    if internal:
        lines.append(f"  wire {', '.join(internal)};")
    for i, g in enumerate(gates, 1):
        pins = ", ".join(names[x] for x in (g.output, *g.inputs))
        lines.append(f"  {_VERILOG_PRIMS[g.type]} Gate{i} ({pins});")
    for net, bit in netlist.constants.items():
        lines.append(f"  assign {names[net]} = 1'b{bit};")
    for po, net in netlist.outputs.items():
        if net != po:
            lines.append(f"  assign {names[po]} = {names[net]};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


_DECL_RE = re.compile(r"^(input|output|wire)\s+(.*);$")
_GATE_RE = re.compile(r"^(and|or|not|xor|nand|nor|xnor)\s+\w+\s*\(([^)]*)\);$")
_ASSIGN_RE = re.compile(r"^assign\s+(\w+)\s*=\s*(1'b[01]|\w+);$")


def read_verilog_netlist(text: str) -> GateNetlist:
    """Read back the gate-instantiation subset produced by :func:`emit_verilog_netlist`."""
    inputs: list[str] = []
    outputs: list[str] = []
    gates, constants, aliases = [], {}, {}
    prim_to_type = {v: k for k, v in _VERILOG_PRIMS.items()}
    for raw in text.splitlines():
        line = raw.split("//", 1)[0].strip()
        if not line or line.startswith("module") or line == "endmodule":
            continue
        if m := _DECL_RE.match(line):
            names = [n.strip() for n in m.group(2).split(",")]
            {"input": inputs, "output": outputs, "wire": []}[m.group(1)].extend(names)
        elif m := _GATE_RE.match(line):
            pins = [p.strip() for p in m.group(2).split(",")]
            gates.append(Gate(prim_to_type[m.group(1)], tuple(pins[1:]), pins[0]))
        elif m := _ASSIGN_RE.match(line):
            lhs, rhs = m.groups()
            if rhs.startswith("1'b"):
                constants[lhs] = int(rhs[-1])
            else:
                aliases[lhs] = rhs
        else:
            raise ValueError(f"unsupported line: {raw!r}")
    return GateNetlist(inputs, {o: aliases.get(o, o) for o in outputs}, gates, constants)


# --- structural VHDL --------------------------------------------------------

_VHDL_COMPONENTS = [("AND", "AND2"), ("OR", "OR2"), ("XOR", "EXOR2"), ("NAND", "NAND2"),
                    ("NOR", "NOR2"), ("XNOR", "EXNOR2"), ("NOT", "INV")]


def emit_vhdl_structural(netlist: GateNetlist, entity_name: str) -> str:
    """Entity plus ``structural`` architecture with one port map per gate.

    Gates must have at most two inputs; run :func:`~hlsynth.logic.split_fanin`
    or NAND2 mapping first.
    """
    gates = netlist.topo_gates()
    for g in gates:
        if g.type != "NOT" and len(g.inputs) != 2:
            raise FanInError(f"{g.type} gate driving '{g.output}' has {len(g.inputs)} inputs")
    comp_names = {c for _, c in _VHDL_COMPONENTS}
    reserved = VHDL_KEYWORDS | {c.lower() for c in comp_names}
    entity = _Names(reserved, True, True).add(entity_name)
    names = _netlist_names(netlist, gates, reserved | {entity.lower()}, fold=True, vhdl=True)

    # `out` ports cannot be read back inside the architecture
    read_nets = {x for g in gates for x in g.inputs} | {n for p, n in netlist.outputs.items() if n != p}
    internal_of = {po: names.add(f"{po}_int") for po, net in netlist.outputs.items()
                   if net == po and po in read_nets}

    def sig(net: str) -> str:
        return internal_of.get(net, names[net])

    ports = set(netlist.inputs) | set(netlist.outputs)
    signals = [names[n] for n in netlist.nets() if n not in ports] + list(internal_of.values())
    ins = [names[n] for n in netlist.inputs]
    outs = [names[o] for o in netlist.outputs]

    lines = [f"-- Generated by hlsynth {__version__} (netlist sha256 {_digest(netlist_to_json(netlist))})"]
    lines.append(f"entity {entity} is")
    clauses = []
    if ins:
        clauses.append(f"{', '.join(ins)} : in bit")
    if outs:
        clauses.append(f"{', '.join(outs)} : out bit")
    if clauses:
        lines.append("  port (")
        lines.extend(f"    {c}{';' if i < len(clauses) - 1 else ''}" for i, c in enumerate(clauses))
        lines.append("  );")
    lines.append(f"end {entity};")
    lines.append("")
    lines.append(f"architecture structural of {entity} is")
    used = {g.type for g in gates}
    for gtype, comp in _VHDL_COMPONENTS:
        if gtype in used:
            pins = "x : in bit" if gtype == "NOT" else "x, y : in bit"
            lines.append(f"  component {comp}")
            lines.append(f"    port ({pins}; o : out bit);")
            lines.append("  end component;")
    if signals:
        lines.append(f"  signal {', '.join(signals)} : bit;")
    lines.append("begin")
    comp_of = dict(_VHDL_COMPONENTS)
    for i, g in enumerate(gates, 1):
        pins = ", ".join(sig(x) for x in (*g.inputs, g.output))
        lines.append(f"  Gate{i} : {comp_of[g.type]} port map ({pins});")
    for net, bit in netlist.constants.items():
        lines.append(f"  {sig(net)} <= '{bit}';")
    for po, net in netlist.outputs.items():
        if net != po or po in internal_of:
            lines.append(f"  {names[po]} <= {sig(net)};")
    lines.append("end structural;")
    return "\n".join(lines) + "\n"


# --- RTL Verilog ------------------------------------------------------------

def design_to_json(design: RtlDesign) -> dict:
    dp = design.datapath
    fsm = design.controller

    def src(s: Source):
        ref = list(s.ref) if isinstance(s.ref, tuple) else s.ref
        return {"origin": s.origin, "ref": ref, "width": s.width}

    return {
        "name": design.name,
        "ports": [{"name": n, "direction": d, "width": w} for n, d, w in design.ports],
        "length": design.length,
        "functional_units": [{"kind": f.kind, "instance": f.instance, "width": f.width} for f in dp.fus],
        "latches": [{"port": r.port, "width": r.width} for r in dp.latches],
        "registers": [{"index": r.index, "width": r.width, "enable": r.enable} for r in dp.registers],
        "muxes": [
            {"select": m.select, "target": list(m.target), "width": m.width, "inputs": [src(s) for s in m.inputs]}
            for m in dp.muxes
        ],
        "nets": [{"name": n.name, "target": list(n.target), "width": n.width, "source": src(n.source)} for n in dp.nets],
        "outputs": {k: src(v) for k, v in dp.outputs.items()},
        "controller": {
            "state_width": fsm.state_width,
            "states": [
                {
                    "name": s.name,
                    "code": s.code,
                    "control": s.word.bits(fsm.select_widths),
                    "selects": dict(s.word.selects),
                    "enables": dict(s.word.enables),
                    "latch": s.word.latch,
                    "done": s.word.done,
                    "ops": [list(o) for o in s.ops],
                }
                for s in fsm.states
            ],
            "transitions": [list(t) for t in fsm.transitions],
        },
    }


def _vrange(width: int) -> str:
    return f"[{width - 1}:0] " if width > 1 else ""


_VERILOG_OPS = {"add": "+", "sub": "-", "mul": "*", "and": "&", "or": "|", "xor": "^", "shl": "<<", "shr": ">>"}


def emit_verilog_rtl(design: RtlDesign, module_name: str | None = None) -> str:
    """Synthesizable FSM-plus-datapath module.

    Uses only: ``module``/``input``/``output``/``wire``/``reg`` declarations,
    ``localparam``, continuous ``assign`` with ``?:`` muxes, one
    ``always @(*)`` block with a ``case`` for the control word and one
    ``always @(posedge clk)`` block for state and registers.
    """
    dp, fsm = design.datapath, design.controller
    length = design.length
    fixed = ["clk", "reset", "start", "done", "state", "S_IDLE"] + [f"S_{s.code}" for s in fsm.states[1:]]
    names = _Names(VERILOG_KEYWORDS | set(fixed))
    mod = _Names(VERILOG_KEYWORDS).add(module_name or design.name)
    port_names = [names.add(n) for n, _, _ in design.ports]
    latch = {r.port: names.add(f"{names[r.port]}_q") for r in dp.latches}
    reg = {r.index: names.add(f"r{r.index}") for r in dp.registers}
    reg_d = {r.index: names.add(f"r{r.index}_d") for r in dp.registers}
    enable = {r.enable: names.add(r.enable) for r in dp.registers}
    fu_pin = {}
    for f in dp.fus:
        for pin in ("a", "b", "y"):
            fu_pin[(f.kind, f.instance, pin)] = names.add(f"{f.name}_{pin}")
    select = {m.select: names.add(m.select) for m in dp.muxes}
    state_name = {s.name: "S_IDLE" if s.code == 0 else f"S_{s.code}" for s in fsm.states}
    sw = fsm.state_width

    widths = {("in", r.port): r.width for r in dp.latches}
    widths.update({("reg", r.index): r.width for r in dp.registers})
    widths.update({("fu", (f.kind, f.instance)): f.width for f in dp.fus})

    def expr(s: Source, target_width: int) -> str:
        if s.origin == "const":
            return f"{target_width}'d{s.ref}"
        base = {"in": lambda: latch[s.ref], "reg": lambda: reg[s.ref],
                "fu": lambda: fu_pin[(*s.ref, "y")]}[s.origin]()
        full = widths[(s.origin, s.ref)]
        if s.width < full:
            return f"{base}[{s.width - 1}:0]" if s.width > 1 else f"{base}[0]"
        return base

    def driver_expr(target, width) -> str:
        d = dp.driver(target)
        if isinstance(d, Mux):
            sel = select[d.select]
            parts = [f"({sel} == {d.select_width}'d{i}) ? {expr(s, width)} : " for i, s in enumerate(d.inputs[:-1])]
            return "".join(parts) + expr(d.inputs[-1], width)
        return expr(d.source, width)

    digest = _digest(design_to_json(design))
    L = [f"// Generated by hlsynth {__version__} (design sha256 {digest})",
         "// Pulse start with inputs valid; outputs are valid while done is high.",
         f"module {mod} ({', '.join(['clk', 'reset', 'start', 'done', *port_names])});",
         "  input clk, reset, start;",
         "  output done;"]
    for (n, d, w), pn in zip(design.ports, port_names):
        L.append(f"  {'input' if d == 'in' else 'output'} {_vrange(w)}{pn};")
    L.append("")
    params = ", ".join(f"{state_name[s.name]} = {sw}'d{s.code}" for s in fsm.states)
    L.append(f"  localparam {_vrange(sw)}{params};")
    L.append("")
    L.append(f"  reg {_vrange(sw)}state;")
    L.append("  reg done;")
    for r in dp.latches:
        L.append(f"  reg {_vrange(r.width)}{latch[r.port]};")
    for r in dp.registers:
        L.append(f"  reg {_vrange(r.width)}{reg[r.index]};")
    for m in dp.muxes:
        L.append(f"  reg {_vrange(m.select_width)}{select[m.select]};")
    for r in dp.registers:
        L.append(f"  reg {enable[r.enable]};")

    if dp.fus:
        L.append("")
        L.append("  // functional units")
    for f in dp.fus:
        a, b, y = (fu_pin[(f.kind, f.instance, p)] for p in "aby")
        vr = _vrange(f.width)
        if f.kind == "not":
            L.append(f"  wire {vr}{a}, {y};")
            L.append(f"  assign {a} = {driver_expr(('fu', f.kind, f.instance, 0), f.width)};")
            L.append(f"  assign {y} = ~{a};")
        else:
            L.append(f"  wire {vr}{a}, {b}, {y};")
            L.append(f"  assign {a} = {driver_expr(('fu', f.kind, f.instance, 0), f.width)};")
            L.append(f"  assign {b} = {driver_expr(('fu', f.kind, f.instance, 1), f.width)};")
            L.append(f"  assign {y} = {a} {_VERILOG_OPS[f.kind]} {b};")

    if dp.registers:
        L.append("")
        L.append("  // register inputs")
    for r in dp.registers:
        L.append(f"  wire {_vrange(r.width)}{reg_d[r.index]};")
        L.append(f"  assign {reg_d[r.index]} = {driver_expr(('reg', r.index), r.width)};")

    L.append("")
    L.append("  // outputs")
    for (n, w), pn in zip(design.outputs, [p for p, (_, d, _) in zip(port_names, design.ports) if d == "out"]):
        L.append(f"  assign {pn} = {expr(dp.outputs[n], w)};")

    L.append("")
    L.append("  // control word")
    L.append("  always @(*) begin")
    for m in dp.muxes:
        L.append(f"    {select[m.select]} = {m.select_width}'d0;")
    for r in dp.registers:
        L.append(f"    {enable[r.enable]} = 1'b0;")
    L.append("    case (state)")
    for s in fsm.states[1:]:
        body = [f"{select[k]} = {dict((m.select, m.select_width) for m in dp.muxes)[k]}'d{v};"
                for k, v in s.word.selects if v]
        body += [f"{enable[k]} = 1'b1;" for k, v in s.word.enables if v]
        if body:
            L.append(f"      {state_name[s.name]}: begin")
            L.extend(f"        {b}" for b in body)
            L.append("      end")
    L.append("      default: ;")
    L.append("    endcase")
    L.append("  end")

    L.append("")
    L.append("  // state machine and registers")
    L.append("  always @(posedge clk) begin")
    L.append("    if (reset) begin")
    L.append("      state <= S_IDLE;")
    L.append("      done <= 1'b0;")
    L.append("    end else begin")
    L.append("      case (state)")
    idle = fsm.states[0]
    L.append("        S_IDLE: if (start) begin")
    for r in dp.latches:
        L.append(f"          {latch[r.port]} <= {names[r.port]};")
    L.append(f"          done <= 1'b{idle.word.done};")
    if length:
        L.append("          state <= S_1;")
    L.append("        end")
    for a, b, _ in fsm.transitions:
        if a == "IDLE":
            continue
        if fsm.state(a).word.done:
            L.append(f"        {state_name[a]}: begin")
            L.append("          done <= 1'b1;")
            L.append(f"          state <= {state_name[b]};")
            L.append("        end")
        else:
            L.append(f"        {state_name[a]}: state <= {state_name[b]};")
    L.append("        default: state <= S_IDLE;")
    L.append("      endcase")
    for r in dp.registers:
        L.append(f"      if ({enable[r.enable]}) {reg[r.index]} <= {reg_d[r.index]};")
    L.append("    end")
    L.append("  end")
    L.append("endmodule")
    return "\n".join(L) + "\n"


# --- PLA --------------------------------------------------------------------

def write_pla(table: TruthTable) -> str:
    """Full truth table in Berkeley PLA form, rows in ascending order."""
    n = table.n
    lines = [f".i {n}", f".o {len(table.outputs)}",
             f".ilb {' '.join(table.inputs)}", f".ob {' '.join(table.outputs)}",
             f".p {1 << n}"]
    for r in range(1 << n):
        ins = "".join(map(str, row_bits(r, n)))
        outs = "".join(str(table.value(o, r)) for o in table.outputs)
        lines.append(f"{ins} {outs}")
    lines.append(".e")
    return "\n".join(lines) + "\n"


def write_pla_cover(covers: Mapping[str, SopCover], inputs: Iterable[str]) -> str:
    """Cube-form PLA (``-`` for absent literals) of minimized covers."""
    inputs = list(inputs)
    outs = list(covers)
    n = len(inputs)
    rows = []
    for j, o in enumerate(outs):
        for imp in covers[o]:
            cube = ["-"] * n
            for i, pol in imp.literals():
                cube[i] = str(pol)
            rows.append(f"{''.join(cube)} {''.join('1' if k == j else '0' for k in range(len(outs)))}")
    lines = [f".i {n}", f".o {len(outs)}", f".ilb {' '.join(inputs)}", f".ob {' '.join(outs)}",
             f".p {len(rows)}", *rows, ".e"]
    return "\n".join(lines) + "\n"


def read_pla(text: str) -> TruthTable:
    n = m = None
    ilb = ob = None
    rows: list[set[int]] | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("."):
            key, *args = line.split()
            if key in (".e", ".end"):
                break
            if key in (".i", ".o"):
                if len(args) != 1 or not args[0].isdigit():
                    raise PlaFormatError(lineno, f"{key} needs one non-negative integer")
                if rows:
                    raise PlaFormatError(lineno, f"{key} after table rows")
                if key == ".i":
                    n = int(args[0])
                else:
                    m = int(args[0])
                    if m == 0:
                        raise PlaFormatError(lineno, "empty .o section")
            elif key == ".ilb":
                ilb = args
            elif key == ".ob":
                ob = args
            elif key == ".p":
                pass
            elif key == ".type":
                if args not in (["f"], ["fd"]):
                    raise PlaFormatError(lineno, f"unsupported .type {' '.join(args)}")
            else:
                raise PlaFormatError(lineno, f"unknown directive {key}")
            continue
        if n is None or m is None:
            raise PlaFormatError(lineno, "table row before .i/.o")
        if rows is None:
            rows = [set() for _ in range(m)]
        bits = "".join(line.split())
        if len(bits) != n + m:
            raise PlaFormatError(lineno, f"row has {len(bits)} columns, expected {n + m}")
        ins, outs = bits[:n], bits[n:]
        if set(ins) - set("01-"):
            raise PlaFormatError(lineno, f"bad input cube {ins!r}")
        if set(outs) - set("01"):
            raise PlaFormatError(lineno, f"unsupported output value in {outs!r}")
        covered = [0]
        for ch in ins:
            covered = [(c << 1) | b for c in covered for b in ((0, 1) if ch == "-" else (int(ch),))]
        for j, ch in enumerate(outs):
            if ch == "1":
                rows[j].update(covered)
    if n is None:
        raise PlaFormatError(0, "missing .i")
    if m is None:
        raise PlaFormatError(0, "missing .o (empty output section)")
    ilb = ilb or [f"x{i}" for i in range(n)]
    ob = ob or [f"y{j}" for j in range(m)]
    if len(ilb) != n or len(ob) != m:
        raise PlaFormatError(0, ".ilb/.ob name counts do not match .i/.o")
    if len(set(ilb) | set(ob)) != n + m:
        raise PlaFormatError(0, "duplicate signal names")
    rows = rows or [set() for _ in range(m)]
    return TruthTable(tuple(ilb), tuple(ob), {o: frozenset(r) for o, r in zip(ob, rows)})
