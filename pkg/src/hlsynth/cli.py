"""``hlsynth`` command-line driver.

Exit codes: 0 success, 1 usage or input error, 2 I/O error, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .dfg import OPERATION_KINDS, build_dfg
from .emit import (
    FORMAT_VERSIONS,
    design_to_json,
    dumps,
    emit_verilog_netlist,
    emit_verilog_rtl,
    emit_vhdl_structural,
    read_pla,
    write_pla,
    write_pla_cover,
)
from .errors import HlsError, SourceError
from .flow import lower_to_gates, synthesize
from .frontend import check_widths, cycle_count, iter_assigns, parse_source
from .hls import (
    ResourceLibrary,
    alap,
    asap,
    estimate,
    list_schedule,
    auto_allocate,
    mobility,
    schedule_report,
)
from .logic import (
    canonical_sop,
    check_equivalence,
    covers_to_aoi_netlist,
    map_to_library,
    minimize,
    netlist_to_json,
    split_fanin,
)
from .rtl import rtl_stats
from .sim import cosim, format_trace, interpret, simulate_rtl

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3

_KIND_NAMES = sorted(k.value for k in OPERATION_KINDS)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _VersionAction(argparse.Action):
    def __init__(self, option_strings, dest, **kwargs):
        super().__init__(option_strings, dest, nargs=0, help="print version and format versions")

    def __call__(self, parser, namespace, values, option_string=None):
        print(version_string())
        parser.exit(EXIT_OK)


def version_string() -> str:
    formats = ", ".join(f"{k} v{v}" for k, v in FORMAT_VERSIONS.items())
    return f"hlsynth {__version__} ({formats})"


def _pairs(text: str | None, what: str) -> dict[str, int]:
    out: dict[str, int] = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        try:
            number = int(value, 0)
        except ValueError:
            number = None
        if not sep or not key or number is None:
            raise UsageError(f"bad {what} entry '{item}', expected name=value")
        out[key] = number
    return out


def _kinds(text: str | None, what: str, minimum: int) -> dict[str, int]:
    pairs = _pairs(text, what)
    for k, v in pairs.items():
        if k not in _KIND_NAMES:
            raise UsageError(f"unknown operation kind '{k}' in {what} (known: {', '.join(_KIND_NAMES)})")
        if v < minimum:
            raise UsageError(f"{what} for '{k}' must be at least {minimum}")
    return pairs


def _read(path: str) -> str:
    return Path(path).read_text()


def _write(path: Path, text: str) -> None:
    path.write_text(text)


def _library(args) -> ResourceLibrary:
    return ResourceLibrary.default(_kinds(getattr(args, "latency", None), "latency", 1))


def _allocation(args) -> dict[str, int] | None:
    if getattr(args, "auto_allocate", False) or not getattr(args, "resources", None):
        return None
    return _kinds(args.resources, "resources", 0)


def _synth(args):
    return synthesize(_read(args.file), _allocation(args), _library(args), args.strength_reduce)


def _schedule_doc(syn) -> dict:
    return {
        "format": "hlsynth-schedule",
        "version": FORMAT_VERSIONS["schedule-json"],
        "design": syn.dfg.name,
        "allocation": dict(sorted(syn.allocation.items())),
        **schedule_report(syn.dfg, syn.schedule, syn.binding),
    }


def _describe_schedule(syn) -> list[str]:
    dfg, sched, binding = syn.dfg, syn.schedule, syn.binding
    alloc = " ".join(f"{k}={v}" for k, v in sorted(syn.allocation.items()))
    lines = [f"{dfg.name}: {sched.length} control steps, allocation {alloc or '(none)'}"]
    for t, nids in sorted(sched.steps().items()):
        ops = []
        for nid in nids:
            kind, inst = binding.fu_bind[nid]
            args = ", ".join(f"n{e.src}" for e in dfg.operands(nid))
            ops.append(f"{kind}{inst}: n{nid} = {kind}({args})")
        lines.append(f"  step {t}: " + "; ".join(ops))
    return lines


def cmd_synth(args) -> int:
    syn = _synth(args)
    emit = args.emit
    gate_level = args.gates or emit == "vhdl"
    ext = {"verilog": ".v", "vhdl": ".vhd", "json": ".json"}[emit]
    out = Path(args.out) if args.out else Path(args.file).with_suffix(ext)
    if gate_level:
        netlist = lower_to_gates(syn.program)
        if emit == "verilog":
            text = emit_verilog_netlist(netlist, syn.program.name)
        elif emit == "vhdl":
            text = emit_vhdl_structural(split_fanin(netlist), syn.program.name)
        else:
            text = dumps(netlist_to_json(netlist))
    else:
        text = emit_verilog_rtl(syn.design) if emit == "verilog" else dumps(design_to_json(syn.design))
    report_path = out.with_name(out.name.rsplit(".", 1)[0] + ".schedule.json")
    doc = _schedule_doc(syn)
    _write(out, text)
    _write(report_path, dumps(doc))
    if args.json:
        sys.stdout.write(dumps(doc))
        return EXIT_OK
    cost = estimate(syn.schedule, syn.binding, syn.library)
    stats = rtl_stats(syn.design)
    for line in _describe_schedule(syn):
        print(line)
    print(f"registers: {cost.registers} ({cost.register_bits} bits), muxes: {stats.muxes} "
          f"({cost.mux_inputs} inputs), states: {stats.states}, area: {cost.area:g}")
    print(f"wrote {out} and {report_path}")
    return EXIT_OK


def cmd_schedule(args) -> int:
    program = parse_source(_read(args.file))
    library = _library(args)
    dfg = build_dfg(program, check_widths(program), strength_reduce=args.strength_reduce)
    alloc = _allocation(args)
    if alloc is None:
        alloc = auto_allocate(dfg, library)
    early = asap(dfg, library)
    late = alap(dfg, library, early.length)
    slack = mobility(early, late)
    listed = list_schedule(dfg, library, alloc)
    rows = [
        {"node": n.id, "kind": n.kind.value, "asap": early.start[n.id], "alap": late.start[n.id],
         "mobility": slack[n.id], "list": listed.start[n.id]}
        for n in dfg.operations()
    ]
    doc = {"design": dfg.name, "allocation": dict(sorted(alloc.items())),
           "asap_length": early.length, "list_length": listed.length, "ops": rows}
    if args.json:
        sys.stdout.write(dumps(doc))
        return EXIT_OK
    print(f"{dfg.name}: asap length {early.length}, list length {listed.length}")
    print(f"{'node':>5} {'kind':<5} {'asap':>4} {'alap':>4} {'mob':>4} {'list':>4}")
    for r in rows:
        print(f"{r['node']:>5} {r['kind']:<5} {r['asap']:>4} {r['alap']:>4} {r['mobility']:>4} {r['list']:>4}")
    return EXIT_OK


def cmd_minimize(args) -> int:
    table = read_pla(_read(args.file))
    before = {o: canonical_sop(table, o) for o in table.outputs}
    after = {o: minimize(table, o) for o in table.outputs}
    canonical_net = covers_to_aoi_netlist(before, table.inputs)
    netlist = covers_to_aoi_netlist(after, table.inputs)
    if args.map == "nand2":
        netlist = map_to_library(netlist, "nand2")
    if args.emit == "vhdl":
        netlist = split_fanin(netlist)
    verdict = check_equivalence(netlist, table)
    if not verdict.equivalent:
        print(f"FAIL: netlist differs from the table at {verdict.assignment}", file=sys.stderr)
        return EXIT_VERIFY

    ext = {"verilog": ".v", "vhdl": ".vhd", "pla": ".min.pla"}[args.emit]
    src = Path(args.file)
    out = Path(args.out) if args.out else src.with_name(src.name.rsplit(".", 1)[0] + ext)
    name = src.name.split(".", 1)[0]
    if args.emit == "verilog":
        text = emit_verilog_netlist(netlist, name)
    elif args.emit == "vhdl":
        text = emit_vhdl_structural(netlist, name)
    elif args.map == "nand2":
        text = write_pla(table)
    else:
        text = write_pla_cover(after, table.inputs)
    _write(out, text)

    products = (sum(len(c) for c in before.values()), sum(len(c) for c in after.values()))
    literals = (sum(c.literal_count for c in before.values()), sum(c.literal_count for c in after.values()))
    gates = (len(canonical_net.gates), len(netlist.gates))
    if args.json:
        sys.stdout.write(dumps({
            "outputs": {o: {"canonical": before[o].format(), "minimized": after[o].format()} for o in table.outputs},
            "products": list(products), "literals": list(literals), "gates": list(gates),
            "map": args.map, "equivalent": True,
        }))
        return EXIT_OK
    for o in table.outputs:
        print(f"{o} = {after[o].format()}")
    print(f"{products[0]} products → {products[1]} products")
    print(f"{literals[0]} literals → {literals[1]} literals")
    print(f"{gates[0]} gates → {gates[1]} gates ({args.map})")
    print(f"equivalence: verified on all {1 << table.n} rows; wrote {out}")
    return EXIT_OK


def cmd_sim(args) -> int:
    syn = _synth(args)
    inputs = _pairs(args.inputs, "inputs")
    behav = interpret(syn.program, inputs)
    rtl = simulate_rtl(syn.design, inputs, trace=args.trace is not None)
    if behav.outputs != rtl.outputs:
        print(f"FAIL: interpreter {behav.outputs} != rtl {rtl.outputs}", file=sys.stderr)
        return EXIT_VERIFY
    if args.trace:
        _write(Path(args.trace), format_trace(rtl.trace))
    if args.json:
        sys.stdout.write(dumps({"outputs": behav.outputs, "source_cycles": behav.cycles,
                                "rtl_steps": syn.schedule.length, "rtl_cycles": rtl.cycles}))
        return EXIT_OK
    values = ", ".join(f"{k}={v}" for k, v in behav.outputs.items())
    print(f"{values}, source-cycles={behav.cycles}, rtl-steps={syn.schedule.length}, rtl-cycles={rtl.cycles}")
    if args.trace == "":
        sys.stdout.write(format_trace(rtl.trace))
    return EXIT_OK


def cmd_cosim(args) -> int:
    if args.trials < 0:
        raise UsageError("--trials must be non-negative")
    syn = _synth(args)
    report = cosim(syn.program, syn.design, trials=args.trials, seed=args.seed)
    if args.json:
        sys.stdout.write(dumps({
            "passed": report.passed, "vectors": report.vectors,
            "mismatches": [{"inputs": m.inputs, "expected": m.expected, "actual": m.actual}
                           for m in report.mismatches],
        }))
    else:
        status = "PASS" if report.passed else "FAIL"
        print(f"{status}: {report.vectors} vectors, {len(report.mismatches)} mismatches (seed {args.seed})")
        for m in report.mismatches[:10]:
            print(f"  inputs {m.inputs}: expected {m.expected}, got {m.actual}")
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_check(args) -> int:
    program = parse_source(_read(args.file))
    widths = check_widths(program)
    dfg = build_dfg(program, widths)
    n_assign = sum(1 for _ in iter_assigns(program.body))
    info = {"design": program.name, "assignments": n_assign, "source_cycles": cycle_count(program.body),
            "operations": len(dfg.operations()), "inputs": [p.name for p in program.inputs],
            "outputs": [p.name for p in program.outputs]}
    if args.json:
        sys.stdout.write(dumps(info))
    else:
        print(f"ok: {program.name}: {n_assign} assignments, {info['source_cycles']} source cycles, "
              f"{info['operations']} operations")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hlsynth", description="Behavioral synthesis to RTL and gate netlists.")
    parser.add_argument("--version", action=_VersionAction)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def hls_options(p, schedule=True):
        p.add_argument("file", help="BDL source file")
        if schedule:
            p.add_argument("--resources", metavar="K=N,...", help="functional units per kind, e.g. mul=2,add=1")
            p.add_argument("--auto-allocate", action="store_true", help="peak ASAP concurrency per kind (default)")
            p.add_argument("--latency", metavar="K=N,...", help="latency override per kind")
            p.add_argument("--strength-reduce", action="store_true", help="turn power-of-two multiplies into shifts")
        p.add_argument("--json", action="store_true", help="machine-readable report on stdout")

    p = sub.add_parser("synth", help="synthesize a BDL program")
    hls_options(p)
    p.add_argument("--emit", choices=["verilog", "vhdl", "json"], default="verilog")
    p.add_argument("--out", help="output path (default: input path with the format's extension)")
    p.add_argument("--gates", action="store_true", help="emit a gate netlist (1-bit programs only)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("schedule", help="print ASAP, ALAP, mobility and list schedule")
    hls_options(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("minimize", help="two-level minimization of a PLA truth table")
    p.add_argument("file", help="PLA file")
    p.add_argument("--emit", choices=["verilog", "vhdl", "pla"], default="pla")
    p.add_argument("--map", choices=["aoi", "nand2"], default="aoi")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("sim", help="interpret and simulate the synthesized RTL on one input vector")
    hls_options(p)
    p.add_argument("--inputs", metavar="NAME=V,...", default="")
    p.add_argument("--trace", nargs="?", const="", default=None, metavar="PATH",
                   help="RTL trace to PATH, or to stdout when no path is given")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("cosim", help="compare interpreter and RTL on random vectors")
    hls_options(p)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cosim)

    p = sub.add_parser("check", help="parse and width-check a BDL program")
    hls_options(p, schedule=False)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hlsynth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SourceError as exc:
        print(f"{args.file}:{exc.line}:{exc.column}: {type(exc).__name__}: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except HlsError as exc:
        print(f"hlsynth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hlsynth: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:  # pragma: no cover - defensive
        print(f"hlsynth: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
