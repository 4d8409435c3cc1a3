"""Walk a small arithmetic design from source text to a clocked datapath.

    python demos/01_worked_example.py
"""

from pathlib import Path

from hlsynth import synthesize
from hlsynth.dfg import critical_path
from hlsynth.hls import alap, asap, estimate, mobility
from hlsynth.sim import format_trace, simulate_rtl

src = (Path(__file__).parent / "designs" / "s_example.bdl").read_text()
print(src)

syn = synthesize(src, {"mul": 2, "add": 1})
dfg, lib = syn.dfg, syn.library

print("Operations in the dataflow graph:")
for n in dfg.operations():
    args = ", ".join(f"n{e.src}" for e in dfg.operands(n.id))
    print(f"  n{n.id} = {n.kind.value}({args})")

early, late = asap(dfg, lib), alap(dfg, lib, critical_path(dfg, lib.latencies))
print("\nSlack before resource limits apply:")
for nid, slack in mobility(early, late).items():
    print(f"  n{nid}: ASAP {early.start[nid]}, ALAP {late.start[nid]}, mobility {slack}")

print("\nWith two multipliers and one adder the list scheduler finds:")
for step, nids in sorted(syn.schedule.steps().items()):
    units = [f"n{n} on {k}{i}" for n in nids for k, i in [syn.binding.fu_bind[n]]]
    print(f"  step {step}: {', '.join(units)}")

cost = estimate(syn.schedule, syn.binding, lib)
print(f"\n{cost.registers} shared registers, {cost.mux_inputs} multiplexer inputs, area {cost.area:g}")

run = simulate_rtl(syn.design, {"a": 3, "b": 2}, trace=True)
print(f"\nRTL run with a=3, b=2 gives s={run.outputs['s']} after {run.cycles} clock edges.")
print(format_trace(run.trace))
