# A one-bit program lowered straight to gates and written out as Verilog and VHDL.
from hlsynth.emit import emit_verilog_netlist, emit_vhdl_structural
from hlsynth.flow import lower_to_gates
from hlsynth.logic import eval_netlist

src = "module half_adder(in a: 1, in b: 1, out c: 1, out s: 1) { par { s = a ^ b; c = a & b; } }"
net = lower_to_gates(src)

print(" a b | c s")
for a in (0, 1):
    for b in (0, 1):
        out = eval_netlist(net, {"a": a, "b": b})
        print(f" {a} {b} | {out['c']} {out['s']}")

print()
print(emit_verilog_netlist(net, "half_adder"))
print(emit_vhdl_structural(net, "half_adder"))
