"""Two-level minimization of the three-input majority function, then NAND2 mapping."""

from hlsynth.emit import emit_verilog_netlist
from hlsynth.logic import (
    TruthTable, canonical_sop, check_equivalence, map_to_library, minimize, qm_primes, synthesize_table,
)

table = TruthTable.from_function("ABC", "F", lambda a, b, c: int(a + b + c >= 2))

print("Sum of minterms:  F =", canonical_sop(table, "F").format())
print("Prime implicants:", ", ".join(sorted(p.format(table.inputs) for p in qm_primes(table, "F"))))
print("Minimal cover:    F =", minimize(table, "F").format())

_, aoi = synthesize_table(table)
nand = map_to_library(aoi, "nand2")
print(f"\nAND/OR netlist: {aoi.gate_counts()}; NAND2 netlist: {len(nand.gates)} gates")
print("Equivalent on all rows:", bool(check_equivalence(nand, table)))
print()
print(emit_verilog_netlist(nand, "majority"))
