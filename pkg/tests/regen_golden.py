"""Rewrite the golden files from the current emitters.

Run by hand only after reviewing a deliberate output change:
``python tests/regen_golden.py``.
"""

from conftest import GOLDEN, HALF_ADDER_SRC, S_ALLOC, S_SRC
from hlsynth.cli import _schedule_doc
from hlsynth.emit import design_to_json, dumps, emit_verilog_netlist, emit_verilog_rtl, emit_vhdl_structural, write_pla
from hlsynth.flow import lower_to_gates, synthesize
from hlsynth.logic import TruthTable, map_to_library, synthesize_table


def golden_texts() -> dict[str, str]:
    ha = lower_to_gates(HALF_ADDER_SRC)
    maj = TruthTable.from_function("ABC", "F", lambda a, b, c: int(a + b + c >= 2))
    _, maj_net = synthesize_table(maj)
    syn = synthesize(S_SRC, S_ALLOC)
    return {
        "half_adder.v": emit_verilog_netlist(ha, "half_adder"),
        "half_adder.vhd": emit_vhdl_structural(ha, "half_adder"),
        "majority.pla": write_pla(maj),
        "majority.v": emit_verilog_netlist(maj_net, "majority"),
        "majority_nand2.vhd": emit_vhdl_structural(map_to_library(maj_net, "nand2"), "majority"),
        "s_example.v": emit_verilog_rtl(syn.design),
        "s_example.schedule.json": dumps(_schedule_doc(syn)),
        "s_example.design.json": dumps(design_to_json(syn.design)),
    }


if __name__ == "__main__":
    GOLDEN.mkdir(exist_ok=True)
    for name, text in golden_texts().items():
        (GOLDEN / name).write_text(text)
        print("wrote", GOLDEN / name)
