import json
import subprocess
import sys

import pytest

from conftest import DESIGNS, GOLDEN
from hlsynth.cli import main


@pytest.fixture
def work(tmp_path):
    for name in ("s_example.bdl", "half_adder.bdl", "majority.pla", "const0.pla"):
        (tmp_path / name).write_text((DESIGNS / name).read_text())
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_synth_with_worked_allocation(work, capsys):
    code, out, _ = run(capsys, "synth", work / "s_example.bdl", "--resources", "mul=2,add=1", "--emit", "verilog")
    assert code == 0
    assert "3 control steps" in out
    assert (work / "s_example.v").read_text() == (GOLDEN / "s_example.v").read_text()
    report = json.loads((work / "s_example.schedule.json").read_text())
    assert report == json.loads((GOLDEN / "s_example.schedule.json").read_text())


def test_synth_json_report_on_stdout(work, capsys):
    code, out, _ = run(capsys, "synth", work / "s_example.bdl", "--resources", "mul=2,add=1", "--json",
                       "--emit", "json", "--out", work / "d.json")
    assert code == 0
    assert json.loads(out)["length"] == 3
    assert json.loads((work / "d.json").read_text())["length"] == 3
    assert (work / "d.schedule.json").exists()


def test_synth_auto_allocate(work, capsys):
    code, out, _ = run(capsys, "synth", work / "s_example.bdl", "--auto-allocate", "--json")
    assert code == 0 and json.loads(out)["allocation"] == {"add": 1, "mul": 3}


def test_synth_missing_kind_names_it(work, capsys):
    code, _, err = run(capsys, "synth", work / "s_example.bdl", "--resources", "mul=2")
    assert code == 1 and "'add'" in err and len(err.strip().splitlines()) == 1


@pytest.mark.parametrize("res", ["mul=x", "div=1", "mul"])
def test_synth_bad_resource_strings(work, capsys, res):
    assert run(capsys, "synth", work / "s_example.bdl", "--resources", res)[0] == 1


def test_synth_gate_level_vhdl(work, capsys):
    code, _, _ = run(capsys, "synth", work / "half_adder.bdl", "--emit", "vhdl")
    assert code == 0
    assert (work / "half_adder.vhd").read_text() == (GOLDEN / "half_adder.vhd").read_text()


def test_synth_source_error_has_position(work, capsys):
    bad = work / "bad.bdl"
    bad.write_text("module m(out x: 4) {\n  x = 99;\n}\n")
    code, _, err = run(capsys, "synth", bad)
    assert code == 1 and err.startswith(f"{bad}:2:")


def test_missing_file_is_io_error(work, capsys):
    assert run(capsys, "synth", work / "nope.bdl")[0] == 2


def test_unwritable_output_is_io_error(work, capsys):
    assert run(capsys, "synth", work / "s_example.bdl", "--out", work / "no" / "dir" / "x.v")[0] == 2


def test_schedule_command(work, capsys):
    code, out, _ = run(capsys, "schedule", work / "s_example.bdl", "--resources", "mul=1,add=1", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["asap_length"] == 3 and doc["list_length"] == 4
    assert {r["node"]: r["mobility"] for r in doc["ops"]} == {2: 0, 3: 0, 4: 0, 6: 1, 7: 0}


def test_minimize_majority(work, capsys):
    code, out, _ = run(capsys, "minimize", work / "majority.pla")
    assert code == 0
    assert "4 products → 3 products" in out
    assert "12 literals → 6 literals" in out
    rows = [line for line in (work / "majority.min.pla").read_text().splitlines() if not line.startswith(".")]
    assert rows == ["11- 1", "1-1 1", "-11 1"]


def test_minimize_nand2_verilog(work, capsys):
    code, out, _ = run(capsys, "minimize", work / "majority.pla", "--map", "nand2", "--emit", "verilog")
    text = (work / "majority.v").read_text()
    assert code == 0 and "verified" in out
    assert set(__import__("re").findall(r"^  (\w+) Gate", text, 8)) == {"nand"}


def test_minimize_constant_zero(work, capsys):
    code, out, _ = run(capsys, "minimize", work / "const0.pla", "--emit", "verilog", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["products"] == [0, 0] and doc["gates"] == [0, 0]
    assert "assign y = 1'b0;" in (work / "const0.v").read_text()


def test_minimize_bad_pla(work, capsys):
    bad = work / "bad.pla"
    bad.write_text(".i 2\n.o 0\n")
    code, _, err = run(capsys, "minimize", bad)
    assert code == 1 and "line 2" in err


def test_sim_reports_both_cycle_metrics(work, capsys):
    code, out, _ = run(capsys, "sim", work / "s_example.bdl", "--inputs", "a=3,b=2", "--resources", "mul=2,add=1")
    assert code == 0
    assert out.strip() == "s=21, source-cycles=1, rtl-steps=3, rtl-cycles=4"


def test_sim_trace_to_file(work, capsys):
    trace = work / "t.trace"
    code, _, _ = run(capsys, "sim", work / "s_example.bdl", "--inputs", "a=3,b=2", "--resources", "mul=2,add=1",
                     "--trace", trace)
    assert code == 0 and "mul1#6=8" in trace.read_text()


def test_sim_oversized_input(work, capsys):
    code, _, err = run(capsys, "sim", work / "s_example.bdl", "--inputs", "a=99,b=2")
    assert code == 1 and "a=99" in err


def test_cosim_pass(work, capsys):
    code, out, _ = run(capsys, "cosim", work / "s_example.bdl", "--resources", "mul=2,add=1",
                       "--trials", "200", "--seed", "42")
    assert code == 0 and out.startswith("PASS")


def test_check(work, capsys):
    code, out, _ = run(capsys, "check", work / "s_example.bdl", "--json")
    assert code == 0 and json.loads(out)["operations"] == 5


@pytest.mark.parametrize("argv", [["frobnicate"], ["synth"], ["cosim", "x.bdl", "--trials", "many"]])
def test_usage_errors_exit_one(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1


def test_version_lists_format_versions(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    out = capsys.readouterr().out
    assert exc.value.code == 0 and "schedule-json v1" in out and "pla v1" in out


def test_module_entry_point(work):
    proc = subprocess.run([sys.executable, "-m", "hlsynth", "sim", str(work / "s_example.bdl"),
                           "--inputs", "a=3,b=2"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("s=21, source-cycles=1")
