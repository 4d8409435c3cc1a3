import dataclasses
import random

import pytest

from conftest import S_ALLOC, S_SRC
from hlsynth.errors import InputError, WatchdogError
from hlsynth.flow import synthesize
from hlsynth.frontend import parse_source
from hlsynth.hls import Binding
from hlsynth.rtl import build_design
from hlsynth.sim import (
    START_OVERHEAD, SplitMix64, corner_and_random_vectors, cosim, format_trace, interpret, simulate_rtl,
)


def test_splitmix64_reference_values():
    rng = SplitMix64(0)
    assert [rng.next() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_interpret_s_example(s_program):
    res = interpret(s_program, {"a": 3, "b": 2})
    assert res.outputs == {"s": 21}
    assert res.cycles == 1


def test_interpret_wraps_to_target_width():
    prog = parse_source("module m(in a: 4, in b: 4, out s: 4) { s = a * a + b * b + 4 * b; }")
    assert interpret(prog, {"a": 3, "b": 2}).outputs == {"s": 5}


def test_interpret_par_reads_old_values():
    prog = parse_source("module m(in a: 4, out x: 4, out y: 4) { seq { par { x = a; y = 1; } par { x = y; y = x; } } }")
    assert interpret(prog, {"a": 7}).outputs == {"x": 1, "y": 7}


@pytest.mark.parametrize("inputs, message", [({"a": 3}, "missing"), ({"a": 99, "b": 1}, "fit"),
                                             ({"a": 1, "b": 1, "c": 1}, "unknown")])
def test_input_errors(s_program, inputs, message):
    with pytest.raises(InputError, match=message):
        interpret(s_program, inputs)


def test_rtl_simulation_of_s_example(s_synth):
    res = simulate_rtl(s_synth.design, {"a": 3, "b": 2})
    assert res.outputs == {"s": 21}
    assert res.cycles == s_synth.schedule.length + START_OVERHEAD == 4
    assert simulate_rtl(s_synth.design, {"a": 0, "b": 0}).outputs == {"s": 0}


def test_trace_shows_multiplier_reuse(s_synth):
    res = simulate_rtl(s_synth.design, {"a": 3, "b": 2}, trace=True)
    by_state = {r.state: {u: (n, v) for u, n, v in r.units} for r in res.trace}
    assert by_state["S1"]["mul1"] == (2, 9)
    assert by_state["S2"]["mul1"] == (6, 8)
    text = format_trace(res.trace)
    assert text.splitlines()[0] == "# hlsynth rtl trace v1"
    assert "mul1#6=8" in text


def test_empty_design_finishes_after_start_overhead():
    syn = synthesize("module k(in a: 4, out x: 4) { x = 5; }")
    res = simulate_rtl(syn.design, {"a": 0})
    assert res.outputs == {"x": 5} and res.cycles == START_OVERHEAD


def test_watchdog_on_broken_controller(s_synth):
    fsm = s_synth.design.controller
    fsm.transitions[-1] = ("S3", "S1", "")
    fsm.states[3] = dataclasses.replace(fsm.states[3], word=dataclasses.replace(fsm.states[3].word, done=0))
    with pytest.raises(WatchdogError):
        simulate_rtl(s_synth.design, {"a": 1, "b": 1})


def test_cosim_passes_on_s_example(s_synth):
    report = cosim(s_synth.program, s_synth.design, trials=200, seed=42)
    assert report.passed and report.vectors == 202


def test_cosim_corner_vectors_only():
    vecs = corner_and_random_vectors([("a", 4), ("b", 2)], 0, 7)
    assert vecs == [{"a": 0, "b": 0}, {"a": 15, "b": 3}]


def test_cosim_is_deterministic(s_synth):
    a = corner_and_random_vectors([("a", 4), ("b", 4)], 20, 9)
    b = corner_and_random_vectors([("a", 4), ("b", 4)], 20, 9)
    assert a == b and a != corner_and_random_vectors([("a", 4), ("b", 4)], 20, 10)


def test_cosim_catches_corrupted_register_binding(s_synth):
    b = s_synth.binding
    # put b*b into the register that a*a+b*b later overwrites while 4b is still pending
    bad = Binding(b.dfg, b.fu_bind, {**b.reg_bind, 6: b.reg_bind[4]}, b.lifetimes)
    design = build_design(s_synth.dfg, s_synth.schedule, bad)
    report = cosim(s_synth.program, design, trials=50, seed=1)
    assert not report.passed
    assert report.mismatches[0].inputs in corner_and_random_vectors([("a", 4), ("b", 4)], 50, 1)


@pytest.mark.parametrize("seed", range(20))
def test_value_agreement_with_multicycle_units(seed):
    from hlsynth.hls import ResourceLibrary
    from hlsynth.random_designs import random_program
    rng = random.Random(seed)
    src = random_program(rng)
    lib = ResourceLibrary.default({"mul": 2, "add": rng.randint(1, 2)})
    syn = synthesize(src, None, lib)
    assert cosim(syn.program, syn.design, trials=10, seed=seed).passed
