import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import S_ALLOC, S_SRC
from hlsynth.dfg import build_dfg
from hlsynth.errors import AllocationError, DeadlineError, InfeasibleBinding
from hlsynth.frontend import check_widths, parse_source
from hlsynth.hls import (
    ResourceLibrary, Schedule, alap, asap, auto_allocate, bind, bind_functional_units, binding_violations,
    estimate, interconnect, left_edge, list_schedule, mobility, schedule_report, schedule_violations,
    value_lifetimes,
)
from hlsynth.random_designs import random_dag
from oracles import max_live, optimal_length

LIB = ResourceLibrary.default()


@pytest.fixture
def s_dfg():
    prog = parse_source(S_SRC)
    return build_dfg(prog, check_widths(prog))


def test_asap_alap_mobility(s_dfg):
    early = asap(s_dfg, LIB)
    late = alap(s_dfg, LIB, 3)
    assert early.start == {2: 1, 3: 1, 4: 2, 6: 1, 7: 3}
    assert late.start == {2: 1, 3: 1, 4: 2, 6: 2, 7: 3}
    assert mobility(early, late) == {2: 0, 3: 0, 4: 0, 6: 1, 7: 0}


def test_alap_with_slack_shifts_everything_later(s_dfg):
    assert alap(s_dfg, LIB, 5).start == {2: 3, 3: 3, 4: 4, 6: 4, 7: 5}


def test_deadline_below_critical_path(s_dfg):
    with pytest.raises(DeadlineError) as exc:
        alap(s_dfg, LIB, 2)
    assert exc.value.critical_path == 3


def test_list_schedule_reproduces_worked_example(s_dfg):
    sched = list_schedule(s_dfg, LIB, S_ALLOC)
    assert sched.length == 3
    assert sched.start == {2: 1, 3: 1, 4: 2, 6: 2, 7: 3}
    assert schedule_violations(s_dfg, sched, S_ALLOC) == []


def test_single_multiplier_needs_four_steps(s_dfg):
    assert list_schedule(s_dfg, LIB, {"mul": 1, "add": 1}).length == 4


def test_missing_kind_is_named(s_dfg):
    with pytest.raises(AllocationError, match="add"):
        list_schedule(s_dfg, LIB, {"mul": 2})


def test_auto_allocation_is_asap_peak(s_dfg):
    assert auto_allocate(s_dfg, LIB) == {"add": 1, "mul": 3}


def test_multicycle_multiplier(s_dfg):
    lib = ResourceLibrary.default({"mul": 2})
    sched = list_schedule(s_dfg, lib, S_ALLOC)
    assert schedule_violations(s_dfg, sched, S_ALLOC) == []
    assert sched.length == 5
    b = bind(s_dfg, sched, S_ALLOC)
    assert binding_violations(s_dfg, sched, b) == []
    # operands of a two-step multiply stay live through its second step
    lt = value_lifetimes(s_dfg, sched)
    for e in s_dfg.edges:
        if e.src in sched.start and e.dst in sched.start:
            assert lt[e.src][1] >= sched.finish(e.dst)


def test_worked_example_binding_up_to_renaming(s_dfg):
    sched = list_schedule(s_dfg, LIB, S_ALLOC)
    b = bind(s_dfg, sched, S_ALLOC)
    groups = {}
    for nid, unit in b.fu_bind.items():
        groups.setdefault(unit, set()).add(nid)
    assert sorted(map(sorted, groups.values())) == [[2, 6], [3], [4, 7]]
    assert b.instances() == {"add": 1, "mul": 2}


def test_register_sharing_of_worked_example(s_dfg):
    sched = list_schedule(s_dfg, LIB, S_ALLOC)
    b = bind(s_dfg, sched, S_ALLOC)
    assert b.lifetimes == {0: (1, 1), 1: (1, 2), 2: (2, 2), 3: (2, 2), 4: (3, 3), 6: (3, 3), 7: (4, 4)}
    assert b.register_count == 2
    assert binding_violations(s_dfg, sched, b) == []


def test_overcommitted_schedule_cannot_be_bound(s_dfg):
    sched = asap(s_dfg, LIB)
    with pytest.raises(InfeasibleBinding):
        bind_functional_units(s_dfg, sched, S_ALLOC)


def test_violation_checks_catch_corruption(s_dfg):
    sched = list_schedule(s_dfg, LIB, S_ALLOC)
    bad = Schedule({**sched.start, 7: 2}, sched.latency, 3)
    assert any("dependence" in p for p in schedule_violations(s_dfg, bad))
    crowded = Schedule({**sched.start, 6: 1}, sched.latency, 3)
    assert any("allocated" in p for p in schedule_violations(s_dfg, crowded, S_ALLOC))
    b = bind(s_dfg, sched, S_ALLOC)
    b.reg_bind[6] = b.reg_bind[4]
    assert any("overlap" in p for p in binding_violations(s_dfg, sched, b))


def test_cost_estimate(s_dfg):
    sched = list_schedule(s_dfg, LIB, S_ALLOC)
    cost = estimate(sched, bind(s_dfg, sched, S_ALLOC), LIB)
    assert (cost.latency, cost.registers, cost.register_bits, cost.mux_inputs) == (3, 2, 18, 8)
    assert cost.area == 2 * 8 + 2 + 2 * 1


def test_interconnect_shares_multiplier_inputs(s_dfg):
    sched = list_schedule(s_dfg, LIB, S_ALLOC)
    b = bind(s_dfg, sched, S_ALLOC)
    ic = interconnect(s_dfg, sched, b)
    m1 = b.fu_bind[2]
    assert [(s.origin, s.ref) for s in ic.fu_ports[(*m1, 0)]] == [("in", "a"), ("const", 4)]
    assert [(s.origin, s.ref) for s in ic.fu_ports[(*m1, 1)]] == [("in", "a"), ("in", "b")]


def test_schedule_report_layout(s_dfg):
    sched = list_schedule(s_dfg, LIB, S_ALLOC)
    rep = schedule_report(s_dfg, sched, bind(s_dfg, sched, S_ALLOC))
    assert list(rep) == ["steps", "registers", "length"]
    assert [[op["node"] for op in st["ops"]] for st in rep["steps"]] == [[2, 3], [4, 6], [7]]


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(st.integers(0, 40), st.tuples(st.integers(1, 20), st.integers(0, 6)), max_size=25))
def test_left_edge_is_optimal_and_disjoint(raw):
    intervals = {k: (lo, lo + span) for k, (lo, span) in raw.items()}
    tracks = left_edge(intervals)
    assert max(tracks.values(), default=0) == max_live(intervals)
    for a in intervals:
        for b in intervals:
            if a < b and tracks[a] == tracks[b]:
                (l1, h1), (l2, h2) = intervals[a], intervals[b]
                assert h1 < l2 or h2 < l1


@pytest.mark.parametrize("seed", range(60))
def test_list_schedule_properties_on_random_dags(seed):
    rng = random.Random(seed)
    g = random_dag(rng, 8)
    alloc = {k: rng.randint(1, 2) for k in ("add", "mul", "sub")}
    sched = list_schedule(g, LIB, alloc)
    assert schedule_violations(g, sched, alloc) == []
    assert optimal_length(g, alloc) <= sched.length <= len(g.operations())
    b = bind(g, sched, alloc)
    assert binding_violations(g, sched, b) == []
    stored = {n: iv for n, iv in b.lifetimes.items() if n in sched.start}
    assert b.register_count == max_live(stored)
