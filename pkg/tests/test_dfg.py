import random

import pytest

from conftest import S_SRC
from hlsynth.dfg import Dfg, OpKind, build_dfg, critical_path, dfg_to_dot, node_latency, topo_order
from hlsynth.errors import CycleError
from hlsynth.frontend import check_widths, parse_source
from hlsynth.random_designs import random_dag
from oracles import longest_path

UNIT = {k.value: 1 for k in OpKind if k.is_operation}


def dfg_of(src, **kw):
    prog = parse_source(src)
    return build_dfg(prog, check_widths(prog), **kw)


def test_s_example_graph_shape():
    g = dfg_of(S_SRC)
    kinds = [n.kind.value for n in g.nodes]
    assert kinds == ["input", "input", "mul", "mul", "add", "const", "mul", "add", "output"]
    assert len(g.operations()) == 5
    assert [(e.src, e.pos) for e in g.operands(6)] == [(5, 0), (1, 1)]
    assert g.outputs == {"s": 8}
    g.validate()


def test_no_common_subexpression_merging():
    g = dfg_of("module m(in a: 4, out x: 8) { x = a * a + a * a; }")
    assert sum(n.kind is OpKind.MUL for n in g.nodes) == 2


def test_constant_multiply_kept_without_strength_reduction():
    g = dfg_of(S_SRC)
    assert not any(n.kind is OpKind.SHL for n in g.nodes)


def test_strength_reduction_turns_power_of_two_multiply_into_shift():
    g = dfg_of(S_SRC, strength_reduce=True)
    shl = [n for n in g.nodes if n.kind is OpKind.SHL]
    assert len(shl) == 1
    amount = g.node(g.operands(shl[0].id)[1].src)
    assert amount.kind is OpKind.CONST and amount.payload == 2


def test_chained_variable_reads_connect_through():
    g = dfg_of("module m(in a: 8, out y: 8) { var t: 8; seq { t = a + 1; y = t * 2; } }")
    add = next(n for n in g.nodes if n.kind is OpKind.ADD)
    mul = next(n for n in g.nodes if n.kind is OpKind.MUL)
    assert g.operands(mul.id)[0].src == add.id
    assert (add.id, mul.id) in g.cycle_barriers


def test_narrowing_copy_truncates_edge_width():
    g = dfg_of("module m(in a: 8, out y: 8) { var t: 3; seq { t = a + 1; y = t * 2; } }")
    mul = next(n for n in g.nodes if n.kind is OpKind.MUL)
    assert g.operands(mul.id)[0].width == 3


def test_unassigned_output_reads_constant_zero():
    g = dfg_of("module m(in a: 8, out x: 8, out y: 8) { x = a; }")
    src = g.node(g.operands(g.outputs["y"])[0].src)
    assert src.kind is OpKind.CONST and src.payload == 0


def test_critical_path_of_s_example():
    g = dfg_of(S_SRC)
    assert critical_path(g, UNIT) == 3
    assert critical_path(g, {**UNIT, "mul": 2}) == 4


def test_topo_order_rejects_cycles():
    g = Dfg()
    a = g.add_node(OpKind.ADD, 8)
    b = g.add_node(OpKind.ADD, 8)
    g.add_edge(a.id, b.id, 0, 8)
    g.add_edge(b.id, a.id, 0, 8)
    with pytest.raises(CycleError):
        topo_order(g)


def test_node_latency_of_non_operations_is_zero():
    g = dfg_of(S_SRC)
    assert node_latency(g.node(0), UNIT) == 0
    assert node_latency(g.node(2), {**UNIT, "mul": 3}) == 3


def test_dot_export_mentions_every_node():
    text = dfg_to_dot(dfg_of(S_SRC))
    assert text.startswith("digraph")
    assert all(f"n{i}" in text for i in range(9))


@pytest.mark.parametrize("seed", range(50))
def test_critical_path_matches_path_enumeration(seed):
    rng = random.Random(seed)
    g = random_dag(rng, 8, ("add", "mul", "sub"))
    lat = {**UNIT, "mul": rng.randint(1, 3)}
    assert critical_path(g, lat) == longest_path(g, lat)
    order = topo_order(g)
    pos = {n: i for i, n in enumerate(order)}
    assert all(pos[e.src] < pos[e.dst] for e in g.edges)
