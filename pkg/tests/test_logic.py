from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from hlsynth.errors import SizeError
from hlsynth.logic import (
    Gate, GateNetlist, Implicant, TruthTable, canonical_sop, check_equivalence, covers_to_aoi_netlist,
    eval_netlist, input_vectors, is_prime, map_to_library, minimize, netlist_to_table, qm_primes, row_bits,
    select_cover, simulate, split_fanin, synthesize_table,
)
from oracles import brute_primes


def table_of(n, minterms, names="ABCDEFGHIJKL"):
    return TruthTable(tuple(names[:n]), ("F",), {"F": frozenset(minterms)}) if n < 6 else \
        TruthTable(tuple(f"x{i}" for i in range(n)), ("F",), {"F": frozenset(minterms)})


def test_row_indexing_puts_first_input_in_msb():
    assert row_bits(6, 3) == (1, 1, 0)


def test_majority_rows(majority):
    assert [majority.value("F", r) for r in range(8)] == [0, 0, 0, 1, 0, 1, 1, 1]


def test_majority_canonical_cover(majority):
    cover = canonical_sop(majority, "F")
    assert cover.format() == "A'BC + AB'C + ABC' + ABC"
    assert len(cover) == 4 and cover.literal_count == 12


def test_majority_minimized_cover(majority):
    cover = minimize(majority, "F")
    assert cover.format() == "AB + AC + BC"
    assert all(imp.literal_count == 2 for imp in cover)
    primes = qm_primes(majority, "F")
    for imp in cover:
        others = set().union(*(set(p.minterms()) for p in primes if p != imp))
        assert set(imp.minterms()) - others, f"{imp} is not essential"
    assert all(cover.evaluate(r) == majority.value("F", r) for r in range(8))


def test_implicant_formatting_and_literals():
    imp = Implicant(0b101, 0b001, 3)
    assert imp.format("ABC") == "A'C"
    assert imp.literals() == [(0, 0), (2, 1)]
    assert imp.minterms() == [1, 3]
    with pytest.raises(ValueError):
        Implicant(0b001, 0b010, 3)


def test_constant_functions():
    zero = table_of(2, [])
    one = table_of(2, range(4))
    assert minimize(zero, "F").format() == "0"
    assert minimize(one, "F").format() == "1"
    _, net = synthesize_table(zero)
    assert net.constants == {"F": 0} and not net.gates
    _, net = synthesize_table(one)
    assert net.constants == {"F": 1}


def test_single_literal_output_is_an_alias():
    _, net = synthesize_table(table_of(2, [2, 3]))
    assert net.outputs == {"F": "A"} and not net.gates


def test_aoi_gate_counts(majority):
    _, canonical = synthesize_table(majority, minimized=False)
    assert canonical.gate_counts() == {"NOT": 3, "AND": 4, "OR": 1}
    _, minimal = synthesize_table(majority)
    assert minimal.gate_counts() == {"AND": 3, "OR": 1}
    assert check_equivalence(canonical, minimal)


def test_shared_inverters_across_outputs():
    t = TruthTable(("a", "b"), ("x", "y"), {"x": {0}, "y": {1}})
    _, net = synthesize_table(t)
    assert net.gate_counts()["NOT"] == 2
    assert check_equivalence(net, t)


def test_nand2_mapping_of_majority(majority):
    _, net = synthesize_table(majority)
    mapped = map_to_library(net, "nand2")
    assert {g.type for g in mapped.gates} == {"NAND"}
    assert all(len(g.inputs) == 2 for g in mapped.gates)
    assert check_equivalence(mapped, majority)


@pytest.mark.parametrize("gtype", ["AND", "OR", "XOR", "NAND", "NOR", "XNOR"])
@pytest.mark.parametrize("fanin", [2, 3, 5])
def test_nand2_mapping_and_fanin_split_preserve_each_gate(gtype, fanin):
    ins = [f"i{k}" for k in range(fanin)]
    net = GateNetlist(ins, {"y": "y"}, [Gate(gtype, tuple(ins), "y")])
    for derived in (map_to_library(net, "nand2"), split_fanin(net)):
        assert all(len(g.inputs) <= 2 for g in derived.gates)
        assert check_equivalence(derived, net)


def test_equivalence_reports_lowest_counterexample():
    a = GateNetlist(["x", "y"], {"z": "z"}, [Gate("AND", ("x", "y"), "z")])
    b = GateNetlist(["x", "y"], {"z": "z"}, [Gate("OR", ("x", "y"), "z")])
    result = check_equivalence(a, b)
    assert not result
    assert result.counterexample == (0, 1)
    assert result.assignment == {"x": 0, "y": 1}


def test_size_limits():
    with pytest.raises(SizeError):
        table_of(11, [], names=[f"x{i}" for i in range(11)])
    wide = GateNetlist([f"x{i}" for i in range(17)], {"y": "x0"})
    with pytest.raises(SizeError):
        check_equivalence(wide, wide)


def test_bit_parallel_simulation_matches_scalar():
    net = GateNetlist(["a", "b", "c"], {"y": "y"}, [Gate("XOR", ("a", "b"), "t"), Gate("NAND", ("t", "c"), "y")])
    vecs = dict(zip(net.inputs, input_vectors(3)))
    packed = simulate(net, vecs, 0xFF)["y"]
    for r in range(8):
        a, b, c = row_bits(r, 3)
        assert (packed >> r) & 1 == eval_netlist(net, {"a": a, "b": b, "c": c})["y"] == 1 - ((a ^ b) & c)


def test_table_names_must_be_distinct():
    with pytest.raises(ValueError):
        TruthTable(("a", "b"), ("a",), {})


def test_netlist_validation():
    with pytest.raises(ValueError):
        GateNetlist(["a"], {"y": "y"}, [Gate("AND", ("a", "q"), "y")]).validate()
    with pytest.raises(ValueError):
        GateNetlist(["a"], {"y": "y"}, [Gate("NOT", ("a",), "y"), Gate("NOT", ("a",), "y")]).validate()


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.integers(0, (1 << n) - 1)))))
def test_qm_matches_brute_force_primes(case):
    n, ms = case
    t = table_of(n, ms)
    assert {(p.mask, p.value) for p in qm_primes(t, "F")} == brute_primes(ms, n)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.integers(0, (1 << n) - 1)))))
def test_minimized_cover_is_exact_and_prime(case):
    n, ms = case
    t = table_of(n, ms)
    cover = minimize(t, "F")
    assert {r for r in range(1 << n) if cover.evaluate(r)} == ms
    assert all(is_prime(imp, t, "F") for imp in cover)
    assert len(cover) <= max(1, len(ms))
    _, net = synthesize_table(t)
    assert netlist_to_table(net) == t


def test_all_three_input_functions_round_trip():
    for f in range(256):
        t = table_of(3, {r for r in range(8) if f >> r & 1})
        covers, net = synthesize_table(t)
        assert check_equivalence(map_to_library(net, "nand2"), t)
        assert check_equivalence(split_fanin(net), t)


def test_select_cover_uses_essentials_first():
    # F = A'B' + AB + BC has a redundant consensus-free structure
    t = table_of(3, {0, 1, 6, 7, 3})
    cover = select_cover(qm_primes(t, "F"), t, "F")
    assert {r for r in range(8) if cover.evaluate(r)} == {0, 1, 3, 6, 7}


def test_input_vectors_enumerate_rows():
    vecs = input_vectors(3)
    for r in range(8):
        assert tuple((v >> r) & 1 for v in vecs) == row_bits(r, 3)
    assert list(product((0, 1), repeat=2)) == [row_bits(r, 2) for r in range(4)]
