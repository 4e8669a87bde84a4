from __future__ import annotations

import pytest

from npls.corpus import g1, ng2
from npls.errors import CostConditionViolated, TotalityViolated
from npls.nested_graph import (
    CostedDigraph,
    NestedGraphFamily,
    check_cost_condition,
    find_sink,
    generate_family,
    npls_from_family,
    pls_from_digraph,
    sinks,
    unpack_point,
    validate_family,
)
from npls.search_core import (
    local_minimum_check,
    solve_npls,
    verify_npls_conditions,
)
from npls.serialization import dumps, family_to_json


def test_digraph_constructor_validation():
    with pytest.raises(ValueError):
        CostedDigraph(2, (), (1,))
    with pytest.raises(ValueError):
        CostedDigraph(2, ((0, 5),), (1, 0))


def test_successors_are_sorted():
    g = CostedDigraph(3, ((0, 2), (0, 1), (2, 2)), (2, 1, 0))
    assert g.successors(0) == [1, 2]
    assert g.successors(1) == []


def test_cost_condition():
    check_cost_condition(g1())
    with pytest.raises(CostConditionViolated):
        check_cost_condition(CostedDigraph(2, ((0, 1),), (0, 1)))
    # A self-loop never violates the condition.
    check_cost_condition(CostedDigraph(1, ((0, 0),), (5,)))


def test_find_sink_on_the_fixture():
    g = g1()
    assert find_sink(g, 0) == 5
    assert find_sink(g, 3) == 5
    assert find_sink(g, 5) == 5
    assert sinks(g) == [5]
    with pytest.raises(ValueError):
        find_sink(g, 9)


def test_find_sink_rejects_nonconforming_costs():
    with pytest.raises(CostConditionViolated):
        find_sink(CostedDigraph(2, ((0, 1),), (0, 1)), 0)


def test_find_sink_lands_in_a_sink_everywhere():
    # The rank-0 generator produces conforming graphs by construction.
    for seed in range(1, 21):
        g = generate_family(seed, 0, 8).graph
        sink_set = set(sinks(g))
        for start in range(g.n_nodes):
            assert find_sink(g, start) in sink_set


def test_generated_rank0_graphs_are_deterministic_chains():
    for seed in range(1, 11):
        g = generate_family(seed, 0, 8).graph
        for s in range(g.n_nodes):
            assert len(g.successors(s)) == 1


def test_pls_from_digraph_keeps_only_decreasing_edges():
    inst = pls_from_digraph(g1())
    assert inst.neighbor_rel(0, 0, 1)
    assert not inst.neighbor_rel(0, 1, 0)
    assert not inst.neighbor_rel(0, 5, 5)
    assert local_minimum_check(inst, 0, 5)
    with pytest.raises(ValueError):
        pls_from_digraph(g1(), start=17)


def test_validate_family_accepts_the_fixtures():
    assert validate_family(ng2()) == []
    assert validate_family(NestedGraphFamily(g1(), 0)) == []


def _loop_graph():
    return CostedDigraph(2, ((0, 1), (1, 1)), (1, 0))


def test_validate_family_flags_cost_violations():
    fam = NestedGraphFamily(CostedDigraph(2, ((0, 1), (1, 1)), (0, 1)), 0)
    issues = validate_family(fam)
    assert any("costs" in i for i in issues)


def test_validate_family_flags_dead_ends_and_missing_loops():
    fam = NestedGraphFamily(CostedDigraph(2, ((0, 1),), (1, 0)), 0)
    issues = validate_family(fam)
    assert any("no outgoing edge" in i for i in issues)
    assert any("no trivial cycle" in i for i in issues)


def test_validate_family_flags_rank0_children():
    child = NestedGraphFamily(_loop_graph(), 0)
    fam = NestedGraphFamily(_loop_graph(), 0, {0: child})
    assert any("rank-0 problem has children" in i for i in validate_family(fam))


def test_validate_family_flags_rank_inversions():
    child = NestedGraphFamily(_loop_graph(), 1, {0: NestedGraphFamily(_loop_graph(), 0), 1: NestedGraphFamily(_loop_graph(), 0)})
    fam = NestedGraphFamily(_loop_graph(), 1, {0: child, 1: NestedGraphFamily(_loop_graph(), 0)})
    assert any("has rank 1, parent 1" in i for i in validate_family(fam))


def test_validate_family_flags_unbacked_nodes():
    fam = NestedGraphFamily(_loop_graph(), 1, {1: NestedGraphFamily(_loop_graph(), 0)})
    assert any(
        "neither a child problem nor a self-loop" in i for i in validate_family(fam)
    )


def test_validate_family_flags_broken_solution_tables():
    child = NestedGraphFamily(_loop_graph(), 0)
    fam = NestedGraphFamily(
        _loop_graph(), 1, {0: child, 1: child}, {(0, 1): 0, (1, 1): 1}
    )
    issues = validate_family(fam)
    assert any("is not an edge" in i for i in issues)

    fam = NestedGraphFamily(_loop_graph(), 1, {0: child, 1: child}, {})
    issues = validate_family(fam)
    assert any("no self-loop to fall back on" in i for i in issues)


def test_npls_from_family_requires_outgoing_edges():
    fam = NestedGraphFamily(CostedDigraph(2, ((0, 1),), (1, 0)), 0)
    with pytest.raises(TotalityViolated):
        npls_from_family(fam)


def test_broken_costs_compile_and_fail_the_condition_check():
    fam = ng2()
    g = fam.graph
    costs = list(g.costs)
    costs[costs.index(0)] = 99
    bad = NestedGraphFamily(
        CostedDigraph(g.n_nodes, g.edges, tuple(costs)),
        fam.rank,
        fam.children,
        fam.solution_to_edge,
    )
    report = verify_npls_conditions(npls_from_family(bad), 0)
    failed = {c.name for c in report.checks if not c.passed}
    assert failed == {"cost_decrease"}


def test_unpack_point_inverts_the_packing():
    fam = ng2()
    inst = npls_from_family(fam)
    solution, _ = solve_npls(inst, 0)
    pid, node = unpack_point(fam, solution)
    assert pid == 0
    assert 0 <= node < fam.graph.n_nodes


def test_generate_family_shape_pins():
    fam = generate_family(3, 2, 5)
    assert fam.rank == 2
    assert fam.graph.n_nodes == 5
    assert set(fam.children) == set(range(5))
    for child in fam.children.values():
        assert child.rank == 1
        assert set(child.children) == set(range(child.graph.n_nodes))


def test_generate_family_is_deterministic_and_seed_sensitive():
    a = dumps(family_to_json(generate_family(7, 2, 4)))
    b = dumps(family_to_json(generate_family(7, 2, 4)))
    c = dumps(family_to_json(generate_family(8, 2, 4)))
    assert a == b
    assert a != c
    assert a == dumps(family_to_json(ng2()))


def test_generate_family_bounds():
    for bad in ((5, 4), (-1, 4), (2, 0), (2, 17)):
        with pytest.raises(ValueError):
            generate_family(1, *bad)


def test_generated_families_conform():
    for seed in range(1, 11):
        fam = generate_family(seed, 2, 4)
        assert validate_family(fam) == []
        report = verify_npls_conditions(npls_from_family(fam), 0)
        assert report.all_passed, [c.name for c in report.checks if not c.passed]
