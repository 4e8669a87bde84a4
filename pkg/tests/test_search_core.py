from __future__ import annotations

import dataclasses

import pytest

from npls.corpus import g1, ng2
from npls.errors import (
    CardinalityBoundViolated,
    CostViolation,
    DomainTooLarge,
    EmptyTargetSpace,
    InvariantViolation,
    RankViolation,
    StepBudgetExceeded,
)
from npls.nested_graph import npls_from_family, pls_from_digraph, sinks, unpack_point
from npls.search_core import (
    CONDITION_NAMES,
    DESCEND,
    EXTRACT,
    INIT_TARGET,
    RANK0_STEP,
    SOLVED,
    PlsInstance,
    Polynomial,
    SearchTrace,
    TraceStep,
    as_function_pls,
    brute_force_npls,
    derive_self_loop_predicate,
    local_minimum_check,
    rank0_pls,
    solve_npls,
    solve_pls,
    verify_npls_conditions,
)


def test_polynomial():
    p = Polynomial((2, 3))
    assert p(0) == 2
    assert p(4) == 14
    assert Polynomial.constant(5)(100) == 5
    with pytest.raises(ValueError):
        Polynomial((1, -1))


def _chain(n):
    # Node ids are their own costs; everything walks down to 0.
    return PlsInstance(
        d_bound=Polynomial.constant(max((n - 1).bit_length(), 1)),
        feasible=lambda x, s: 0 <= s < n,
        initial=lambda x: n - 1,
        neighbor=lambda x, s: max(s - 1, 0),
        cost=lambda x, s: s,
    )


def test_solve_pls_walks_a_chain():
    solution, trace = solve_pls(_chain(8), 0)
    assert solution == 0
    assert trace.targets() == [7, 6, 5, 4, 3, 2, 1, 0]
    assert [s.action for s in trace.steps] == [INIT_TARGET] + [RANK0_STEP] * 6 + [SOLVED]
    trace.check()


def test_solve_pls_identity_case_is_one_step():
    inst = dataclasses.replace(_chain(8), initial=lambda x: 0)
    solution, trace = solve_pls(inst, 0)
    assert solution == 0
    assert trace.step_count == 1
    assert trace.steps[0].action == SOLVED
    trace.check()


def test_solve_pls_budget():
    with pytest.raises(StepBudgetExceeded):
        solve_pls(_chain(8), 0, max_steps=3)


def test_solve_pls_rejects_infeasible_initial():
    inst = dataclasses.replace(_chain(8), initial=lambda x: 99)
    with pytest.raises(InvariantViolation):
        solve_pls(inst, 0)


def test_solve_pls_rejects_cost_increase():
    inst = dataclasses.replace(_chain(8), neighbor=lambda x, s: min(s + 1, 7))
    inst = dataclasses.replace(inst, initial=lambda x: 0)
    with pytest.raises(InvariantViolation):
        solve_pls(inst, 0)


def test_solve_pls_rejects_infeasible_neighbor():
    inst = dataclasses.replace(_chain(8), neighbor=lambda x, s: -1)
    with pytest.raises(InvariantViolation):
        solve_pls(inst, 0)


def test_digraph_instance_solves_to_the_sink():
    inst = as_function_pls(pls_from_digraph(g1()))
    solution, trace = solve_pls(inst, 0)
    assert solution == 5
    assert trace.step_count == 3
    assert trace.targets() == [0, 1, 5]


def test_local_minimum_check():
    inst = pls_from_digraph(g1())
    assert local_minimum_check(inst, 0, 5)
    assert not local_minimum_check(inst, 0, 0)
    with pytest.raises(InvariantViolation):
        local_minimum_check(inst, 0, 99)


def test_local_minimum_check_enforces_the_cardinality_bound():
    inst = dataclasses.replace(pls_from_digraph(g1()), p_bound=Polynomial.constant(1))
    with pytest.raises(CardinalityBoundViolated):
        local_minimum_check(inst, 0, 0)


def test_self_loop_predicate_marks_exactly_the_local_minima():
    inst = pls_from_digraph(g1())
    derived = derive_self_loop_predicate(inst)
    loops = {s for s in range(g1().n_nodes) if derived.neighbor_rel(0, s, s)}
    assert loops == set(sinks(g1()))
    assert derived.neighbor_rel(0, 0, 1)
    assert not derived.neighbor_rel(0, 1, 0)


def test_as_function_pls_prefers_the_smallest_id():
    inst = as_function_pls(pls_from_digraph(g1()))
    assert inst.neighbor(0, 0) == 1
    assert inst.neighbor(0, 5) == 5


def test_trace_check_accepts_the_empty_trace():
    SearchTrace(()).check()


def _step(action, source=0, target=0, rank=0, cost=0):
    return TraceStep(source, target, rank, cost, action)


def test_trace_check_rejects_shape_violations():
    with pytest.raises(InvariantViolation, match="missing row start"):
        SearchTrace((_step(RANK0_STEP),)).check()
    with pytest.raises(InvariantViolation, match="unexpected row start"):
        SearchTrace((_step(INIT_TARGET, cost=5), _step(INIT_TARGET, cost=4))).check()
    with pytest.raises(InvariantViolation, match="did not decrease"):
        SearchTrace((_step(INIT_TARGET, cost=3), _step(RANK0_STEP, cost=3))).check()
    with pytest.raises(InvariantViolation, match="descend into rank"):
        SearchTrace(
            (_step(INIT_TARGET, rank=1, cost=5), _step(DESCEND, source=1, rank=1))
        ).check()
    with pytest.raises(InvariantViolation, match="wrong row after descend"):
        SearchTrace(
            (
                _step(INIT_TARGET, rank=2, cost=5),
                _step(DESCEND, source=1, rank=1),
                _step(INIT_TARGET, source=2, rank=1, cost=3),
            )
        ).check()
    with pytest.raises(InvariantViolation, match="above the row cost"):
        SearchTrace((_step(INIT_TARGET, cost=3), _step(SOLVED, cost=4))).check()
    with pytest.raises(InvariantViolation, match="ends inside an open row"):
        SearchTrace((_step(INIT_TARGET, cost=3),)).check()
    with pytest.raises(InvariantViolation, match="unknown action"):
        SearchTrace((_step(INIT_TARGET, cost=3), _step("warp", cost=1))).check()
    with pytest.raises(InvariantViolation, match="wrong row"):
        SearchTrace(
            (_step(INIT_TARGET, cost=3), _step(RANK0_STEP, source=7, cost=1))
        ).check()


def test_solve_npls_on_the_family_fixture():
    fam = ng2()
    inst = npls_from_family(fam)
    solution, trace = solve_npls(inst, 0)
    trace.check()
    top = inst.initial_source(0)
    assert inst.nbr_rel(0, top, solution, solution)
    pid, node = unpack_point(fam, solution)
    assert pid == 0
    assert (node, node) in set(fam.graph.edges)
    for step in trace.steps:
        if step.action == DESCEND:
            assert step.rank < fam.rank


def test_solve_npls_rejects_constant_cost():
    inst = dataclasses.replace(npls_from_family(ng2()), cost=lambda x, t: 7)
    with pytest.raises(CostViolation):
        solve_npls(inst, 0)


def test_solve_npls_rejects_rank_plateau():
    inst = dataclasses.replace(npls_from_family(ng2()), rank=lambda x, s: 5)
    with pytest.raises(RankViolation):
        solve_npls(inst, 0)


def test_solve_npls_rejects_bad_initial_source():
    inst = dataclasses.replace(npls_from_family(ng2()), initial_source=lambda x: 999)
    with pytest.raises(InvariantViolation):
        solve_npls(inst, 0)


def test_brute_force_finds_the_cheapest_target():
    fam = ng2()
    inst = npls_from_family(fam)
    best = brute_force_npls(inst, 0, 0)
    _, node = unpack_point(fam, best)
    assert fam.graph.costs[node] == min(fam.graph.costs)


def test_brute_force_error_cases():
    inst = npls_from_family(ng2())
    with pytest.raises(EmptyTargetSpace):
        brute_force_npls(dataclasses.replace(inst, targets=lambda x, s, t: False), 0, 0)
    with pytest.raises(DomainTooLarge):
        brute_force_npls(dataclasses.replace(inst, d_bound=Polynomial.constant(40)), 0, 0)


def test_verify_reports_all_nine_conditions_in_order():
    report = verify_npls_conditions(npls_from_family(ng2()), 0)
    assert [c.name for c in report.checks] == list(CONDITION_NAMES)
    assert report.all_passed
    assert all("pass" in line for line in report.lines())


def test_verify_pinpoints_a_constant_cost():
    inst = dataclasses.replace(npls_from_family(ng2()), cost=lambda x, t: 7)
    report = verify_npls_conditions(inst, 0)
    failed = {c.name for c in report.checks if not c.passed}
    assert failed == {"cost_decrease"}
    assert report.check("cost_decrease").counterexample is not None


def test_verify_pinpoints_a_rank_plateau():
    inst = dataclasses.replace(npls_from_family(ng2()), rank=lambda x, s: 5)
    report = verify_npls_conditions(inst, 0)
    assert not report.check("rank_descent").passed


def test_verify_pinpoints_a_bad_initial_source():
    inst = dataclasses.replace(npls_from_family(ng2()), initial_source=lambda x: 1 << 30)
    report = verify_npls_conditions(inst, 0)
    assert not report.check("initial_source").passed


def test_rank0_adapter_matches_the_nested_solver():
    from npls.nested_graph import NestedGraphFamily

    inst = npls_from_family(NestedGraphFamily(g1(), 0))
    y_nested, tr_nested = solve_npls(inst, 0)
    y_plain, tr_plain = solve_pls(rank0_pls(inst, 0), 0)
    assert y_nested == y_plain == 5
    assert tr_nested.steps == tr_plain.steps
