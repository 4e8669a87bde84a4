"""Local search instances, solvers and the condition checker.

A plain local search instance is a family, indexed by a natural number
parameter x, of feasible point sets with an initial point, a neighbor
function and a cost function.  All points are naturals whose bit
length is bounded by a polynomial in the bit length of x, so the whole
point space is enumerable at desk scale.  A solution is a fixed point
of the neighbor function.

The nested form replaces the single feasible set by a set of source
rows, each with its own target set.  Rows carry a rank.  On a rank
zero row the neighbor relation is the graph of a step function and the
search is plain descent.  On a positive rank row a stuck target is
handed to a freshly generated source of strictly smaller rank; the
solution of that subproblem is translated back into a strictly cheaper
target of the original row.  Nine checkable conditions make this
recursion total, and ``verify_npls_conditions`` tests all of them by
enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import (
    CardinalityBoundViolated,
    CostViolation,
    DomainTooLarge,
    EmptyTargetSpace,
    InvariantViolation,
    Rank0SelfLoopMissing,
    RankViolation,
    StepBudgetExceeded,
)

PointId = int


@dataclass(frozen=True)
class Polynomial:
    """A polynomial with non-negative integer coefficients.

    ``coeffs[i]`` multiplies the i-th power of the argument.  Bounds in
    this package are always of this shape, so evaluating one can never
    go negative.
    """

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.coeffs):
            raise ValueError("coefficients must be non-negative")

    @classmethod
    def constant(cls, c: int) -> "Polynomial":
        return cls((c,))

    def __call__(self, n: int) -> int:
        total = 0
        for c in reversed(self.coeffs):
            total = total * n + c
        return total


def _bits(x: int) -> int:
    return x.bit_length()


@dataclass(frozen=True)
class PlsInstance:
    """A local search family with a functional neighbor."""

    d_bound: Polynomial
    feasible: Callable[[int, PointId], bool]
    initial: Callable[[int], PointId]
    neighbor: Callable[[int, PointId], PointId]
    cost: Callable[[int, PointId], int]


@dataclass(frozen=True)
class PredicatePls:
    """A local search family whose neighborhood is a bounded relation.

    ``p_bound`` bounds the number of related points of any feasible
    point; a solution is a feasible point none of whose neighbors is
    cheaper.
    """

    d_bound: Polynomial
    feasible: Callable[[int, PointId], bool]
    initial: Callable[[int], PointId]
    neighbor_rel: Callable[[int, PointId, PointId], bool]
    cost: Callable[[int, PointId], int]
    p_bound: Polynomial


@dataclass(frozen=True)
class NplsInstance:
    """A nested local search family.

    ``nbr0`` is meaningful only on rank-zero rows, where the neighbor
    relation is required to be its graph.  ``gen_source`` and
    ``extract`` realize the descent into and the return from a
    subproblem.
    """

    d_bound: Polynomial
    sources: Callable[[int, PointId], bool]
    targets: Callable[[int, PointId, PointId], bool]
    nbr_rel: Callable[[int, PointId, PointId, PointId], bool]
    nbr0: Callable[[int, PointId, PointId], PointId]
    initial_source: Callable[[int], PointId]
    initial_target: Callable[[int, PointId], PointId]
    cost: Callable[[int, PointId], int]
    gen_source: Callable[[int, PointId, PointId], PointId]
    extract: Callable[[int, PointId, PointId, PointId], PointId]
    rank: Callable[[int, PointId], int]


# Traces

INIT_TARGET = "init-target"
RANK0_STEP = "rank0-step"
DESCEND = "descend"
EXTRACT = "extract"
SOLVED = "solved"


@dataclass(frozen=True)
class TraceStep:
    source: PointId
    target: PointId
    rank: int
    cost: int
    action: str


@dataclass(frozen=True)
class SearchTrace:
    steps: tuple[TraceStep, ...]

    @property
    def step_count(self) -> int:
        return len(self.steps)

    def targets(self) -> list[PointId]:
        return [s.target for s in self.steps]

    def check(self) -> None:
        """Replay the trace and enforce its two shape invariants.

        Within one visit of a source row the recorded costs strictly
        decrease until the closing solved step, and every descend step
        enters a row of strictly smaller rank than the row it leaves.
        A descend step records the child row in its rank field and the
        stalled target of the parent row in its target field.
        """
        stack: list[list] = []  # [source, rank, last_cost]
        expect_init: PointId | None = None
        for i, step in enumerate(self.steps):
            if expect_init is not None or not stack:
                # A row opens with its initial target; a walk that is
                # born solved opens and closes in one solved step.
                if step.action not in (INIT_TARGET, SOLVED):
                    raise InvariantViolation(f"step {i}: missing row start")
                if expect_init is not None and step.source != expect_init:
                    raise InvariantViolation(f"step {i}: wrong row after descend")
                if step.action == INIT_TARGET:
                    stack.append([step.source, step.rank, step.cost])
                expect_init = None
                continue
            if step.action == INIT_TARGET:
                raise InvariantViolation(f"step {i}: unexpected row start")
            row = stack[-1]
            if step.action == DESCEND:
                if step.rank >= row[1]:
                    raise InvariantViolation(
                        f"step {i}: descend into rank {step.rank} from rank {row[1]}"
                    )
                expect_init = step.source
                continue
            if step.source != row[0]:
                raise InvariantViolation(f"step {i}: step charged to the wrong row")
            if step.action in (RANK0_STEP, EXTRACT):
                if step.cost >= row[2]:
                    raise InvariantViolation(f"step {i}: cost did not decrease")
                row[2] = step.cost
                continue
            if step.action == SOLVED:
                if step.cost > row[2]:
                    raise InvariantViolation(f"step {i}: solved above the row cost")
                stack.pop()
                continue
            raise InvariantViolation(f"step {i}: unknown action {step.action!r}")
        if stack or expect_init is not None:
            raise InvariantViolation("trace ends inside an open row")


def _default_budget(inst, x: int) -> int:
    # Generous but finite: the point space is 2^d, costs live below it.
    return 1 << (inst.d_bound(_bits(x)) + 2)


def solve_pls(
    inst: PlsInstance,
    x: int,
    max_steps: int | None = None,
) -> tuple[PointId, SearchTrace]:
    """Follow the neighbor function from the initial point to a fixed point.

    Each visited point is one trace step; the final step is marked
    solved.  Steps that leave the feasible set or fail to decrease the
    cost raise InvariantViolation, and exceeding the budget raises
    StepBudgetExceeded since a cost-decreasing walk cannot cycle.
    """
    budget = _default_budget(inst, x) if max_steps is None else max_steps
    point = inst.initial(x)
    if not inst.feasible(x, point):
        raise InvariantViolation("initial point is not feasible")
    steps: list[TraceStep] = []
    row = point
    action = INIT_TARGET
    while True:
        if len(steps) >= budget:
            raise StepBudgetExceeded(f"no fixed point within {budget} steps")
        cost = inst.cost(x, point)
        nxt = inst.neighbor(x, point)
        if nxt == point:
            steps.append(TraceStep(row, point, 0, cost, SOLVED))
            return point, SearchTrace(tuple(steps))
        steps.append(TraceStep(row, point, 0, cost, action))
        action = RANK0_STEP
        if not inst.feasible(x, nxt):
            raise InvariantViolation(f"neighbor {nxt} of {point} is not feasible")
        if inst.cost(x, nxt) >= cost:
            raise InvariantViolation(f"neighbor {nxt} of {point} does not cost less")
        point = nxt


def local_minimum_check(inst: PredicatePls, x: int, s: PointId) -> bool:
    """True when no related feasible point is cheaper than s.

    The neighborhood is enumerated over the whole point space, which
    the bit bound keeps small; a neighborhood larger than the declared
    cardinality bound raises CardinalityBoundViolated.
    """
    if not inst.feasible(x, s):
        raise InvariantViolation(f"{s} is not a feasible point")
    space = 1 << inst.d_bound(_bits(x))
    limit = inst.p_bound(_bits(x))
    cost_s = inst.cost(x, s)
    seen = 0
    minimal = True
    for t in range(space):
        if inst.neighbor_rel(x, s, t) and inst.feasible(x, t):
            seen += 1
            if seen > limit:
                raise CardinalityBoundViolated(
                    f"point {s} has more than {limit} neighbors"
                )
            if inst.cost(x, t) < cost_s:
                minimal = False
    return minimal


def derive_self_loop_predicate(inst: PredicatePls) -> PredicatePls:
    """Rewire a relational instance so solutions are exactly self-loops.

    The derived relation keeps every edge between distinct points and
    relates a point to itself exactly when it is a local minimum of the
    original instance.  The cardinality bound grows by one for the
    possible self-loop.
    """

    def rel(x: int, s: PointId, t: PointId) -> bool:
        if s != t:
            return inst.neighbor_rel(x, s, t)
        return local_minimum_check(inst, x, s)

    coeffs = list(inst.p_bound.coeffs) or [0]
    coeffs[0] += 1
    return PredicatePls(
        d_bound=inst.d_bound,
        feasible=inst.feasible,
        initial=inst.initial,
        neighbor_rel=rel,
        cost=inst.cost,
        p_bound=Polynomial(tuple(coeffs)),
    )


def as_function_pls(inst: PredicatePls) -> PlsInstance:
    """Turn a relational instance into a functional one.

    The neighbor function moves to the related feasible point of
    smallest id among those that are strictly cheaper, and stays put at
    a local minimum.  Ties break toward the smallest id so runs are
    reproducible.
    """

    def neighbor(x: int, s: PointId) -> PointId:
        space = 1 << inst.d_bound(_bits(x))
        cost_s = inst.cost(x, s)
        for t in range(space):
            if (
                inst.neighbor_rel(x, s, t)
                and inst.feasible(x, t)
                and inst.cost(x, t) < cost_s
            ):
                return t
        return s

    return PlsInstance(
        d_bound=inst.d_bound,
        feasible=inst.feasible,
        initial=inst.initial,
        neighbor=neighbor,
        cost=inst.cost,
    )


def solve_npls(
    inst: NplsInstance,
    x: int,
    max_steps: int | None = None,
) -> tuple[PointId, SearchTrace]:
    """Run the nested search from the initial source row.

    Rank-zero rows iterate the step function to a fixed point.  On a
    positive-rank row a target that is not yet a self-loop of the
    neighbor relation spawns a subproblem via ``gen_source``; its
    solution is pushed back through ``extract``.  Returns the solving
    target of the initial row together with the full trace.
    """
    budget = _default_budget(inst, x) if max_steps is None else max_steps
    steps: list[TraceStep] = []

    def spend() -> None:
        if len(steps) >= budget:
            raise StepBudgetExceeded(f"search exceeded {budget} steps")

    def solve(s: PointId) -> PointId:
        rank = inst.rank(x, s)
        y = inst.initial_target(x, s)
        if not inst.targets(x, s, y):
            raise InvariantViolation(f"initial target {y} is not a target of row {s}")
        if rank == 0:
            # Recorded exactly like solve_pls so a rank-zero row and the
            # induced plain instance produce identical traces.
            fuel = inst.cost(x, y) + 2
            action = INIT_TARGET
            while True:
                spend()
                z = inst.nbr0(x, s, y)
                if z == y:
                    steps.append(TraceStep(s, y, rank, inst.cost(x, y), SOLVED))
                    return y
                if not inst.targets(x, s, z):
                    raise InvariantViolation(f"rank-0 step left the targets of row {s}")
                if inst.cost(x, z) >= inst.cost(x, y):
                    raise CostViolation(f"rank-0 step {y} -> {z} did not decrease cost")
                steps.append(TraceStep(s, y, rank, inst.cost(x, y), action))
                action = RANK0_STEP
                y = z
                fuel -= 1
                if fuel < 0:
                    raise Rank0SelfLoopMissing(
                        f"row {s} found no fixed point within its cost range"
                    )
        spend()
        steps.append(TraceStep(s, y, rank, inst.cost(x, y), INIT_TARGET))
        while not inst.nbr_rel(x, s, y, y):
            child = inst.gen_source(x, s, y)
            if not inst.sources(x, child):
                raise InvariantViolation(f"generated source {child} is not a source")
            child_rank = inst.rank(x, child)
            if child_rank >= rank:
                raise RankViolation(
                    f"subproblem rank {child_rank} does not drop below {rank}"
                )
            spend()
            steps.append(TraceStep(child, y, child_rank, inst.cost(x, y), DESCEND))
            z = solve(child)
            y2 = inst.extract(x, s, y, z)
            if not inst.targets(x, s, y2):
                raise InvariantViolation(f"extracted point {y2} left the targets of row {s}")
            if y2 != y:
                if inst.cost(x, y2) >= inst.cost(x, y):
                    raise CostViolation(f"extract {y} -> {y2} did not decrease cost")
                if not inst.nbr_rel(x, s, y, y2):
                    raise InvariantViolation(
                        f"extracted point {y2} is not a neighbor of {y} in row {s}"
                    )
                spend()
                steps.append(TraceStep(s, y2, rank, inst.cost(x, y2), EXTRACT))
            y = y2
        spend()
        steps.append(TraceStep(s, y, rank, inst.cost(x, y), SOLVED))
        return y

    top = inst.initial_source(x)
    if not inst.sources(x, top):
        raise InvariantViolation("initial source is not a source")
    solution = solve(top)
    if not inst.nbr_rel(x, top, solution, solution):
        raise InvariantViolation("search ended on a non-solution")
    return solution, SearchTrace(tuple(steps))


def brute_force_npls(
    inst: NplsInstance,
    x: int,
    s: PointId,
    domain_limit: int = 1 << 20,
) -> PointId:
    """The minimum-cost target of a source row, by full enumeration.

    This is the totality oracle: a minimum-cost target is always a
    solution of its row when the nine conditions hold.  Ties break
    toward the smallest id.
    """
    space = 1 << inst.d_bound(_bits(x))
    if space > domain_limit:
        raise DomainTooLarge(f"point space 2^{inst.d_bound(_bits(x))} exceeds the limit")
    best: PointId | None = None
    best_cost = -1
    for t in range(space):
        if inst.targets(x, s, t):
            c = inst.cost(x, t)
            if best is None or c < best_cost:
                best, best_cost = t, c
    if best is None:
        raise EmptyTargetSpace(f"source row {s} has no targets")
    return best


def rank0_pls(inst: NplsInstance, x: int) -> PlsInstance:
    """The plain instance induced on the initial row by the step function.

    Meaningful when the initial source has rank zero; then the nested
    search on that row and plain descent on this instance take the same
    steps through the same points.
    """
    row = inst.initial_source(x)

    def feasible(xx: int, t: PointId) -> bool:
        return inst.targets(xx, row, t)

    def initial(xx: int) -> PointId:
        return inst.initial_target(xx, row)

    def neighbor(xx: int, t: PointId) -> PointId:
        return inst.nbr0(xx, row, t)

    return PlsInstance(
        d_bound=inst.d_bound,
        feasible=feasible,
        initial=initial,
        neighbor=neighbor,
        cost=inst.cost,
    )


# Condition checking


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    counterexample: tuple | None = None
    detail: str = ""

    def render(self) -> str:
        status = "pass" if self.passed else "FAIL"
        extra = ""
        if not self.passed:
            extra = f"  at {self.counterexample}" if self.counterexample else ""
            if self.detail:
                extra += f"  ({self.detail})"
        return f"{self.name:<18} {status}{extra}"


@dataclass(frozen=True)
class ConditionReport:
    checks: tuple[ConditionCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ConditionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [c.render() for c in self.checks]


CONDITION_NAMES = (
    "bit_bound",
    "gen_source_closure",
    "neighbor_domain",
    "rank0_function",
    "rank_descent",
    "extract_lift",
    "initial_source",
    "initial_target",
    "cost_decrease",
)


def verify_npls_conditions(
    inst: NplsInstance,
    x: int,
    domain_limit: int = 1 << 20,
) -> ConditionReport:
    """Test the nine nested-search conditions by enumeration.

    Sources are scanned over the whole point space and targets over the
    whole space per source.  Conditions quantifying over neighbor
    triples are checked on every target pair of every row; the
    membership condition on the neighbor relation is additionally
    probed just outside each row's target set and beyond the bit bound,
    since a full cubic scan is out of reach.  Each failing check
    reports the first counterexample in scan order.
    """
    d = inst.d_bound(_bits(x))
    space = 1 << d
    if space > domain_limit:
        raise DomainTooLarge(f"point space 2^{d} exceeds the limit")

    def guarded(fn, *args):
        try:
            return fn(x, *args), None
        except Exception as exc:  # noqa: BLE001 - verifier reports, never raises
            return None, f"{type(exc).__name__}: {exc}"

    sources = [s for s in range(space) if inst.sources(x, s)]
    source_set = set(sources)
    targets: dict[PointId, list[PointId]] = {}
    for s in sources:
        targets[s] = [t for t in range(space) if inst.targets(x, s, t)]

    checks: list[ConditionCheck] = []

    def run(name: str):
        def wrap(fn):
            try:
                bad = fn()
            except Exception as exc:  # noqa: BLE001
                checks.append(ConditionCheck(name, False, None, f"checker crashed: {exc}"))
                return
            if bad is None:
                checks.append(ConditionCheck(name, True))
            else:
                counter, detail = bad
                checks.append(ConditionCheck(name, False, counter, detail))

        return wrap

    out_probes = [space, space + 1, 2 * space + 3]

    @run("bit_bound")
    def _bit_bound():
        for s in out_probes:
            if inst.sources(x, s):
                return (s,), "a source lies beyond the bit bound"
        for s in sources[: min(len(sources), 8)] or []:
            for t in out_probes:
                if inst.targets(x, s, t):
                    return (s, t), "a target lies beyond the bit bound"
        return None

    @run("gen_source_closure")
    def _closure():
        for s in sources:
            for y in targets[s]:
                got, err = guarded(inst.gen_source, s, y)
                if err is not None:
                    return (s, y), f"gen_source failed: {err}"
                if got not in source_set:
                    return (s, y), f"gen_source returned non-source {got}"
        return None

    def row_probes(s: PointId) -> list[PointId]:
        near = {(t + 1) % space for t in targets[s]}
        near.update((0, space - 1))
        return sorted(near - set(targets[s]))

    @run("neighbor_domain")
    def _domain():
        for s in sources:
            tset = set(targets[s])
            pool = targets[s] + row_probes(s)
            for y in pool:
                for z in pool:
                    if inst.nbr_rel(x, s, y, z) and not (y in tset and z in tset):
                        return (s, y, z), "neighbor relation leaves the target set"
        non_sources = [s for s in range(min(space, 16)) if s not in source_set]
        for s in non_sources:
            for y in (0, space - 1):
                for z in (0, space - 1):
                    if inst.nbr_rel(x, s, y, z):
                        return (s, y, z), "neighbor relation holds on a non-source row"
        return None

    @run("rank0_function")
    def _rank0():
        for s in sources:
            if inst.rank(x, s) != 0:
                continue
            tset = set(targets[s])
            for y in targets[s]:
                got, err = guarded(inst.nbr0, s, y)
                if err is not None:
                    return (s, y), f"step function failed: {err}"
                if not inst.nbr_rel(x, s, y, got):
                    return (s, y, got), "step function leaves the neighbor relation"
            pool = targets[s] + row_probes(s)
            for y in pool:
                for z in pool:
                    if not inst.nbr_rel(x, s, y, z):
                        continue
                    if y not in tset:
                        return (s, y, z), "relation holds on a non-target"
                    got, err = guarded(inst.nbr0, s, y)
                    if err is not None or got != z:
                        return (s, y, z), "relation is not the graph of the step function"
        return None

    @run("rank_descent")
    def _descent():
        for s in sources:
            r = inst.rank(x, s)
            if r == 0:
                continue
            for y in targets[s]:
                if inst.nbr_rel(x, s, y, y):
                    continue
                got, err = guarded(inst.gen_source, s, y)
                if err is not None:
                    return (s, y), f"gen_source failed: {err}"
                if inst.rank(x, got) >= r:
                    return (s, y), f"subproblem rank {inst.rank(x, got)} >= {r}"
        return None

    @run("extract_lift")
    def _lift():
        for s in sources:
            if inst.rank(x, s) == 0:
                continue
            for y in targets[s]:
                child, err = guarded(inst.gen_source, s, y)
                if err is not None or child not in source_set:
                    continue  # reported by gen_source_closure
                for z in targets.get(child, []):
                    if not inst.nbr_rel(x, child, z, z):
                        continue
                    got, err = guarded(inst.extract, s, y, z)
                    if err is not None:
                        return (s, y, z), f"extract failed: {err}"
                    if not inst.nbr_rel(x, s, y, got):
                        return (s, y, z), f"extracted point {got} is not a neighbor of {y}"
        return None

    @run("initial_source")
    def _init_source():
        got, err = guarded(inst.initial_source)
        if err is not None:
            return (), f"initial_source failed: {err}"
        if got not in source_set:
            return (got,), "initial source is not a source"
        return None

    @run("initial_target")
    def _init_target():
        for s in sources:
            got, err = guarded(inst.initial_target, s)
            if err is not None:
                return (s,), f"initial_target failed: {err}"
            if got not in set(targets[s]):
                return (s, got), "initial target is not a target of its row"
        return None

    @run("cost_decrease")
    def _cost():
        for s in sources:
            for y in targets[s]:
                for z in targets[s]:
                    if inst.nbr_rel(x, s, y, z) and y != z:
                        if inst.cost(x, y) <= inst.cost(x, z):
                            return (s, y, z), "neighbor step does not decrease cost"
        return None

    by_name = {c.name: c for c in checks}
    ordered = tuple(by_name[name] for name in CONDITION_NAMES)
    return ConditionReport(ordered)
