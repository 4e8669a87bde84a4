"""Witness extraction: compiling derivations into local search problems.

A derivation of a bounded existential sentence hides a witness for it
in plain sight: some leaf rule instantiates the end-formula with a
true instance.  Finding that rule is organized as local search over
nodes of the derivation tree.

In ``pls`` mode the feasible points are the root and the value-indexed
cut uppers whose sequents contain no true literal.  From a point one
walks the rightmost branch up to the lowest existential rule with a
true witnessing instance; the entry point of that rule's principal
formula is either the root, in which case the point is a solution, or
a cut upper, whose witness value selects a strictly earlier feasible
point in post-order.  Iterating reaches a solution, and the goal above
it witnesses the end-formula.

In ``npls`` mode cuts are on exists-forall formulas, and a single
descent no longer suffices: refuting one instantiation of a cut
formula is itself a search problem.  Source rows are the root and the
value-indexed cut uppers; the targets of a row are the exists-forall
rules above it with no cut upper in between, plus any existential rule
with a true instance whose principal already occurs in the row's
sequent.  A stuck exists-forall target spawns the cut upper selected
by its witness value as a subproblem; the subproblem's solution either
is a target of the original row outright or points, through its own
witness value, at the universal branch that pushes the search deeper.
Ranks and costs both come from tree shape: the rank of a row is its
post-order index, the cost of an exists-forall target grows toward
the root so the search sinks into the tree, and existential targets
cost nothing because they end the row.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .derivation import (
    MODE_NPLS,
    MODE_PLS,
    CutRule,
    Derivation,
    ExistsForallRule,
    ExistsRule,
    InitialRule,
    NodePath,
    ProofNode,
    format_path,
    postorder_index,
    validate,
)
from .errors import (
    EndFormulaPrincipal,
    GoalNotFound,
    KBViolation,
    ModeError,
    NotASolution,
    UnreachableCase,
    ValidationFailed,
)
from .search_core import (
    NplsInstance,
    PlsInstance,
    Polynomial,
    SearchTrace,
    solve_npls,
    solve_pls,
)
from .terms import (
    DEFAULT_BIT_CAP,
    ExistsForall,
    ExistsLit,
    Formula,
    LitFormula,
    classify,
    eval_literal,
    eval_term,
    exists_instance,
    negated_instance,
    normalize,
)


@dataclass(frozen=True)
class WitnessReport:
    """Outcome of an extraction run.

    ``solution_node`` is the existential rule whose witnessing term
    yields the witness; ``verified`` records whether the end-formula
    instance at the witness is actually true.
    """

    witness: int
    solution_node: NodePath
    verified: bool
    trace: SearchTrace


class ExtractionContext:
    """A validated derivation with everything the compilers need cached.

    Construction validates the derivation in the requested mode.  A
    derivation whose formulas or rules do not fit the mode at all
    raises ModeError; any other defect raises ValidationFailed.  The
    cached tables cover sequent multisets, rule classification, the
    truth of witnessing instances, post-order indices and node depths.
    ``d_max`` exceeds the deepest node by one, so exists-forall targets
    always cost at least one.
    """

    def __init__(self, derivation: Derivation, mode: str, bit_cap: int = DEFAULT_BIT_CAP):
        if mode not in (MODE_PLS, MODE_NPLS):
            raise ValueError(f"unknown mode {mode!r}")
        self._check_mode(derivation, mode)
        report = validate(derivation, mode, bit_cap)
        if not report.ok:
            raise ValidationFailed(
                "derivation is invalid: " + "; ".join(report.lines()[:3]), report
            )
        self.derivation = derivation
        self.mode = mode
        self.bit_cap = bit_cap
        self.x = derivation.end_x

        root = derivation.sequent(())
        if len(root) != 1 or not isinstance(root[0], ExistsLit):
            raise ValidationFailed(
                "the end-sequent must consist of one bounded existential formula"
            )
        self.end_formula: ExistsLit = root[0]

        self.kb = postorder_index(derivation.nodes.keys())
        self.path_of = [p for p, _ in sorted(self.kb.items(), key=lambda kv: kv[1])]
        self.n_nodes = len(self.path_of)
        self.d_max = max(len(p) for p in self.kb) + 1

        self._seq_counter: dict[NodePath, Counter] = {}
        self._has_true_literal: dict[NodePath, bool] = {}
        self._principal: dict[NodePath, Formula] = {}
        self._witness_value: dict[NodePath, int] = {}
        self._true_goal: dict[NodePath, bool] = {}
        self._left_upper: dict[NodePath, bool] = {}
        for path, node in derivation.nodes.items():
            self._seq_counter[path] = Counter(normalize(f) for f in node.sequent)
            self._has_true_literal[path] = any(
                isinstance(f, LitFormula) and eval_literal(f.lit, self.x, bit_cap)
                for f in node.sequent
            )
            rule = node.rule
            if isinstance(rule, (ExistsRule, ExistsForallRule)):
                principal = node.sequent[rule.principal]
                self._principal[path] = normalize(principal)
                self._witness_value[path] = eval_term(rule.witness, self.x, bit_cap)
                if isinstance(rule, ExistsRule):
                    aux = exists_instance(principal, rule.witness)
                    self._true_goal[path] = eval_literal(aux, self.x, bit_cap)
            self._left_upper[path] = bool(path) and (
                isinstance(derivation.rule(path[:-1]), CutRule)
                and path[-1] < derivation.child_count(path[:-1]) - 1
            )

    @staticmethod
    def _check_mode(d: Derivation, mode: str) -> None:
        for path, node in d.nodes.items():
            where = f" at {format_path(path)}"
            if mode == MODE_PLS:
                if isinstance(node.rule, ExistsForallRule) or any(
                    classify(f) > 1 for f in node.sequent
                ):
                    raise ModeError("exists-forall material needs npls mode" + where)
                if isinstance(node.rule, CutRule) and not isinstance(
                    node.rule.formula, ExistsLit
                ):
                    raise ModeError("pls mode admits cuts on bounded existentials only" + where)
            else:
                if isinstance(node.rule, CutRule) and not isinstance(
                    node.rule.formula, ExistsForall
                ):
                    raise ModeError("npls mode admits cuts on exists-forall formulas only" + where)

    # Node predicates

    def is_exists(self, path: NodePath) -> bool:
        return isinstance(self.derivation.rule(path), ExistsRule)

    def is_exists_forall(self, path: NodePath) -> bool:
        return isinstance(self.derivation.rule(path), ExistsForallRule)

    def has_true_goal(self, path: NodePath) -> bool:
        """True on existential rules whose witnessing instance holds."""
        return self._true_goal.get(path, False)

    def principal(self, path: NodePath) -> Formula:
        return self._principal[path]

    def witness_value(self, path: NodePath) -> int:
        return self._witness_value[path]

    def is_left_upper(self, path: NodePath) -> bool:
        """True on the value-indexed uppers of a cut (all but the last)."""
        return self._left_upper[path]

    def contains(self, path: NodePath, formula: Formula) -> bool:
        return normalize(formula) in self._seq_counter[path]

    def depth(self, path: NodePath) -> int:
        return len(path)


def target_condition(ctx: ExtractionContext, path: NodePath) -> bool:
    """No literal in the sequent at ``path`` evaluates to true."""
    return not ctx._has_true_literal[path]


def rightmost_goal(ctx: ExtractionContext, path: NodePath) -> NodePath:
    """The lowest goal on the rightmost branch at or above ``path``.

    Goals are existential rules with a true witnessing instance and, in
    npls mode, exists-forall rules.  On input satisfying the target
    condition a goal always exists: the branch ends in an initial leaf
    whose true literal must have been introduced on the way, and the
    rule introducing it qualifies.
    """
    d = ctx.derivation
    current = path
    while True:
        if ctx.has_true_goal(current):
            return current
        if ctx.mode == MODE_NPLS and ctx.is_exists_forall(current):
            return current
        count = d.child_count(current)
        if count == 0:
            raise GoalNotFound(
                f"no witnessing rule on the rightmost branch above {format_path(path)}"
            )
        current = current + (count - 1,)


def _entry_point(ctx: ExtractionContext, path: NodePath, formula: Formula) -> NodePath:
    """Shortest prefix of ``path`` whose sequent contains the formula."""
    target = normalize(formula)
    for k in range(len(path) + 1):
        if target in ctx._seq_counter[path[:k]]:
            return path[:k]
    raise UnreachableCase("formula missing below its own node")


# Plain extraction (pls mode)


def pls_neighbor(ctx: ExtractionContext, sigma: NodePath) -> NodePath:
    """One step of the plain search; fixed points are solutions.

    The goal above sigma witnesses its principal formula.  If that
    formula is the end-formula, sigma solves the instance.  Otherwise
    it entered at the final upper of a cut, and the goal's witness
    value picks the corresponding value-indexed upper of that cut,
    which lies strictly earlier in post-order.
    """
    tau = rightmost_goal(ctx, sigma)
    principal = ctx.principal(tau)
    entry = _entry_point(ctx, tau, principal)
    if entry == ():
        return sigma
    cut = entry[:-1]
    kappa = cut + (ctx.witness_value(tau),)
    if ctx.kb[kappa] >= ctx.kb[sigma]:
        raise KBViolation(
            f"step {format_path(sigma)} -> {format_path(kappa)} does not move down"
        )
    return kappa


def build_pls(ctx: ExtractionContext) -> PlsInstance:
    """The plain search instance of a pls-mode derivation.

    Point ids are post-order indices, so the cost function is the
    identity.  Feasible points are the root and the value-indexed cut
    uppers whose sequents contain no true literal.
    """
    if ctx.mode != MODE_PLS:
        raise ModeError("build_pls needs a pls-mode context")
    feasible_ids = {ctx.kb[()]}
    for path in ctx.kb:
        if ctx.is_left_upper(path) and target_condition(ctx, path):
            feasible_ids.add(ctx.kb[path])

    def neighbor(x: int, s: int) -> int:
        return ctx.kb[pls_neighbor(ctx, ctx.path_of[s])]

    d_bits = max((ctx.n_nodes - 1).bit_length(), 1)
    return PlsInstance(
        d_bound=Polynomial.constant(d_bits),
        feasible=lambda x, s: s in feasible_ids,
        initial=lambda x: ctx.kb[()],
        neighbor=neighbor,
        cost=lambda x, s: s,
    )


def _report(ctx: ExtractionContext, tau: NodePath, trace: SearchTrace) -> WitnessReport:
    if not ctx.is_exists(tau):
        raise NotASolution(f"node {format_path(tau)} carries no witnessing term")
    witness = ctx.witness_value(tau)
    instance = exists_instance(ctx.end_formula, ctx.derivation.rule(tau).witness)
    verified = (
        normalize(ctx.principal(tau)) == normalize(ctx.end_formula)
        and witness < eval_term(ctx.end_formula.bound, ctx.x, ctx.bit_cap)
        and eval_literal(instance, ctx.x, ctx.bit_cap)
    )
    return WitnessReport(witness, tau, verified, trace)


def extract_witness_pls(ctx: ExtractionContext, max_steps: int | None = None) -> WitnessReport:
    """Run the plain search and read the witness off the solution's goal."""
    inst = build_pls(ctx)
    solution, trace = solve_pls(inst, ctx.x, max_steps)
    tau = rightmost_goal(ctx, ctx.path_of[solution])
    return _report(ctx, tau, trace)


# Nested extraction (npls mode)


def source_condition(ctx: ExtractionContext, sigma: NodePath) -> bool:
    """No proper prefix of sigma is an existential rule with a true instance."""
    return not any(ctx.has_true_goal(sigma[:k]) for k in range(len(sigma)))


def npls_sources(ctx: ExtractionContext, sigma: NodePath) -> bool:
    """Source rows: the root, and value-indexed cut uppers that are clean.

    Clean means the source condition holds and the sequent contains no
    true literal.  The latter is needed for the row to have a target at
    all and holds automatically for every row the search can reach.
    """
    if sigma == ():
        return True
    return (
        ctx.is_left_upper(sigma)
        and source_condition(ctx, sigma)
        and target_condition(ctx, sigma)
    )


def _no_left_upper_between(ctx: ExtractionContext, sigma: NodePath, tau: NodePath) -> bool:
    for k in range(len(sigma) + 1, len(tau)):
        if ctx.is_left_upper(tau[:k]):
            return False
    return True


def npls_targets(ctx: ExtractionContext, sigma: NodePath, tau: NodePath) -> bool:
    """Targets of a source row.

    Either an exists-forall rule above sigma with no value-indexed cut
    upper strictly between, or an existential rule with a true instance
    whose principal formula already occurs in sigma's sequent.  Both
    kinds must carry no true literal.
    """
    if not target_condition(ctx, tau):
        return False
    if ctx.is_exists_forall(tau):
        return (
            len(sigma) <= len(tau)
            and tau[: len(sigma)] == sigma
            and _no_left_upper_between(ctx, sigma, tau)
        )
    if ctx.has_true_goal(tau):
        return ctx.principal(tau) in ctx._seq_counter[sigma]
    return False


def npls_cost(ctx: ExtractionContext, tau: NodePath) -> int:
    """Depth complement for exists-forall targets, zero for the rest.

    The neighbor relation moves from an exists-forall rule to a deeper
    one or to a witnessing existential rule, so this assignment makes
    every move strictly cheaper.
    """
    if ctx.is_exists_forall(tau):
        return ctx.d_max - len(tau)
    return 0


def npls_neighbor_rel(
    ctx: ExtractionContext, sigma: NodePath, tau: NodePath, rho: NodePath
) -> bool:
    """The neighbor relation of a row, on its targets.

    An exists-forall target relates to every target that is not an
    exists-forall rule at or below it; a witnessing existential target
    relates only to itself and is thereby a solution of the row.
    """
    if ctx.is_exists_forall(tau):
        if ctx.is_exists_forall(rho):
            return len(tau) < len(rho) and rho[: len(tau)] == tau
        return True
    return tau == rho


def npls_gen_source(ctx: ExtractionContext, sigma: NodePath, tau: NodePath) -> NodePath:
    """The subproblem row spawned by a stuck exists-forall target.

    The principal of tau entered the branch at the final upper of some
    cut; tau's witness value picks that cut's value-indexed upper.  A
    witnessing existential target needs no subproblem and maps back to
    its own row.
    """
    if not ctx.is_exists_forall(tau):
        return sigma
    principal = ctx.principal(tau)
    entry = _entry_point(ctx, tau, principal)
    if entry == ():
        raise EndFormulaPrincipal(
            f"the principal at {format_path(tau)} persists to the end-sequent"
        )
    cut = entry[:-1]
    return cut + (ctx.witness_value(tau),)


def npls_extract(
    ctx: ExtractionContext, sigma: NodePath, tau: NodePath, rho: NodePath
) -> NodePath:
    """Translate a subproblem solution back into a target of the row.

    The subproblem row kappa adds one formula over the cut's lower
    sequent: the negated instance of the cut formula at kappa's index.
    When the solution rho witnesses exactly that formula, its witness
    value names a universal branch of tau on which the instance fails,
    and the goal above that branch is the next target.  Otherwise rho's
    principal already occurs in the original row and rho itself is the
    next target.  A target that is not an exists-forall rule is already
    a solution of its own row and stays put.
    """
    if not ctx.is_exists_forall(tau):
        return tau
    if not (ctx.is_exists(rho) and ctx.has_true_goal(rho)):
        raise NotASolution(f"node {format_path(rho)} does not solve its row")
    principal = ctx.principal(tau)
    entry = _entry_point(ctx, tau, principal)
    if entry == ():
        raise EndFormulaPrincipal(
            f"the principal at {format_path(tau)} persists to the end-sequent"
        )
    cut = entry[:-1]
    rho_principal = ctx.principal(rho)
    if rho_principal in ctx._seq_counter[cut]:
        return rho
    kappa_index = ctx.witness_value(tau)
    introduced = negated_instance(ctx.derivation.rule(cut).formula, kappa_index)
    if normalize(rho_principal) != normalize(introduced):
        raise NotASolution(
            f"solution at {format_path(rho)} witnesses neither the row's cut "
            "instance nor an inherited formula"
        )
    branch = tau + (ctx.witness_value(rho),)
    return rightmost_goal(ctx, branch)


def npls_rank0_step(ctx: ExtractionContext, sigma: NodePath, tau: NodePath) -> NodePath:
    """Step function for rank-zero rows.

    A rank-zero row is a leaf of the tree, so its targets are all
    witnessing existential rules and every target is already a fixed
    point.  An exists-forall target here would mean the input violates
    its invariants.
    """
    if ctx.is_exists_forall(tau):
        raise UnreachableCase(
            f"exists-forall target {format_path(tau)} on the rank-zero row "
            f"{format_path(sigma)}"
        )
    return tau


def build_npls(ctx: ExtractionContext) -> NplsInstance:
    """The nested search instance of an npls-mode derivation.

    Point ids are post-order indices for rows and targets alike; the
    rank of a row is its own id.  Target sets are precomputed per row
    so the instance's predicates are dictionary lookups.
    """
    if ctx.mode != MODE_NPLS:
        raise ModeError("build_npls needs an npls-mode context")
    kb = ctx.kb
    paths = ctx.path_of
    source_ids = [kb[p] for p in kb if npls_sources(ctx, p)]
    source_set = frozenset(source_ids)
    target_sets: dict[int, frozenset[int]] = {}
    for s in source_ids:
        sp = paths[s]
        target_sets[s] = frozenset(
            kb[t] for t in kb if npls_targets(ctx, sp, t)
        )
    cost_of = [npls_cost(ctx, p) for p in paths]

    def valid_target(s: int, t: int) -> bool:
        return s in target_sets and t in target_sets[s]

    def rel(x: int, s: int, y: int, z: int) -> bool:
        if not (valid_target(s, y) and valid_target(s, z)):
            return False
        return npls_neighbor_rel(ctx, paths[s], paths[y], paths[z])

    d_bits = max((ctx.n_nodes - 1).bit_length(), 1)
    return NplsInstance(
        d_bound=Polynomial.constant(d_bits),
        sources=lambda x, s: s in source_set,
        targets=lambda x, s, t: valid_target(s, t),
        nbr_rel=rel,
        nbr0=lambda x, s, y: kb[npls_rank0_step(ctx, paths[s], paths[y])],
        initial_source=lambda x: kb[()],
        initial_target=lambda x, s: kb[rightmost_goal(ctx, paths[s])],
        cost=lambda x, t: cost_of[t],
        gen_source=lambda x, s, y: kb[npls_gen_source(ctx, paths[s], paths[y])],
        extract=lambda x, s, y, z: kb[npls_extract(ctx, paths[s], paths[y], paths[z])],
        rank=lambda x, s: s,
    )


def extract_witness_npls(ctx: ExtractionContext, max_steps: int | None = None) -> WitnessReport:
    """Run the nested search and read the witness off the solution."""
    inst = build_npls(ctx)
    solution, trace = solve_npls(inst, ctx.x, max_steps)
    return _report(ctx, ctx.path_of[solution], trace)
