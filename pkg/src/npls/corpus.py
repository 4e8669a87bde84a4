"""Built-in inputs: worked derivations, templates, graphs, generators.

The hand-built derivations are small enough to trace by hand and are
pinned down to exact node paths in the tests.  The random generators
grow derivations top down and are valid by construction: every rule
they emit satisfies its side conditions, and any sequent can be closed
through the end-formula, whose designed witness is known from the
start.
"""

from __future__ import annotations

import random

from .derivation import (
    CutRule,
    Derivation,
    DerivationTemplate,
    ExistsForallRule,
    ExistsRule,
    FamilySpec,
    InitialRule,
    NodePath,
    ProofNode,
    TemplateNode,
)
from .nested_graph import CostedDigraph, NestedGraphFamily, generate_family
from .terms import (
    ExistsForall,
    ExistsLit,
    Formula,
    LitFormula,
    Literal,
    add,
    eval_literal,
    eval_term,
    exists_forall_instance,
    exists_instance,
    mul,
    negated_instance,
    num,
    var,
)


def _eq(lhs, rhs) -> Literal:
    return Literal(False, lhs, rhs)


def d1() -> Derivation:
    """One existential rule over an initial leaf.

    Proves that 4 splits into two equal halves; the plain search on it
    solves at the root in a single step.
    """
    end = ExistsLit("y", num(4), _eq(add(var("y"), var("y")), num(4)))
    instance = LitFormula(exists_instance(end, num(2)))
    return Derivation(
        0,
        {
            (): ProofNode((end,), ExistsRule(0, num(2))),
            (0,): ProofNode((end, instance), InitialRule(1)),
        },
    )


def d2() -> Derivation:
    """A cut on a bounded existential, with one useless upper.

    The end-formula asks for a value equal to 1+1 below 3.  The cut
    formula asks for a value below 2 whose successor is 2; its upper at
    index 0 refutes a true negation and closes immediately, the upper
    at index 1 is the one the search lands on.
    """
    end = ExistsLit("y", num(3), _eq(var("y"), add(num(1), num(1))))
    cut = ExistsLit("z", num(2), _eq(add(var("z"), num(1)), num(2)))
    end_inst = LitFormula(exists_instance(end, num(2)))
    cut_inst = LitFormula(exists_instance(cut, num(1)))
    neg0 = negated_instance(cut, 0)
    neg1 = negated_instance(cut, 1)
    return Derivation(
        0,
        {
            (): ProofNode((end,), CutRule(cut)),
            (0,): ProofNode((end, neg0), InitialRule(1)),
            (1,): ProofNode((end, neg1), ExistsRule(0, num(2))),
            (1, 0): ProofNode((end, neg1, end_inst), InitialRule(2)),
            (2,): ProofNode((end, cut), ExistsRule(1, num(1))),
            (2, 0): ProofNode((end, cut, cut_inst), InitialRule(2)),
        },
    )


def d3() -> Derivation:
    """A cut on an exists-forall formula; the smallest nested example.

    The end-formula asks for a value whose square equals its double.
    The cut formula claims some z below 2 fixes every y below 2 under
    multiplication; z=1 does, z=0 does not.  The final upper commits to
    the wrong value first, so the nested search must descend twice:
    once to learn the branch on which z=0 fails, once to solve the row
    that witnesses the end-formula directly.
    """
    end = ExistsLit("y", num(4), _eq(mul(var("y"), var("y")), add(var("y"), var("y"))))
    cut = ExistsForall("z", num(2), "y", num(2), _eq(mul(var("z"), var("y")), var("y")))
    neg0 = negated_instance(cut, 0)
    neg1 = negated_instance(cut, 1)
    neg0_inst = LitFormula(exists_instance(neg0, num(1)))
    end_inst = LitFormula(exists_instance(end, num(2)))
    b00 = LitFormula(exists_forall_instance(cut, num(0), 0))
    b01 = LitFormula(exists_forall_instance(cut, num(0), 1))
    b10 = LitFormula(exists_forall_instance(cut, num(1), 0))
    b11 = LitFormula(exists_forall_instance(cut, num(1), 1))
    return Derivation(
        0,
        {
            (): ProofNode((end,), CutRule(cut)),
            (0,): ProofNode((end, neg0), ExistsRule(1, num(1))),
            (0, 0): ProofNode((end, neg0, neg0_inst), InitialRule(2)),
            (1,): ProofNode((end, neg1), ExistsRule(0, num(2))),
            (1, 0): ProofNode((end, neg1, end_inst), InitialRule(2)),
            (2,): ProofNode((end, cut), ExistsForallRule(1, num(0))),
            (2, 0): ProofNode((end, cut, b00), InitialRule(2)),
            (2, 1): ProofNode((end, cut, b01), ExistsForallRule(1, num(1))),
            (2, 1, 0): ProofNode((end, cut, b01, b10), InitialRule(3)),
            (2, 1, 1): ProofNode((end, cut, b01, b11), InitialRule(3)),
        },
    )


def t_d2() -> DerivationTemplate:
    """A constant template whose expansion at any x is exactly ``d2``.

    The two uppers of the cut differ in shape, so both are spelled out
    explicitly rather than through a family schema.
    """
    end = ExistsLit("y", num(3), _eq(var("y"), add(num(1), num(1))))
    cut = ExistsLit("z", num(2), _eq(add(var("z"), num(1)), num(2)))
    end_inst = LitFormula(exists_instance(end, num(2)))
    cut_inst = LitFormula(exists_instance(cut, num(1)))
    neg0 = negated_instance(cut, 0)
    neg1 = negated_instance(cut, 1)
    return DerivationTemplate(
        TemplateNode(
            (end,),
            CutRule(cut),
            (
                TemplateNode((end, neg0), InitialRule(1)),
                TemplateNode(
                    (end, neg1),
                    ExistsRule(0, num(2)),
                    (TemplateNode((end, neg1, end_inst), InitialRule(2)),),
                ),
                TemplateNode(
                    (end, cut),
                    ExistsRule(1, num(1)),
                    (TemplateNode((end, cut, cut_inst), InitialRule(2)),),
                ),
            ),
        )
    )


def t_d3() -> DerivationTemplate:
    """A genuinely parameterized template with an exists-forall cut.

    The cut bound grows with x, so the number of value-indexed uppers
    does too; they all share one family schema that proves the
    end-formula outright.  The explicit final upper commits to z=0,
    whose y=1 branch fails and continues with z=1.
    """
    end = ExistsLit("y", num(4), _eq(mul(var("y"), var("y")), add(var("y"), var("y"))))
    bound = add(var("x"), num(2))
    cut = ExistsForall("z", bound, "y", num(2), _eq(mul(var("z"), var("y")), var("y")))
    neg_i = ExistsLit("y", num(2), Literal(True, mul(var("i"), var("y")), var("y")))
    end_inst = LitFormula(exists_instance(end, num(2)))
    left = TemplateNode(
        (end, neg_i),
        ExistsRule(0, num(2)),
        (TemplateNode((end, neg_i, end_inst), InitialRule(2)),),
    )
    b01 = LitFormula(_eq(mul(num(0), num(1)), num(1)))
    b00 = LitFormula(_eq(mul(num(0), num(0)), num(0)))
    b10 = LitFormula(_eq(mul(num(1), num(0)), num(0)))
    b11 = LitFormula(_eq(mul(num(1), num(1)), num(1)))
    right = TemplateNode(
        (end, cut),
        ExistsForallRule(1, num(0)),
        (
            TemplateNode((end, cut, b00), InitialRule(2)),
            TemplateNode(
                (end, cut, b01),
                ExistsForallRule(1, num(1)),
                (
                    TemplateNode((end, cut, b01, b10), InitialRule(3)),
                    TemplateNode((end, cut, b01, b11), InitialRule(3)),
                ),
            ),
        ),
    )
    return DerivationTemplate(
        TemplateNode((end,), CutRule(cut), (right,), FamilySpec("i", bound, left))
    )


def g1() -> CostedDigraph:
    """Six nodes, seven edges, one sink; descent from 0 visits 0, 1, 5."""
    return CostedDigraph(
        6,
        ((0, 1), (0, 2), (1, 5), (2, 3), (3, 4), (4, 5), (5, 5)),
        (5, 4, 4, 2, 1, 0),
    )


def ng2() -> NestedGraphFamily:
    """A fixed rank-2 family drawn from the generator."""
    return generate_family(seed=7, max_rank=2, max_width=4)


FIXTURES = {
    "D1": d1,
    "D2": d2,
    "D3": d3,
    "T-D2": t_d2,
    "T-D3": t_d3,
    "G1": g1,
    "NG2": ng2,
}


# Random derivations


def _true_literal_index(sequent: tuple[Formula, ...]) -> int | None:
    for i, f in enumerate(sequent):
        if isinstance(f, LitFormula) and eval_literal(f.lit):
            return i
    return None


class _Grower:
    """Shared machinery of the two derivation generators.

    The end-formula is designed together with a witness value, so any
    sequent extending the end-sequent can be closed in at most two
    nodes; every other growth step preserves validity on its own.
    """

    def __init__(self, rng: random.Random):
        self.rng = rng
        w = rng.randrange(4)
        c = rng.randrange(4)
        b = w + 1 + rng.randrange(3)
        self.witness = w
        self.end = ExistsLit("y", num(b), _eq(add(var("y"), num(c)), num(w + c)))
        self.nodes: dict[NodePath, ProofNode] = {}
        self.count = 0

    def emit(self, path: NodePath, sequent: tuple[Formula, ...], rule) -> None:
        self.nodes[path] = ProofNode(sequent, rule)
        self.count += 1

    def close(self, path: NodePath, sequent: tuple[Formula, ...]) -> None:
        i = _true_literal_index(sequent)
        if i is not None:
            self.emit(path, sequent, InitialRule(i))
            return
        self.emit(path, sequent, ExistsRule(0, num(self.witness)))
        child = sequent + (LitFormula(exists_instance(self.end, num(self.witness))),)
        self.emit(path + (0,), child, InitialRule(len(child) - 1))

    def exists_step(self, path: NodePath, sequent, depth, recurse) -> bool:
        candidates = [
            i
            for i, f in enumerate(sequent)
            if isinstance(f, ExistsLit) and eval_term(f.bound) > 0
        ]
        if not candidates:
            return False
        k = self.rng.choice(candidates)
        f = sequent[k]
        v = self.rng.randrange(eval_term(f.bound))
        self.emit(path, sequent, ExistsRule(k, num(v)))
        recurse(path + (0,), sequent + (LitFormula(exists_instance(f, num(v))),), depth + 1)
        return True

    def cut_step(self, path: NodePath, sequent, depth, formula, recurse) -> None:
        b = eval_term(formula.bound if isinstance(formula, ExistsLit) else formula.bound1)
        self.emit(path, sequent, CutRule(formula))
        for i in range(b):
            recurse(path + (i,), sequent + (negated_instance(formula, i),), depth + 1)
        recurse(path + (b,), sequent + (formula,), depth + 1)


def random_sigma1_derivation(
    seed: int, max_depth: int = 8, max_nodes: int = 400
) -> Derivation:
    """A random derivation in pls mode whose root is a cut.

    Growth chooses among cutting on a fresh bounded existential,
    instantiating some existential in the sequent with an arbitrary
    value below its bound, and closing through the end-formula.  Any
    true literal closes its node immediately.
    """
    rng = random.Random(seed)
    grower = _Grower(rng)

    def fresh_cut() -> ExistsLit:
        b = 1 + rng.randrange(3)
        a = rng.randrange(3)
        t = rng.randrange(5)
        return ExistsLit("z", num(b), _eq(add(var("z"), num(a)), num(t)))

    def build(path: NodePath, sequent, depth: int) -> None:
        if _true_literal_index(sequent) is not None:
            grower.emit(path, sequent, InitialRule(_true_literal_index(sequent)))
            return
        if depth >= max_depth - 2 or max_nodes - grower.count < 16:
            grower.close(path, sequent)
            return
        roll = rng.random()
        if roll < 0.35:
            grower.cut_step(path, sequent, depth, fresh_cut(), build)
            return
        if roll < 0.6 and grower.exists_step(path, sequent, depth, build):
            return
        grower.close(path, sequent)

    grower.cut_step((), (grower.end,), 0, fresh_cut(), build)
    return Derivation(seed % 3, grower.nodes)


def random_sigma2_derivation(
    seed: int, max_depth: int = 10, max_nodes: int = 400
) -> Derivation:
    """A random derivation in npls mode whose root is an exists-forall cut.

    On top of the pls growth moves, a sequent containing an
    exists-forall formula may apply its rule with an arbitrary value
    below the outer bound, branching once per value below the inner
    bound.  Inner bounds stay positive so every such rule has uppers.
    """
    rng = random.Random(seed)
    grower = _Grower(rng)

    def fresh_cut() -> ExistsForall:
        b1 = 1 + rng.randrange(3)
        b2 = 1 + rng.randrange(2)
        z, y = var("z"), var("y")
        body = rng.choice(
            (
                _eq(mul(z, y), y),
                _eq(add(z, y), y),
                _eq(mul(z, y), num(0)),
                Literal(True, add(z, num(rng.randrange(2))), num(rng.randrange(3))),
            )
        )
        return ExistsForall("z", num(b1), "y", num(b2), body)

    def forall_step(path: NodePath, sequent, depth) -> bool:
        candidates = [i for i, f in enumerate(sequent) if isinstance(f, ExistsForall)]
        if not candidates:
            return False
        k = rng.choice(candidates)
        f = sequent[k]
        v = rng.randrange(eval_term(f.bound1))
        grower.emit(path, sequent, ExistsForallRule(k, num(v)))
        for n in range(eval_term(f.bound2)):
            child = sequent + (LitFormula(exists_forall_instance(f, num(v), n)),)
            build(path + (n,), child, depth + 1)
        return True

    def build(path: NodePath, sequent, depth: int) -> None:
        i = _true_literal_index(sequent)
        if i is not None:
            grower.emit(path, sequent, InitialRule(i))
            return
        if depth >= max_depth - 2 or max_nodes - grower.count < 16:
            grower.close(path, sequent)
            return
        roll = rng.random()
        if roll < 0.3:
            grower.cut_step(path, sequent, depth, fresh_cut(), build)
            return
        if roll < 0.55 and forall_step(path, sequent, depth):
            return
        if roll < 0.75 and grower.exists_step(path, sequent, depth, build):
            return
        grower.close(path, sequent)

    grower.cut_step((), (grower.end,), 0, fresh_cut(), build)
    return Derivation(seed % 3, grower.nodes)
