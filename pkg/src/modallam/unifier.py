"""Branching unification over recursive meta-types.

The solver processes one offending equation at a time through a fixed case
ladder; a visited set of oriented equations guarantees termination.  Equality
constraints between delayed variables split the search: either one side
absorbs the delay difference or the other does.  A branch whose integer
constraints already entail one side is not split (the sibling would be
infeasible), which keeps the output close to the covering solutions.

A solved form is a substitutional, simple system: every equation is
``X =? T`` with pairwise distinct left-hand variables, and every reflexive
delayed-variable equation ``X =? @^E X`` carries its strictness witness
``0 < E``.  Its unique regular-tree solution plus the guardedness constraints
of its cycles make one candidate answer, kept iff the integer side is
feasible over the naturals.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import ilp
from .constraints import ConstraintSet, MetaEq
from .linexpr import IntConstraint, LinExpr
from .meta import (Meta, MDelay, MVar, equal_cons, is_nat_or_op, mdelay, size,
                   split_delay, subterms)
from .typegraph import (GraphBuilder, TypeGraph, graph_of_meta,
                        guard_constraints, canonicalize)

DEFAULT_MAX_BRANCHES = 4096


class BranchCapExceeded(Exception):
    pass


@dataclass(frozen=True)
class Solution:
    """A type substitution with its residual integer constraint set."""

    tau: tuple[tuple[str, TypeGraph], ...]
    constraints: tuple[IntConstraint, ...]

    def tau_dict(self) -> dict[str, TypeGraph]:
        return dict(self.tau)

    def key(self):
        return (self.tau, frozenset(self.constraints))


@dataclass
class _Ctx:
    max_branches: int | None
    branch_events: int = 0
    calls: int = 0
    measure_trace: list | None = None

    def branched(self) -> None:
        self.branch_events += 1
        if self.max_branches is not None and self.branch_events > self.max_branches:
            raise BranchCapExceeded(
                f"unification exceeded {self.max_branches} branch events"
            )


def _zero() -> LinExpr:
    return LinExpr.lit(0)


def _strictness(exp: LinExpr) -> IntConstraint:
    return IntConstraint.lt(_zero(), exp)


def _normalize(c: ConstraintSet) -> ConstraintSet | None:
    """Dedupe, drop reflexive equations and ground-true integer constraints;
    None when a ground integer constraint is false."""
    eqs = tuple(dict.fromkeys(e for e in c.eqs if e[0] != e[1]))
    ints = []
    for k in dict.fromkeys(c.ints):
        truth = k.ground_value()
        if truth is False:
            return None
        if truth is None:
            ints.append(k)
    return ConstraintSet(eqs, tuple(ints))


def _offending(eq: MetaEq, c: ConstraintSet) -> bool:
    t, s = eq
    if not isinstance(t, MVar):
        return True
    if sum(1 for other, _ in c.eqs if other == t) > 1:
        return True
    if isinstance(s, MDelay) and s.body == t:
        return _strictness(s.exp) not in c.ints
    return False


def _size(c: ConstraintSet) -> int:
    return sum(size(t) for t, _ in c.eqs)


def unify(
    c: ConstraintSet,
    visited: frozenset[MetaEq] = frozenset(),
    *,
    max_branches: int | None = DEFAULT_MAX_BRANCHES,
    measure_trace: list | None = None,
) -> list[Solution]:
    """All covering solutions of the constraint set (empty list: no unifier).

    ``measure_trace``, when given, receives (parent, child) measure pairs for
    every recursive call so tests can assert the lexicographic descent.
    """
    ctx = _Ctx(max_branches=max_branches, measure_trace=measure_trace)
    sub_terms: set[Meta] = set()
    for t, s in c.eqs:
        sub_terms |= subterms(t) | subterms(s)
    total = sum(size(t) for t in sub_terms)
    subc_size = len(sub_terms) * total  # size of SubC(C0): all pairs, lhs sizes
    v0_size = sum(size(t) for t, _ in visited)

    def measure(cs: ConstraintSet, v: frozenset[MetaEq]):
        return (subc_size + v0_size - sum(size(t) for t, _ in v), _size(cs))

    sols = _unify(c, visited, ctx, measure, None)
    out: list[Solution] = []
    seen = set()
    for s in sols:
        if s.key() not in seen:
            seen.add(s.key())
            out.append(s)
    return merge_solutions(out)


def _unify(c: ConstraintSet, v: frozenset[MetaEq], ctx: _Ctx, measure, parent) -> list[Solution]:
    norm = _normalize(c)
    if norm is None:
        return []
    c = norm
    ctx.calls += 1
    m = measure(c, v)
    if ctx.measure_trace is not None and parent is not None:
        ctx.measure_trace.append((parent, m))
    if ilp.feasible_nonneg(ilp.IntSystem.of(c.ints)) is None:
        return []

    offenders = [eq for eq in c.eqs if _offending(eq, c)]
    if not offenders:
        return _solved(c)

    eq = next((e for e in offenders if e not in v), offenders[0])
    t, s = eq
    c1 = c.without(eq)
    v1 = v | {eq}
    in_v = eq in v

    def rec(cs: ConstraintSet) -> list[Solution]:
        return _unify(cs, v1, ctx, measure, m)

    # duplicate variable equations: join right-hand sides
    if isinstance(t, MVar) and any(other == t for other, _ in c1.eqs):
        if in_v:
            return rec(c1)
        s2 = next(rhs for other, rhs in c1.eqs if other == t)
        return rec(c1.add(eqs=[(s, s2)]))

    # congruence on matching bare constructors (Nat =? Nat already dropped)
    if equal_cons(t, s):
        return rec(c1.add(eqs=[(t.left, s.left), (t.right, s.right)]))

    # variable against delayed variable: the reflexive case splits between a
    # collapsed delay and the type solving X = @^E X
    if (
        isinstance(t, MVar)
        and isinstance(s, MDelay)
        and isinstance(s.body, MVar)
        and not in_v
    ):
        if s.body == t:
            branches = []
            if ilp.feasible_nonneg(
                ilp.IntSystem.of(c1.ints + (IntConstraint.eq(s.exp, _zero()),))
            ):
                branches.append(c1.add(ints=[IntConstraint.eq(s.exp, _zero())]))
            if ilp.feasible_nonneg(ilp.IntSystem.of(c1.ints + (_strictness(s.exp),))):
                branches.append(c1.add(eqs=[eq], ints=[_strictness(s.exp)]))
            if len(branches) > 1:
                ctx.branched()
            out = []
            for b in branches:
                out.extend(rec(b))
            return out
        # distinct variables: the equation is already in solved form
        return rec(c1.add(eqs=[eq], ints=[IntConstraint.ge(s.exp, _zero())]))

    tdel = isinstance(t, MDelay)
    if tdel and isinstance(t.body, MVar):
        e1, x1 = t.exp, t.body
        e2, core2 = split_delay(s)
        if isinstance(core2, MVar):
            return _delay_var_pair(c1, e1, x1, e2, core2, ctx, rec)
        if is_nat_or_op(core2):
            return rec(c1.add(
                eqs=[(x1, mdelay(e2 - e1, core2))],
                ints=[IntConstraint.ge(e2, e1), IntConstraint.ge(e1, _zero())],
            ))

    if tdel and isinstance(s, MDelay) and equal_cons(t.body, s.body):
        return rec(c1.add(eqs=[(t.body, s.body)], ints=[IntConstraint.eq(t.exp, s.exp)]))

    if tdel and not isinstance(s, MDelay) and equal_cons(t.body, s):
        return rec(c1.add(eqs=[(t.body, s)], ints=[IntConstraint.eq(t.exp, _zero())]))

    if not in_v:
        return rec(c1.add(eqs=[(s, t)]))

    return []


def _delay_var_pair(c1, e1, x1, e2, x2, ctx, rec) -> list[Solution]:
    """@^E1 X1 =? @^E2 X2: one side absorbs the difference of the exponents.

    When the integer constraints already decide the comparison, only the
    consistent orientation is pursued.
    """
    ints = list(c1.ints)

    def branch_left(strict: bool) -> ConstraintSet:
        cmp = IntConstraint.lt(e1, e2) if strict else IntConstraint.ge(e2, e1)
        return c1.add(eqs=[(x1, mdelay(e2 - e1, x2))],
                      ints=[cmp, IntConstraint.ge(e1, _zero())])

    def branch_right(strict: bool) -> ConstraintSet:
        cmp = IntConstraint.lt(e2, e1) if strict else IntConstraint.ge(e1, e2)
        return c1.add(eqs=[(x2, mdelay(e1 - e2, x1))],
                      ints=[cmp, IntConstraint.ge(e2, _zero())])

    if ilp.entails(ints, IntConstraint.ge(e2, e1)):
        return rec(branch_left(strict=False))
    if ilp.entails(ints, IntConstraint.lt(e2, e1)):
        return rec(branch_right(strict=True))
    if ilp.entails(ints, IntConstraint.ge(e1, e2)):
        return rec(branch_right(strict=False))
    if ilp.entails(ints, IntConstraint.lt(e1, e2)):
        return rec(branch_left(strict=True))
    ctx.branched()
    return rec(branch_left(strict=False)) + rec(branch_right(strict=True))


# ---------------------------------------------------------------------------
# solved systems


def _solved(c: ConstraintSet) -> list[Solution]:
    tau = solve_recursive_system(list(c.eqs))
    guards = guard_constraints(tau)
    e = tuple(dict.fromkeys(tuple(c.ints) + tuple(guards)))
    if ilp.feasible_nonneg(ilp.IntSystem.of(e)) is None:
        return []
    tau_items = tuple(sorted(tau.items(), key=lambda kv: kv[0]))
    return [Solution(tau_items, e)]


def solve_recursive_system(eqs: list[MetaEq]) -> dict[str, TypeGraph]:
    """Unique regular-tree solution of a substitutional equation system.

    Left-hand variables become graph roots; right-hand occurrences of system
    variables become edges (cycles included).  Variables not on any left-hand
    side stay free.
    """
    names = [t.name for t, _ in eqs]
    assert len(set(names)) == len(names), "system is not substitutional"

    # variable-only cycles (X =? Y, Y =? X) collapse onto one representative
    rhs = {t.name: s for t, s in eqs}
    rep: dict[str, str] = {}
    for name in names:
        chain = [name]
        cur = name
        while isinstance(rhs.get(cur), MVar):
            nxt = rhs[cur].name
            if nxt in chain:
                cycle = chain[chain.index(nxt):]
                target = min(cycle)
                for member in cycle:
                    rep[member] = target
                break
            chain.append(nxt)
            cur = nxt

    b = GraphBuilder()
    slots = {name: b.reserve() for name in names}
    for name in names:
        if name in rep:
            r = rep[name]
            b.patch_alias(slots[name], b.add(("var", r)))
        else:
            root = b.from_meta(rhs[name], slots)
            b.patch_alias(slots[name], root)
    out: dict[str, TypeGraph] = {}
    for name in names:
        out[name] = canonicalize(list(b.nodes), slots[name])
    return out


def apply_solution(sol: Solution, t: Meta) -> TypeGraph:
    return graph_of_meta(t, sol.tau_dict())


# ---------------------------------------------------------------------------
# covering-solution merge

def merge_solutions(sols: list[Solution]) -> list[Solution]:
    """Collapse solutions with identical substitutions.

    Two answer regions for the same substitution merge when their union is
    again expressible as one conjunctive constraint set; one subsumed by the
    other is dropped.  Either step preserves the set of instantiations, so
    soundness and completeness are unaffected; the output just stops
    duplicating families that a branch split apart.
    """
    groups: dict = {}
    for s in sols:
        groups.setdefault(s.tau, []).append(list(s.constraints))

    out: list[Solution] = []
    for tau, esets in groups.items():
        esets = _merge_esets(esets)
        for e in esets:
            out.append(Solution(tau, tuple(e)))
    return out


def _merge_esets(esets: list[list[IntConstraint]]) -> list[list[IntConstraint]]:
    changed = True
    while changed:
        changed = False
        # drop subsumed regions
        keep: list[list[IntConstraint]] = []
        for i, ei in enumerate(esets):
            dominated = False
            for j, ej in enumerate(esets):
                if i == j:
                    continue
                if ilp.entails_all(ei, ej) and not (
                    j > i and ilp.entails_all(ej, ei)
                ):
                    dominated = True
                    break
            if not dominated:
                keep.append(ei)
        if len(keep) != len(esets):
            esets = keep
            changed = True
            continue
        for i in range(len(esets)):
            for j in range(i + 1, len(esets)):
                merged = _or_merge(esets[i], esets[j])
                if merged is not None:
                    esets = [e for k, e in enumerate(esets) if k not in (i, j)]
                    esets.append(merged)
                    changed = True
                    break
            if changed:
                break
    return esets


def _or_merge(e1: list[IntConstraint], e2: list[IntConstraint]) -> list[IntConstraint] | None:
    """Constraint set whose solutions are exactly sols(e1) | sols(e2), if one
    exists among the common consequences; None otherwise."""
    candidates = list(dict.fromkeys(e1 + e2))
    common = [c for c in candidates if ilp.entails_all(e1, [c]) and ilp.entails_all(e2, [c])]
    r1 = [c for c in e1 if not ilp.entails_all(common, [c])]
    r2 = [c for c in e2 if not ilp.entails_all(common, [c])]
    if not r1 and not r2:
        return common
    for residual, other in ((r1, r2), (r2, r1)):
        for c in residual:
            for neg in c.negation_cases():
                if not ilp.entails_all(common + [neg], other):
                    return None
    return common
