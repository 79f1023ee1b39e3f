"""Type inference: constraint generation, unification, predicate filtering.

``infer`` returns the covering set of meta-types of a closed expression; any
type of the expression is a natural instantiation of one of them.  Filtering
with the delay-shape predicates turns the same machinery into certificates:
normalization (the type differs from the pure-delay type), bot-free
Levy-Longo trees (no pure-delay component anywhere), bot-free Bohm trees
(tail-finite types).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import ilp
from .constraints import generate
from .linexpr import IntConstraint, LinExpr
from .syntax import Expr
from .typegraph import (TypeGraph, diff_infty, instantiate, is_guarded,
                        is_infty_free, is_tail_finite, print_type)
from .unifier import (DEFAULT_MAX_BRANCHES, Solution, apply_solution,
                    _merge_esets, unify)

Predicate = Callable[[TypeGraph], bool]

PREDICATES: dict[str, Predicate] = {
    "true": lambda g: True,
    "diff_infty": diff_infty,
    "infty_free": is_infty_free,
    "tail_finite": is_tail_finite,
}


@dataclass(frozen=True)
class Entry:
    """One inferred meta-type with its residual integer constraints."""

    meta: TypeGraph
    constraints: tuple[IntConstraint, ...]

    def witness(self) -> dict[str, int] | None:
        wit = ilp.feasible_nonneg(ilp.IntSystem.of(self.constraints))
        if wit is None:
            return None
        for v in sorted(self.meta.int_variables()):
            wit.setdefault(v, 0)
        return wit

    def display_instance(self) -> TypeGraph | None:
        wit = self.witness()
        return None if wit is None else instantiate(self.meta, wit)

    def __str__(self) -> str:
        return print_type(self.meta)


@dataclass(frozen=True)
class InferenceResult:
    entries: tuple[Entry, ...]

    def __bool__(self) -> bool:
        return bool(self.entries)


def infer(
    predicate: Predicate | str,
    e: Expr,
    *,
    max_branches: int | None = DEFAULT_MAX_BRANCHES,
) -> InferenceResult:
    """Covering meta-types of a closed expression, filtered by the predicate."""
    if isinstance(predicate, str):
        predicate = PREDICATES[predicate]
    t, c = generate(e)
    solutions = unify(c, max_branches=max_branches)
    groups: dict[TypeGraph, list[list[IntConstraint]]] = {}
    for sol in solutions:
        g = apply_solution(sol, t)
        if predicate(g):
            groups.setdefault(g, []).append(list(sol.constraints))
    entries: list[Entry] = []
    for g in groups:
        for eset in _merge_esets(groups[g]):
            entries.append(Entry(g, tuple(eset)))
    entries.sort(key=lambda en: (print_type(en.meta), len(en.constraints)))
    return InferenceResult(tuple(entries))


def typable(e: Expr, *, max_branches: int | None = DEFAULT_MAX_BRANCHES) -> bool:
    return bool(infer("true", e, max_branches=max_branches))


class IllFormedGoal(Exception):
    pass


def check_type(
    e: Expr,
    goal: TypeGraph,
    *,
    max_branches: int | None = DEFAULT_MAX_BRANCHES,
    result: InferenceResult | None = None,
) -> bool:
    """Does the expression have the given concrete type?

    Type variables in the goal are rigid constants.  An inferred entry matches
    when a bisimulation between its meta-type and the goal succeeds with a
    feasible assignment of the integer variables and consistent bindings of
    the entry's flexible type variables.
    """
    if not goal.is_concrete():
        raise IllFormedGoal("goal type has symbolic delay exponents")
    if any(n[0] == "delay" and n[1].const < 0 for n in goal.nodes):
        raise IllFormedGoal("goal type has a negative delay exponent")
    if not is_guarded(goal):
        raise IllFormedGoal("goal type is not guarded")
    if result is None:
        result = infer("true", e, max_branches=max_branches)
    return any(_entry_matches(entry, goal) for entry in result.entries)


def _split_meta(t: TypeGraph, i: int) -> tuple[LinExpr | None, int]:
    """(delay exponent or None for the pure-delay type, core node)."""
    n = t.nodes[i]
    if n[0] != "delay":
        return LinExpr.lit(0), i
    if n[2] == i:
        return None, i  # @^E applied around itself: the type solving X = @X
    return n[1], n[2]


def _split_goal(g: TypeGraph, i: int) -> tuple[int | None, int]:
    n = g.nodes[i]
    if n[0] != "delay":
        return 0, i
    if n[2] == i:
        return None, i
    return n[1].const, n[2]


def _entry_matches(entry: Entry, goal: TypeGraph) -> bool:
    t = entry.meta
    eqs: list[IntConstraint] = []
    bindings: dict[str, tuple] = {}

    def solve(pending: list[tuple[int, int]], visited: frozenset) -> bool:
        if not pending:
            sys = ilp.IntSystem.of(tuple(entry.constraints) + tuple(eqs))
            return ilp.feasible_nonneg(sys) is not None
        ti, gi = pending[0]
        rest = pending[1:]
        if (ti, gi) in visited:
            return solve(rest, visited)
        visited = visited | {(ti, gi)}

        exp_t, core_t = _split_meta(t, ti)
        n_g, core_g = _split_goal(goal, gi)

        if exp_t is None:  # meta side is the pure-delay type
            return n_g is None and solve(rest, visited)

        tnode = t.nodes[core_t]

        if n_g is None:  # goal is the pure-delay type: only a variable absorbs it
            if tnode[0] != "var":
                return False
            return _with_binding(tnode[1], ("inf",), rest, visited, solve)

        gnode = goal.nodes[core_g]

        if tnode[0] == "var":
            name = tnode[1]
            if name in bindings:
                bound = bindings[name]
                if bound == ("inf",):
                    return False
                extra, node = bound
                if node != core_g:
                    return False
                k = n_g - extra
                if k < 0:
                    return False
                return _try_eq(exp_t, k, rest, visited, solve)
            for k in range(n_g, -1, -1):
                if exp_t.is_literal() and exp_t.const != k:
                    continue
                bindings[name] = (n_g - k, core_g)
                eqs.append(IntConstraint.eq(exp_t, LinExpr.lit(k)))
                if solve(rest, visited):
                    return True
                eqs.pop()
                del bindings[name]
            return False

        if tnode[0] == "nat":
            if gnode[0] != "nat":
                return False
            return _try_eq(exp_t, n_g, rest, visited, solve)

        if tnode[0] in ("prod", "arrow"):
            if gnode[0] != tnode[0]:
                return False
            kids = [(tnode[1], gnode[1]), (tnode[2], gnode[2])]
            return _try_eq(exp_t, n_g, kids + rest, visited, solve)

        return False

    def _with_binding(name: str, value: tuple, rest, visited, k) -> bool:
        if name in bindings:
            return bindings[name] == value and k(rest, visited)
        bindings[name] = value
        if k(rest, visited):
            return True
        del bindings[name]
        return False

    def _try_eq(exp: LinExpr, value: int, rest, visited, k) -> bool:
        if exp.is_literal():
            return exp.const == value and k(rest, visited)
        eqs.append(IntConstraint.eq(exp, LinExpr.lit(value)))
        if k(rest, visited):
            return True
        eqs.pop()
        return False

    return solve([(t.root, goal.root)], frozenset())
