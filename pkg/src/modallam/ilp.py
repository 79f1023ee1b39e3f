"""Exact feasibility over non-negative integers for small linear systems.

Pipeline: propagate unit-coefficient equalities (integer-exact), then
Fourier-Motzkin elimination in integer arithmetic for the rational decision,
then an integer witness by back-substitution through the recorded bounds.
Coefficients here stay tiny (unification emits sums and differences of
variables), so eliminations rarely create the coefficient gaps that would
force the bounded search fallback.

``feasible_nonneg`` additionally minimizes the witness: smallest component
sum first, then lexicographic order by variable name.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Mapping, Sequence

from .linexpr import IntConstraint, LinExpr

_VALUE_CAP = 64  # fallback search bound; never reached by pipeline systems


@dataclass(frozen=True)
class IntSystem:
    constraints: tuple[IntConstraint, ...]

    @staticmethod
    def of(constraints: Iterable[IntConstraint]) -> "IntSystem":
        return IntSystem(tuple(dict.fromkeys(constraints)))

    def variables(self) -> list[str]:
        out: set[str] = set()
        for c in self.constraints:
            out |= c.variables()
        return sorted(out)


def check(theta: Mapping[str, int], sys: IntSystem) -> bool:
    """Evaluate every constraint under a total natural assignment."""
    for v in sys.variables():
        if v not in theta:
            raise KeyError(f"unassigned variable {v}")
    if any(n < 0 for n in theta.values()):
        return False
    return all(c.holds(theta) for c in sys.constraints)


# ---------------------------------------------------------------------------
# rows: dict coeffs + const, meaning  sum(c*v) + const >= 0


Row = tuple[tuple[tuple[str, int], ...], int]


def _norm_row(coeffs: dict[str, int], const: int) -> Row | None:
    coeffs = {v: c for v, c in coeffs.items() if c != 0}
    if not coeffs:
        return None if const >= 0 else INFEASIBLE_ROW
    g = 0
    for c in coeffs.values():
        g = gcd(g, abs(c))
    if g > 1:
        coeffs = {v: c // g for v, c in coeffs.items()}
        const = const // g  # floor division: safe tightening for >= 0 rows
    return tuple(sorted(coeffs.items())), const


INFEASIBLE_ROW: Row = ((), -1)


class _Infeasible(Exception):
    pass


def _to_rows(constraints: Sequence[IntConstraint]) -> tuple[list[Row], list[tuple[dict, int]]]:
    """(inequality rows, equality rows); raises _Infeasible on ground falsity."""
    rows: list[Row] = []
    eqs: list[tuple[dict, int]] = []

    def add(coeffs: dict[str, int], const: int) -> None:
        r = _norm_row(dict(coeffs), const)
        if r is INFEASIBLE_ROW:
            raise _Infeasible
        if r is not None:
            rows.append(r)

    for c in constraints:
        coeffs = dict(c.expr.terms)
        const = c.expr.const
        if not coeffs:
            ok = const == 0 if c.kind == "eq" else const >= 0 if c.kind == "ge" else const < 0
            if not ok:
                raise _Infeasible
            continue
        if c.kind == "ge":
            add(coeffs, const)
        elif c.kind == "lt":  # e < 0  <=>  -e - 1 >= 0
            add({v: -k for v, k in coeffs.items()}, -const - 1)
        else:
            eqs.append((coeffs, const))
    return rows, eqs


def _propagate_equalities(
    rows: list[Row], eqs: list[tuple[dict, int]], variables: set[str]
) -> tuple[list[Row], list[tuple[str, dict, int]]]:
    """Substitute away unit-coefficient equalities; returns (rows, log).

    A log item (v, coeffs, const) means v = sum(coeffs)+const.  Equalities
    without a unit coefficient become inequality pairs after a gcd check.
    """
    log: list[tuple[str, dict, int]] = []
    pending = [(dict(c), k) for c, k in eqs]
    while pending:
        coeffs, const = pending.pop(0)
        coeffs = {v: c for v, c in coeffs.items() if c != 0}
        if not coeffs:
            if const != 0:
                raise _Infeasible
            continue
        g = 0
        for c in coeffs.values():
            g = gcd(g, abs(c))
        if const % g:
            raise _Infeasible
        unit = next((v for v, c in coeffs.items() if abs(c) == 1), None)
        if unit is None:
            r1 = _norm_row(dict(coeffs), const)
            r2 = _norm_row({v: -c for v, c in coeffs.items()}, -const)
            for r in (r1, r2):
                if r is INFEASIBLE_ROW:
                    raise _Infeasible
                if r is not None:
                    rows.append(r)
            continue
        s = coeffs[unit]
        # unit*s + rest + const = 0  =>  unit = -(rest + const)/s
        expr = {v: -c * s for v, c in coeffs.items() if v != unit}
        k0 = -const * s
        log.append((unit, expr, k0))
        variables.discard(unit)
        rows = _subst_rows(rows, unit, expr, k0)
        pending = [_subst_eq(e, unit, expr, k0) for e in pending]
        if unit not in expr:
            rows.append(_nonneg_row(expr, k0))
    return rows, log


def _nonneg_row(expr: dict, k0: int) -> Row:
    r = _norm_row(dict(expr), k0)
    if r is INFEASIBLE_ROW:
        raise _Infeasible
    return r if r is not None else ((), 0)


def _subst_rows(rows: list[Row], var: str, expr: dict, k0: int) -> list[Row]:
    out: list[Row] = []
    for coeffs_t, const in rows:
        coeffs = dict(coeffs_t)
        a = coeffs.pop(var, 0)
        if a:
            for v, c in expr.items():
                coeffs[v] = coeffs.get(v, 0) + a * c
            const += a * k0
        r = _norm_row(coeffs, const)
        if r is INFEASIBLE_ROW:
            raise _Infeasible
        if r is not None:
            out.append(r)
    return list(dict.fromkeys(out))


def _subst_eq(e: tuple[dict, int], var: str, expr: dict, k0: int):
    coeffs, const = dict(e[0]), e[1]
    a = coeffs.pop(var, 0)
    if a:
        for v, c in expr.items():
            coeffs[v] = coeffs.get(v, 0) + a * c
        const += a * k0
    return coeffs, const


def _eliminate(rows: list[Row], variables: list[str]) -> list[tuple[str, list[Row]]] | None:
    """FM elimination; returns per-variable bound rows for back-substitution,
    or None when the rational relaxation is already infeasible."""
    rows = list(dict.fromkeys(rows))
    order: list[tuple[str, list[Row]]] = []
    remaining = set(variables)
    while remaining:
        # greedy: eliminate the variable with the fewest bound products
        def cost(v: str) -> int:
            lo = sum(1 for cs, _ in rows if dict(cs).get(v, 0) > 0)
            hi = sum(1 for cs, _ in rows if dict(cs).get(v, 0) < 0)
            return lo * hi - lo - hi

        var = min(sorted(remaining), key=cost)
        remaining.discard(var)
        lower: list[Row] = []
        upper: list[Row] = []
        rest: list[Row] = []
        for coeffs_t, const in rows:
            a = dict(coeffs_t).get(var, 0)
            if a > 0:
                lower.append((coeffs_t, const))
            elif a < 0:
                upper.append((coeffs_t, const))
            else:
                rest.append((coeffs_t, const))
        order.append((var, lower + upper))
        for lc, lconst in lower:
            a = dict(lc)[var]
            for uc, uconst in upper:
                b = -dict(uc)[var]
                combined: dict[str, int] = {}
                for v, c in lc:
                    if v != var:
                        combined[v] = combined.get(v, 0) + b * c
                for v, c in uc:
                    if v != var:
                        combined[v] = combined.get(v, 0) + a * c
                r = _norm_row(combined, b * lconst + a * uconst)
                if r is INFEASIBLE_ROW:
                    return None
                if r is not None:
                    rest.append(r)
        rows = list(dict.fromkeys(rest))
        if len(rows) > 2000:
            rows = list(dict.fromkeys(rows))
    for _, const in rows:
        if const < 0:
            return None
    return order


def _back_substitute(order: list[tuple[str, list[Row]]]) -> dict[str, int] | None:
    """Integer point from recorded bounds, innermost variable first."""
    theta: dict[str, int] = {}
    for var, bounds in reversed(order):
        lo, hi = 0, None
        for coeffs_t, const in bounds:
            coeffs = dict(coeffs_t)
            a = coeffs.pop(var)
            rest = const + sum(c * theta[v] for v, c in coeffs.items())
            if a > 0:  # a*var + rest >= 0  =>  var >= ceil(-rest/a)
                lo = max(lo, -(rest // a))
            else:  # var <= floor(rest/(-a))
                hi_c = rest // (-a)
                hi = hi_c if hi is None else min(hi, hi_c)
        if hi is not None and lo > hi:
            return None  # integer gap; caller falls back to search
        theta[var] = lo
    return theta


def _solve(constraints: Sequence[IntConstraint], depth: int = 0) -> dict[str, int] | None:
    """Some natural witness, or None.  Exact: integer gaps left by the
    elimination are resolved by branching on the gapped variable."""
    all_vars: set[str] = set()
    for c in constraints:
        all_vars |= c.variables()
    try:
        rows, eqs = _to_rows(constraints)
        for v in sorted(all_vars):
            rows.append((((v, 1),), 0))
        remaining = set(all_vars)
        rows, log = _propagate_equalities(rows, eqs, remaining)
        order = _eliminate(rows, sorted(remaining))
    except _Infeasible:
        return None
    if order is None:
        return None
    theta = _back_substitute(order)
    if theta is not None:
        for var, expr, k0 in reversed(log):
            theta[var] = k0 + sum(c * theta[v] for v, c in expr.items())
        for v in all_vars:
            theta.setdefault(v, 0)
        if all(v >= 0 for v in theta.values()) and all(c.holds(theta) for c in constraints):
            return theta
    gap = _first_gap(order)
    if gap is not None and depth < 32:
        var, split = gap
        low = list(constraints) + [
            IntConstraint.ge(LinExpr.lit(split - 1), LinExpr.var(var))
        ]
        high = list(constraints) + [IntConstraint.ge(LinExpr.var(var), LinExpr.lit(split))]
        return _solve(low, depth + 1) or _solve(high, depth + 1)
    return _fallback_search(
        list(constraints), sorted({v for c in constraints for v in c.variables()})
    )


def _first_gap(order: list[tuple[str, list[Row]]]) -> tuple[str, int] | None:
    """Variable whose bounds had a fractional-only window, with a split point."""
    theta: dict[str, int] = {}
    for var, bounds in reversed(order):
        lo, hi = 0, None
        for coeffs_t, const in bounds:
            coeffs = dict(coeffs_t)
            a = coeffs.pop(var)
            if any(v not in theta for v in coeffs):
                continue
            rest = const + sum(c * theta[v] for v, c in coeffs.items())
            if a > 0:
                lo = max(lo, -(rest // a))
            else:
                hi_c = rest // (-a)
                hi = hi_c if hi is None else min(hi, hi_c)
        if hi is not None and lo > hi:
            return var, lo
        theta[var] = lo
    return None


def _fallback_search(constraints: list[IntConstraint], variables: list[str]) -> dict[str, int] | None:
    def dfs(idx: int, cs: list[IntConstraint], acc: dict[str, int]) -> dict[str, int] | None:
        if idx == len(variables):
            return dict(acc) if all(c.ground_value() for c in cs) else None
        name = variables[idx]
        for value in range(0, _VALUE_CAP + 1):
            sub = _substitute_all(cs, name, value)
            if sub is None:
                continue
            acc[name] = value
            found = dfs(idx + 1, sub, acc)
            if found is not None:
                return found
            del acc[name]
        return None

    return dfs(0, constraints, {})


def _substitute_all(
    constraints: list[IntConstraint], name: str, value: int
) -> list[IntConstraint] | None:
    out: list[IntConstraint] = []
    for c in constraints:
        if name not in c.expr.variables():
            out.append(c)
            continue
        sub = IntConstraint(c.kind, c.expr.substitute({name: value}))
        truth = sub.ground_value()
        if truth is False:
            return None
        if truth is None:
            out.append(sub)
    return out


# ---------------------------------------------------------------------------
# public interface


_feas_cache: dict[tuple[IntConstraint, ...], bool] = {}


def is_feasible(constraints: Iterable[IntConstraint]) -> bool:
    key = tuple(dict.fromkeys(constraints))
    hit = _feas_cache.get(key)
    if hit is None:
        hit = _solve(key) is not None
        _feas_cache[key] = hit
    return hit


def feasible_nonneg(sys: IntSystem) -> dict[str, int] | None:
    """Minimal-sum, then lexicographically smallest, natural witness."""
    base = list(sys.constraints)
    first = _solve(base)
    if first is None:
        return None
    variables = sys.variables()
    if not variables:
        return {}

    def sum_expr() -> LinExpr:
        return LinExpr.of(0, {v: 1 for v in variables})

    best = sum(first.values())
    # tighten the component sum
    lo = 0
    while lo < best:
        capped = base + [IntConstraint.ge(LinExpr.lit(lo), sum_expr())]
        if _solve(capped) is not None:
            best = lo
            break
        lo += 1
    theta: dict[str, int] = {}
    fixed: list[IntConstraint] = [IntConstraint.eq(sum_expr(), LinExpr.lit(best))]
    for v in variables:
        value = 0
        while True:
            trial = base + fixed + [IntConstraint.eq(LinExpr.var(v), LinExpr.lit(value))]
            if _solve(trial) is not None:
                theta[v] = value
                fixed.append(IntConstraint.eq(LinExpr.var(v), LinExpr.lit(value)))
                break
            value += 1
            if value > _VALUE_CAP * max(1, len(variables)):
                return first  # should not happen; keep a valid witness
    return theta


def entails(constraints: Iterable[IntConstraint], goal: IntConstraint) -> bool:
    """True iff every natural assignment satisfying ``constraints`` satisfies ``goal``."""
    base = list(constraints)
    return all(not is_feasible(base + [neg]) for neg in goal.negation_cases())


def entails_all(constraints: Iterable[IntConstraint], goals: Iterable[IntConstraint]) -> bool:
    base = list(constraints)
    return all(entails(base, g) for g in goals)


def equivalent(a: Iterable[IntConstraint], b: Iterable[IntConstraint]) -> bool:
    """Mutual entailment over natural assignments."""
    a, b = list(a), list(b)
    return entails_all(a, b) and entails_all(b, a)
