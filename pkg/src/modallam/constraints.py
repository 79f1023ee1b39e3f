"""Constraint typing rules: one rule application per syntax node, bottom-up.

Every fresh delay exponent is a single fresh nonnegative integer variable, so
generated constraint sets are always positive.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .linexpr import IntConstraint, LinExpr
from .meta import Meta, MVar, NAT, marrow, mprod, mdelay
from .syntax import App, Const, Expr, Lam, Var

MetaEq = tuple[Meta, Meta]


@dataclass(frozen=True)
class ConstraintSet:
    """Equalities between finite meta-types plus integer constraints."""

    eqs: tuple[MetaEq, ...] = ()
    ints: tuple[IntConstraint, ...] = ()

    @staticmethod
    def of(eqs, ints) -> "ConstraintSet":
        return ConstraintSet(tuple(dict.fromkeys(eqs)), tuple(dict.fromkeys(ints)))

    def add(self, eqs=(), ints=()) -> "ConstraintSet":
        return ConstraintSet.of(self.eqs + tuple(eqs), self.ints + tuple(ints))

    def union(self, other: "ConstraintSet") -> "ConstraintSet":
        return ConstraintSet.of(self.eqs + other.eqs, self.ints + other.ints)

    def without(self, eq: MetaEq) -> "ConstraintSet":
        return ConstraintSet(tuple(e for e in self.eqs if e != eq), self.ints)


class FreeVariableError(Exception):
    pass


@dataclass
class FreshSupply:
    next_type: int = 1
    next_int: int = 1

    def type_var(self) -> str:
        name = f"X{self.next_type}"
        self.next_type += 1
        return name

    def int_var(self) -> str:
        name = f"N{self.next_int}"
        self.next_int += 1
        return name


def type_of_const(kind: str, x1: str, x2: str) -> Meta:
    a, b = MVar(x1), MVar(x2)
    if kind == "pair":
        return marrow(a, marrow(b, mprod(a, b)))
    if kind == "fst":
        return marrow(mprod(a, b), a)
    if kind == "snd":
        return marrow(mprod(a, b), b)
    raise ValueError(kind)


def generate(
    e: Expr, context: dict[str, str] | None = None, supply: FreshSupply | None = None
) -> tuple[Meta, ConstraintSet]:
    """Produce the meta-type and constraint set of an expression.

    ``context`` maps free names to type-variable names ('empty for closed
    expressions); anything not listed is rejected.
    """
    ctx = dict(context or {})
    supply = supply or FreshSupply()
    eqs: list[MetaEq] = []
    ints: list[IntConstraint] = []

    def fresh_exp() -> LinExpr:
        n = supply.int_var()
        ints.append(IntConstraint.ge(LinExpr.var(n), LinExpr.lit(0)))
        return LinExpr.var(n)

    def go(e: Expr, ctx: dict[str, str]) -> Meta:
        if isinstance(e, Var):
            if e.name not in ctx:
                raise FreeVariableError(f"free variable {e.name}")
            return mdelay(fresh_exp(), MVar(ctx[e.name]))
        if isinstance(e, Const):
            if e.kind == "zero":
                return mdelay(fresh_exp(), NAT)
            if e.kind == "succ":
                return mdelay(fresh_exp(), marrow(NAT, NAT))
            if e.kind == "natrec":
                x = MVar(supply.type_var())
                scheme = marrow(x, marrow(marrow(NAT, marrow(x, x)), marrow(NAT, x)))
                return mdelay(fresh_exp(), scheme)
            x1, x2 = supply.type_var(), supply.type_var()
            return mdelay(fresh_exp(), type_of_const(e.kind, x1, x2))
        if isinstance(e, Lam):
            x = supply.type_var()
            t_body = go(e.body, {**ctx, e.binder: x})
            n = fresh_exp()
            x1, x2 = MVar(supply.type_var()), MVar(supply.type_var())
            eqs.append((MVar(x), mdelay(n, x1)))
            eqs.append((t_body, mdelay(n, x2)))
            return mdelay(n, marrow(x1, x2))
        assert isinstance(e, App)
        t1 = go(e.fn, ctx)
        t2 = go(e.arg, ctx)
        n = fresh_exp()
        x1, x2 = MVar(supply.type_var()), MVar(supply.type_var())
        eqs.append((mdelay(n, marrow(x1, x2)), t1))
        eqs.append((mdelay(n, x1), t2))
        return mdelay(n, x2)

    t = go(e, ctx)
    return t, ConstraintSet.of(eqs, ints)
