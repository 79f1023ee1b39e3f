"""Linear integer expressions and constraints over integer variables.

Delay exponents in meta-types are linear expressions such as ``N2 - (N1 + N3)``;
the unifier emits equality/inequality constraints between them which are later
decided by the ILP module.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping


@dataclass(frozen=True)
class LinExpr:
    """Integer constant plus a map from variable name to nonzero coefficient.

    Canonical: ``terms`` is sorted by variable name and carries no zero
    coefficients, so structural equality coincides with semantic equality.
    """

    const: int = 0
    terms: tuple[tuple[str, int], ...] = ()

    @staticmethod
    def of(const: int = 0, coeffs: Mapping[str, int] | None = None) -> "LinExpr":
        items = {}
        for name, c in (coeffs or {}).items():
            if c != 0:
                items[name] = c
        return LinExpr(const, tuple(sorted(items.items())))

    @staticmethod
    def var(name: str) -> "LinExpr":
        return LinExpr(0, ((name, 1),))

    @staticmethod
    def lit(n: int) -> "LinExpr":
        return LinExpr(n, ())

    def coeffs(self) -> dict[str, int]:
        return dict(self.terms)

    def variables(self) -> set[str]:
        return {name for name, _ in self.terms}

    def is_literal(self) -> bool:
        return not self.terms

    def __add__(self, other: "LinExpr") -> "LinExpr":
        cs = self.coeffs()
        for name, c in other.terms:
            cs[name] = cs.get(name, 0) + c
        return LinExpr.of(self.const + other.const, cs)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + other.scale(-1)

    def __neg__(self) -> "LinExpr":
        return self.scale(-1)

    def scale(self, k: int) -> "LinExpr":
        return LinExpr.of(self.const * k, {name: c * k for name, c in self.terms})

    def evaluate(self, theta: Mapping[str, int]) -> int:
        total = self.const
        for name, c in self.terms:
            if name not in theta:
                raise KeyError(f"unassigned variable {name}")
            total += c * theta[name]
        return total

    def substitute(self, partial: Mapping[str, int]) -> "LinExpr":
        const = self.const
        rest: dict[str, int] = {}
        for name, c in self.terms:
            if name in partial:
                const += c * partial[name]
            else:
                rest[name] = c
        return LinExpr.of(const, rest)

    def __str__(self) -> str:
        # Rendered in the @^E surface grammar: no coefficient literals, so a
        # coefficient k is written as k repeated summands; leading negation
        # becomes "0 - x".
        pos: list[str] = []
        neg: list[str] = []
        for name, c in self.terms:
            (pos if c > 0 else neg).extend([name] * abs(c))
        if self.const > 0:
            pos.append(str(self.const))
        elif self.const < 0:
            neg.append(str(-self.const))
        out = "+".join(pos) if pos else ("0" if not neg else "0")
        for item in neg:
            out += f"-{item}"
        return out


ZERO = LinExpr.lit(0)
ONE = LinExpr.lit(1)


@dataclass(frozen=True)
class IntConstraint:
    """One of ``E = E'``, ``E >= E'`` or ``E < E'``.

    Internally normalized to ``expr (=,>=,<) 0`` with ``expr = left - right``;
    equalities additionally flip sign so the leading term is positive, making
    structural equality a canonical-form check.
    """

    kind: str  # "eq" | "ge" | "lt"
    expr: LinExpr

    @staticmethod
    def make(kind: str, left: LinExpr, right: LinExpr) -> "IntConstraint":
        if kind not in ("eq", "ge", "lt"):
            raise ValueError(f"bad constraint kind {kind!r}")
        expr = left - right
        if kind == "eq":
            lead = expr.terms[0][1] if expr.terms else expr.const
            if lead < 0:
                expr = -expr
        return IntConstraint(kind, expr)

    @staticmethod
    def eq(left: LinExpr, right: LinExpr) -> "IntConstraint":
        return IntConstraint.make("eq", left, right)

    @staticmethod
    def ge(left: LinExpr, right: LinExpr) -> "IntConstraint":
        return IntConstraint.make("ge", left, right)

    @staticmethod
    def lt(left: LinExpr, right: LinExpr) -> "IntConstraint":
        return IntConstraint.make("lt", left, right)

    def variables(self) -> set[str]:
        return self.expr.variables()

    def holds(self, theta: Mapping[str, int]) -> bool:
        v = self.expr.evaluate(theta)
        if self.kind == "eq":
            return v == 0
        if self.kind == "ge":
            return v >= 0
        return v < 0

    def ground_value(self) -> bool | None:
        """Truth value if the constraint mentions no variables, else None."""
        if self.expr.terms:
            return None
        return self.holds({})

    def negation_cases(self) -> list["IntConstraint"]:
        """Constraints whose disjunction is the negation of this one."""
        if self.kind == "ge":  # not(e >= 0)  <=>  e < 0
            return [IntConstraint("lt", self.expr)]
        if self.kind == "lt":  # not(e < 0)   <=>  e >= 0
            return [IntConstraint("ge", self.expr)]
        # not(e = 0)  <=>  e < 0  or  -e < 0
        return [IntConstraint("lt", self.expr), IntConstraint("lt", -self.expr)]

    def __str__(self) -> str:
        op = {"eq": "=", "ge": ">=", "lt": "<"}[self.kind]
        return f"{self.expr} {op} 0"


def pretty_constraints(cs: Iterable[IntConstraint]) -> str:
    return "{" + ", ".join(str(c) for c in sorted(cs, key=str)) + "}"
