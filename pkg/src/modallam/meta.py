"""Finite meta-type terms: the constraint language of the inference engine.

A meta-type is a type schema whose delay exponents are linear integer
expressions.  Two identifications are maintained by the smart constructor:
``@^E @^E' T`` collapses to ``@^(E+E') T`` and a literal ``@^0 T`` is ``T``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .linexpr import LinExpr


class Meta:
    """Base class; see MVar, MNat, MProd, MArrow, MDelay."""

    __slots__ = ()


@dataclass(frozen=True)
class MVar(Meta):
    name: str


@dataclass(frozen=True)
class MNat(Meta):
    pass


@dataclass(frozen=True)
class MProd(Meta):
    left: Meta
    right: Meta


@dataclass(frozen=True)
class MArrow(Meta):
    left: Meta
    right: Meta


@dataclass(frozen=True)
class MDelay(Meta):
    exp: LinExpr
    body: Meta


NAT = MNat()


def mvar(name: str) -> MVar:
    return MVar(name)


def mprod(left: Meta, right: Meta) -> MProd:
    return MProd(left, right)


def marrow(left: Meta, right: Meta) -> MArrow:
    return MArrow(left, right)


def mdelay(exp: LinExpr, body: Meta) -> Meta:
    if isinstance(body, MDelay):
        exp = exp + body.exp
        body = body.body
    if exp == LinExpr.lit(0):
        return body
    return MDelay(exp, body)


def split_delay(t: Meta) -> tuple[LinExpr, Meta]:
    """View any meta-type as ``@^E core`` with a non-delay core (E may be 0)."""
    if isinstance(t, MDelay):
        return t.exp, t.body
    return LinExpr.lit(0), t


def is_nat_or_op(t: Meta) -> bool:
    """Nat or a binary constructor; the shape test used by the unifier."""
    return isinstance(t, (MNat, MProd, MArrow))


def equal_cons(t: Meta, s: Meta) -> bool:
    """Same outermost constructor, for Nat/product/arrow only."""
    if isinstance(t, MNat) and isinstance(s, MNat):
        return True
    if isinstance(t, MProd) and isinstance(s, MProd):
        return True
    return isinstance(t, MArrow) and isinstance(s, MArrow)


def meta_vars(t: Meta) -> set[str]:
    if isinstance(t, MVar):
        return {t.name}
    if isinstance(t, (MProd, MArrow)):
        return meta_vars(t.left) | meta_vars(t.right)
    if isinstance(t, MDelay):
        return meta_vars(t.body)
    return set()


def int_vars(t: Meta) -> set[str]:
    if isinstance(t, (MProd, MArrow)):
        return int_vars(t.left) | int_vars(t.right)
    if isinstance(t, MDelay):
        return t.exp.variables() | int_vars(t.body)
    return set()


def size(t: Meta) -> int:
    """Type variables plus type constructors, the unifier's size measure."""
    if isinstance(t, (MVar, MNat)):
        return 1
    if isinstance(t, MDelay):
        return 1 + size(t.body)
    return 1 + size(t.left) + size(t.right)


def subterms(t: Meta) -> set[Meta]:
    out = {t}
    if isinstance(t, (MProd, MArrow)):
        out |= subterms(t.left) | subterms(t.right)
    elif isinstance(t, MDelay):
        out |= subterms(t.body)
    return out


def meta_str(t: Meta) -> str:
    """Render in the surface type grammar (@ > * > ->, right-assoc)."""

    def go(u: Meta, level: int) -> str:
        # level 0: arrow position, 1: product, 2: delay/atom
        if isinstance(u, MArrow):
            s = f"{go(u.left, 1)} -> {go(u.right, 0)}"
            return f"({s})" if level > 0 else s
        if isinstance(u, MProd):
            s = f"{go(u.left, 2)} * {go(u.right, 1)}"
            return f"({s})" if level > 1 else s
        if isinstance(u, MDelay):
            exp = str(u.exp)
            head = "@" if exp == "1" else f"@^{exp}" if _plain_exp(exp) else f"@^({exp})"
            return f"{head} {go(u.body, 2)}"
        if isinstance(u, MNat):
            return "Nat"
        assert isinstance(u, MVar)
        return u.name

    return go(t, 0)


def _plain_exp(exp: str) -> str | None:
    return exp if exp.replace("+", "").replace("-", "").isalnum() else None
