"""Call-by-name weak head reduction, head normal forms, and depth-bounded
Levy-Longo / Bohm tree approximants.

Bot in a tree approximant means "no (weak) head normal form within the fuel
budget"; cut marks the requested depth frontier.  Fully evaluated numerals at
the frontier are kept atomically, so finite numeric leaves never degrade to
cuts.
"""
from __future__ import annotations

from dataclasses import dataclass

from .syntax import App, Const, Expr, Lam, Var, numeral_value, substitute

FST = Const("fst")
SND = Const("snd")
SUCC = Const("succ")
ZERO = Const("zero")
NATREC = Const("natrec")
PAIR = Const("pair")


def _pair_parts(e: Expr) -> tuple[Expr, Expr] | None:
    if isinstance(e, App) and isinstance(e.fn, App) and e.fn.fn == PAIR:
        return e.fn.arg, e.arg
    return None


def step(e: Expr) -> Expr | None:
    """One leftmost weak-head reduction step, or None on a normal form.

    Evaluation contexts: [] | E e | fst E | snd E | succ E | natrec f1 f2 E.
    """
    if not isinstance(e, App):
        return None
    f, a = e.fn, e.arg
    if isinstance(f, Lam):
        return substitute(f.body, f.binder, a)
    if f == FST or f == SND:
        parts = _pair_parts(a)
        if parts is not None:
            return parts[0] if f == FST else parts[1]
        nxt = step(a)
        return App(f, nxt) if nxt is not None else None
    if f == SUCC:
        nxt = step(a)
        return App(f, nxt) if nxt is not None else None
    if isinstance(f, App) and isinstance(f.fn, App) and f.fn.fn == NATREC:
        f1, f2 = f.fn.arg, f.arg
        if a == ZERO:
            return f1
        if isinstance(a, App) and a.fn == SUCC:
            n = a.arg
            return App(App(f2, n), App(App(App(NATREC, f1), f2), n))
        nxt = step(a)
        return App(f, nxt) if nxt is not None else None
    nxt = step(f)
    return App(nxt, a) if nxt is not None else None


@dataclass(frozen=True)
class ReductionOutcome:
    expr: Expr
    steps: int
    finished: bool  # True: expr is a weak head normal form


def whnf(e: Expr, fuel: int) -> ReductionOutcome:
    steps = 0
    while True:
        nxt = step(e)
        if nxt is None:
            return ReductionOutcome(e, steps, True)
        if steps >= fuel:
            return ReductionOutcome(e, steps, False)
        e = nxt
        steps += 1


def _spine(e: Expr) -> tuple[Expr, list[Expr]]:
    args: list[Expr] = []
    while isinstance(e, App):
        args.append(e.arg)
        e = e.fn
    args.reverse()
    return e, args


@dataclass(frozen=True)
class HeadNormalForm:
    binders: tuple[str, ...]
    head: Expr  # Var or Const
    args: tuple[Expr, ...]

    def as_expr(self) -> Expr:
        out = self.head
        for a in self.args:
            out = App(out, a)
        for b in reversed(self.binders):
            out = Lam(b, out)
        return out


def hnf(e: Expr, fuel: int) -> HeadNormalForm | None:
    """Head normal form by stages: fully resolve each stage's weak head
    normal form, then descend under the produced binder."""
    binders: list[str] = []
    remaining = fuel
    while True:
        out = whnf(e, remaining)
        remaining -= out.steps
        if not out.finished:
            return None
        if isinstance(out.expr, Lam):
            binders.append(out.expr.binder)
            e = out.expr.body
            continue
        head, args = _spine(out.expr)
        return HeadNormalForm(tuple(binders), head, tuple(args))


# ---------------------------------------------------------------------------
# tree approximants


@dataclass(frozen=True)
class TreeApprox:
    kind: str  # var | const | lambda | bot | cut
    label: str = ""
    children: tuple["TreeApprox", ...] = ()


BOT = TreeApprox("bot")
CUT = TreeApprox("cut")


def has_bot(t: TreeApprox) -> bool:
    return t.kind == "bot" or any(has_bot(c) for c in t.children)


def _numeral_tree(n: int) -> TreeApprox:
    out = TreeApprox("const", "zero")
    for _ in range(n):
        out = TreeApprox("const", "succ", (out,))
    return out


def levy_longo(e: Expr, depth: int, fuel: int) -> TreeApprox:
    out = whnf(e, fuel)
    if not out.finished:
        return BOT
    w = out.expr
    n = numeral_value(w)
    if n is not None:
        return _numeral_tree(n)
    if depth <= 0:
        return CUT
    if isinstance(w, Lam):
        return TreeApprox("lambda", w.binder, (levy_longo(w.body, depth - 1, fuel),))
    head, args = _spine(w)
    children = tuple(levy_longo(a, depth - 1, fuel) for a in args)
    if isinstance(head, Var):
        return TreeApprox("var", head.name, children)
    assert isinstance(head, Const)
    return TreeApprox("const", head.kind, children)


def bohm(e: Expr, depth: int, fuel: int) -> TreeApprox:
    h = hnf(e, fuel)
    if h is None:
        return BOT
    if not h.binders:
        n = numeral_value(h.as_expr())
        if n is not None:
            return _numeral_tree(n)
    if depth <= 0:
        return CUT
    children = tuple(bohm(a, depth - 1, fuel) for a in h.args)
    if isinstance(h.head, Var):
        tree = TreeApprox("var", h.head.name, children)
    else:
        assert isinstance(h.head, Const)
        tree = TreeApprox("const", h.head.kind, children)
    for b in reversed(h.binders):
        tree = TreeApprox("lambda", b, (tree,))
    return tree


# ---------------------------------------------------------------------------
# rendering


def _tree_numeral(t: TreeApprox) -> int | None:
    n = 0
    while t.kind == "const" and t.label == "succ" and len(t.children) == 1:
        n += 1
        t = t.children[0]
    if t.kind == "const" and t.label == "zero" and not t.children:
        return n
    return None


def render_compact(t: TreeApprox) -> str:
    n = _tree_numeral(t)
    if n is not None:
        return str(n)
    if t.kind == "bot":
        return "⊥"
    if t.kind == "cut":
        return "…"
    if t.kind == "lambda":
        binders = []
        while t.kind == "lambda":
            binders.append(t.label)
            t = t.children[0]
        return f"\\{' '.join(binders)}. {render_compact(t)}"
    if t.kind == "const" and t.label == "pair" and len(t.children) == 2:
        return f"⟨{render_compact(t.children[0])}, {render_compact(t.children[1])}⟩"
    head = "0" if t.kind == "const" and t.label == "zero" else t.label
    if not t.children:
        return head
    parts = [head] + [_compact_atom(c) for c in t.children]
    return " ".join(parts)


def _compact_atom(t: TreeApprox) -> str:
    s = render_compact(t)
    simple = (
        t.kind in ("bot", "cut")
        or not t.children
        or _tree_numeral(t) is not None
        or (t.kind == "const" and t.label == "pair" and len(t.children) == 2)
    )
    return s if simple else f"({s})"


def render_indented(t: TreeApprox, indent: int = 0) -> str:
    pad = "  " * indent
    n = _tree_numeral(t)
    if n is not None:
        return f"{pad}{n}"
    if t.kind in ("bot", "cut"):
        return f"{pad}{'⊥' if t.kind == 'bot' else '…'}"
    if t.kind == "lambda":
        label = f"\\{t.label}."
    elif t.kind == "const":
        label = "0" if t.label == "zero" else t.label
    else:
        label = t.label
    lines = [f"{pad}{label}"]
    for c in t.children:
        lines.append(render_indented(c, indent + 1))
    return "\n".join(lines)


def tree_json(t: TreeApprox) -> dict:
    return {
        "kind": t.kind,
        "label": t.label,
        "children": [tree_json(c) for c in t.children],
    }
