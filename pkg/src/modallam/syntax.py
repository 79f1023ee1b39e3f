"""Expressions of the calculus: named-binder terms with a small constant set.

Surface sugar (``fix``, pair brackets, decimal literals) is expanded during
parsing; the stored term contains only variables, constants, abstractions and
applications.
"""
from __future__ import annotations

from dataclasses import dataclass


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Const(Expr):
    kind: str  # pair | fst | snd | zero | succ | natrec


@dataclass(frozen=True)
class Lam(Expr):
    binder: str
    body: Expr


@dataclass(frozen=True)
class App(Expr):
    fn: Expr
    arg: Expr


CONSTS = ("pair", "fst", "snd", "zero", "succ", "natrec")
KEYWORDS = ("fix", "pair", "fst", "snd", "succ", "natrec")


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


def app(*parts: Expr) -> Expr:
    out = parts[0]
    for p in parts[1:]:
        out = App(out, p)
    return out


def numeral(n: int) -> Expr:
    out: Expr = Const("zero")
    for _ in range(n):
        out = App(Const("succ"), out)
    return out


def numeral_value(e: Expr) -> int | None:
    """n if e is literally succ^n 0, else None."""
    n = 0
    while isinstance(e, App) and e.fn == Const("succ"):
        n += 1
        e = e.arg
    return n if e == Const("zero") else None


def fix_term() -> Expr:
    """fix = \\y. (\\x. y (x x)) (\\x. y (x x)); a closed term, so the fixed
    binder names cannot capture anything."""
    inner = Lam("x", App(Var("y"), App(Var("x"), Var("x"))))
    return Lam("y", App(inner, inner))


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, Lam):
        return free_vars(e.body) - {e.binder}
    assert isinstance(e, App)
    return free_vars(e.fn) | free_vars(e.arg)


def fresh_name(base: str, avoid: set[str]) -> str:
    root = base.split("'")[0] or "x"
    i = 1
    while f"{root}'{i}" in avoid:
        i += 1
    return f"{root}'{i}"


def substitute(e: Expr, name: str, replacement: Expr) -> Expr:
    """Capture-avoiding substitution e[replacement/name]."""
    if isinstance(e, Var):
        return replacement if e.name == name else e
    if isinstance(e, Const):
        return e
    if isinstance(e, App):
        return App(substitute(e.fn, name, replacement),
                   substitute(e.arg, name, replacement))
    assert isinstance(e, Lam)
    if e.binder == name:
        return e
    if e.binder in free_vars(replacement) and name in free_vars(e.body):
        avoid = free_vars(e.body) | free_vars(replacement) | {name}
        fresh = fresh_name(e.binder, avoid)
        body = substitute(e.body, e.binder, Var(fresh))
        return Lam(fresh, substitute(body, name, replacement))
    return Lam(e.binder, substitute(e.body, name, replacement))


def alpha_equal(a: Expr, b: Expr) -> bool:
    def go(a: Expr, b: Expr, ea: dict[str, int], eb: dict[str, int], depth: int) -> bool:
        if isinstance(a, Var) and isinstance(b, Var):
            ia, ib = ea.get(a.name), eb.get(b.name)
            if ia is None and ib is None:
                return a.name == b.name
            return ia == ib
        if isinstance(a, Const) and isinstance(b, Const):
            return a.kind == b.kind
        if isinstance(a, Lam) and isinstance(b, Lam):
            return go(a.body, b.body, {**ea, a.binder: depth}, {**eb, b.binder: depth}, depth + 1)
        if isinstance(a, App) and isinstance(b, App):
            return go(a.fn, b.fn, ea, eb, depth) and go(a.arg, b.arg, ea, eb, depth)
        return False

    return go(a, b, {}, {}, 0)


# ---------------------------------------------------------------------------
# parser


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in "\\.()<>,":
            kind = {"\\": "lam", ".": "dot", "(": "lpar", ")": "rpar",
                    "<": "langle", ">": "rangle", ",": "comma"}[c]
            toks.append(_Tok(kind, c, line, col))
            i += 1
            col += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Tok("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            toks.append(_Tok("kw" if word in KEYWORDS else "ident", word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


def parse_expr(text: str) -> Expr:
    """Parse and desugar; free variables are allowed here."""
    toks = _lex(text)
    pos = 0

    def peek() -> _Tok:
        return toks[pos]

    def advance() -> _Tok:
        nonlocal pos
        t = toks[pos]
        pos += 1
        return t

    def fail(t: _Tok, msg: str) -> ParseError:
        return ParseError(msg, t.line, t.col)

    def p_expr() -> Expr:
        t = peek()
        if t.kind == "lam":
            advance()
            binders = []
            while peek().kind == "ident":
                binders.append(advance().text)
            if not binders:
                raise fail(peek(), "expected binder after '\\'")
            if peek().kind != "dot":
                raise fail(peek(), "expected '.' after binders")
            advance()
            body = p_expr()
            for b in reversed(binders):
                body = Lam(b, body)
            return body
        return p_app()

    def p_app() -> Expr:
        out = p_atom()
        if out is None:
            raise fail(peek(), f"expected expression, got {peek().text!r}")
        while True:
            nxt = p_atom()
            if nxt is None:
                return out
            out = App(out, nxt)

    def p_atom() -> Expr | None:
        t = peek()
        if t.kind == "ident":
            advance()
            return Var(t.text)
        if t.kind == "kw":
            advance()
            if t.text == "fix":
                return fix_term()
            kind = t.text
            return Const(kind)
        if t.kind == "int":
            advance()
            return numeral(int(t.text))
        if t.kind == "lpar":
            advance()
            e = p_expr()
            if peek().kind != "rpar":
                raise fail(peek(), "expected ')'")
            advance()
            return e
        if t.kind == "langle":
            advance()
            e1 = p_expr()
            if peek().kind != "comma":
                raise fail(peek(), "expected ',' in pair")
            advance()
            e2 = p_expr()
            if peek().kind != "rangle":
                raise fail(peek(), "expected '>'")
            advance()
            return app(Const("pair"), e1, e2)
        if t.kind == "lam":
            return p_expr()
        return None

    e = p_expr()
    if peek().kind != "eof":
        raise fail(peek(), f"trailing input {peek().text!r}")
    return e


# ---------------------------------------------------------------------------
# printer


def print_expr(e: Expr) -> str:
    """Round-trips: parse_expr(print_expr(e)) is alpha-equivalent to e."""
    n = numeral_value(e)
    if n is not None:
        return str(n)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return "0" if e.kind == "zero" else e.kind
    if isinstance(e, App) and isinstance(e.fn, App) and e.fn.fn == Const("pair"):
        return f"<{print_expr(e.fn.arg)}, {print_expr(e.arg)}>"
    if isinstance(e, Lam):
        binders = []
        body = e
        while isinstance(body, Lam):
            binders.append(body.binder)
            body = body.body
        return f"\\{' '.join(binders)}. {print_expr(body)}"
    assert isinstance(e, App)
    return f"{_print_app_fn(e.fn)} {_print_atom(e.arg)}"


def _is_pair_sugar(e: Expr) -> bool:
    return isinstance(e, App) and isinstance(e.fn, App) and e.fn.fn == Const("pair")


def _print_app_fn(e: Expr) -> str:
    # function position: applications stay bare (left associativity), except
    # sugar forms (numerals, pairs) which print as atoms
    if isinstance(e, App) and numeral_value(e) is None and not _is_pair_sugar(e):
        return f"{_print_app_fn(e.fn)} {_print_atom(e.arg)}"
    return _print_atom(e)


def _print_atom(e: Expr) -> str:
    if isinstance(e, (Var, Const)) or numeral_value(e) is not None or _is_pair_sugar(e):
        return print_expr(e)
    return f"({print_expr(e)})"
