"""Rational-tree representation of (possibly infinite) regular meta-types.

A type graph is a finite cyclic graph whose infinite unfolding is the type
tree.  Canonicalization enforces the delay identifications (adjacent delays
merged, literal ``@^0`` elided), collapses pure-delay cycles (the type solving
``X = @X``), and minimizes nodes by partition refinement so that structural
equality of canonical graphs coincides with equality of tree unfoldings.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .linexpr import IntConstraint, LinExpr
from . import meta as M

# Node forms in the frozen array:
#   ("var", name) | ("nat",) | ("prod", l, r) | ("arrow", l, r)
#   | ("delay", LinExpr, child)
# Raw builder arrays may additionally contain ("alias", target).

Node = tuple


class TypeError_(Exception):
    """Ill-formed type (syntax, unguardedness, or negative delay)."""


class NotPositiveError(Exception):
    """A delay exponent evaluated to a negative integer."""


@dataclass(frozen=True)
class TypeGraph:
    nodes: tuple[Node, ...]
    root: int = 0

    def kind(self, i: int) -> str:
        return self.nodes[i][0]

    def children(self, i: int) -> tuple[int, ...]:
        n = self.nodes[i]
        if n[0] in ("prod", "arrow"):
            return (n[1], n[2])
        if n[0] == "delay":
            return (n[2],)
        return ()

    def int_variables(self) -> set[str]:
        out: set[str] = set()
        for n in self.nodes:
            if n[0] == "delay":
                out |= n[1].variables()
        return out

    def type_variables(self) -> set[str]:
        return {n[1] for n in self.nodes if n[0] == "var"}

    def is_concrete(self) -> bool:
        return all(n[1].is_literal() for n in self.nodes if n[0] == "delay")

    def __str__(self) -> str:
        return print_type(self)


# ---------------------------------------------------------------------------
# canonicalization


def canonicalize(nodes: list[Node], root: int) -> TypeGraph:
    nodes, root = _resolve_aliases(nodes, root)
    nodes, root = _normalize_delays(nodes, root)
    nodes, root = _minimize(nodes, root)
    return TypeGraph(tuple(nodes), root)


def _resolve_aliases(nodes: list[Node], root: int) -> tuple[list[Node], int]:
    def target(i: int, seen: frozenset[int] = frozenset()) -> int:
        while nodes[i][0] == "alias":
            if i in seen:
                # degenerate alias cycle (e.g. the system X = X): unguarded hole
                return -1
            seen |= {i}
            i = nodes[i][1]
        return i

    if not any(n[0] == "alias" for n in nodes):
        return nodes, root
    eps = None
    out: list[Node] = list(nodes)

    def resolve(i: int) -> int:
        nonlocal eps
        t = target(i)
        if t == -1:
            if eps is None:
                out.append(("delay", LinExpr.lit(0), len(out)))
                eps = len(out) - 1
            return eps
        return t

    for i, n in enumerate(nodes):
        if n[0] in ("prod", "arrow"):
            out[i] = (n[0], resolve(n[1]), resolve(n[2]))
        elif n[0] == "delay":
            out[i] = (n[0], n[1], resolve(n[2]))
    return out, resolve(root)


def _normalize_delays(nodes: list[Node], root: int) -> tuple[list[Node], int]:
    """Merge delay chains; collapse pure-delay cycles to a self-loop node."""
    alias: dict[int, int] = {}
    replacement: dict[int, Node] = {}
    state: dict[int, int] = {}  # 1 in progress, 2 done
    extra: list[Node] = []

    def resolve_chain(i: int) -> None:
        # walk i's delay chain until a non-delay node, a resolved delay, or a cycle
        path: list[int] = []
        cur = i
        while True:
            if nodes[cur][0] != "delay":
                _finish_chain(path, cur)
                return
            if state.get(cur) == 2:
                dest = alias.get(cur)
                if dest is not None:  # collapsed into a cycle node
                    for p in path:
                        alias[p] = dest
                        state[p] = 2
                    return
                rep = replacement[cur]
                _finish_chain(path, rep[2], tail=rep[1])
                return
            if cur in path:
                k = path.index(cur)
                cycle = path[k:]
                total = LinExpr.lit(0)
                for c in cycle:
                    total = total + nodes[c][1]
                if total.is_literal():
                    exp = LinExpr.lit(1) if total.const >= 1 else LinExpr.lit(0)
                else:
                    exp = total
                idx = len(nodes) + len(extra)
                extra.append(("delay", exp, idx))
                for p in path:
                    alias[p] = idx
                    state[p] = 2
                return
            state[cur] = 1
            path.append(cur)
            cur = nodes[cur][2]

    def _finish_chain(path: list[int], dest: int, tail: LinExpr = LinExpr.lit(0)) -> None:
        acc = tail
        for p in reversed(path):
            acc = acc + nodes[p][1]
            if acc.is_literal() and acc.const == 0:
                alias[p] = dest
            else:
                replacement[p] = ("delay", acc, dest)
            state[p] = 2

    for i, n in enumerate(nodes):
        if n[0] == "delay" and state.get(i) != 2:
            resolve_chain(i)

    out = list(nodes) + extra

    def follow(i: int) -> int:
        while i in alias:
            i = alias[i]
        return i

    for i, n in enumerate(out):
        if n[0] in ("prod", "arrow"):
            out[i] = (n[0], follow(n[1]), follow(n[2]))
        elif n[0] == "delay":
            if i in replacement:
                rep = replacement[i]
                out[i] = ("delay", rep[1], follow(rep[2]))
            elif i >= len(nodes):  # fresh cycle node keeps its self-loop
                out[i] = ("delay", n[1], i)
            elif i not in alias:
                out[i] = ("delay", n[1], follow(n[2]))
    return out, follow(root)


def _minimize(nodes: list[Node], root: int) -> tuple[list[Node], int]:
    reachable: list[int] = []
    seen = {root}
    stack = [root]
    while stack:
        i = stack.pop()
        reachable.append(i)
        n = nodes[i]
        kids = (n[1], n[2]) if n[0] in ("prod", "arrow") else (n[2],) if n[0] == "delay" else ()
        for k in kids:
            if k not in seen:
                seen.add(k)
                stack.append(k)

    def label(i: int):
        n = nodes[i]
        if n[0] == "delay":
            return ("delay", n[1])
        return n if n[0] in ("var", "nat") else (n[0],)

    block = {i: label(i) for i in reachable}
    while True:
        sig = {}
        for i in reachable:
            n = nodes[i]
            if n[0] in ("prod", "arrow"):
                sig[i] = (block[i], block[n[1]], block[n[2]])
            elif n[0] == "delay":
                sig[i] = (block[i], block[n[2]])
            else:
                sig[i] = (block[i],)
        if len(set(sig.values())) == len(set(block.values())):
            block = sig
            break
        block = sig

    # deterministic renumbering: DFS preorder from the root over blocks
    rep: dict = {}
    order: list = []
    new_index: dict = {}

    def visit(i: int) -> int:
        b = block[i]
        if b in new_index:
            return new_index[b]
        new_index[b] = len(order)
        order.append(i)
        rep[b] = i
        n = nodes[i]
        if n[0] in ("prod", "arrow"):
            visit(n[1])
            visit(n[2])
        elif n[0] == "delay":
            visit(n[2])
        return new_index[b]

    import sys

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * len(reachable) + 100))
    try:
        visit(root)
    finally:
        sys.setrecursionlimit(old_limit)

    out: list[Node] = []
    for i in order:
        n = nodes[i]
        if n[0] in ("prod", "arrow"):
            out.append((n[0], new_index[block[n[1]]], new_index[block[n[2]]]))
        elif n[0] == "delay":
            out.append((n[0], n[1], new_index[block[n[2]]]))
        else:
            out.append(n)
    return out, 0


def type_equal(a: TypeGraph, b: TypeGraph) -> bool:
    """Equality of infinite tree unfoldings (exponents by canonical form)."""
    return a.nodes == b.nodes and a.root == b.root


# ---------------------------------------------------------------------------
# builders


class GraphBuilder:
    def __init__(self) -> None:
        self.nodes: list[Node] = []

    def add(self, content: Node) -> int:
        self.nodes.append(content)
        return len(self.nodes) - 1

    def reserve(self) -> int:
        return self.add(("alias", -1))

    def patch_alias(self, slot: int, target: int) -> None:
        self.nodes[slot] = ("alias", target)

    def import_graph(self, g: TypeGraph) -> int:
        offset = len(self.nodes)
        for n in g.nodes:
            if n[0] in ("prod", "arrow"):
                self.nodes.append((n[0], n[1] + offset, n[2] + offset))
            elif n[0] == "delay":
                self.nodes.append((n[0], n[1], n[2] + offset))
            else:
                self.nodes.append(n)
        return g.root + offset

    def from_meta(self, t: M.Meta, env: Mapping[str, int]) -> int:
        if isinstance(t, M.MVar):
            if t.name in env:
                return env[t.name]
            return self.add(("var", t.name))
        if isinstance(t, M.MNat):
            return self.add(("nat",))
        if isinstance(t, M.MProd):
            return self.add(("prod", self.from_meta(t.left, env), self.from_meta(t.right, env)))
        if isinstance(t, M.MArrow):
            return self.add(("arrow", self.from_meta(t.left, env), self.from_meta(t.right, env)))
        assert isinstance(t, M.MDelay)
        return self.add(("delay", t.exp, self.from_meta(t.body, env)))

    def finish(self, root: int) -> TypeGraph:
        return canonicalize(self.nodes, root)


def graph_of_meta(t: M.Meta, subst: Mapping[str, TypeGraph] | None = None) -> TypeGraph:
    b = GraphBuilder()
    env: dict[str, int] = {}
    if subst:
        for name in sorted(subst):
            if name in M.meta_vars(t):
                env[name] = b.import_graph(subst[name])
    return b.finish(b.from_meta(t, env))


NAT_GRAPH = canonicalize([("nat",)], 0)
INF_GRAPH = canonicalize([("delay", LinExpr.lit(1), 0)], 0)


def var_graph(name: str) -> TypeGraph:
    return canonicalize([("var", name)], 0)


def delayed(n: int, g: TypeGraph) -> TypeGraph:
    b = GraphBuilder()
    r = b.import_graph(g)
    return b.finish(b.add(("delay", LinExpr.lit(n), r)))


# ---------------------------------------------------------------------------
# predicates


def _reaches(g: TypeGraph) -> list[set[int]]:
    """reaches[i] = nodes reachable from i via >= 1 edge."""
    n = len(g.nodes)
    out: list[set[int]] = [set(g.children(i)) for i in range(n)]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            extra: set[int] = set()
            for j in out[i]:
                extra |= out[j]
            if not extra <= out[i]:
                out[i] |= extra
                changed = True
    return out


def cyclic_nodes(g: TypeGraph) -> list[int]:
    reaches = _reaches(g)
    return [i for i in range(len(g.nodes)) if i in reaches[i]]


def is_guarded(g: TypeGraph) -> bool:
    """Every cycle passes a delay (for concrete graphs: a positive delay).

    Symbolic graphs are judged structurally; their semantic guardedness is
    expressed separately via guard_constraints.
    """

    def blocking(i: int) -> bool:
        n = g.nodes[i]
        if n[0] != "delay":
            return False
        exp: LinExpr = n[1]
        if exp.is_literal():
            return exp.const >= 1
        return True

    # cycle detection in the graph where blocking nodes lose their out-edge
    color = [0] * len(g.nodes)

    def dfs(i: int) -> bool:
        color[i] = 1
        if not blocking(i):
            for k in g.children(i):
                if color[k] == 1:
                    return False
                if color[k] == 0 and not dfs(k):
                    return False
        color[i] = 2
        return True

    return dfs(g.root)


def rank(g: TypeGraph) -> int:
    """Depth of non-delay constructors observable at time 0."""
    memo: dict[int, int] = {}
    active: set[int] = set()

    def rec(i: int) -> int:
        n = g.nodes[i]
        if n[0] in ("var", "nat", "delay"):
            return 0
        if i in memo:
            return memo[i]
        if i in active:
            raise TypeError_("rank undefined: type is not guarded")
        active.add(i)
        r = max(rec(n[1]), rec(n[2])) + 1
        active.discard(i)
        memo[i] = r
        return r

    return rec(g.root)


def diff_infty(g: TypeGraph, start: int | None = None) -> bool:
    """True iff the delay chain from the root reaches a non-delay constructor."""
    i = g.root if start is None else start
    seen: set[int] = set()
    while g.nodes[i][0] == "delay":
        if i in seen:
            return False
        seen.add(i)
        i = g.nodes[i][2]
    return True


def is_infty_free(g: TypeGraph) -> bool:
    return all(diff_infty(g, i) for i in range(len(g.nodes)))


def _finite_alternation(g: TypeGraph, s: int) -> bool:
    """Does the arrow-right spine starting at s return to s?"""
    seen: set[int] = set()
    cur = s
    first = True
    while True:
        if not first and cur == s:
            return True
        if cur in seen:
            return False
        seen.add(cur)
        n = g.nodes[cur]
        if n[0] == "delay":
            cur = n[2]
        elif n[0] == "arrow":
            cur = n[2]
        else:
            return False
        first = False


def is_tail_finite(g: TypeGraph) -> bool:
    if not is_infty_free(g):
        return False
    return not any(_finite_alternation(g, s) for s in cyclic_nodes(g))


# ---------------------------------------------------------------------------
# guardedness constraints (cycle bullet counts)


def count_bullets(g: TypeGraph, s: int) -> list[LinExpr]:
    """Delay-exponent sums along paths from s back to s.

    Each non-s node is visited at most once per path; an arrival at s ends the
    path.  On a rational graph this enumerates exactly the finite bullet-count
    expressions of the recursive occurrences.
    """
    sums: list[LinExpr] = []

    def step(i: int, acc: LinExpr, on_path: frozenset[int]) -> None:
        if i == s:
            sums.append(acc)
            return
        if i in on_path:
            return
        walk(i, acc, on_path | {i})

    def walk(i: int, acc: LinExpr, on_path: frozenset[int]) -> None:
        n = g.nodes[i]
        if n[0] == "delay":
            step(n[2], acc + n[1], on_path)
        elif n[0] in ("prod", "arrow"):
            step(n[1], acc, on_path)
            step(n[2], acc, on_path)

    walk(s, LinExpr.lit(0), frozenset({s}))
    return sums


def guard_constraints_graph(g: TypeGraph) -> list[IntConstraint]:
    out: list[IntConstraint] = []
    for s in cyclic_nodes(g):
        for total in count_bullets(g, s):
            out.append(IntConstraint.ge(total, LinExpr.lit(1)))
    return list(dict.fromkeys(out))


def guard_constraints(tau: Mapping[str, TypeGraph]) -> list[IntConstraint]:
    """Integer constraints whose natural solutions make every tau(X) guarded."""
    out: list[IntConstraint] = []
    for name in sorted(tau):
        out.extend(guard_constraints_graph(tau[name]))
    return list(dict.fromkeys(out))


# ---------------------------------------------------------------------------
# instantiation


def instantiate(g: TypeGraph, theta: Mapping[str, int]) -> TypeGraph:
    """Evaluate all delay exponents; error if any comes out negative."""
    nodes: list[Node] = []
    for n in g.nodes:
        if n[0] == "delay":
            value = n[1].evaluate(theta) if not n[1].is_literal() else n[1].const
            if value < 0:
                raise NotPositiveError(
                    f"not positive under theta: delay exponent {n[1]} = {value}"
                )
            nodes.append(("delay", LinExpr.lit(value), n[2]))
        else:
            nodes.append(n)
    return canonicalize(nodes, g.root)


# ---------------------------------------------------------------------------
# parsing (mu-notation surface grammar)


class _TypeTokens:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.toks: list[tuple[str, str, int]] = []
        self._lex()
        self.i = 0

    def _lex(self) -> None:
        text, n = self.text, len(self.text)
        i = 0
        while i < n:
            c = text[i]
            if c in " \t\r\n":
                i += 1
                continue
            if text.startswith("--", i):
                while i < n and text[i] != "\n":
                    i += 1
                continue
            if text.startswith("->", i):
                self.toks.append(("arrow", "->", i))
                i += 2
                continue
            if text.startswith("@^", i):
                self.toks.append(("delayexp", "@^", i))
                i += 2
                continue
            if c in "@*().+-":
                names = {"@": "delay", "*": "star", "(": "lpar", ")": "rpar",
                        ".": "dot", "+": "plus", "-": "minus"}
                self.toks.append((names[c], c, i))
                i += 1
                continue
            if c.isdigit():
                j = i
                while j < n and text[j].isdigit():
                    j += 1
                self.toks.append(("int", text[i:j], i))
                i = j
                continue
            if c.isalpha():
                j = i
                while j < n and (text[j].isalnum() or text[j] in "_'"):
                    j += 1
                self.toks.append(("ident", text[i:j], i))
                i = j
                continue
            raise TypeError_(f"type syntax error: unexpected character {c!r} at offset {i}")
        self.toks.append(("eof", "", n))

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def next(self) -> tuple[str, str, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> tuple[str, str, int]:
        t = self.next()
        if t[0] != kind:
            raise TypeError_(f"type syntax error: expected {kind}, got {t[1]!r} at offset {t[2]}")
        return t


def parse_type(text: str, *, concrete: bool = True) -> TypeGraph:
    """Parse mu-notation into a canonical graph.

    With ``concrete`` (the default, for user-facing goal types) every delay
    exponent must be a non-negative literal and the result must be guarded.
    """
    toks = _TypeTokens(text)
    b = GraphBuilder()

    def p_exp() -> LinExpr:
        def atom() -> LinExpr:
            t = toks.next()
            if t[0] == "int":
                return LinExpr.lit(int(t[1]))
            if t[0] == "ident":
                return LinExpr.var(t[1])
            if t[0] == "lpar":
                e = p_exp()
                toks.expect("rpar")
                return e
            raise TypeError_(f"type syntax error: bad exponent at offset {t[2]}")

        e = atom()
        while toks.peek()[0] in ("plus", "minus"):
            op = toks.next()[0]
            rhs = atom()
            e = e + rhs if op == "plus" else e - rhs
        return e

    def p_arrow(env: dict[str, int]) -> int:
        if toks.peek()[0] == "ident" and toks.peek()[1] == "mu":
            return p_mu(env)
        left = p_prod(env)
        if toks.peek()[0] == "arrow":
            toks.next()
            right = p_arrow(env)
            return b.add(("arrow", left, right))
        return left

    def p_mu(env: dict[str, int]) -> int:
        toks.next()  # mu
        name = toks.expect("ident")[1]
        toks.expect("dot")
        slot = b.reserve()
        body = p_arrow({**env, name: slot})
        if body == slot:
            raise TypeError_(f"unguarded recursive type: mu {name}. {name}")
        b.patch_alias(slot, body)
        return body

    def p_prod(env: dict[str, int]) -> int:
        left = p_delay(env)
        if toks.peek()[0] == "star":
            toks.next()
            right = p_prod(env)
            return b.add(("prod", left, right))
        return left

    def p_delay(env: dict[str, int]) -> int:
        t = toks.peek()
        if t[0] == "delay":
            toks.next()
            return b.add(("delay", LinExpr.lit(1), p_delay(env)))
        if t[0] == "delayexp":
            toks.next()
            exp = p_exp()
            return b.add(("delay", exp, p_delay(env)))
        return p_atom(env)

    def p_atom(env: dict[str, int]) -> int:
        t = toks.next()
        if t[0] == "lpar":
            i = p_arrow(env)
            toks.expect("rpar")
            return i
        if t[0] == "int" and t[1] == "0":
            raise TypeError_("type syntax error: bare integer is not a type")
        if t[0] == "ident":
            if t[1] == "Nat":
                return b.add(("nat",))
            if t[1] == "mu":
                toks.i -= 1
                return p_mu(env)
            if t[1] in env:
                return env[t[1]]
            return b.add(("var", t[1]))
        raise TypeError_(f"type syntax error: unexpected {t[1]!r} at offset {t[2]}")

    root = p_arrow({})
    if toks.peek()[0] != "eof":
        t = toks.peek()
        raise TypeError_(f"type syntax error: trailing input {t[1]!r} at offset {t[2]}")
    g = b.finish(root)
    if concrete:
        for n in g.nodes:
            if n[0] == "delay" and not n[1].is_literal():
                raise TypeError_(f"type has symbolic delay exponent {n[1]}")
            if n[0] == "delay" and n[1].const < 0:
                raise TypeError_(f"negative delay exponent {n[1].const}")
        if not is_guarded(g):
            raise TypeError_("unguarded recursive type")
    return g


# ---------------------------------------------------------------------------
# printing


def print_type(g: TypeGraph) -> str:
    """Render as mu-notation; cyclic nodes get deterministic binder names.

    Binders are attached to DFS back-edge targets, which every cycle has, so
    any traversal that enters a cycle closes it at a bound name.
    """
    targets: set[int] = set()
    color: dict[int, int] = {}

    def scan(i: int) -> None:
        color[i] = 1
        for k in g.children(i):
            if color.get(k) == 1:
                targets.add(k)
            elif color.get(k) is None:
                scan(k)
        color[i] = 2

    scan(g.root)

    taken = g.type_variables()
    names: dict[int, str] = {}
    counter = 0
    for i in sorted(targets):
        while f"R{counter}" in taken:
            counter += 1
        names[i] = f"R{counter}"
        counter += 1

    def exp_str(e: LinExpr) -> str:
        s = str(e)
        if s == "1":
            return "@"
        if all(ch.isalnum() or ch == "'" for ch in s):
            return f"@^{s}"
        return f"@^({s})"

    def ref(i: int, level: int, opened: frozenset[int]) -> str:
        if i in opened:
            return names[i]
        if i in targets:
            s = f"mu {names[i]}. {body(i, 0, opened | {i})}"
            return f"({s})" if level > 0 else s
        return body(i, level, opened)

    def body(i: int, level: int, opened: frozenset[int]) -> str:
        n = g.nodes[i]
        if n[0] == "var":
            return n[1]
        if n[0] == "nat":
            return "Nat"
        if n[0] == "arrow":
            s = f"{ref(n[1], 1, opened)} -> {ref(n[2], 0, opened)}"
            return f"({s})" if level > 0 else s
        if n[0] == "prod":
            s = f"{ref(n[1], 2, opened)} * {ref(n[2], 1, opened)}"
            return f"({s})" if level > 1 else s
        s = f"{exp_str(n[1])} {ref(n[2], 3, opened)}"
        return f"({s})" if level > 2 else s

    return ref(g.root, 0, frozenset())
