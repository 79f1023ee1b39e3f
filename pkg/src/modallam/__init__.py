"""Lambda calculus with a silent delay modality: evaluation and type inference.

The delay constructor in types controls recursion: inference produces a finite
covering set of meta-types (delay exponents as linear integer expressions plus
integer constraints), and shape predicates on those types certify
normalization and bot-free Levy-Longo / Bohm trees of lazy programs over
infinite data.
"""

from .syntax import (App, Const, Expr, Lam, Var, alpha_equal, free_vars,
                     parse_expr, print_expr, substitute)
from .linexpr import IntConstraint, LinExpr
from .meta import Meta, MArrow, MDelay, MNat, MProd, MVar
from .typegraph import (TypeGraph, diff_infty, guard_constraints, instantiate,
                        is_guarded, is_infty_free, is_tail_finite, parse_type,
                        print_type, rank, type_equal)
from .constraints import ConstraintSet, FreshSupply, generate
from .ilp import IntSystem, check, feasible_nonneg
from .unifier import BranchCapExceeded, Solution, solve_recursive_system, unify
from .inference import Entry, InferenceResult, check_type, infer, typable
from .evaluator import (TreeApprox, bohm, has_bot, hnf, levy_longo,
                        render_compact, render_indented, step, whnf)

__all__ = [
    "App", "Const", "Expr", "Lam", "Var", "alpha_equal", "free_vars",
    "parse_expr", "print_expr", "substitute",
    "IntConstraint", "LinExpr",
    "Meta", "MArrow", "MDelay", "MNat", "MProd", "MVar",
    "TypeGraph", "diff_infty", "guard_constraints", "instantiate",
    "is_guarded", "is_infty_free", "is_tail_finite", "parse_type",
    "print_type", "rank", "type_equal",
    "ConstraintSet", "FreshSupply", "generate",
    "IntSystem", "check", "feasible_nonneg",
    "BranchCapExceeded", "Solution", "solve_recursive_system", "unify",
    "Entry", "InferenceResult", "check_type", "infer", "typable",
    "TreeApprox", "bohm", "has_bot", "hnf", "levy_longo",
    "render_compact", "render_indented", "step", "whnf",
]
