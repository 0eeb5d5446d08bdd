"""Seeded random formulas and exhaustive enumeration by size."""

from __future__ import annotations

import random
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence

from .syntax import (
    FRAGMENT_FEATURES,
    And,
    Atom,
    Box,
    CNeg,
    Dep,
    Diamond,
    Exists,
    Forall,
    Formula,
    Fragment,
    IDisj,
    Incl,
    Indep,
    NegAtom,
    Or,
    Rel,
)


def random_formula(
    rng: random.Random,
    fragment: Fragment,
    variables: Sequence[str] = ("p", "q", "r"),
    target_size: int = 6,
    max_dep_arity: int = 1,
    relations: Optional[Dict[str, int]] = None,
    max_quant_depth: Optional[int] = None,
) -> Formula:
    """A random formula using only constructs admitted by ``fragment``.

    ``target_size`` bounds the number of connectives and atoms, roughly.
    ``max_quant_depth`` limits how deeply quantifiers nest.
    """
    feats = FRAGMENT_FEATURES[Fragment(fragment)]
    variables = list(variables)
    relations = relations or {"S_1": 1}
    rml = "cneg" in feats

    def var() -> str:
        return rng.choice(variables)

    def ml_small(budget: int) -> Formula:
        if budget <= 1 or rng.random() < 0.6:
            return Atom(var()) if rng.random() < 0.6 else NegAtom(var())
        choice = rng.choice(["and", "or", "box", "diamond"])
        if choice in ("box", "diamond"):
            return (Box if choice == "box" else Diamond)(ml_small(budget - 1))
        return (And if choice == "and" else Or)(ml_small(budget // 2), ml_small(budget // 2))

    def leaf() -> Formula:
        kinds = ["atom"]
        if not rml:
            kinds.append("neg")
        if "dep" in feats:
            kinds.append("dep")
        if "ind" in feats:
            kinds.append("ind")
        if "inc" in feats:
            kinds.append("inc")
        if "rel" in feats:
            kinds.append("rel")
        k = rng.choice(kinds)
        if k == "atom":
            return Atom(var())
        if k == "neg":
            return NegAtom(var())
        if k == "dep":
            n = rng.randint(0, max_dep_arity)
            if "edep" in feats and rng.random() < 0.3:
                return Dep(tuple(ml_small(2) for _ in range(n)), ml_small(2))
            return Dep(tuple(Atom(var()) for _ in range(n)), Atom(var()))
        if k == "ind":
            pick = lambda: tuple(rng.sample(variables, rng.randint(0, min(2, len(variables)))))
            left = pick() or (var(),)
            return Indep(pick(), left, pick() or (var(),))
        if k == "inc":
            n = rng.randint(1, min(2, len(variables)))
            return Incl(tuple(var() for _ in range(n)), tuple(var() for _ in range(n)))
        sym = rng.choice(sorted(relations))
        return Rel(sym, tuple(Atom(var()) for _ in range(relations[sym])))

    unary = []
    if "box" in feats:
        unary.append(Box)
    if "diamond" in feats:
        unary.append(Diamond)
    if "cneg" in feats:
        unary.append(CNeg)
    if "quant" in feats:
        unary += [Exists, Forall]
    binary = [And]
    if "or" in feats:
        binary.append(Or)
    if "idisj" in feats:
        binary.append(IDisj)

    def build(budget: int, qd: int) -> Formula:
        if budget <= 1:
            return leaf()
        r = rng.random()
        ops = [u for u in unary if u not in (Exists, Forall) or max_quant_depth is None or qd < max_quant_depth]
        if ops and r < 0.3:
            ctor = rng.choice(ops)
            if ctor in (Exists, Forall):
                return ctor(var(), build(budget - 1, qd + 1))
            if ctor is Box and "rel" in feats and rng.random() < 0.3:
                sym = rng.choice(sorted(relations))
                arity = relations[sym]
                return Rel(sym, tuple(build(max(1, (budget - 1) // max(1, arity)), qd) for _ in range(arity)))
            return ctor(build(budget - 1, qd))
        if r < 0.4:
            return leaf()
        k = rng.randint(1, budget - 1)
        return rng.choice(binary)(build(k, qd), build(budget - 1 - k if budget - 1 - k > 0 else 1, qd))

    return build(target_size, 0)


def random_formulas(seed: int, count: int, fragment: Fragment, **kw) -> List[Formula]:
    rng = random.Random(seed)
    return [random_formula(rng, fragment, **kw) for _ in range(count)]


# ------------------------------------------------------------- exhaustive


def enumerate_by_size(
    max_size: int,
    leaves: Dict[int, List[Formula]],
    unary: Sequence[Callable[[Formula], Formula]] = (),
    binary: Sequence[Callable[[Formula, Formula], Formula]] = (),
    unary_cost: int = 1,
    binary_cost: int = 1,
) -> Dict[int, List[Formula]]:
    """All formulas of each size ≤ max_size built from sized leaves and connectives.

    A unary connective adds ``unary_cost`` to the size of its argument, a
    binary connective adds ``binary_cost`` to the sum of its arguments.
    """
    by: Dict[int, List[Formula]] = {}
    for n in range(1, max_size + 1):
        out = list(leaves.get(n, ()))
        if n - unary_cost >= 1:
            for u in unary:
                out.extend(u(f) for f in by[n - unary_cost])
        rest = n - binary_cost
        for i in range(1, rest):
            for b in binary:
                out.extend(b(x, y) for x in by[i] for y in by[rest - i])
        by[n] = out
    return by


def flatten(by: Dict[int, List[Formula]]) -> List[Formula]:
    return [f for n in sorted(by) for f in by[n]]


def rml_formulas(max_nodes: int, variables: Sequence[str] = ("p", "q"), relations: Dict[str, int] = None) -> List[Formula]:
    """All RML formulas with at most ``max_nodes`` AST nodes."""
    relations = {"S_1": 1} if relations is None else relations
    leaves: Dict[int, List[Formula]] = {1: [Atom(v) for v in variables]}
    leaves[1] += [Rel(s, ()) for s, a in sorted(relations.items()) if a == 0]
    unary: List[Callable] = [CNeg, Box]
    unary += [(lambda s: lambda f: Rel(s, (f,)))(s) for s, a in sorted(relations.items()) if a == 1]
    by = enumerate_by_size(max_nodes, leaves, unary, [And])
    return flatten(by)


def _ml_leaves(variables: Sequence[str]) -> Dict[int, List[Formula]]:
    return {1: [Atom(v) for v in variables], 2: [NegAtom(v) for v in variables]}


def emdl_formulas(max_size: int, variables: Sequence[str] = ("p", "q"), extended: bool = True) -> List[Formula]:
    """EMDL formulas of symbol size ≤ max_size with dependence arity ≤ 1.

    Size: atom 1, ¬p 2, each connective 1, dep(α⃗, β) 1 + sizes of arguments.
    Extended atoms take ML arguments; otherwise arguments are variables.
    """
    ml = enumerate_by_size(max_size, _ml_leaves(variables), [Box, Diamond], [And, Or])
    args_by = ml if extended else {1: [Atom(v) for v in variables]}
    leaves = {k: list(v) for k, v in _ml_leaves(variables).items()}
    for n in range(2, max_size + 1):
        out = leaves.setdefault(n, [])
        for t in args_by.get(n - 1, ()):
            out.append(Dep((), t))
        for i in range(1, n - 1):
            for a in args_by.get(i, ()):
                for t in args_by.get(n - 1 - i, ()):
                    out.append(Dep((a,), t))
    return flatten(enumerate_by_size(max_size, leaves, [Box, Diamond], [And, Or]))


def qplinc_formulas(max_size: int, variables: Sequence[str] = ("p", "q"), max_incl: int = 2) -> List[Formula]:
    """Quantified inclusion-logic formulas of symbol size ≤ max_size.

    Size: atom 1, ¬p 2, inclusion of length k is 1 + 2k, quantifier 2, ∧/∨ 1.
    Quantifiers range over the same variables, so they may rebind.
    """
    leaves = _ml_leaves(variables)
    for k in range(1, max_incl + 1):
        cost = 1 + 2 * k
        tuples = list(product(variables, repeat=k))
        leaves.setdefault(cost, []).extend(Incl(a, b) for a in tuples for b in tuples)
    quants = [(lambda q, v: lambda f: q(v, f))(q, v) for q in (Exists, Forall) for v in variables]
    return flatten(enumerate_by_size(max_size, leaves, quants, [And, Or], unary_cost=2))
