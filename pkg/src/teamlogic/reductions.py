"""Reductions between the logics: prenex form, the binary-tree encoding of
propositional quantifiers into modal dependence logic, the ADQBF encodings
and the translation of inclusion atoms into independence atoms.

Every introduced variable comes from :class:`FreshNames` (``prefix#k``), so it
cannot clash with source variables, which never contain ``#`` unless they were
produced by an earlier reduction (those names are avoided too).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .adqbf import AdqbfInstance, FnApp
from .errors import ReductionError
from .parser import render
from .syntax import (
    QUANT,
    And,
    Atom,
    Box,
    Dep,
    Diamond,
    Exists,
    Forall,
    Formula,
    FreshNames,
    IDisj,
    Incl,
    Indep,
    NegAtom,
    Or,
    all_vars,
    box_n,
    conj,
    disj,
    free_vars,
    negate_nnf,
    rename_bound_apart,
    rename_free,
)


@dataclass
class ReductionOutput:
    """Produced formulas plus the fresh variables introduced, by role."""

    kind: str
    premises: Tuple[Formula, ...] = ()
    conclusion: Optional[Formula] = None
    fresh: Dict[str, List[str]] = field(default_factory=dict)
    source_vars: Tuple[str, ...] = ()

    def formulas(self) -> List[Formula]:
        return list(self.premises) + ([self.conclusion] if self.conclusion is not None else [])

    def varmap(self) -> Dict[str, Any]:
        return {"kind": self.kind, "fresh": self.fresh, "source_vars": list(self.source_vars)}

    def sigma_text(self) -> str:
        return "".join(render(f) + "\n" for f in self.premises)

    def psi_text(self) -> str:
        return render(self.conclusion) + "\n" if self.conclusion is not None else ""

    def to_json(self) -> Dict[str, Any]:
        return {
            **self.varmap(),
            "premises": [render(f) for f in self.premises],
            "conclusion": render(self.conclusion) if self.conclusion is not None else None,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


# ------------------------------------------------------------------ prenex


def prenex(f: Formula, fresh: Optional[FreshNames] = None) -> Formula:
    """Equivalent formula Q1x1...Qnxn ψ with ψ quantifier-free.

    Bound variables are first renamed apart.  Rules (x not free in χ):
      (Qx ψ) ∧ χ  ->  Qx (ψ ∧ χ)
      (∃x ψ) ∨ χ  ->  ∃x (ψ ∨ χ)
      (∀x ψ) ∨ χ  ->  ∃u ∀x ((u ∧ ψ) ∨ (¬u ∧ χ))   u fresh
      (Qx ψ) ⋁ χ  ->  Qx (ψ ⋁ χ)
    and their mirror images.  Modal or relational input is rejected.
    """
    for g in _walk(f):
        if isinstance(g, (Box, Diamond)) or type(g).__name__ in ("CNeg", "Rel"):
            raise ReductionError(f"prenex: no verified rule for {type(g).__name__}")
    if is_prenex(f):
        return f
    fresh = fresh or FreshNames(all_vars(f))
    g = rename_bound_apart(f, fresh=fresh)
    return _pnf(g, fresh)


def _walk(f: Formula):
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(g.children())


def _pnf(f: Formula, fresh: FreshNames) -> Formula:
    if isinstance(f, QUANT):
        return type(f)(f.var, _pnf(f.body, fresh))
    if isinstance(f, (And, Or, IDisj)):
        return _combine(type(f), _pnf(f.left, fresh), _pnf(f.right, fresh), fresh)
    return f


def _combine(op, left: Formula, right: Formula, fresh: FreshNames) -> Formula:
    for side in (0, 1):
        q = left if side == 0 else right
        if not isinstance(q, QUANT):
            continue
        other = right if side == 0 else left

        def put(body, rest):
            return _combine(op, body, rest, fresh) if side == 0 else _combine(op, rest, body, fresh)

        if op in (And, IDisj) or isinstance(q, Exists):
            return type(q)(q.var, put(q.body, other))
        # universal quantifier below a splitting disjunction
        u = fresh("u")
        tagged = _combine(And, NegAtom(u), q.body, fresh) if side else _combine(And, Atom(u), q.body, fresh)
        rest = _combine(And, Atom(u), other, fresh) if side else _combine(And, NegAtom(u), other, fresh)
        inner = _combine(Or, rest, tagged, fresh) if side else _combine(Or, tagged, rest, fresh)
        return Exists(u, Forall(q.var, inner))
    return op(left, right)


def split_prefix(f: Formula) -> Tuple[List[Tuple[type, str]], Formula]:
    prefix = []
    while isinstance(f, QUANT):
        prefix.append((type(f), f.var))
        f = f.body
    return prefix, f


def is_prenex(f: Formula) -> bool:
    _, m = split_prefix(f)
    return not any(isinstance(g, QUANT) for g in _walk(m))


# ------------------------------------------------------- tree encoding


def store_formula(q: str, n: int) -> Formula:
    """(q ∧ □ⁿq) ∨ (¬q ∧ □ⁿ¬q)."""
    if n < 0:
        raise ValueError("negative depth")
    return Or(And(Atom(q), box_n(n, Atom(q))), And(NegAtom(q), box_n(n, NegAtom(q))))


def branch_formula(p: str, n: int) -> Formula:
    """◇p ∧ ◇¬p ∧ □Store(p, n)."""
    return conj(Diamond(Atom(p)), Diamond(NegAtom(p)), Box(store_formula(p, n)))


def tree_formula(V: Sequence[str], ps: Sequence[str], n: int) -> Formula:
    """⋀_{q∈V} Store(q,n) ∧ ⋀_{i<n} □ⁱ Branch(p_{i+1}, n-(i+1))."""
    V, ps = list(V), list(ps)
    if set(V) & set(ps):
        raise ReductionError(f"stored and branching variables overlap: {sorted(set(V) & set(ps))}")
    if len(ps) < n:
        raise ReductionError(f"{n} branching levels need {n} variables, got {len(ps)}")
    parts = [store_formula(q, n) for q in V]
    parts += [box_n(i, branch_formula(ps[i], n - (i + 1))) for i in range(n)]
    if not parts:
        raise ReductionError("tree formula with no variables and depth 0 is empty")
    return conj(*parts)


def modalize(f: Formula) -> Formula:
    """Replace ∃ by ◇ and ∀ by □ (the quantified variable is kept implicit)."""
    if isinstance(f, Exists):
        return Diamond(modalize(f.body))
    if isinstance(f, Forall):
        return Box(modalize(f.body))
    kids = f.children()
    return f.with_children([modalize(k) for k in kids]) if kids else f


def qpdl_to_mdl(kind: str, formulas: Sequence[Formula], premises: Sequence[Formula] = ()) -> ReductionOutput:
    """Reduce sat/valid (one formula) or entail (premises ⊨ formula) from QPDL to MDL.

    Prefixes are renamed onto one shared list x#1, x#2, ... and padded with
    vacuous universal quantifiers to the common length m, so every matrix is
    read at depth m of the tree where all stored values are available.
    """
    if kind not in ("sat", "valid", "entail"):
        raise ValueError("kind must be sat, valid or entail")
    formulas = list(formulas)
    if len(formulas) != 1:
        raise ReductionError("exactly one target formula is required")
    srcs = list(premises) + formulas
    if kind != "entail" and premises:
        raise ReductionError("premises are only meaningful for entailment")
    for f in srcs:
        for g in _walk(f):
            if isinstance(g, (Box, Diamond, Incl, Indep, IDisj)) or type(g).__name__ in ("CNeg", "Rel"):
                raise ReductionError(f"input is not in QPDL: found {type(g).__name__}")
    V = sorted(set().union(*(free_vars(f) for f in srcs)))
    fresh = FreshNames(set().union(*(all_vars(f) for f in srcs)))
    before = set(fresh.used)
    prenexed = [split_prefix(prenex(f, fresh)) for f in srcs]
    m = max(len(pre) for pre, _ in prenexed)
    xs = [fresh("x") for _ in range(m)]
    out = []
    for pre, matrix in prenexed:
        matrix = rename_free(matrix, {v: xs[i] for i, (_, v) in enumerate(pre)})
        g = matrix
        quants = [q for q, _ in pre] + [Forall] * (m - len(pre))
        for i in reversed(range(m)):
            g = quants[i](xs[i], g)
        out.append(modalize(g))
    if m == 0 and not V:
        raise ReductionError("closed formula without quantifiers")
    tree = tree_formula(V, xs, m)
    fresh_map = {"x": list(xs), "renamed": sorted(fresh.used - before - set(xs))}
    if kind == "sat":
        return ReductionOutput("sat", (), And(tree, out[-1]), fresh_map, tuple(V))
    if kind == "valid":
        return ReductionOutput("valid", (), Or(negate_nnf(tree), And(tree, out[-1])), fresh_map, tuple(V))
    return ReductionOutput("entail", tuple(out[:-1]) + (tree,), out[-1], fresh_map, tuple(V))


# ------------------------------------------------------------- ADQBF


def _check_pi2(inst: AdqbfInstance) -> Tuple[list, list]:
    if len(inst.blocks) != 2 or inst.blocks[0].quant != "A" or inst.blocks[1].quant != "E":
        raise ReductionError(f"expected a Π2 instance (∀-block then ∃-block), got {inst.shape}")
    return list(inst.blocks[0].fns), list(inst.blocks[1].fns)


def _matrix_with_vars(f: Formula, qmap: Dict[str, str]) -> Formula:
    """θ with every application f_i(c⃗_i) replaced by its variable q_i."""
    if isinstance(f, FnApp):
        q = qmap[f.name]
        return NegAtom(q) if f.negated else Atom(q)
    kids = f.children()
    return f.with_children([_matrix_with_vars(k, qmap) for k in kids]) if kids else f


def _fresh_for(inst: AdqbfInstance) -> FreshNames:
    return FreshNames(set(inst.universals) | {fn.name for fn in inst.functions})


def _qvars(inst: AdqbfInstance, fresh: FreshNames) -> Dict[str, str]:
    return {fn.name: fresh("q") for fn in inst.functions}


def _dep(args: Sequence[str], target: str) -> Dep:
    return Dep(tuple(Atom(a) for a in args), Atom(target))


def adqbf_pi2_to_pdl_entailment(inst: AdqbfInstance) -> ReductionOutput:
    """Σ = {dep(c⃗ᵢ, qᵢ) : i ≤ m},  ψ = θ ∨ ⋁_{i>m} dep(c⃗ᵢ, qᵢ)."""
    univ, exist = _check_pi2(inst)
    fresh = _fresh_for(inst)
    qmap = _qvars(inst, fresh)
    theta = _matrix_with_vars(inst.matrix, qmap)
    sigma = tuple(_dep(fn.args, qmap[fn.name]) for fn in univ)
    psi = disj(theta, *(_dep(fn.args, qmap[fn.name]) for fn in exist))
    return ReductionOutput("pi2-to-pdl", sigma, psi, {"q": [qmap[fn.name] for fn in inst.functions]}, inst.universals)


def _neq(x: str, y: str) -> Formula:
    return Or(And(Atom(x), NegAtom(y)), And(NegAtom(x), Atom(y)))


def _eq(x: str, y: str) -> Formula:
    return Or(And(Atom(x), Atom(y)), And(NegAtom(x), NegAtom(y)))


def tuple_neq(xs: Sequence[str], ys: Sequence[str]) -> Formula:
    return disj(*(_neq(x, y) for x, y in zip(xs, ys)))


def tuple_eq(xs: Sequence[str], ys: Sequence[str]) -> Formula:
    return conj(*(_eq(x, y) for x, y in zip(xs, ys)))


def inclusion_to_independence(left: Sequence[str], right: Sequence[str], fresh: Optional[FreshNames] = None) -> Formula:
    """p⃗ ⊆ q⃗ as ∀v1∀v2∀r⃗((r⃗≠p⃗ ∧ r⃗≠q⃗) ∨ (v1≠v2 ∧ r⃗≠q⃗) ∨ ((v1=v2 ∨ r⃗=q⃗) ∧ ind(∅; r⃗; v1v2)))."""
    left, right = tuple(left), tuple(right)
    if len(left) != len(right):
        raise ReductionError("inclusion sides differ in length")
    fresh = fresh or FreshNames(set(left) | set(right))
    fresh.used.update(left + right)
    v1, v2 = fresh("v"), fresh("v")
    if not left:
        return Forall(v1, Forall(v2, Or(Atom(v1), NegAtom(v1))))
    rs = tuple(fresh("r") for _ in left)
    body = disj(
        And(tuple_neq(rs, left), tuple_neq(rs, right)),
        And(_neq(v1, v2), tuple_neq(rs, right)),
        And(Or(_eq(v1, v2), tuple_eq(rs, right)), Indep((), rs, (v1, v2))),
    )
    for r in reversed(rs):
        body = Forall(r, body)
    return Forall(v1, Forall(v2, body))


def dep_as_ind(f: Formula) -> Formula:
    """Replace every plain dep(x⃗, y) by ind(x⃗; y; y)."""
    if isinstance(f, Dep):
        if not f.is_plain:
            raise ReductionError("only dependence atoms over variables have an independence form")
        return Indep(tuple(a.name for a in f.args), (f.target.name,), (f.target.name,))
    kids = f.children()
    return f.with_children([dep_as_ind(k) for k in kids]) if kids else f


def inclusions_as_ind(f: Formula, fresh: FreshNames) -> Formula:
    if isinstance(f, Incl):
        return inclusion_to_independence(f.left, f.right, fresh)
    kids = f.children()
    return f.with_children([inclusions_as_ind(k, fresh) for k in kids]) if kids else f


def adqbf_to_qplind_validity(inst: AdqbfInstance, translate_inclusions: bool = True) -> ReductionOutput:
    """A formula that is valid iff the Π2 instance is true.

    ψ_{m+1} = θ ∨ ⋁_{i>m} dep(c⃗ᵢ, qᵢ) and, for i = m..1,
    ψᵢ = ∃rᵢ(dep(c⃗ᵢqᵢ, rᵢ) ∧ dep(c⃗ᵢrᵢ, qᵢ) ∧ ∀r′ᵢ(¬r′ᵢ ∨ (r′ᵢ ∧ c⃗ᵢr′ᵢ ⊆ c⃗ᵢrᵢ)) ∧ (¬rᵢ ∨ (rᵢ ∧ ψ_{i+1}))).
    Dependence atoms become ind(x⃗; y; y); inclusion atoms are translated
    into independence atoms unless ``translate_inclusions`` is false.
    """
    univ, exist = _check_pi2(inst)
    fresh = _fresh_for(inst)
    qmap = _qvars(inst, fresh)
    theta = _matrix_with_vars(inst.matrix, qmap)
    psi = disj(theta, *(_dep(fn.args, qmap[fn.name]) for fn in exist))
    rs, rps = [], []
    for fn in reversed(univ):
        c, q = list(fn.args), qmap[fn.name]
        r, rp = fresh("r"), fresh("r'")
        rs.append(r)
        rps.append(rp)
        purge = Forall(rp, Or(NegAtom(rp), And(Atom(rp), Incl(tuple(c) + (rp,), tuple(c) + (r,)))))
        body = conj(_dep(c + [q], r), _dep(c + [r], q), purge, Or(NegAtom(r), And(Atom(r), psi)))
        psi = Exists(r, body)
    out = dep_as_ind(psi)
    fresh_map = {"q": [qmap[fn.name] for fn in inst.functions], "r": rs[::-1], "r'": rps[::-1]}
    if translate_inclusions:
        before = set(fresh.used)
        out = inclusions_as_ind(out, fresh)
        added = sorted(fresh.used - before)
        fresh_map["v"] = [v for v in added if v.startswith("v#")]
        fresh_map["r_inc"] = [v for v in added if v.startswith("r#") and v not in rs]
    return ReductionOutput("pi2-to-qplind", (), out, fresh_map, inst.universals)


def adqbf_sigma1_complement_to_qplinc_entailment(inst: AdqbfInstance) -> ReductionOutput:
    """Σ = {t ∧ ¬f, φ2} and ψ such that Σ ⊨ ψ iff the Σ1 instance is false."""
    if len(inst.blocks) != 1 or inst.blocks[0].quant != "E":
        raise ReductionError(f"expected a Σ1 instance (one ∃-block), got {inst.shape}")
    fns = list(inst.blocks[0].fns)
    fresh = _fresh_for(inst)
    qmap = _qvars(inst, fresh)
    ps = list(inst.universals)
    qs = [qmap[fn.name] for fn in fns]
    t, f = fresh("t"), fresh("f")
    phi1 = And(Atom(t), NegAtom(f))
    parts = []
    for i, p in enumerate(ps):
        pre = tuple(ps[:i])
        parts.append(And(Incl(pre + (t,), pre + (p,)), Incl(pre + (f,), pre + (p,))))
    sigma = (phi1,) + ((conj(*parts),) if parts else ())
    theta = _matrix_with_vars(inst.matrix, qmap)
    pp = [fresh("p'") for _ in ps]
    qp = [fresh("q'") for _ in qs]
    neg = rename_free(negate_nnf(theta), dict(zip(ps + qs, pp + qp)))
    left = And(neg, Incl(tuple(pp + qp), tuple(ps + qs)))
    for v in reversed(pp + qp):
        left = Exists(v, left)
    alts = [left]
    vmap = []
    for fn, q in zip(fns, qs):
        vs = [fresh("v") for _ in fn.args]
        vmap.append(vs)
        body = And(Incl(tuple(vs) + (t,), tuple(fn.args) + (q,)), Incl(tuple(vs) + (f,), tuple(fn.args) + (q,)))
        for v in reversed(vs):
            body = Exists(v, body)
        alts.append(body)
    fresh_map = {"q": qs, "t": [t], "f": [f], "p'": pp, "q'": qp, "v": [v for vs in vmap for v in vs]}
    return ReductionOutput("sigma1-to-qplinc", sigma, disj(*alts), fresh_map, inst.universals)
