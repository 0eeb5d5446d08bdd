"""Independent reference implementations used only by the tests.

None of these route through the package's team evaluator or deciders
except where a criterion explicitly asks for brute force over the
package's own satisfaction relation.
"""

from __future__ import annotations

import hashlib
from itertools import permutations, product
from typing import Dict, Iterator, Mapping, Tuple

import numpy as np

from teamlogic.syntax import (
    And,
    Atom,
    Box,
    CNeg,
    Dep,
    Diamond,
    Exists,
    Forall,
    Formula,
    IDisj,
    Incl,
    Indep,
    NegAtom,
    Or,
    Rel,
)


# ------------------------------------------------------- classical truth


def classical_ml(model, w: int, f: Formula) -> bool:
    """Pointed Kripke truth for ML formulas in negation normal form."""
    if isinstance(f, Atom):
        return w in model.val.get(f.name, ())
    if isinstance(f, NegAtom):
        return w not in model.val.get(f.name, ())
    if isinstance(f, And):
        return classical_ml(model, w, f.left) and classical_ml(model, w, f.right)
    if isinstance(f, Or):
        return classical_ml(model, w, f.left) or classical_ml(model, w, f.right)
    succ = [b for a, b in model.edges if a == w]
    if isinstance(f, Box):
        return all(classical_ml(model, v, f.sub) for v in succ)
    if isinstance(f, Diamond):
        return any(classical_ml(model, v, f.sub) for v in succ)
    raise TypeError(type(f).__name__)


def classical_qpl(s: Mapping[str, int], f: Formula) -> bool:
    """Truth of a quantified propositional formula under one assignment."""
    if isinstance(f, Atom):
        return s[f.name] == 1
    if isinstance(f, NegAtom):
        return s[f.name] == 0
    if isinstance(f, And):
        return classical_qpl(s, f.left) and classical_qpl(s, f.right)
    if isinstance(f, Or):
        return classical_qpl(s, f.left) or classical_qpl(s, f.right)
    if isinstance(f, Exists):
        return any(classical_qpl({**s, f.var: b}, f.body) for b in (0, 1))
    if isinstance(f, Forall):
        return all(classical_qpl({**s, f.var: b}, f.body) for b in (0, 1))
    raise TypeError(type(f).__name__)


# -------------------------------------------- literal team semantics


def _subsets(xs):
    xs = list(xs)
    for bits in product((0, 1), repeat=len(xs)):
        yield frozenset(x for x, b in zip(xs, bits) if b)


def _lax_splits(team):
    """Pairs (Y, Z) with Y ∪ Z = team, overlaps allowed."""
    for y in _subsets(team):
        for extra in _subsets(y):
            yield y, (team - y) | extra


def naive_prop(team: frozenset, f: Formula) -> bool:
    """Team semantics read off the definitions; rows are frozensets of (var, bit) pairs."""
    rows = [dict(s) for s in team]
    if isinstance(f, Atom):
        return all(s[f.name] == 1 for s in rows)
    if isinstance(f, NegAtom):
        return all(s[f.name] == 0 for s in rows)
    if isinstance(f, And):
        return naive_prop(team, f.left) and naive_prop(team, f.right)
    if isinstance(f, Or):
        return any(naive_prop(y, f.left) and naive_prop(z, f.right) for y, z in _lax_splits(team))
    if isinstance(f, IDisj):
        return naive_prop(team, f.left) or naive_prop(team, f.right)
    if isinstance(f, Dep):
        args = [a.name for a in f.args]
        tgt = f.target.name
        return all(s[tgt] == t[tgt] for s in rows for t in rows if all(s[a] == t[a] for a in args))
    if isinstance(f, Indep):
        proj = lambda s, vs: tuple(s[v] for v in vs)
        return all(
            any(
                proj(u, f.cond + f.left) == proj(s, f.cond + f.left) and proj(u, f.right) == proj(t, f.right)
                for u in rows
            )
            for s in rows
            for t in rows
            if proj(s, f.cond) == proj(t, f.cond)
        )
    if isinstance(f, Incl):
        rights = {tuple(t[v] for v in f.right) for t in rows}
        return all(tuple(s[v] for v in f.left) in rights for s in rows)
    if isinstance(f, (Exists, Forall)):
        base = sorted(team, key=sorted)
        strip = [frozenset((k, v) for k, v in s if k != f.var) for s in base]
        options = ((0, 1),) if isinstance(f, Forall) else ((0,), (1,), (0, 1))
        for pick in product(options, repeat=len(base)):
            ext = frozenset(s | {(f.var, a)} for s, vals in zip(strip, pick) for a in vals)
            if naive_prop(ext, f.body):
                return True
        return False
    raise TypeError(type(f).__name__)


def prop_rows(team) -> frozenset:
    """A PropTeam in the row format of :func:`naive_prop`."""
    return frozenset(frozenset(zip(team.domain, r)) for r in team.rows)


def naive_modal(model, team: frozenset, f: Formula) -> bool:
    """Modal team semantics by the definitions, extended dependence atoms included."""

    def succ(w):
        return frozenset(b for a, b in model.edges if a == w)

    image = frozenset().union(*(succ(w) for w in team)) if team else frozenset()
    if isinstance(f, Atom):
        return all(w in model.val.get(f.name, ()) for w in team)
    if isinstance(f, NegAtom):
        return all(w not in model.val.get(f.name, ()) for w in team)
    if isinstance(f, And):
        return naive_modal(model, team, f.left) and naive_modal(model, team, f.right)
    if isinstance(f, Or):
        return any(naive_modal(model, y, f.left) and naive_modal(model, z, f.right) for y, z in _lax_splits(team))
    if isinstance(f, IDisj):
        return naive_modal(model, team, f.left) or naive_modal(model, team, f.right)
    if isinstance(f, Box):
        return naive_modal(model, image, f.sub)
    if isinstance(f, Diamond):
        return any(naive_modal(model, t, f.sub) for t in _subsets(sorted(image)) if all(succ(w) & t for w in team))
    if isinstance(f, Dep):
        val = lambda w, g: classical_ml(model, w, g)
        return all(
            val(w, f.target) == val(v, f.target) for w in team for v in team if all(val(w, a) == val(v, a) for a in f.args)
        )
    if isinstance(f, (Indep, Incl)):
        names = set(f.cond + f.left + f.right) if isinstance(f, Indep) else set(f.left + f.right)
        rows = frozenset(frozenset((x, int(w in model.val.get(x, ()))) for x in names) for w in team)
        return naive_prop(rows, f)
    raise TypeError(type(f).__name__)


# ------------------------------------------ relational models, vectorized

class RelationalBrute:
    """Pointed RML satisfiability over every model with at most ``worlds`` worlds.

    Worlds not reachable from world 0 cannot affect truth there, so each is
    kept in one canonical shape (isolated, all atoms false); this covers
    every model with one up to ``worlds`` worlds.  One model per isomorphism class
    fixing world 0 remains.  Truth sets are bit-planes over that list.
    """

    def __init__(self, variables=("p", "q"), worlds: int = 4):
        self.variables = tuple(variables)
        self.n = worlds
        nbits = self.n * self.n + self.n * len(self.variables)
        codes = np.arange(1 << nbits, dtype=np.uint32)
        codes = codes[self._canonical_unreachable(codes)]
        best = codes.copy()
        for perm in permutations(range(1, self.n)):
            pi = (0,) + perm
            best = np.minimum(best, self._permute(codes, pi))
        codes = codes[codes == best]
        self.count = int(codes.size)
        N = self.n
        self._edge = {(w, v): self._plane((codes >> self._edge_bit(w, v)) & 1) for w in range(N) for v in range(N)}
        self._val = {
            (x, w): self._plane((codes >> self._val_bit(j, w)) & 1) for j, x in enumerate(self.variables) for w in range(N)
        }
        self._full = self._plane(np.ones(codes.size, dtype=np.uint32))
        self.memo: Dict[Formula, tuple] = {}
        self._interned: Dict[bytes, tuple] = {}
        self._table: Dict[str, frozenset] = {}

    def use_table(self, table: Mapping[str, frozenset]) -> None:
        """Fix the relation interpretation; drops all cached truth sets."""
        self._table = dict(table)
        self.memo.clear()
        self._interned.clear()

    def _edge_bit(self, w: int, v: int) -> int:
        return self.n * w + v

    def _val_bit(self, j: int, w: int) -> int:
        return self.n * self.n + self.n * j + w

    @staticmethod
    def _plane(bits: np.ndarray) -> np.ndarray:
        packed = np.packbits(bits.astype(bool))
        pad = (-packed.size) % 8
        if pad:
            packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
        return packed.view(np.uint64)

    def _permute(self, codes: np.ndarray, pi) -> np.ndarray:
        out = np.zeros_like(codes)
        eb, vb = self._edge_bit, self._val_bit
        for w in range(self.n):
            for v in range(self.n):
                out |= ((codes >> eb(w, v)) & 1) << eb(pi[w], pi[v])
            for j in range(len(self.variables)):
                out |= ((codes >> vb(j, w)) & 1) << vb(j, pi[w])
        return out

    def _canonical_unreachable(self, codes: np.ndarray) -> np.ndarray:
        reach = self._reach(codes)
        ok = np.ones(codes.size, dtype=bool)
        for w in range(1, self.n):
            bits = 0
            for v in range(self.n):
                bits |= 1 << self._edge_bit(w, v) | 1 << self._edge_bit(v, w)
            for j in range(len(self.variables)):
                bits |= 1 << self._val_bit(j, w)
            dead = ((reach >> w) & 1) == 0
            ok &= ~dead | ((codes & np.uint32(bits)) == 0)
        return ok

    def _reach(self, codes: np.ndarray) -> np.ndarray:
        reach = np.ones(codes.size, dtype=np.uint32)  # bit w set when w reachable
        for _ in range(self.n):
            new = reach.copy()
            for w in range(self.n):
                at_w = (reach >> w) & 1
                for v in range(self.n):
                    new |= (at_w & (codes >> self._edge_bit(w, v)) & 1) << v
            reach = new
        return reach

    def truth(self, f: Formula, keep: bool = True) -> tuple:
        hit = self.memo.get(f)
        if hit is not None:
            return hit
        table = self._table
        full = self._full
        if isinstance(f, Atom):
            res = tuple(self._val[(f.name, w)] for w in range(self.n))
        elif isinstance(f, CNeg):
            res = tuple(full & ~a for a in self.truth(f.sub))
        elif isinstance(f, And):
            a, b = self.truth(f.left), self.truth(f.right)
            res = tuple(x & y for x, y in zip(a, b))
        elif isinstance(f, Box):
            a = self.truth(f.sub)
            planes = []
            for w in range(self.n):
                acc = full.copy()
                for v in range(self.n):
                    acc &= ~self._edge[(w, v)] | a[v]
                planes.append(acc & full)
            res = tuple(planes)
        elif isinstance(f, Rel):
            tuples = table[f.symbol]
            args = [self.truth(a) for a in f.args]
            planes = []
            for w in range(self.n):
                acc = np.zeros_like(full)
                for t in tuples:
                    hit = full.copy()
                    for bit, a in zip(t, args):
                        hit &= a[w] if bit else full & ~a[w]
                    acc |= hit
                planes.append(acc)
            res = tuple(planes)
        else:
            raise TypeError(type(f).__name__)
        if keep:
            # equivalent formulas share one copy of their planes
            digest = hashlib.blake2b(b"".join(x.tobytes() for x in res), digest_size=16).digest()
            res = self._interned.setdefault(digest, res)
            self.memo[f] = res
        return res

    def satisfiable(self, f: Formula, keep: bool = True) -> bool:
        """Some model within the world bound satisfies f at its world 0."""
        return bool(self.truth(f, keep)[0].any())


def tables_for(symbol: str, arity: int) -> Iterator[Dict[str, frozenset]]:
    rows = list(product((0, 1), repeat=arity))
    for k in range(1 << len(rows)):
        yield {symbol: frozenset(r for i, r in enumerate(rows) if k >> i & 1)}
