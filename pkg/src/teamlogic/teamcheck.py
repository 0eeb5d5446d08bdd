"""Lax team semantics for modal and propositional formulas, plus pointed RML.

Teams are handled as bitmasks.  A propositional team over a domain of k
variables is a mask over the 2^k assignments (first variable = most
significant bit), which is exactly the world set of the induced Kripke model
of the full assignment team; so the modal clauses are reused verbatim and only
the quantifier clauses change the underlying space.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Dict, Iterable, Tuple

from .errors import FragmentError, ModelError, ResourceError
from .models import (
    KripkeModel,
    PropTeam,
    mask_of,
    members,
    submasks,
    successor_team_masks,
    successors_mask,
)
from .syntax import (
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
    features,
    free_vars,
    is_downward_closed,
    is_flat,
    require_features,
)

# Upper bound on supplementation functions tried for one ∃ node.
MAX_EXISTS_CHOICES = 1 << 22

MODAL_FEATURES = ("or", "box", "diamond", "dep", "edep", "ind", "inc", "idisj")
PROP_FEATURES = ("or", "dep", "edep", "ind", "inc", "idisj", "quant")


class _ModalSpace:
    __slots__ = ("model", "key")

    def __init__(self, model: KripkeModel):
        self.model = model
        self.key = id(model)

    def val(self, v):
        return self.model.val_mask(v)

    def succ(self, mask):
        return successors_mask(self.model, mask)

    def succ_teams(self, mask):
        return successor_team_masks(self.model, mask)

    def succ_of(self, w):
        return self.model.succ_mask(w)


@lru_cache(maxsize=None)
def _prop_val_masks(k: int) -> Tuple[int, ...]:
    out = []
    for j in range(k):
        bit = k - 1 - j
        out.append(sum(1 << i for i in range(1 << k) if i >> bit & 1))
    return tuple(out)


class _PropSpace:
    """All 2^k assignments over ``domain`` as the worlds of an edgeless model."""

    __slots__ = ("domain", "key", "_val")

    def __init__(self, domain: Tuple[str, ...]):
        self.domain = domain
        self.key = domain
        masks = _prop_val_masks(len(domain))
        self._val = dict(zip(domain, masks))

    def val(self, v):
        try:
            return self._val[v]
        except KeyError:
            raise ModelError(f"variable {v} not in team domain {self.domain}") from None

    def succ(self, mask):
        return 0

    def succ_teams(self, mask):
        if mask == 0:
            yield 0

    def succ_of(self, w):
        return 0

    def extend(self, p: str):
        """Space after binding p, plus a function mapping (index, value) to new index."""
        if p in self._val:
            bit = len(self.domain) - 1 - self.domain.index(p)
            return self, lambda i, a: (i | (1 << bit)) if a else (i & ~(1 << bit))
        return _PropSpace(self.domain + (p,)), lambda i, a: (i << 1) | a


_MAXSUB_FEATURES = frozenset({"or", "quant", "inc"})


class _Evaluator:
    def __init__(self, maxsub_exists: bool = True):
        # maxsub_exists: decide ∃ over inclusion-logic bodies by the maximal
        # subteam of the duplicated team instead of trying supplements
        self.maxsub_exists = maxsub_exists
        self._maxsub = None
        self.memo: Dict[tuple, bool] = {}
        self.props: Dict[Formula, Tuple[bool, bool]] = {}
        # models referenced by memo keys stay alive as long as the evaluator
        self.pins: Dict[int, KripkeModel] = {}

    def _kind(self, f: Formula) -> Tuple[bool, bool]:
        k = self.props.get(f)
        if k is None:
            k = (is_flat(f), is_downward_closed(f))
            self.props[f] = k
        return k

    def truth(self, f: Formula, space, w: int) -> int:
        if isinstance(f, Atom):
            return space.val(f.name) >> w & 1
        if isinstance(f, NegAtom):
            return 1 - (space.val(f.name) >> w & 1)
        return 1 if self.sat(f, space, 1 << w) else 0

    def pointwise(self, f: Formula, space, mask: int) -> int:
        """Members of ``mask`` whose singleton team satisfies ``f``."""
        if isinstance(f, Atom):
            return mask & space.val(f.name)
        if isinstance(f, NegAtom):
            return mask & ~space.val(f.name)
        out = 0
        for w in members(mask):
            if self.sat(f, space, 1 << w):
                out |= 1 << w
        return out

    def sat(self, f: Formula, space, mask: int) -> bool:
        if isinstance(f, Atom):
            return mask & ~space.val(f.name) == 0
        if isinstance(f, NegAtom):
            return mask & space.val(f.name) == 0
        key = (f, space.key, mask)
        res = self.memo.get(key)
        if res is None:
            res = self._sat(f, space, mask)
            self.memo[key] = res
        return res

    def _sat(self, f: Formula, space, mask: int) -> bool:
        if isinstance(f, And):
            return self.sat(f.left, space, mask) and self.sat(f.right, space, mask)
        if isinstance(f, Or):
            return self._split(f, space, mask)
        if isinstance(f, IDisj):
            return self.sat(f.left, space, mask) or self.sat(f.right, space, mask)
        if isinstance(f, Box):
            return self.sat(f.sub, space, space.succ(mask))
        if isinstance(f, Diamond):
            return self._diamond(f.sub, space, mask)
        if isinstance(f, Dep):
            return self._dep(f, space, mask)
        if isinstance(f, Indep):
            return self._indep(f, space, mask)
        if isinstance(f, Incl):
            return self._incl(f, space, mask)
        if isinstance(f, Forall):
            return self._forall(f, space, mask)
        if isinstance(f, Exists):
            return self._exists(f, space, mask)
        raise FragmentError(f"team semantics undefined for {type(f).__name__}")

    # -- connectives

    def _split(self, f: Or, space, mask: int) -> bool:
        a, b = f.left, f.right
        flat_a, dc_a = self._kind(a)
        flat_b, dc_b = self._kind(b)
        if flat_a or flat_b:
            if not flat_a:
                a, b, dc_b = b, a, dc_a
            good = self.pointwise(a, space, mask)
            rest = mask & ~good
            if dc_b:
                return self.sat(b, space, rest)
            # rows given to b must pass b's flat conjuncts
            allowed = mask
            for c in _flat_conjuncts(b):
                allowed = self.pointwise(c, space, allowed)
            if rest & ~allowed:
                return False
            core = [c for c in _conjuncts(b) if not is_flat(c)]
            if len(core) == 1 and isinstance(core[0], Indep):
                return self._indep_completion(core[0], space, rest, good & allowed)
            return any(self.sat(b, space, rest | extra) for extra in submasks(good & allowed))
        for t1 in submasks(mask):
            if not self.sat(a, space, t1):
                continue
            t2 = mask & ~t1
            if self.sat(b, space, t2):
                return True
            if not (dc_a or dc_b):
                for extra in submasks(t1):
                    if extra and self.sat(b, space, t2 | extra):
                        return True
        return False

    def _diamond(self, sub: Formula, space, mask: int) -> bool:
        flat, _ = self._kind(sub)
        if flat:
            good = self.pointwise(sub, space, space.succ(mask))
            return all(space.succ_of(w) & good for w in members(mask))
        return any(self.sat(sub, space, t) for t in space.succ_teams(mask))

    # -- atoms

    def _values(self, names, space, w):
        return tuple(space.val(v) >> w & 1 for v in names)

    def _dep(self, f: Dep, space, mask: int) -> bool:
        seen: Dict[tuple, int] = {}
        for w in members(mask):
            key = tuple(self.truth(a, space, w) for a in f.args)
            out = self.truth(f.target, space, w)
            if seen.setdefault(key, out) != out:
                return False
        return True

    def _indep(self, f: Indep, space, mask: int) -> bool:
        triples = {
            (self._values(f.cond, space, w), self._values(f.left, space, w), self._values(f.right, space, w))
            for w in members(mask)
        }
        by_cond: Dict[tuple, Tuple[set, set]] = {}
        for c, l, r in triples:
            ls, rs = by_cond.setdefault(c, (set(), set()))
            ls.add(l)
            rs.add(r)
        for c, (ls, rs) in by_cond.items():
            for l in ls:
                for r in rs:
                    if (c, l, r) not in triples:
                        return False
        return True

    def _indep_completion(self, f: Indep, space, rest: int, cand: int) -> bool:
        """Is there E ⊆ cand with rest ∪ E ⊨ ind(c; x; y)?

        Per value of c the (x, y) pairs must form a product Xc × Yc.  Rows of
        cand whose pair lies in the chosen product can always be added, so it
        suffices to search products between the pairs forced by ``rest`` and
        the pairs available at all.
        """
        forced: Dict[tuple, set] = {}
        avail: Dict[tuple, set] = {}
        for m, book in ((rest, forced), (cand, avail)):
            for w in members(m):
                c = self._values(f.cond, space, w)
                book.setdefault(c, set()).add((self._values(f.left, space, w), self._values(f.right, space, w)))
        for c, pairs in forced.items():
            have = pairs | avail.get(c, set())
            x0 = {x for x, _ in pairs}
            y0 = {y for _, y in pairs}
            xs = sorted({x for x, _ in have} - x0)
            ys = sorted({y for _, y in have} - y0)
            found = False
            for kx in range(1 << len(xs)):
                xc = x0 | {x for i, x in enumerate(xs) if kx >> i & 1}
                for ky in range(1 << len(ys)):
                    yc = y0 | {y for i, y in enumerate(ys) if ky >> i & 1}
                    if all((x, y) in have for x in xc for y in yc):
                        found = True
                        break
                if found:
                    break
            if not found:
                return False
        return True

    def _incl(self, f: Incl, space, mask: int) -> bool:
        lefts = {self._values(f.left, space, w) for w in members(mask)}
        rights = {self._values(f.right, space, w) for w in members(mask)}
        return lefts <= rights

    # -- quantifiers

    def _forall(self, f: Forall, space, mask: int) -> bool:
        if not isinstance(space, _PropSpace):
            raise FragmentError("quantifiers are propositional only")
        new, idx = space.extend(f.var)
        out = 0
        for i in members(mask):
            out |= 1 << idx(i, 0) | 1 << idx(i, 1)
        return self.sat(f.body, new, out)

    def _exists(self, f: Exists, space, mask: int) -> bool:
        if not isinstance(space, _PropSpace):
            raise FragmentError("quantifiers are propositional only")
        new, idx = space.extend(f.var)
        if self.maxsub_exists and features(f.body) <= _MAXSUB_FEATURES:
            # union closed: a supplement exists iff the largest satisfying
            # subteam of the duplication still extends every row
            if self._maxsub is None:
                self._maxsub = _MaxSub()
            y = self._maxsub.run(f, space, mask)
            return y == mask
        rows = list(members(mask))
        det = _determiner(f.body, f.var)
        if det is not None:
            return self._exists_functional(f, space, new, idx, rows, det)
        _, dc = self._kind(f.body)
        # per-row options in the order {0}, {1}, {0,1}
        opts = [[1 << idx(i, 0), 1 << idx(i, 1)] for i in rows]
        if not dc:
            for o in opts:
                o.append(o[0] | o[1])
        total = 1
        for o in opts:
            total *= len(o)
        if total > MAX_EXISTS_CHOICES:
            raise ResourceError(f"existential over {len(rows)} rows exceeds the choice cap")
        tried = set()
        for combo in _mixed_radix(opts):
            if combo in tried:
                continue
            tried.add(combo)
            if self.sat(f.body, new, combo):
                return True
        return False


    def _exists_functional(self, f, space, new, idx, rows, det) -> bool:
        # a conjunct dep(x⃗, p) forces one value of p per x⃗-class
        classes: Dict[tuple, int] = {}
        for i in rows:
            key = self._values(det, space, i)
            classes[key] = classes.get(key, 0) | 1 << i
        groups = list(classes.values())
        if len(groups) > 22:
            raise ResourceError(f"existential over {len(groups)} classes exceeds the choice cap")
        for bits in range(1 << len(groups)):
            combo = 0
            for g, grp in enumerate(groups):
                a = bits >> (len(groups) - 1 - g) & 1
                for i in members(grp):
                    combo |= 1 << idx(i, a)
            if self.sat(f.body, new, combo):
                return True
        return False


class _MaxSub:
    """Largest subteam satisfying an inclusion-logic formula, on masks."""

    def __init__(self):
        self.memo: Dict[tuple, int] = {}
        self.iterations = 0

    def run(self, f: Formula, space: _PropSpace, mask: int) -> int:
        key = (f, space.key, mask)
        out = self.memo.get(key)
        if out is None:
            out = self._run(f, space, mask)
            self.memo[key] = out
        return out

    def _run(self, f: Formula, space: _PropSpace, mask: int) -> int:
        if isinstance(f, Atom):
            return mask & space.val(f.name)
        if isinstance(f, NegAtom):
            return mask & ~space.val(f.name)
        if isinstance(f, Or):
            return self.run(f.left, space, mask) | self.run(f.right, space, mask)
        if isinstance(f, And):
            y = mask
            while True:
                self.iterations += 1
                z = self.run(f.right, space, self.run(f.left, space, y))
                if z == y:
                    return y
                y = z
        if isinstance(f, Incl):
            y = mask
            while True:
                self.iterations += 1
                rights = {_values(space, f.right, i) for i in members(y)}
                z = mask_of(i for i in members(y) if _values(space, f.left, i) in rights)
                if z == y:
                    return y
                y = z
        if isinstance(f, Exists):
            new, idx = space.extend(f.var)
            dup = 0
            for i in members(mask):
                dup |= 1 << idx(i, 0) | 1 << idx(i, 1)
            y = self.run(f.body, new, dup)
            return mask_of(i for i in members(mask) if y >> idx(i, 0) & 1 or y >> idx(i, 1) & 1)
        if isinstance(f, Forall):
            new, idx = space.extend(f.var)
            y = mask
            while True:
                self.iterations += 1
                dup = 0
                for i in members(y):
                    dup |= 1 << idx(i, 0) | 1 << idx(i, 1)
                z = self.run(f.body, new, dup)
                y2 = mask_of(i for i in members(y) if z >> idx(i, 0) & 1 and z >> idx(i, 1) & 1)
                if y2 == y:
                    return y
                y = y2
        raise FragmentError(f"maximal subteam undefined for {type(f).__name__}")


def _values(space: _PropSpace, names, i: int) -> tuple:
    return tuple(space.val(v) >> i & 1 for v in names)



def _flat_conjuncts(f: Formula):
    if isinstance(f, And):
        return _flat_conjuncts(f.left) + _flat_conjuncts(f.right)
    return [f] if is_flat(f) else []


def _conjuncts(f: Formula):
    if isinstance(f, And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    return [f]


def _determiner(body: Formula, var: str):
    """Variables x⃗ of a conjunct dep(x⃗, var) (or ind(x⃗; var; var)) with var ∉ x⃗."""
    for c in _conjuncts(body):
        if isinstance(c, Dep) and c.is_plain and c.target == Atom(var):
            xs = tuple(a.name for a in c.args)
            if var not in xs:
                return xs
        if isinstance(c, Indep) and c.left == (var,) and c.right == (var,) and var not in c.cond:
            return c.cond
    return None


def _mixed_radix(opts):
    """OR-combinations of one option per row, first row varying slowest."""
    if not opts:
        yield 0
        return
    stack = [(0, 0)]
    n = len(opts)
    # iterative DFS keeps lexicographic order without recursion limits
    while stack:
        depth, acc = stack.pop()
        if depth == n:
            yield acc
            continue
        for o in reversed(opts[depth]):
            stack.append((depth + 1, acc | o))


# ------------------------------------------------------------------ API


def check_modal(model: KripkeModel, team: Iterable[int], f: Formula) -> bool:
    """M, T ⊨ φ under lax team semantics (modal fragments, no quantifiers)."""
    require_features(f, MODAL_FEATURES, "modal team semantics")
    team = model.check_team(team)
    return check_modal_mask(model, mask_of(team), f)


def check_modal_mask(model: KripkeModel, mask: int, f: Formula, ev: _Evaluator | None = None) -> bool:
    ev = ev or _Evaluator()
    ev.pins[id(model)] = model
    return ev.sat(f, _ModalSpace(model), mask)


def check_prop(team: PropTeam, f: Formula) -> bool:
    """X ⊨ φ for propositional (quantified) formulas."""
    require_features(f, PROP_FEATURES, "propositional team semantics")
    missing = free_vars(f) - set(team.domain)
    if missing:
        raise ModelError(f"free variables {sorted(missing)} not in team domain")
    return _Evaluator().sat(f, _PropSpace(team.domain), team.to_mask())


def check_prop_mask(domain: Tuple[str, ...], mask: int, f: Formula, ev: _Evaluator | None = None) -> bool:
    """Mask-level entry point for loops over many teams sharing one evaluator."""
    return (ev or _Evaluator()).sat(f, _PropSpace(tuple(domain)), mask)


def new_evaluator(maxsub_exists: bool = True) -> _Evaluator:
    return _Evaluator(maxsub_exists)


def truth_function(model: KripkeModel, w: int) -> Callable[[Formula], int]:
    """w_M: ML formula ↦ 1 iff M, {w} ⊨ φ."""
    ev = _Evaluator()
    ev.pins[id(model)] = model
    space = _ModalSpace(model)

    def fn(f: Formula) -> int:
        require_features(f, ("or", "box", "diamond"), "truth function")
        return ev.truth(f, space, w)

    return fn


def rml_truth_set(model: KripkeModel, f: Formula, memo: dict | None = None) -> int:
    """Worlds (as a mask) where ``f`` holds under pointed RML semantics."""
    memo = {} if memo is None else memo
    key = f
    if key in memo:
        return memo[key]
    full = model.full_mask
    if isinstance(f, Atom):
        out = model.val_mask(f.name)
    elif isinstance(f, NegAtom):
        out = full & ~model.val_mask(f.name)
    elif isinstance(f, CNeg):
        out = full & ~rml_truth_set(model, f.sub, memo)
    elif isinstance(f, And):
        out = rml_truth_set(model, f.left, memo) & rml_truth_set(model, f.right, memo)
    elif isinstance(f, Or):
        out = rml_truth_set(model, f.left, memo) | rml_truth_set(model, f.right, memo)
    elif isinstance(f, Box):
        s = rml_truth_set(model, f.sub, memo)
        out = mask_of(w for w in range(model.n) if model.succ_mask(w) & ~s == 0)
    elif isinstance(f, Diamond):
        s = rml_truth_set(model, f.sub, memo)
        out = mask_of(w for w in range(model.n) if model.succ_mask(w) & s)
    elif isinstance(f, Rel):
        if f.symbol not in model.relations:
            raise ModelError(f"relation {f.symbol} missing from model")
        rel = model.relations[f.symbol]
        arity = model.relation_arity(f.symbol)
        if arity is not None and arity != len(f.args):
            raise ModelError(f"relation {f.symbol} has arity {arity}, used with {len(f.args)}")
        sets = [rml_truth_set(model, a, memo) for a in f.args]
        out = 0
        for w in range(model.n):
            if tuple(s >> w & 1 for s in sets) in rel:
                out |= 1 << w
    else:
        raise FragmentError(f"pointed RML semantics undefined for {type(f).__name__}")
    memo[key] = out
    return out


def check_rml_pointed(model: KripkeModel, w: int, f: Formula) -> bool:
    """M, w ⊨_RML φ with ∼ as complement and relation atoms on truth values."""
    if not 0 <= w < model.n:
        raise ModelError("world outside the model")
    return bool(rml_truth_set(model, f) >> w & 1)
