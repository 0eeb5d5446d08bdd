"""Decision procedures for satisfiability, validity and entailment.

The complete procedures for downward-closed modal logics (EMDL and ML(⋁))
share one engine: every formula is expanded into a family of classical
formulas (witness substitutions for dependence atoms, side selections for
intuitionistic disjunctions) whose splitting disjunction it is equivalent to.
Entailment is then "for every premise expansion some conclusion expansion is
classically entailed", and each classical test is one tableau run.

Propositional team logics are decided by enumerating teams over the joint
free variables (exact by locality), and inclusion logic by the maximal
subteam fixpoint.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import FragmentError, ResourceError
from .models import KripkeModel, PropTeam, index_row, mask_of, members
from .syntax import (
    And,
    Atom,
    CNeg,
    Dep,
    Forall,
    Formula,
    IDisj,
    Incl,
    NegAtom,
    conj,
    dep_occurrences,
    features,
    free_vars,
    is_downward_closed,
    is_flat,
    rename_bound_apart,
    require_features,
)
from .tableau import TableauState, run as run_tableau
from .teamcheck import _MaxSub, _PropSpace, check_modal, check_prop, check_prop_mask, new_evaluator
from .witness import (
    RelationOracle,
    all_witnesses,
    oracle_from_witnesses,
    star_translate,
    substitute_witnesses,
    witness_count,
)

EMDL_FEATURES = ("or", "box", "diamond", "dep", "edep")
MLDISJ_FEATURES = ("or", "box", "diamond", "idisj")
CHOICE_FEATURES = ("or", "box", "diamond", "dep", "edep", "idisj")
QPLINC_FEATURES = ("or", "quant", "inc")
QPLIND_FEATURES = ("or", "quant", "dep", "ind")
PROP_FAMILY = ("or", "quant", "dep", "edep", "ind", "inc", "idisj")


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class Caps:
    """Hard resource limits; exceeding one raises ResourceError."""

    max_dep_arity: int = 3
    max_domain: int = 4
    max_worlds: int = 4
    max_witness_tuples: int = 1 << 20

    @classmethod
    def parse(cls, text: str, base: Optional["Caps"] = None) -> "Caps":
        """Read ``key=value`` pairs (comma separated) or a JSON object."""
        base = base or cls()
        text = text.strip()
        if not text:
            return base
        if text.startswith("{"):
            items = json.loads(text)
        else:
            items = {}
            for part in text.split(","):
                k, _, v = part.partition("=")
                items[k.strip()] = v.strip()
        known = set(asdict(base))
        vals = asdict(base)
        for k, v in items.items():
            if k not in known:
                raise ValueError(f"unknown cap {k!r}")
            vals[k] = int(v)
            if vals[k] < 0:
                raise ValueError(f"cap {k} must be non-negative")
        return cls(**vals)

    @classmethod
    def from_env(cls) -> "Caps":
        return cls.parse(os.environ.get("TEAMLOGIC_CAPS", ""))


DEFAULT_CAPS = Caps()


@dataclass(frozen=True)
class ModalWitness:
    """A Kripke model together with a team of it."""

    model: KripkeModel
    team: frozenset


@dataclass
class Verdict:
    answer: bool
    witness: Any = None
    counters: Dict[str, int] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.answer


# ------------------------------------------------------------ expansions


@dataclass
class _Expansion:
    """One classical instance of a formula: its RML form plus relation tables."""

    source: Formula
    star: Formula
    relations: Dict[str, frozenset]
    witnesses: Tuple = ()

    def ml(self) -> Formula:
        return substitute_witnesses(self.source, self.witnesses)


def _idisj_selections(f: Formula) -> List[Formula]:
    """The distinct formulas θ^s for selections s of ⋁-disjuncts."""
    if isinstance(f, IDisj):
        return list(dict.fromkeys(_idisj_selections(f.left) + _idisj_selections(f.right)))
    if isinstance(f, (Dep, Atom, NegAtom)) or not f.children():
        return [f]
    options = [_idisj_selections(k) for k in f.children()]
    return list(dict.fromkeys(f.with_children(list(ks)) for ks in product(*options)))


def _expansion_count(f: Formula) -> int:
    total = 0
    for g in _idisj_selections(f):
        n = 1
        for _, d in dep_occurrences(g):
            n *= witness_count(d.arity)
        total += n
    return total


def _expansions(f: Formula, tag: str) -> Iterator[_Expansion]:
    for g in _idisj_selections(f):
        occ = dep_occurrences(g)
        syms = [f"S_{tag}_{i}" for i in range(1, len(occ) + 1)]
        star = star_translate(g, syms)
        for seq in product(*(list(all_witnesses(d.arity)) for _, d in occ)):
            rels = oracle_from_witnesses(seq, syms).relations() if seq else {}
            yield _Expansion(g, star, rels, tuple(seq))


def _check_arity(fs: Iterable[Formula], caps: Caps) -> None:
    for f in fs:
        for _, d in dep_occurrences(f):
            if d.arity > caps.max_dep_arity:
                raise ResourceError(f"dependence atom of arity {d.arity} exceeds cap {caps.max_dep_arity}")


def _tableau(f: Formula, rels: Dict[str, frozenset], counters: Dict[str, int], model: bool = False):
    oracle = RelationOracle(rels, {})
    res = run_tableau(TableauState((f,)), oracle, build_model=model)
    counters["tableau_runs"] = counters.get("tableau_runs", 0) + 1
    counters["tableau_depth_max"] = max(counters.get("tableau_depth_max", 0), res.max_depth)
    return res


def _merge(exps: Sequence[_Expansion]) -> Tuple[Optional[Formula], Dict[str, frozenset]]:
    if not exps:
        return None, {}
    rels: Dict[str, frozenset] = {}
    for e in exps:
        rels.update(e.relations)
    return conj(*(e.star for e in exps)), rels


def _choice_entails(premises: Sequence[Formula], concl: Formula, caps: Caps, what: str) -> Verdict:
    counters: Dict[str, int] = {"witness_tuples": 0}
    outer_n = 1
    for p in premises:
        outer_n *= _expansion_count(p)
    inner_n = _expansion_count(concl)
    if outer_n * inner_n > caps.max_witness_tuples:
        raise ResourceError(f"{what}: {outer_n}×{inner_n} witness tuples exceed cap {caps.max_witness_tuples}")
    inner = list(_expansions(concl, "c"))
    outer_lists = [list(_expansions(p, f"p{i}")) for i, p in enumerate(premises)]
    for outer in product(*outer_lists):
        prem, rels = _merge(outer)
        if prem is not None and not _tableau(prem, rels, counters).satisfiable:
            counters["witness_tuples"] += 1
            continue
        hit = False
        for e in inner:
            counters["witness_tuples"] += 1
            query = CNeg(e.star) if prem is None else And(prem, CNeg(e.star))
            if not _tableau(query, {**rels, **e.relations}, counters).satisfiable:
                hit = True
                break
        if not hit:
            cm = _countermodel(premises, concl, prem, rels, inner, counters)
            return Verdict(False, cm, counters)
    return Verdict(True, None, counters)


def _countermodel(premises, concl, prem, rels, inner, counters) -> Any:
    """A team satisfying every premise but not the conclusion.

    Each conclusion expansion has a pointed model of the premises where it
    fails; a few of these points, collected greedily, refute all expansions at
    once, and the disjoint union of their models carries the team.
    """
    points: List[Tuple[KripkeModel, int]] = []
    for e in inner:
        ml = e.ml()
        if any(not check_modal(m, {w}, ml) for m, w in points):
            continue
        query = CNeg(e.star) if prem is None else And(prem, CNeg(e.star))
        res = _tableau(query, {**rels, **e.relations}, counters, model=True)
        points.append((res.model, res.world))
    model, team = _disjoint_union(points)

    def bad(t):
        return all(check_modal(model, t, p) for p in premises) and not check_modal(model, t, concl)

    team = _shrink(team, bad)
    model, team = _generated(model, team)
    fs = list(premises) + [concl]
    if all(not (features(f) & {"box", "diamond"}) for f in fs):
        return _as_prop_team(model, team, fs)
    return ModalWitness(model, team)


def _disjoint_union(points: Sequence[Tuple[KripkeModel, int]]) -> Tuple[KripkeModel, frozenset]:
    off = 0
    edges, val, team = set(), {}, set()
    for m, w in points:
        edges.update((a + off, b + off) for a, b in m.edges)
        for v, ws in m.val.items():
            val.setdefault(v, set()).update(x + off for x in ws)
        team.add(w + off)
        off += m.n
    return KripkeModel(off, frozenset(edges), {v: frozenset(s) for v, s in val.items()}), frozenset(team)


def _shrink(items: frozenset, still_bad) -> frozenset:
    """Greedy minimisation: drop members one at a time while the property persists."""
    cur = set(items)
    for x in sorted(items):
        trial = frozenset(cur - {x})
        if still_bad(trial):
            cur.discard(x)
    return frozenset(cur)


def _generated(model: KripkeModel, team: frozenset) -> Tuple[KripkeModel, frozenset]:
    """Restrict to worlds reachable from the team and renumber (team first)."""
    order = sorted(team)
    seen = set(order)
    i = 0
    while i < len(order):
        for b in sorted(members(model.succ_mask(order[i]))):
            if b not in seen:
                seen.add(b)
                order.append(b)
        i += 1
    ren = {w: k for k, w in enumerate(order)}
    edges = frozenset((ren[a], ren[b]) for a, b in model.edges if a in ren and b in ren)
    val = {v: frozenset(ren[w] for w in ws if w in ren) for v, ws in model.val.items()}
    return KripkeModel(len(order), edges, val), frozenset(ren[w] for w in team)


def _as_prop_team(model: KripkeModel, team: frozenset, fs: Sequence[Formula]) -> PropTeam:
    domain = tuple(sorted(set().union(*(free_vars(f) for f in fs))))
    rows = frozenset(tuple(int(w in model.val.get(v, ())) for v in domain) for w in team)
    return PropTeam(domain, rows)


def _choice_sat(f: Formula, caps: Caps, what: str) -> Verdict:
    counters: Dict[str, int] = {"witness_tuples": 0}
    n = _expansion_count(f)
    if n > caps.max_witness_tuples:
        raise ResourceError(f"{what}: {n} witness tuples exceed cap {caps.max_witness_tuples}")
    for e in _expansions(f, "c"):
        counters["witness_tuples"] += 1
        res = _tableau(e.star, e.relations, counters, model=True)
        if res.satisfiable:
            model, team = _generated(res.model, frozenset({res.world}))
            if not (features(f) & {"box", "diamond"}):
                return Verdict(True, _as_prop_team(model, team, [f]), counters)
            return Verdict(True, ModalWitness(model, team), counters)
    return Verdict(False, None, counters)


def _require(fs: Iterable[Formula], allowed, what: str) -> List[Formula]:
    fs = list(fs)
    for f in fs:
        require_features(f, allowed, what)
    return fs


# ------------------------------------------------------------- EMDL / ML(⋁)


def emdl_entails(premises: Sequence[Formula], concl: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    """Σ ⊨ φ for (extended) modal dependence logic via witness sequences."""
    fs = _require(list(premises) + [concl], EMDL_FEATURES, "emdl_entails")
    _check_arity(fs, caps)
    return _choice_entails(fs[:-1], concl, caps, "emdl_entails")


def emdl_valid(f: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    """⊨ φ: some witness sequence makes the negated instance unsatisfiable."""
    _require([f], EMDL_FEATURES, "emdl_valid")
    _check_arity([f], caps)
    return _choice_entails([], f, caps, "emdl_valid")


def emdl_sat(f: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    """Satisfiable on some non-empty team."""
    _require([f], EMDL_FEATURES, "emdl_sat")
    _check_arity([f], caps)
    return _choice_sat(f, caps, "emdl_sat")


def mldisj_entails(premises: Sequence[Formula], concl: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    fs = _require(list(premises) + [concl], MLDISJ_FEATURES, "mldisj_entails")
    return _choice_entails(fs[:-1], concl, caps, "mldisj_entails")


def mldisj_valid(f: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    _require([f], MLDISJ_FEATURES, "mldisj_valid")
    return _choice_entails([], f, caps, "mldisj_valid")


def mldisj_sat(f: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    _require([f], MLDISJ_FEATURES, "mldisj_sat")
    return _choice_sat(f, caps, "mldisj_sat")


def choice_entails(premises: Sequence[Formula], concl: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    """Entailment for formulas mixing dependence atoms and ⋁ (all downward closed)."""
    fs = _require(list(premises) + [concl], CHOICE_FEATURES, "choice_entails")
    _check_arity(fs, caps)
    return _choice_entails(fs[:-1], concl, caps, "choice_entails")


# ----------------------------------------------------- propositional teams


def _joint_domain(fs: Sequence[Formula], caps: Caps) -> Tuple[str, ...]:
    dom = tuple(sorted(set().union(*(free_vars(f) for f in fs)) if fs else ()))
    if len(dom) > caps.max_domain:
        raise ResourceError(f"{len(dom)} free variables exceed the team-domain cap {caps.max_domain}")
    return dom


def _flat_conjuncts(f: Formula) -> List[Formula]:
    if isinstance(f, And):
        return _flat_conjuncts(f.left) + _flat_conjuncts(f.right)
    return [f] if is_flat(f) else []


def _universe(domain: Tuple[str, ...], premises: Sequence[Formula], ev) -> int:
    """Assignments allowed by the flat conjuncts of the premises."""
    space = _PropSpace(domain)
    uni = (1 << (1 << len(domain))) - 1
    for p in premises:
        for c in _flat_conjuncts(p):
            uni = ev.pointwise(c, space, uni)
    return uni


class _TeamSearch:
    """Masks of teams satisfying every premise, in a deterministic order."""

    def __init__(self, domain, premises, counters):
        self.domain = domain
        self.premises = list(premises)
        self.counters = counters
        self.ev = new_evaluator()

    def holds(self, mask: int, f: Formula) -> bool:
        if len(self.ev.memo) > 1_000_000:
            self.ev.memo.clear()
        return check_prop_mask(self.domain, mask, f, self.ev)

    def ok(self, mask: int) -> bool:
        return all(self.holds(mask, p) for p in self.premises)

    def __iter__(self) -> Iterator[int]:
        uni = _universe(self.domain, self.premises, self.ev)
        rows = list(members(uni))
        if all(is_downward_closed(p) for p in self.premises):
            # extend teams row by row; a failing team has no satisfying superset
            stack = [(0, 0)]
            while stack:
                mask, nxt = stack.pop()
                self.counters["teams"] = self.counters.get("teams", 0) + 1
                yield mask
                for j in range(len(rows) - 1, nxt - 1, -1):
                    m2 = mask | 1 << rows[j]
                    if self.ok(m2):
                        stack.append((m2, j + 1))
            return
        for k in range(1 << len(rows)):
            mask = 0
            for i, r in enumerate(rows):
                if k >> i & 1:
                    mask |= 1 << r
            self.counters["teams"] = self.counters.get("teams", 0) + 1
            if self.ok(mask):
                yield mask


def _prop_entails(premises: Sequence[Formula], concl: Formula, caps: Caps, test=None) -> Verdict:
    premises = list(premises)
    domain = _joint_domain(premises + [concl], caps)
    counters: Dict[str, int] = {"teams": 0}
    search = _TeamSearch(domain, premises, counters)
    test = test or (lambda mask: search.holds(mask, concl))
    for mask in search:
        if not test(mask):
            rows = frozenset(members(mask))

            def bad(t):
                m = mask_of(t)
                return search.ok(m) and not test(m)

            rows = _shrink(rows, bad)
            return Verdict(False, PropTeam.from_mask(domain, mask_of(rows)), counters)
    return Verdict(True, None, counters)


def brute_entails_prop(premises: Sequence[Formula], concl: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    """Exact entailment by checking every team over the joint free variables."""
    fs = _require(list(premises) + [concl], PROP_FAMILY, "brute_entails_prop")
    return _prop_entails(fs[:-1], concl, caps)


def brute_valid_prop(f: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    return brute_entails_prop([], f, caps)


def qplind_entails(premises: Sequence[Formula], concl: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    """Entailment in quantified propositional independence logic (team enumeration)."""
    fs = _require(list(premises) + [concl], QPLIND_FEATURES, "qplind_entails")
    return _prop_entails(fs[:-1], concl, caps)


def full_team_valid(f: Formula, caps: Caps = DEFAULT_CAPS) -> bool:
    """Validity of a downward-closed formula: the full team over Fr(φ) satisfies it."""
    if not is_downward_closed(f):
        raise FragmentError("full-team validity test needs a downward-closed formula")
    _require([f], PROP_FAMILY, "full_team_valid")
    domain = _joint_domain([f], caps)
    return check_prop(PropTeam.full(domain), f)


# ---------------------------------------------------------------- MaxSub


def _maxsub_mask(domain: Tuple[str, ...], mask: int, f: Formula, engine: Optional[_MaxSub] = None) -> int:
    return (engine or _MaxSub()).run(f, _PropSpace(tuple(domain)), mask)


def maxsub(team: PropTeam, f: Formula) -> PropTeam:
    """The unique maximal Y ⊆ X with Y ⊨ φ (φ in quantified inclusion logic)."""
    require_features(f, QPLINC_FEATURES, "maxsub")
    missing = free_vars(f) - set(team.domain)
    if missing:
        raise FragmentError(f"free variables {sorted(missing)} not in team domain")
    out = _maxsub_mask(team.domain, team.to_mask(), f)
    return PropTeam.from_mask(team.domain, out)


def qplinc_entails(premises: Sequence[Formula], concl: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    """Σ ⊨ φ in QPLInc: every team fixed by MaxSub of all premises is fixed by MaxSub of φ."""
    fs = _require(list(premises) + [concl], QPLINC_FEATURES, "qplinc_entails")
    premises = fs[:-1]
    domain = _joint_domain(fs, caps)
    counters: Dict[str, int] = {"teams": 0}
    engine = _MaxSub()
    ev = new_evaluator()
    rows = list(members(_universe(domain, premises, ev)))

    def fixed(mask, f):
        if len(engine.memo) > 1_000_000:
            engine.memo.clear()
        return _maxsub_mask(domain, mask, f, engine) == mask

    def bad(mask):
        return all(fixed(mask, p) for p in premises) and not fixed(mask, concl)

    for k in range(1 << len(rows)):
        mask = mask_of(r for i, r in enumerate(rows) if k >> i & 1)
        counters["teams"] += 1
        if bad(mask):
            keep = _shrink(frozenset(members(mask)), lambda t: bad(mask_of(t)))
            return Verdict(False, PropTeam.from_mask(domain, mask_of(keep)), counters)
    return Verdict(True, None, counters)


def star_inclusions(f: Formula, prefix: Sequence[str]) -> Formula:
    """φ*: every inclusion q⃗ ⊆ r⃗ becomes p⃗q⃗ ⊆ p⃗r⃗."""
    prefix = tuple(prefix)
    if isinstance(f, Incl):
        return Incl(prefix + f.left, prefix + f.right)
    kids = f.children()
    if not kids:
        return f
    return f.with_children([star_inclusions(k, prefix) for k in kids])


def qplinc_valid(f: Formula, caps: Caps = DEFAULT_CAPS) -> Verdict:
    """Validity via {∅} ⊨ ∀p⃗ φ*(p⃗) with p⃗ the free variables."""
    require_features(f, QPLINC_FEATURES, "qplinc_valid")
    domain = _joint_domain([f], caps)
    g = star_inclusions(rename_bound_apart(f, domain), domain)
    for v in reversed(domain):
        g = Forall(v, g)
    engine = _MaxSub()
    ok = _maxsub_mask((), 1, g, engine) == 1
    counters = {"maxsub_iterations": engine.iterations}
    if ok:
        return Verdict(True, None, counters)
    for i in range(1 << len(domain)):
        if _maxsub_mask(domain, 1 << i, f, engine) != 1 << i:
            return Verdict(False, PropTeam(domain, frozenset({index_row(i, len(domain))})), counters)
    raise AssertionError("quantified form rejected but every singleton satisfies the formula")


def singletons_valid(f: Formula, caps: Caps = DEFAULT_CAPS) -> bool:
    """Direct check that every singleton team over Fr(φ) satisfies φ."""
    domain = _joint_domain([f], caps)
    ev = new_evaluator(maxsub_exists=False)  # stay independent of the MaxSub engine
    return all(check_prop_mask(domain, 1 << i, f, ev) for i in range(1 << len(domain)))


# ------------------------------------------------------ modal brute force


def _edge_sets(n: int, team_size: int) -> Iterator[frozenset]:
    pairs = [(a, b) for a in range(n) for b in range(n)]
    for k in range(1 << len(pairs)):
        edges = frozenset(p for i, p in enumerate(pairs) if k >> i & 1)
        # every world must be reachable from the team (generated submodels suffice)
        seen = set(range(team_size))
        frontier = list(seen)
        while frontier:
            a = frontier.pop()
            for x, b in edges:
                if x == a and b not in seen:
                    seen.add(b)
                    frontier.append(b)
        if len(seen) == n:
            yield edges


def brute_sat_modal(f: Formula, bound: int = 3, caps: Caps = DEFAULT_CAPS) -> Optional[ModalWitness]:
    """First (model, non-empty team) satisfying φ with at most ``bound`` worlds."""
    require_features(f, ("or", "box", "diamond", "dep", "edep", "ind", "inc", "idisj"), "brute_sat_modal")
    if bound > caps.max_worlds:
        raise ResourceError(f"world bound {bound} exceeds cap {caps.max_worlds}")
    vs = sorted(free_vars(f))
    for n in range(1, bound + 1):
        for t in range(1, n + 1):
            team = frozenset(range(t))
            for edges in _edge_sets(n, t):
                for bits in product((0, 1), repeat=n * len(vs)):
                    val = {v: frozenset(w for w in range(n) if bits[j * n + w]) for j, v in enumerate(vs)}
                    model = KripkeModel(n, edges, val)
                    if check_modal(model, team, f):
                        return ModalWitness(model, team)
    return None


def brute_entails_modal(premises: Sequence[Formula], concl: Formula, bound: int = 3, caps: Caps = DEFAULT_CAPS) -> Verdict:
    """Entailment restricted to models with at most ``bound`` worlds.

    A False answer comes with a genuine countermodel; True only certifies the
    absence of small countermodels.
    """
    fs = list(premises) + [concl]
    for f in fs:
        require_features(f, ("or", "box", "diamond", "dep", "edep", "ind", "inc", "idisj"), "brute_entails_modal")
    if bound > caps.max_worlds:
        raise ResourceError(f"world bound {bound} exceeds cap {caps.max_worlds}")
    vs = sorted(set().union(*(free_vars(f) for f in fs)))
    counters = {"models": 0, "bound": bound}
    for n in range(1, bound + 1):
        for t in range(1, n + 1):
            team = frozenset(range(t))
            for edges in _edge_sets(n, t):
                for bits in product((0, 1), repeat=n * len(vs)):
                    val = {v: frozenset(w for w in range(n) if bits[j * n + w]) for j, v in enumerate(vs)}
                    model = KripkeModel(n, edges, val)
                    counters["models"] += 1
                    if all(check_modal(model, team, p) for p in premises) and not check_modal(model, team, concl):
                        return Verdict(False, ModalWitness(model, team), counters)
    return Verdict(True, None, counters)


def verdict_to_json(v: Verdict) -> Dict[str, Any]:
    from .parser import kripke_to_json, team_to_json

    out: Dict[str, Any] = {"answer": v.answer, "counters": dict(v.counters)}
    w = v.witness
    if isinstance(w, PropTeam):
        out["witness"] = {"team": team_to_json(w)}
    elif isinstance(w, ModalWitness):
        out["witness"] = {"model": kripke_to_json(w.model), "team": sorted(w.team)}
    elif w is not None:
        out["witness"] = repr(w)
    return out
