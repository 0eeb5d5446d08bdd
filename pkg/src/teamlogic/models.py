"""Kripke models, propositional teams and the team-building operations."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

from .errors import ModelError
from .syntax import Var, make_var

Team = FrozenSet[int]
Row = Tuple[int, ...]


def mask_of(worlds: Iterable[int]) -> int:
    m = 0
    for w in worlds:
        m |= 1 << w
    return m


def members(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` in ascending numeric order."""
    bits = list(members(mask))
    for k in range(1 << len(bits)):
        m = 0
        for i, b in enumerate(bits):
            if k >> i & 1:
                m |= 1 << b
        yield m


@dataclass(frozen=True)
class KripkeModel:
    """Worlds 0..n-1, accessibility pairs, valuation and optional Boolean relations."""

    n: int
    edges: FrozenSet[Tuple[int, int]] = frozenset()
    val: Mapping[Var, FrozenSet[int]] = field(default_factory=dict)
    relations: Mapping[str, FrozenSet[Tuple[int, ...]]] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise ModelError("negative world count")
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        for a, b in edges:
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ModelError(f"edge ({a},{b}) references a missing world")
        val = {}
        for v, ws in self.val.items():
            ws = frozenset(int(w) for w in ws)
            if any(not 0 <= w < self.n for w in ws):
                raise ModelError(f"valuation of {v} references a missing world")
            val[make_var(v)] = ws
        rels = {}
        for s, tuples in self.relations.items():
            tuples = frozenset(tuple(int(b) for b in t) for t in tuples)
            if len({len(t) for t in tuples}) > 1:
                raise ModelError(f"relation {s} mixes arities")
            if any(b not in (0, 1) for t in tuples for b in t):
                raise ModelError(f"relation {s} has a non-Boolean entry")
            rels[s] = tuples
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "val", val)
        object.__setattr__(self, "relations", rels)
        succ = [0] * self.n
        for a, b in edges:
            succ[a] |= 1 << b
        object.__setattr__(self, "_succ", tuple(succ))
        object.__setattr__(self, "_valmask", {v: mask_of(ws) for v, ws in val.items()})

    @property
    def worlds(self) -> Team:
        return frozenset(range(self.n))

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def succ_mask(self, w: int) -> int:
        return self._succ[w]

    def val_mask(self, v: Var) -> int:
        return self._valmask.get(v, 0)

    def check_team(self, team: Iterable[int]) -> Team:
        team = frozenset(team)
        if any(not 0 <= w < self.n for w in team):
            raise ModelError("team contains a world outside the model")
        return team

    def relation_arity(self, symbol: str) -> Optional[int]:
        tuples = self.relations.get(symbol)
        if not tuples:
            return None
        return len(next(iter(tuples)))


def successors_mask(model: KripkeModel, mask: int) -> int:
    out = 0
    for w in members(mask):
        out |= model.succ_mask(w)
    return out


def successors(model: KripkeModel, team: Iterable[int]) -> Team:
    """R[T]: worlds reachable in one step from some member of T."""
    return frozenset(members(successors_mask(model, mask_of(model.check_team(team)))))


def successor_team_masks(model: KripkeModel, mask: int) -> Iterator[int]:
    """R⟨T⟩ as bitmasks, ascending; lazy."""
    need = [model.succ_mask(w) for w in members(mask)]
    if any(s == 0 for s in need):
        return
    for sub in submasks(successors_mask(model, mask)):
        if all(sub & s for s in need):
            yield sub


def successor_teams(model: KripkeModel, team: Iterable[int]) -> Iterator[Team]:
    """Legal successor teams R⟨T⟩ in ascending bitmask order."""
    for m in successor_team_masks(model, mask_of(model.check_team(team))):
        yield frozenset(members(m))


# ------------------------------------------------------------------ teams


@dataclass(frozen=True)
class PropTeam:
    """A set of total assignments over an ordered variable list."""

    domain: Tuple[Var, ...]
    rows: FrozenSet[Row] = frozenset()

    def __post_init__(self):
        domain = tuple(make_var(v) for v in self.domain)
        if len(set(domain)) != len(domain):
            raise ModelError("duplicate variable in team domain")
        rows = frozenset(tuple(int(b) for b in r) for r in self.rows)
        for r in rows:
            if len(r) != len(domain):
                raise ModelError("row arity differs from domain size")
            if any(b not in (0, 1) for b in r):
                raise ModelError("non-Boolean value in team row")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(sorted(self.rows))

    def index(self, v: Var) -> int:
        return self.domain.index(v)

    def assignments(self) -> Iterator[Dict[Var, int]]:
        for r in sorted(self.rows):
            yield dict(zip(self.domain, r))

    def to_mask(self) -> int:
        """Bitmask over the 2^k assignments; the first variable is the most significant bit."""
        return mask_of(row_index(r) for r in self.rows)

    @classmethod
    def from_mask(cls, domain: Sequence[Var], mask: int) -> "PropTeam":
        k = len(domain)
        return cls(tuple(domain), frozenset(index_row(i, k) for i in members(mask)))

    @classmethod
    def full(cls, domain: Sequence[Var]) -> "PropTeam":
        return cls(tuple(domain), frozenset(product((0, 1), repeat=len(domain))))

    @classmethod
    def from_dicts(cls, domain: Sequence[Var], rows: Iterable[Mapping[Var, int]]) -> "PropTeam":
        return cls(tuple(domain), frozenset(tuple(r[v] for v in domain) for r in rows))


def row_index(row: Row) -> int:
    i = 0
    for b in row:
        i = i << 1 | b
    return i


def index_row(i: int, k: int) -> Row:
    return tuple(i >> (k - 1 - j) & 1 for j in range(k))


def all_teams(domain: Sequence[Var]) -> Iterator[PropTeam]:
    """Every team over ``domain`` (2^(2^k) of them), by ascending mask."""
    k = len(domain)
    for m in range(1 << (1 << k)):
        yield PropTeam.from_mask(domain, m)


def _set_var(team: PropTeam, p: Var) -> Tuple[Tuple[Var, ...], int]:
    if p in team.domain:
        return team.domain, team.domain.index(p)
    return team.domain + (p,), len(team.domain)


def _with(row: Row, pos: int, a: int) -> Row:
    if pos == len(row):
        return row + (a,)
    return row[:pos] + (a,) + row[pos + 1:]


def duplicate(team: PropTeam, p: Var) -> PropTeam:
    """X[{0,1}/p]; an existing p column is overwritten."""
    p = make_var(p)
    domain, pos = _set_var(team, p)
    return PropTeam(domain, frozenset(_with(r, pos, a) for r in team.rows for a in (0, 1)))


def supplement(team: PropTeam, choice: Mapping[Row, Iterable[int]], p: Var) -> PropTeam:
    """X[F/p] where ``choice`` maps each row to a non-empty subset of {0,1}."""
    p = make_var(p)
    domain, pos = _set_var(team, p)
    rows = set()
    for r in team.rows:
        if r not in choice:
            raise ModelError(f"supplementation function undefined on row {r}")
        vals = set(choice[r])
        if not vals or not vals <= {0, 1}:
            raise ModelError(f"supplementation image for row {r} must be a non-empty subset of {{0,1}}")
        rows.update(_with(r, pos, a) for a in vals)
    return PropTeam(domain, frozenset(rows))


def induced_kripke(team: PropTeam) -> Tuple[KripkeModel, Team]:
    """M_X: one world per row, no edges; returns the model and the full team."""
    rows = sorted(team.rows)
    val = {v: frozenset(w for w, r in enumerate(rows) if r[i]) for i, v in enumerate(team.domain)}
    model = KripkeModel(len(rows), frozenset(), val)
    return model, model.worlds


def restrict(team: PropTeam, keep: Iterable[Var]) -> PropTeam:
    """X ↾ V′ with V′ ⊆ domain; domain order is preserved."""
    keep = set(keep)
    if not keep <= set(team.domain):
        raise ModelError(f"cannot restrict to variables outside the domain: {sorted(keep - set(team.domain))}")
    idx = [i for i, v in enumerate(team.domain) if v in keep]
    return PropTeam(tuple(team.domain[i] for i in idx), frozenset(tuple(r[i] for i in idx) for r in team.rows))


def extend_domain(team: PropTeam, domain: Sequence[Var]) -> PropTeam:
    """Reorder ``team`` to ``domain`` (must be a permutation of its domain)."""
    if set(domain) != set(team.domain) or len(domain) != len(team.domain):
        raise ModelError("domain mismatch")
    idx = [team.domain.index(v) for v in domain]
    return PropTeam(tuple(domain), frozenset(tuple(r[i] for i in idx) for r in team.rows))


def union(a: PropTeam, b: PropTeam) -> PropTeam:
    if a.domain != b.domain:
        b = extend_domain(b, a.domain)
    return PropTeam(a.domain, a.rows | b.rows)
