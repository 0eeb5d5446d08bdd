"""Witness functions for dependence atoms and the translation into RML.

A dependence atom dep(a1..an, b) holds in a team exactly when some Boolean
function f explains the value of b from the values of the a's.  Replacing the
atom by the ML formula D(f, d) removes the dependence; replacing it by a
relation symbol interpreted as the graph of f gives the relational form that
the tableau decides.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import FragmentError, ModelError
from .models import row_index
from .syntax import (
    And,
    Atom,
    Box,
    CNeg,
    Dep,
    Diamond,
    Formula,
    IDisj,
    NegAtom,
    Or,
    Path,
    Rel,
    conj,
    dep_occurrences,
    disj,
    negate_nnf,
)

Bits = Tuple[int, ...]


@dataclass(frozen=True)
class WitnessFunction:
    """Truth table of f: {0,1}^arity -> {0,1}; entry b is f at big-endian index b."""

    arity: int
    table: Tuple[int, ...]

    def __post_init__(self):
        table = tuple(int(b) for b in self.table)
        if self.arity < 0:
            raise ValueError("negative arity")
        if len(table) != 1 << self.arity:
            raise ValueError(f"table of length {len(table)} does not fit arity {self.arity}")
        if any(b not in (0, 1) for b in table):
            raise ValueError("witness table entries must be 0 or 1")
        object.__setattr__(self, "table", table)

    def __call__(self, bits: Sequence[int]) -> int:
        if len(bits) != self.arity:
            raise ValueError("argument count differs from arity")
        return self.table[row_index(tuple(bits))]

    @property
    def code(self) -> int:
        """The table read as an integer, entry 0 being the least significant bit."""
        return sum(b << i for i, b in enumerate(self.table))

    @classmethod
    def from_code(cls, arity: int, code: int) -> "WitnessFunction":
        n = 1 << arity
        if not 0 <= code < 1 << n:
            raise ValueError("code out of range for arity")
        return cls(arity, tuple(code >> i & 1 for i in range(n)))

    @classmethod
    def identity(cls) -> "WitnessFunction":
        return cls(1, (0, 1))

    @classmethod
    def constant(cls, arity: int, value: int) -> "WitnessFunction":
        return cls(arity, (value,) * (1 << arity))

    def graph(self) -> frozenset:
        return frozenset(a + (self(a),) for a in product((0, 1), repeat=self.arity))


WitnessSequence = Tuple[WitnessFunction, ...]


def all_witnesses(arity: int) -> Iterator[WitnessFunction]:
    """Every function of the given arity, tables counted upward as integers."""
    for code in range(1 << (1 << arity)):
        yield WitnessFunction.from_code(arity, code)


def witness_count(arity: int) -> int:
    return 1 << (1 << arity)


def dep_atoms(f: Formula) -> List[Dep]:
    """Dependence-atom occurrences in preorder, repetitions included."""
    return [d for _, d in dep_occurrences(f)]


def witness_sequences(f: Formula) -> Iterator[WitnessSequence]:
    """All witness sequences for ``f``, mixed-radix with the first atom slowest."""
    arities = [d.arity for d in dep_atoms(f)]
    return (tuple(seq) for seq in product(*(list(all_witnesses(a)) for a in arities)))


def sequence_count(f: Formula) -> int:
    n = 1
    for d in dep_atoms(f):
        n *= witness_count(d.arity)
    return n


def _power(f: Formula, bit: int) -> Formula:
    return f if bit else negate_nnf(f)


def witness_formula(fn: WitnessFunction, d: Dep) -> Formula:
    """D(f, d): splitting disjunction over argument vectors, all-true vector first."""
    if fn.arity != d.arity:
        raise ValueError(f"witness of arity {fn.arity} for a dependence atom of arity {d.arity}")
    parts = []
    for a in product((1, 0), repeat=d.arity):
        lits = [_power(x, b) for x, b in zip(d.args, a)]
        lits.append(_power(d.target, fn(a)))
        parts.append(conj(*lits))
    return disj(*parts)


def _check_sequence(f: Formula, seq: Sequence[WitnessFunction]) -> List[Tuple[Path, Dep]]:
    occ = dep_occurrences(f)
    if len(occ) != len(seq):
        raise ValueError(f"{len(seq)} witnesses for {len(occ)} dependence atoms")
    for (_, d), fn in zip(occ, seq):
        if d.arity != fn.arity:
            raise ValueError(f"witness arity {fn.arity} does not match atom arity {d.arity}")
    return occ


def _replace_deps(f: Formula, repl: Iterator[Formula]) -> Formula:
    if isinstance(f, Dep):
        return next(repl)
    kids = f.children()
    if not kids:
        return f
    return f.with_children([_replace_deps(k, repl) for k in kids])


def substitute_witnesses(f: Formula, seq: Sequence[WitnessFunction]) -> Formula:
    """φ(f⃗/d⃗): every dependence atom replaced by its witnessing ML formula."""
    occ = _check_sequence(f, seq)
    if not occ:
        return f
    repl = iter([witness_formula(fn, d) for (_, d), fn in zip(occ, seq)])
    return _replace_deps(f, repl)


# ------------------------------------------------------------ relational side


def default_symbols(k: int, start: int = 1) -> List[str]:
    return [f"S_{i}" for i in range(start, start + k)]


def star_translate(f: Formula, symbols: Optional[Sequence[str]] = None) -> Formula:
    """Rewrite into RML: dep atoms become relation atoms, ¬, ◇ and ∨ become ∼-forms.

    ``symbols`` names the relation for each dependence occurrence in preorder;
    by default S_1, S_2, ... are used.
    """
    occ = dep_occurrences(f)
    if symbols is None:
        symbols = default_symbols(len(occ))
    if len(symbols) != len(occ):
        raise ValueError(f"{len(symbols)} symbols for {len(occ)} dependence atoms")
    it = iter(symbols)
    return _star(f, it)


def _star(f: Formula, it: Iterator[str]) -> Formula:
    if isinstance(f, Atom):
        return f
    if isinstance(f, NegAtom):
        return CNeg(Atom(f.name))
    if isinstance(f, And):
        return And(_star(f.left, it), _star(f.right, it))
    if isinstance(f, Or):
        return CNeg(And(CNeg(_star(f.left, it)), CNeg(_star(f.right, it))))
    if isinstance(f, Box):
        return Box(_star(f.sub, it))
    if isinstance(f, Diamond):
        return CNeg(Box(CNeg(_star(f.sub, it))))
    if isinstance(f, CNeg):
        return CNeg(_star(f.sub, it))
    if isinstance(f, Dep):
        sym = next(it)
        args = tuple(_star(a, iter(())) for a in f.args) + (_star(f.target, iter(())),)
        return Rel(sym, args)
    if isinstance(f, Rel):
        return Rel(f.symbol, tuple(_star(a, it) for a in f.args))
    if isinstance(f, IDisj):
        raise FragmentError("intuitionistic disjunction has no relational translation")
    raise FragmentError(f"cannot translate {type(f).__name__} into RML")


class RelationOracle:
    """Fixed interpretations of relation symbols as sets of bit tuples."""

    def __init__(self, relations: Mapping[str, Iterable[Bits]], arities: Optional[Mapping[str, int]] = None):
        self._rel: Dict[str, frozenset] = {}
        self._arity: Dict[str, int] = {}
        for sym, tuples in relations.items():
            tuples = frozenset(tuple(int(b) for b in t) for t in tuples)
            ars = {len(t) for t in tuples}
            if arities and sym in arities:
                ars.add(arities[sym])
            if len(ars) > 1:
                raise ModelError(f"relation {sym} mixes arities")
            if not ars:
                raise ModelError(f"arity of empty relation {sym} must be given")
            self._rel[sym] = tuples
            self._arity[sym] = ars.pop()
        self._pos = {s: sorted(t) for s, t in self._rel.items()}
        self._neg = {
            s: [b for b in product((0, 1), repeat=self._arity[s]) if b not in t] for s, t in self._rel.items()
        }

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._rel

    @property
    def symbols(self) -> List[str]:
        return sorted(self._rel)

    def arity(self, symbol: str) -> int:
        self._need(symbol)
        return self._arity[symbol]

    def member(self, symbol: str, bits: Sequence[int]) -> bool:
        self._need(symbol)
        return tuple(bits) in self._rel[symbol]

    def tuples(self, symbol: str) -> List[Bits]:
        """Members of the relation in ascending order."""
        self._need(symbol)
        return self._pos[symbol]

    def complement(self, symbol: str) -> List[Bits]:
        """Non-members over {0,1}^arity in ascending order."""
        self._need(symbol)
        return self._neg[symbol]

    def relations(self) -> Dict[str, frozenset]:
        return dict(self._rel)

    def _need(self, symbol: str) -> None:
        if symbol not in self._rel:
            raise ModelError(f"no interpretation for relation {symbol}")

    def __repr__(self) -> str:
        body = ", ".join(f"{s}/{self._arity[s]}={sorted(self._rel[s])}" for s in self.symbols)
        return f"RelationOracle({body})"


def oracle_from_witnesses(seq: Sequence[WitnessFunction], symbols: Optional[Sequence[str]] = None) -> RelationOracle:
    """S_i interpreted as the graph {(a⃗, f_i(a⃗))} of the i-th witness."""
    if symbols is None:
        symbols = default_symbols(len(seq))
    if len(symbols) != len(seq):
        raise ValueError("one symbol per witness function is required")
    rels: Dict[str, frozenset] = {}
    ars: Dict[str, int] = {}
    for sym, fn in zip(symbols, seq):
        g = fn.graph()
        if sym in rels and rels[sym] != g:
            raise ModelError(f"symbol {sym} assigned two different witnesses")
        rels[sym] = g
        ars[sym] = fn.arity + 1
    return RelationOracle(rels, ars)
