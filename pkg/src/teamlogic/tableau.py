"""Tableau for pointed satisfiability of RML against fixed relation interpretations.

``Sat(A, B, C, D)`` asks for a world where every formula of A holds, every
formula of B fails, every successor satisfies all of C, and for each formula of
D some successor refutes it.  Decomposition works on one world until only
atoms remain; then one successor per member of D is built from C.

The recursion runs on an explicit stack of generator frames, so deep inputs
do not hit the interpreter's recursion limit.  The maximum stack height is
recorded for every run.

Two leaf guards are available.  The default spawns successors whenever D is
non-empty.  ``literal=True`` spawns them only when C and D intersect, which
accepts formulas such as □(p∧q) ∧ ∼□p that have no model; it is kept to make
that difference observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Generator, List, Mapping, Optional, Tuple, Union

from .errors import FragmentError, ModelError
from .models import KripkeModel
from .syntax import And, Atom, Box, CNeg, Formula, NegAtom, Rel, node_count, relation_symbols, require_features
from .witness import RelationOracle

RML_FEATURES = ("box", "cneg", "rel")

# A successful run returns a tree (true atoms at the world, child trees).
_Tree = Tuple[frozenset, tuple]


@dataclass(frozen=True)
class TableauState:
    A: Tuple[Formula, ...] = ()
    B: Tuple[Formula, ...] = ()
    C: Tuple[Formula, ...] = ()
    D: Tuple[Formula, ...] = ()

    def __post_init__(self):
        for name in "ABCD":
            fs = tuple(dict.fromkeys(getattr(self, name)))
            for f in fs:
                require_features(f, RML_FEATURES, "tableau")
            object.__setattr__(self, name, fs)


@dataclass
class TableauResult:
    satisfiable: bool
    model: Optional[KripkeModel] = None
    world: int = 0
    max_depth: int = 0
    calls: int = 0


def _add(seq: Tuple[Formula, ...], *fs: Formula) -> Tuple[Formula, ...]:
    out = list(seq)
    for f in fs:
        if f not in out:
            out.append(f)
    return tuple(out)


def _drop(seq: Tuple[Formula, ...], f: Formula) -> Tuple[Formula, ...]:
    return tuple(g for g in seq if g != f)


_Frame = Generator[tuple, Optional[_Tree], Optional[_Tree]]


def _frame(A, B, C, D, oracle: RelationOracle, literal: bool) -> _Frame:
    for side in (0, 1):
        seq = A if side == 0 else B
        for phi in seq:
            if not isinstance(phi, Atom):
                break
        else:
            continue
        if side == 0:
            A0 = _drop(A, phi)
            if isinstance(phi, NegAtom):
                return (yield (A0, _add(B, Atom(phi.name)), C, D))
            if isinstance(phi, CNeg):
                return (yield (A0, _add(B, phi.sub), C, D))
            if isinstance(phi, And):
                return (yield (_add(A0, phi.left, phi.right), B, C, D))
            if isinstance(phi, Box):
                return (yield (A0, B, _add(C, phi.sub), D))
            if isinstance(phi, Rel):
                for bits in oracle.tuples(phi.symbol):
                    res = yield _rel_branch(A0, B, C, D, phi, bits)
                    if res is not None:
                        return res
                return None
        else:
            B0 = _drop(B, phi)
            if isinstance(phi, NegAtom):
                return (yield (_add(A, Atom(phi.name)), B0, C, D))
            if isinstance(phi, CNeg):
                return (yield (_add(A, phi.sub), B0, C, D))
            if isinstance(phi, And):
                for part in (phi.left, phi.right):
                    res = yield (A, _add(B0, part), C, D)
                    if res is not None:
                        return res
                return None
            if isinstance(phi, Box):
                return (yield (A, B0, C, _add(D, phi.sub)))
            if isinstance(phi, Rel):
                for bits in oracle.complement(phi.symbol):
                    res = yield _rel_branch(A, B0, C, D, phi, bits)
                    if res is not None:
                        return res
                return None
        raise FragmentError(f"tableau cannot decompose {type(phi).__name__}")

    # only atoms left
    if set(A) & set(B):
        return None
    true_atoms = frozenset(a.name for a in A)
    spawn = bool(set(C) & set(D)) if literal else bool(D)
    if not spawn:
        return (true_atoms, ())
    kids = []
    for delta in D:
        res = yield (C, (delta,), (), ())
        if res is None:
            return None
        kids.append(res)
    return (true_atoms, tuple(kids))


def _rel_branch(A, B, C, D, phi: Rel, bits):
    if len(bits) != len(phi.args):
        raise ModelError(f"relation {phi.symbol} has arity {len(bits)}, used with {len(phi.args)}")
    pos = [a for a, b in zip(phi.args, bits) if b]
    neg = [a for a, b in zip(phi.args, bits) if not b]
    return (_add(A, *pos), _add(B, *neg), C, D)


def _drive(state: TableauState, oracle: RelationOracle, literal: bool) -> Tuple[Optional[_Tree], int, int]:
    stack: List[_Frame] = [_frame(state.A, state.B, state.C, state.D, oracle, literal)]
    max_depth = calls = 1
    value: Optional[_Tree] = None
    while stack:
        try:
            req = stack[-1].send(value)
        except StopIteration as stop:
            stack.pop()
            value = stop.value
            continue
        stack.append(_frame(*req, oracle, literal))
        calls += 1
        if len(stack) > max_depth:
            max_depth = len(stack)
        value = None
    return value, max_depth, calls


def _tree_to_model(tree: _Tree, oracle: RelationOracle) -> KripkeModel:
    order: List[_Tree] = [tree]
    edges = []
    i = 0
    while i < len(order):
        for kid in order[i][1]:
            edges.append((i, len(order)))
            order.append(kid)
        i += 1
    val: Dict[str, set] = {}
    for w, (atoms_true, _) in enumerate(order):
        for v in atoms_true:
            val.setdefault(v, set()).add(w)
    return KripkeModel(len(order), frozenset(edges), {v: frozenset(ws) for v, ws in val.items()}, oracle.relations())


def as_oracle(oracle: Union[RelationOracle, Mapping, None], *formulas: Formula) -> RelationOracle:
    """Accept a RelationOracle or a plain symbol -> tuples mapping."""
    if isinstance(oracle, RelationOracle):
        return oracle
    arities: Dict[str, int] = {}
    for f in formulas:
        arities.update(relation_symbols(f))
    # an empty table for a symbol no formula mentions carries no arity
    rels = {s: t for s, t in dict(oracle or {}).items() if t or s in arities}
    return RelationOracle(rels, arities)


def run(
    state: TableauState,
    oracle: Union[RelationOracle, Mapping, None] = None,
    literal: bool = False,
    build_model: bool = True,
) -> TableauResult:
    """Decide Sat(A, B, C, D) and, on success, build the model the run found."""
    fs = state.A + state.B + state.C + state.D
    oracle = as_oracle(oracle, *fs)
    for f in fs:
        for sym in relation_symbols(f):
            oracle.arity(sym)  # raises for unresolvable symbols
    tree, depth, calls = _drive(state, oracle, literal)
    if tree is None:
        return TableauResult(False, max_depth=depth, calls=calls)
    model = _tree_to_model(tree, oracle) if build_model else None
    return TableauResult(True, model, 0, depth, calls)


def sat(state: TableauState, oracle: Union[RelationOracle, Mapping, None] = None, literal: bool = False) -> bool:
    return run(state, oracle, literal, build_model=False).satisfiable


def rml_satisfiable(f: Formula, oracle: Union[RelationOracle, Mapping, None] = None, literal: bool = False) -> bool:
    """Sat({φ}, ∅, ∅, ∅)."""
    return sat(TableauState((f,)), oracle, literal)


def rml_model(f: Formula, oracle: Union[RelationOracle, Mapping, None] = None) -> Optional[Tuple[KripkeModel, int]]:
    """A pointed relational model of ``f`` (relations from the oracle), or None."""
    res = run(TableauState((f,)), oracle)
    return (res.model, res.world) if res.satisfiable else None


def depth_bound(f: Formula) -> int:
    return 2 * node_count(f) + 1
