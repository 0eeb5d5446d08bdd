"""Formula AST shared by every logic in the workbench.

Negation normal form is structural: the only negation nodes are ``NegAtom``
(classical negation of a propositional variable) and ``CNeg`` (contradictory
negation, admitted only in relational modal logic).  Variables are interned
strings.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Tuple

from .errors import FragmentError

Var = str
Path = Tuple[int, ...]

IDENT_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_'#]*\Z")


def make_var(name: str) -> Var:
    if not isinstance(name, str) or not IDENT_RE.match(name):
        raise ValueError(f"invalid variable name {name!r}")
    return sys.intern(name)


class Formula:
    """Base class of all AST nodes.  Nodes are immutable and hash-cached."""

    __slots__ = ()

    def children(self) -> Tuple["Formula", ...]:
        return ()

    def with_children(self, kids: Sequence["Formula"]) -> "Formula":
        return self

    def __hash__(self) -> int:  # overridden per node by _cached_hash
        raise NotImplementedError


def _node(cls):
    """Freeze a node class and give it a cached structural hash."""
    cls = dataclass(frozen=True, eq=True, repr=True)(cls)
    fields = tuple(cls.__dataclass_fields__)

    def __hash__(self, _fields=fields, _name=cls.__name__):
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((_name,) + tuple(getattr(self, f) for f in _fields))
            object.__setattr__(self, "_h", h)
        return h

    cls.__hash__ = __hash__
    return cls


@_node
class Atom(Formula):
    name: Var

    def __post_init__(self):
        object.__setattr__(self, "name", make_var(self.name))


@_node
class NegAtom(Formula):
    name: Var

    def __post_init__(self):
        object.__setattr__(self, "name", make_var(self.name))


@_node
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def with_children(self, kids):
        return And(kids[0], kids[1])


@_node
class Or(Formula):
    """Splitting (tensor) disjunction."""

    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def with_children(self, kids):
        return Or(kids[0], kids[1])


@_node
class IDisj(Formula):
    """Intuitionistic disjunction: the whole team satisfies one side."""

    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def with_children(self, kids):
        return IDisj(kids[0], kids[1])


@_node
class Box(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)

    def with_children(self, kids):
        return Box(kids[0])


@_node
class Diamond(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)

    def with_children(self, kids):
        return Diamond(kids[0])


@_node
class CNeg(Formula):
    """Contradictory negation (relational modal logic only)."""

    sub: Formula

    def children(self):
        return (self.sub,)

    def with_children(self, kids):
        return CNeg(kids[0])


@_node
class Dep(Formula):
    """Dependence atom dep(args, target); arguments are ML formulas."""

    args: Tuple[Formula, ...]
    target: Formula

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        for f in self.args + (self.target,):
            if not is_ml(f):
                raise FragmentError(f"dependence atom argument is not an ML formula: {f!r}")

    def children(self):
        return self.args + (self.target,)

    def with_children(self, kids):
        return Dep(tuple(kids[:-1]), kids[-1])

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_plain(self) -> bool:
        return all(isinstance(f, Atom) for f in self.children())


@_node
class Indep(Formula):
    """Independence atom ind(cond; left; right) over variable lists."""

    cond: Tuple[Var, ...]
    left: Tuple[Var, ...]
    right: Tuple[Var, ...]

    def __post_init__(self):
        for f in ("cond", "left", "right"):
            object.__setattr__(self, f, tuple(make_var(v) for v in getattr(self, f)))


@_node
class Incl(Formula):
    """Inclusion atom left ⊆ right over equal-length variable lists."""

    left: Tuple[Var, ...]
    right: Tuple[Var, ...]

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(make_var(v) for v in self.left))
        object.__setattr__(self, "right", tuple(make_var(v) for v in self.right))
        if len(self.left) != len(self.right):
            raise FragmentError("inclusion atom sides differ in length")


@_node
class Exists(Formula):
    var: Var
    body: Formula

    def __post_init__(self):
        object.__setattr__(self, "var", make_var(self.var))

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return Exists(self.var, kids[0])


@_node
class Forall(Formula):
    var: Var
    body: Formula

    def __post_init__(self):
        object.__setattr__(self, "var", make_var(self.var))

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return Forall(self.var, kids[0])


@_node
class Rel(Formula):
    """Relational atom S(φ1, ..., φn) evaluated on truth values."""

    symbol: str
    args: Tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "symbol", sys.intern(self.symbol))

    def children(self):
        return self.args

    def with_children(self, kids):
        return Rel(self.symbol, tuple(kids))


ATOMIC = (Atom, NegAtom)
BINARY = (And, Or, IDisj)
QUANT = (Exists, Forall)

# ---------------------------------------------------------------- builders


def atoms(names: str) -> Tuple[Atom, ...]:
    return tuple(Atom(n) for n in names.split())


def conj(*fs: Formula) -> Formula:
    """Left-nested conjunction; at least one conjunct."""
    if not fs:
        raise ValueError("empty conjunction")
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs: Formula) -> Formula:
    if not fs:
        raise ValueError("empty disjunction")
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def idisj(*fs: Formula) -> Formula:
    if not fs:
        raise ValueError("empty intuitionistic disjunction")
    out = fs[0]
    for f in fs[1:]:
        out = IDisj(out, f)
    return out


def box_n(n: int, f: Formula) -> Formula:
    for _ in range(n):
        f = Box(f)
    return f


def dep(*names: str) -> Dep:
    """dep('p', 'q', 'r') is dep((p, q), r); the last name is the target."""
    if not names:
        raise ValueError("dependence atom needs a target")
    return Dep(tuple(Atom(n) for n in names[:-1]), Atom(names[-1]))


def top(v: str = "p") -> Formula:
    """The tautology convention v ∨ ¬v (no primitive constants)."""
    return Or(Atom(v), NegAtom(v))


def bottom(v: str = "p") -> Formula:
    return And(Atom(v), NegAtom(v))


def literal(name: str, value: int) -> Formula:
    return Atom(name) if value else NegAtom(name)


# --------------------------------------------------------------- traversal


def walk(f: Formula) -> Iterator[Formula]:
    """Preorder traversal (left to right)."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(g.children()))


def walk_paths(f: Formula, path: Path = ()) -> Iterator[Tuple[Path, Formula]]:
    stack = [(path, f)]
    while stack:
        p, g = stack.pop()
        yield p, g
        kids = g.children()
        for i in range(len(kids) - 1, -1, -1):
            stack.append((p + (i,), kids[i]))


def subformula(f: Formula, path: Path) -> Formula:
    for i in path:
        kids = f.children()
        if not 0 <= i < len(kids):
            raise IndexError(f"invalid subformula path {path}")
        f = kids[i]
    return f


def substitute(f: Formula, path: Path, theta: Formula) -> Formula:
    """Replace exactly the occurrence at ``path`` (child indices) by ``theta``."""
    if not path:
        return theta
    kids = f.children()
    i = path[0]
    if not 0 <= i < len(kids):
        raise IndexError(f"invalid subformula path {path}")
    new = list(kids)
    new[i] = substitute(kids[i], path[1:], theta)
    return f.with_children(new)


def map_bottom_up(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    kids = f.children()
    if kids:
        f = f.with_children([map_bottom_up(k, fn) for k in kids])
    return fn(f)


def size(f: Formula) -> int:
    """Symbol length: connectives, quantifier+variable, atoms with their variables."""
    n = 0
    for g in walk(f):
        if isinstance(g, Atom):
            n += 1
        elif isinstance(g, NegAtom):
            n += 2
        elif isinstance(g, QUANT):
            n += 2
        elif isinstance(g, Indep):
            n += 1 + len(g.cond) + len(g.left) + len(g.right)
        elif isinstance(g, Incl):
            n += 1 + 2 * len(g.left)
        else:
            n += 1
    return n


def node_count(f: Formula) -> int:
    return sum(1 for _ in walk(f))


def free_vars(f: Formula) -> frozenset:
    if isinstance(f, (Atom, NegAtom)):
        return frozenset((f.name,))
    if isinstance(f, Indep):
        return frozenset(f.cond + f.left + f.right)
    if isinstance(f, Incl):
        return frozenset(f.left + f.right)
    if isinstance(f, QUANT):
        return free_vars(f.body) - {f.var}
    out = frozenset()
    for k in f.children():
        out |= free_vars(k)
    return out


def all_vars(f: Formula) -> frozenset:
    """Every variable occurring in ``f``, bound or free."""
    out = set()
    for g in walk(f):
        if isinstance(g, (Atom, NegAtom)):
            out.add(g.name)
        elif isinstance(g, Indep):
            out.update(g.cond + g.left + g.right)
        elif isinstance(g, Incl):
            out.update(g.left + g.right)
        elif isinstance(g, QUANT):
            out.add(g.var)
    return frozenset(out)


def relation_symbols(f: Formula) -> dict:
    """Map each relation symbol to its arity; mixed arities are rejected."""
    out: dict = {}
    for g in walk(f):
        if isinstance(g, Rel):
            if out.setdefault(g.symbol, len(g.args)) != len(g.args):
                raise FragmentError(f"relation {g.symbol} used with two arities")
    return out


class FreshNames:
    """Supply of variables ``prefix#k`` avoiding a given set of names."""

    def __init__(self, avoid: Iterable[str] = ()):
        self.used = set(avoid)
        self.counter: dict = {}

    def __call__(self, prefix: str) -> Var:
        prefix = prefix.split("#", 1)[0]
        k = self.counter.get(prefix, 0)
        while True:
            k += 1
            name = f"{prefix}#{k}"
            if name not in self.used:
                break
        self.counter[prefix] = k
        self.used.add(name)
        return make_var(name)


def rename_free(f: Formula, mapping: Mapping[Var, Var], fresh: FreshNames | None = None) -> Formula:
    """Capture-avoiding renaming of free variables."""
    if not mapping:
        return f
    if isinstance(f, Atom):
        return Atom(mapping.get(f.name, f.name))
    if isinstance(f, NegAtom):
        return NegAtom(mapping.get(f.name, f.name))
    if isinstance(f, Indep):
        m = lambda vs: tuple(mapping.get(v, v) for v in vs)
        return Indep(m(f.cond), m(f.left), m(f.right))
    if isinstance(f, Incl):
        return Incl(tuple(mapping.get(v, v) for v in f.left), tuple(mapping.get(v, v) for v in f.right))
    if isinstance(f, QUANT):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        var = f.var
        if var in inner.values():
            if fresh is None:
                fresh = FreshNames(all_vars(f) | set(mapping) | set(mapping.values()))
            new = fresh(var)
            inner[var] = new
            var = new
        return type(f)(var, rename_free(f.body, inner, fresh))
    kids = f.children()
    if not kids:
        return f
    return f.with_children([rename_free(k, mapping, fresh) for k in kids])


def rename_bound_apart(f: Formula, avoid: Iterable[str] = (), fresh: FreshNames | None = None) -> Formula:
    """Give every binder a fresh variable, distinct from ``avoid`` and from each other."""
    if fresh is None:
        fresh = FreshNames(set(avoid) | all_vars(f))
    return _rename_bound(f, {}, fresh)


def _rename_bound(f: Formula, env: Mapping[Var, Var], fresh: FreshNames) -> Formula:
    if isinstance(f, Atom):
        return Atom(env.get(f.name, f.name))
    if isinstance(f, NegAtom):
        return NegAtom(env.get(f.name, f.name))
    if isinstance(f, Indep):
        m = lambda vs: tuple(env.get(v, v) for v in vs)
        return Indep(m(f.cond), m(f.left), m(f.right))
    if isinstance(f, Incl):
        return Incl(tuple(env.get(v, v) for v in f.left), tuple(env.get(v, v) for v in f.right))
    if isinstance(f, QUANT):
        new = fresh(f.var)
        return type(f)(new, _rename_bound(f.body, {**env, f.var: new}, fresh))
    kids = f.children()
    if not kids:
        return f
    return f.with_children([_rename_bound(k, env, fresh) for k in kids])


# ------------------------------------------------------------ negation


def negate_nnf(f: Formula) -> Formula:
    """Classical dual φ^⊥ with negation pushed to the atoms."""
    if isinstance(f, Atom):
        return NegAtom(f.name)
    if isinstance(f, NegAtom):
        return Atom(f.name)
    if isinstance(f, And):
        return Or(negate_nnf(f.left), negate_nnf(f.right))
    if isinstance(f, Or):
        return And(negate_nnf(f.left), negate_nnf(f.right))
    if isinstance(f, Box):
        return Diamond(negate_nnf(f.sub))
    if isinstance(f, Diamond):
        return Box(negate_nnf(f.sub))
    if isinstance(f, Exists):
        return Forall(f.var, negate_nnf(f.body))
    if isinstance(f, Forall):
        return Exists(f.var, negate_nnf(f.body))
    raise FragmentError(f"cannot dualise non-classical node {type(f).__name__}")


# ------------------------------------------------------------ fragments


class Fragment(str, Enum):
    PL = "PL"
    ML = "ML"
    PDL = "PDL"
    MDL = "MDL"
    EMDL = "EMDL"
    PLIDisj = "PLIDisj"
    MLIDisj = "MLIDisj"
    PLInc = "PLInc"
    MLInc = "MLInc"
    PLInd = "PLInd"
    MLInd = "MLInd"
    QPL = "QPL"
    QPDL = "QPDL"
    QPLInc = "QPLInc"
    QPLInd = "QPLInd"
    QPLIDisj = "QPLIDisj"
    RML = "RML"


_MODAL = frozenset({"or", "box", "diamond"})

# Checked in this order; the first smallest admitting fragment wins.
FRAGMENT_FEATURES = {
    Fragment.PL: frozenset({"or"}),
    Fragment.ML: _MODAL,
    Fragment.PDL: frozenset({"or", "dep"}),
    Fragment.MDL: _MODAL | {"dep"},
    Fragment.EMDL: _MODAL | {"dep", "edep"},
    Fragment.PLIDisj: frozenset({"or", "idisj"}),
    Fragment.MLIDisj: _MODAL | {"idisj"},
    Fragment.PLInc: frozenset({"or", "inc"}),
    Fragment.MLInc: _MODAL | {"inc"},
    Fragment.PLInd: frozenset({"or", "dep", "ind"}),
    Fragment.MLInd: _MODAL | {"dep", "ind"},
    Fragment.QPL: frozenset({"or", "quant"}),
    Fragment.QPDL: frozenset({"or", "quant", "dep"}),
    Fragment.QPLInc: frozenset({"or", "quant", "inc"}),
    Fragment.QPLInd: frozenset({"or", "quant", "dep", "ind"}),
    Fragment.QPLIDisj: frozenset({"or", "quant", "idisj"}),
    Fragment.RML: frozenset({"box", "cneg", "rel"}),
}


def features(f: Formula) -> frozenset:
    out = set()
    for g in walk(f):
        if isinstance(g, Or):
            out.add("or")
        elif isinstance(g, Box):
            out.add("box")
        elif isinstance(g, Diamond):
            out.add("diamond")
        elif isinstance(g, IDisj):
            out.add("idisj")
        elif isinstance(g, Dep):
            out.add("dep")
            if not g.is_plain:
                out.add("edep")
        elif isinstance(g, Indep):
            out.add("ind")
        elif isinstance(g, Incl):
            out.add("inc")
        elif isinstance(g, QUANT):
            out.add("quant")
        elif isinstance(g, CNeg):
            out.add("cneg")
        elif isinstance(g, Rel):
            out.add("rel")
    return frozenset(out)


def classify(f: Formula) -> Fragment:
    """Minimal fragment admitting every node of ``f``."""
    feats = features(f)
    best = None
    for frag, allowed in FRAGMENT_FEATURES.items():
        if feats <= allowed and (best is None or len(allowed) < len(FRAGMENT_FEATURES[best])):
            best = frag
    if best is None:
        raise FragmentError(f"no fragment admits the combination {sorted(feats)}")
    return best


def fragment_leq(a: Fragment, b: Fragment) -> bool:
    return FRAGMENT_FEATURES[a] <= FRAGMENT_FEATURES[b]


def is_ml(f: Formula) -> bool:
    return features(f) <= _MODAL


def is_propositional(f: Formula) -> bool:
    return not (features(f) & {"box", "diamond", "cneg", "rel"})


def is_flat(f: Formula) -> bool:
    """Classical formulas (ML, QPL) whose team truth is pointwise."""
    return features(f) <= (_MODAL | {"quant"})


def is_downward_closed(f: Formula) -> bool:
    """Syntactic test; ind(x; y; y) is a dependence atom and counts as closed."""
    if features(f) & {"inc", "cneg", "rel"}:
        return False
    return all(g.left == g.right for g in walk(f) if isinstance(g, Indep))


def is_union_closed(f: Formula) -> bool:
    return not (features(f) & {"dep", "ind", "idisj", "cneg", "rel"})


def require_features(f: Formula, allowed: Iterable[str], what: str) -> None:
    extra = features(f) - set(allowed)
    if extra:
        raise FragmentError(f"{what}: unsupported constructs {sorted(extra)}")


def dep_occurrences(f: Formula) -> list:
    """Dependence-atom occurrences in left-to-right preorder, with repetitions."""
    return [(p, g) for p, g in walk_paths(f) if isinstance(g, Dep)]
