"""Alternating dependency quantified Boolean formulas.

An instance quantifies, block by block, over Boolean functions whose
arguments are restricted to declared lists of the universal variables
p1..pn, and finally requires the matrix to hold for every assignment of
p1..pn.  Matrices mention function applications through a private node type
so the shared formula AST stays free of function symbols.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from itertools import product
from typing import Any, Dict, List, Mapping, Sequence, Tuple

from .errors import ModelError, ResourceError
from .parser import parse_formula, render
from .syntax import (
    And,
    Atom,
    Formula,
    IDENT_RE,
    NegAtom,
    Or,
    _node,
    make_var,
    walk,
)
from .witness import WitnessFunction, all_witnesses

DEFAULT_TABLE_CAP = 1 << 16


@_node
class FnApp(Formula):
    """Application f(c⃗) of a quantified function symbol, possibly negated."""

    name: str
    args: Tuple[str, ...]
    negated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(make_var(a) for a in self.args))

    def render_text(self) -> str:
        return ("!" if self.negated else "") + f"{self.name}({', '.join(self.args)})"


@dataclass(frozen=True)
class FnDecl:
    name: str
    args: Tuple[str, ...]

    def __post_init__(self):
        if not isinstance(self.name, str) or not IDENT_RE.match(self.name):
            raise ModelError(f"invalid function name {self.name!r}")
        object.__setattr__(self, "args", tuple(make_var(a) for a in self.args))

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class Block:
    quant: str  # "A" or "E"
    fns: Tuple[FnDecl, ...]

    def __post_init__(self):
        if self.quant not in ("A", "E"):
            raise ModelError(f"block quantifier must be 'A' or 'E', not {self.quant!r}")
        object.__setattr__(self, "fns", tuple(self.fns))


def pvars(n: int) -> Tuple[str, ...]:
    return tuple(f"p{i}" for i in range(1, n + 1))


@dataclass(frozen=True)
class AdqbfInstance:
    blocks: Tuple[Block, ...]
    n: int
    matrix: Formula
    shape: str = ""

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        shape = self.shape or _shape_of(self.blocks)
        object.__setattr__(self, "shape", shape)
        self.validate()

    @property
    def universals(self) -> Tuple[str, ...]:
        return pvars(self.n)

    @property
    def functions(self) -> List[FnDecl]:
        return [fn for b in self.blocks for fn in b.fns]

    def decl(self, name: str) -> FnDecl:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)

    def validate(self) -> None:
        if self.n < 0:
            raise ModelError("negative variable count")
        allowed = set(self.universals)
        for a, b in zip(self.blocks, self.blocks[1:]):
            if a.quant == b.quant:
                raise ModelError("quantifier blocks must alternate")
        if self.shape != _shape_of(self.blocks):
            raise ModelError(f"shape {self.shape} does not match the block structure {_shape_of(self.blocks)}")
        names = set()
        for fn in self.functions:
            if fn.name in names or fn.name in allowed:
                raise ModelError(f"function name {fn.name} is declared twice or clashes with a variable")
            names.add(fn.name)
            if not set(fn.args) <= allowed:
                raise ModelError(f"constraint of {fn.name} uses variables outside p1..p{self.n}")
            if len(set(fn.args)) != len(fn.args):
                raise ModelError(f"constraint of {fn.name} repeats a variable")
        decls = {fn.name: fn for fn in self.functions}
        for g in walk(self.matrix):
            if isinstance(g, FnApp):
                d = decls.get(g.name)
                if d is None:
                    raise ModelError(f"undeclared function {g.name} in matrix")
                if g.args != d.args:
                    raise ModelError(f"{g.name} applied to {g.args}, declared with {d.args}")
            elif isinstance(g, (Atom, NegAtom)):
                if g.name not in allowed:
                    raise ModelError(f"matrix variable {g.name} is not one of p1..p{self.n}")
            elif not isinstance(g, (And, Or)):
                raise ModelError(f"matrix must be quantifier-free propositional, found {type(g).__name__}")

    def table_space(self) -> int:
        return sum(1 << (1 << fn.arity) for fn in self.functions)


def _shape_of(blocks: Sequence[Block]) -> str:
    if not blocks:
        return "pi1"
    return ("pi" if blocks[0].quant == "A" else "sigma") + str(len(blocks))


# ------------------------------------------------------------------ eval


def _eval(f: Formula, env: Mapping[str, int], tables: Mapping[str, WitnessFunction]) -> int:
    if isinstance(f, Atom):
        return env[f.name]
    if isinstance(f, NegAtom):
        return 1 - env[f.name]
    if isinstance(f, FnApp):
        v = tables[f.name](tuple(env[a] for a in f.args))
        return 1 - v if f.negated else v
    if isinstance(f, And):
        return _eval(f.left, env, tables) and _eval(f.right, env, tables)
    if isinstance(f, Or):
        return _eval(f.left, env, tables) or _eval(f.right, env, tables)
    raise ModelError(f"cannot evaluate {type(f).__name__} in a matrix")


def matrix_holds(inst: AdqbfInstance, tables: Mapping[str, WitnessFunction]) -> bool:
    """∀p⃗ θ under fixed Skolem tables."""
    ps = inst.universals
    for bits in product((0, 1), repeat=inst.n):
        if not _eval(inst.matrix, dict(zip(ps, bits)), tables):
            return False
    return True


def evaluate_adqbf(inst: AdqbfInstance, cap: int = DEFAULT_TABLE_CAP) -> bool:
    """Truth by exhaustive alternating quantification over Skolem tables."""
    if inst.table_space() > cap:
        raise ResourceError(f"table space {inst.table_space()} exceeds cap {cap}")

    def go(i: int, tables: Dict[str, WitnessFunction]) -> bool:
        if i == len(inst.blocks):
            return matrix_holds(inst, tables)
        block = inst.blocks[i]
        choices = product(*(list(all_witnesses(fn.arity)) for fn in block.fns))
        test = any if block.quant == "E" else all
        return test(go(i + 1, {**tables, **{fn.name: t for fn, t in zip(block.fns, combo)}}) for combo in choices)

    return go(0, {})


def negate_matrix(f: Formula) -> Formula:
    if isinstance(f, Atom):
        return NegAtom(f.name)
    if isinstance(f, NegAtom):
        return Atom(f.name)
    if isinstance(f, FnApp):
        return FnApp(f.name, f.args, not f.negated)
    if isinstance(f, And):
        return Or(negate_matrix(f.left), negate_matrix(f.right))
    if isinstance(f, Or):
        return And(negate_matrix(f.left), negate_matrix(f.right))
    raise ModelError(f"cannot negate {type(f).__name__} in a matrix")


def dual(inst: AdqbfInstance) -> AdqbfInstance:
    """Flip every function quantifier and negate the matrix.

    The trailing ∀ over p1..pn stays universal, so the two instances are
    never both true, but both can be false once n > 0.  With n = 0 the
    verdict flips exactly.
    """
    blocks = tuple(Block("E" if b.quant == "A" else "A", b.fns) for b in inst.blocks)
    return AdqbfInstance(blocks, inst.n, negate_matrix(inst.matrix))


def rename_functions(inst: AdqbfInstance, mapping: Mapping[str, str]) -> AdqbfInstance:
    blocks = tuple(Block(b.quant, tuple(FnDecl(mapping.get(fn.name, fn.name), fn.args) for fn in b.fns)) for b in inst.blocks)

    def ren(f: Formula) -> Formula:
        if isinstance(f, FnApp):
            return FnApp(mapping.get(f.name, f.name), f.args, f.negated)
        kids = f.children()
        return f.with_children([ren(k) for k in kids]) if kids else f

    return AdqbfInstance(blocks, inst.n, ren(inst.matrix))


# ----------------------------------------------------------------- JSON


def _app_factory(name: str, args: Tuple[str, ...], negated: bool) -> Formula:
    return FnApp(name, args, negated)


def parse_matrix(text: str) -> Formula:
    return parse_formula(text, app_factory=_app_factory)


def instance_from_json(obj: Any) -> AdqbfInstance:
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as e:
            raise ModelError(f"malformed instance JSON: {e}") from None
    try:
        blocks = tuple(
            Block(b["q"], tuple(FnDecl(fn["name"], tuple(fn.get("args", ()))) for fn in b["fns"])) for b in obj["blocks"]
        )
        n = int(obj["n"])
        matrix = parse_matrix(obj["matrix"])
        shape = obj.get("shape", "")
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"malformed instance: {e}") from None
    return AdqbfInstance(blocks, n, matrix, shape)


def instance_to_json(inst: AdqbfInstance) -> Dict[str, Any]:
    return {
        "shape": inst.shape,
        "blocks": [{"q": b.quant, "fns": [{"name": fn.name, "args": list(fn.args)} for fn in b.fns]} for b in inst.blocks],
        "n": inst.n,
        "matrix": render(inst.matrix),
    }


# ------------------------------------------------------------- generator


def random_instance(
    seed: int,
    shape: str = "pi2",
    n: int = 2,
    fn_count: int = 2,
    max_arity: int = 1,
    matrix_size: int = 4,
) -> AdqbfInstance:
    """Deterministic random instance of the given shape (pi2 or sigma1)."""
    if shape not in ("pi2", "sigma1"):
        raise ValueError("shape must be 'pi2' or 'sigma1'")
    rng = random.Random(seed)
    ps = pvars(n)
    nblocks = 2 if shape == "pi2" else 1
    if fn_count < nblocks:
        raise ValueError(f"{shape} needs at least {nblocks} functions")
    decls = []
    for i in range(1, fn_count + 1):
        k = rng.randint(0, min(max_arity, n))
        args = tuple(sorted(rng.sample(ps, k), key=ps.index))
        decls.append(FnDecl(f"f{i}", args))
    if shape == "pi2":
        cut = rng.randint(1, fn_count - 1)
        blocks = (Block("A", tuple(decls[:cut])), Block("E", tuple(decls[cut:])))
    else:
        blocks = (Block("E", tuple(decls)),)
    leaves: List[Formula] = [Atom(p) for p in ps] + [FnApp(d.name, d.args) for d in decls]

    def leaf() -> Formula:
        g = rng.choice(leaves)
        if rng.random() < 0.5:
            g = negate_matrix(g)
        return g

    def build(size: int) -> Formula:
        if size <= 1:
            return leaf()
        k = rng.randint(1, size - 1)
        op = And if rng.random() < 0.5 else Or
        return op(build(k), build(size - k))

    return AdqbfInstance(blocks, n, build(max(1, matrix_size)), shape)
