"""Text syntax for formulas and JSON formats for teams and Kripke models.

Formula grammar, loosest binding first::

    E p .  A p .      quantifiers (scope extends as far right as possible)
    \\/               intuitionistic disjunction
    |                 splitting disjunction
    &                 conjunction
    [] <> ~ !         prefix operators; ! applies to variables only
    p  =(p,...,q)  ind(p..; q..; r..)  inc(p.., q..)  S_k(φ, ...)

Binary operators associate to the left.
"""

from __future__ import annotations

import json
import re
from typing import Any, Callable, List, Optional, Tuple

from .errors import FragmentError, ModelError, ParseError
from .models import KripkeModel, PropTeam
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
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<op>\\/|\[\]|<>|[()&|~!,;.=])
  | (?P<ident>[a-zA-Z_][a-zA-Z0-9_'\#]*)
    """,
    re.VERBOSE,
)

REL_RE = re.compile(r"S_[A-Za-z0-9_]+\Z")

AppFactory = Callable[[str, Tuple[str, ...], bool], Formula]


def _tokenize(text: str) -> List[Tuple[str, str, int, int]]:
    out = []
    pos = 0
    raw = text.encode("utf-8")
    # offsets are reported in bytes
    byte_at = lambda i: len(text[:i].encode("utf-8"))
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            b = byte_at(pos)
            raise ParseError(f"unexpected character {text[pos]!r}", b, b + len(text[pos].encode("utf-8")))
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), byte_at(m.start()), byte_at(m.end())))
        pos = m.end()
    out.append(("eof", "", len(raw), len(raw)))
    return out


class _Parser:
    def __init__(self, text: str, app_factory: Optional[AppFactory]):
        self.toks = _tokenize(text)
        self.i = 0
        self.app_factory = app_factory

    # -- token helpers

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        t = self.next()
        if t[1] != value or t[0] == "ident":
            raise ParseError(f"expected {value!r}, found {t[1] or 'end of input'!r}", t[2], t[3])
        return t

    def error(self, msg: str, t=None):
        t = t or self.peek()
        raise ParseError(msg, t[2], t[3])

    # -- grammar

    def parse(self) -> Formula:
        f = self.formula()
        if self.peek()[0] != "eof":
            self.error(f"unexpected {self.peek()[1]!r}")
        return f

    def formula(self) -> Formula:
        return self.idisj()

    def idisj(self) -> Formula:
        f = self.disj()
        while self.peek()[1] == "\\/":
            self.next()
            f = IDisj(f, self.disj())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek()[1] == "|":
            self.next()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[1] == "&":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind, val, start, end = self.peek()
        if kind == "op":
            if val == "[]":
                self.next()
                return Box(self.unary())
            if val == "<>":
                self.next()
                return Diamond(self.unary())
            if val == "~":
                self.next()
                return CNeg(self.unary())
            if val == "!":
                self.next()
                t = self.peek()
                if t[0] != "ident" or self.peek(1)[1] == "(" and not self._is_app(t[1]):
                    raise FragmentError(f"'!' applies to propositional variables only (at byte {t[2]})")
                if self.peek(1)[1] == "(":
                    return self.application(negated=True)
                self.next()
                return NegAtom(t[1])
            if val == "(":
                self.next()
                f = self.formula()
                self.expect(")")
                return f
            if val == "=":
                return self.dependence()
            self.error(f"unexpected {val!r}")
        if kind == "ident":
            nxt = self.peek(1)
            if val in ("E", "A") and nxt[0] == "ident":
                return self.quantifier()
            if nxt[1] == "(":
                if val == "ind":
                    return self.independence()
                if val == "inc":
                    return self.inclusion()
                if REL_RE.match(val):
                    return self.relation()
                return self.application(negated=False)
            self.next()
            return Atom(val)
        self.error("unexpected end of input" if kind == "eof" else f"unexpected {val!r}")

    def _is_app(self, name: str) -> bool:
        return self.app_factory is not None and name not in ("ind", "inc") and not REL_RE.match(name)

    def quantifier(self) -> Formula:
        q = self.next()[1]
        names = []
        while self.peek()[0] == "ident":
            names.append(self.next()[1])
        self.expect(".")
        body = self.formula()
        ctor = Exists if q == "E" else Forall
        for v in reversed(names):
            body = ctor(v, body)
        return body

    def dependence(self) -> Formula:
        self.expect("=")
        self.expect("(")
        args = [self.formula()]
        while self.peek()[1] == ",":
            self.next()
            args.append(self.formula())
        self.expect(")")
        return Dep(tuple(args[:-1]), args[-1])

    def varlist(self, stops) -> Tuple[str, ...]:
        out = []
        while self.peek()[0] == "ident":
            out.append(self.next()[1])
        if self.peek()[1] not in stops:
            self.error(f"expected a variable or one of {stops}")
        return tuple(out)

    def independence(self) -> Formula:
        self.next()
        self.expect("(")
        cond = self.varlist((";",))
        self.expect(";")
        left = self.varlist((";",))
        self.expect(";")
        right = self.varlist((")",))
        self.expect(")")
        return Indep(cond, left, right)

    def inclusion(self) -> Formula:
        t = self.next()
        self.expect("(")
        left = self.varlist((",",))
        self.expect(",")
        right = self.varlist((")",))
        self.expect(")")
        if len(left) != len(right):
            raise ParseError("inclusion atom sides differ in length", t[2], self.peek(-1)[3])
        return Incl(left, right)

    def relation(self) -> Formula:
        name = self.next()[1]
        self.expect("(")
        args = []
        if self.peek()[1] != ")":
            args.append(self.formula())
            while self.peek()[1] == ",":
                self.next()
                args.append(self.formula())
        self.expect(")")
        return Rel(name, tuple(args))

    def application(self, negated: bool) -> Formula:
        t = self.next()
        if self.app_factory is None:
            self.error(f"unknown function or predicate {t[1]!r}", t)
        self.expect("(")
        args = self.varlist((")", ",")) if self.peek()[1] != ")" else ()
        while self.peek()[1] == ",":
            self.next()
            args += self.varlist((")", ","))
        self.expect(")")
        return self.app_factory(t[1], args, negated)


def parse_formula(text: str, app_factory: Optional[AppFactory] = None) -> Formula:
    """Parse ``text``; ``app_factory`` enables function applications f(p, q)."""
    return _Parser(text, app_factory).parse()


# ------------------------------------------------------------------ render

_PREC_QUANT, _PREC_IDISJ, _PREC_OR, _PREC_AND, _PREC_PREFIX, _PREC_ATOM = range(6)


def _prec(f: Formula) -> int:
    if isinstance(f, (Exists, Forall)):
        return _PREC_QUANT
    if isinstance(f, IDisj):
        return _PREC_IDISJ
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, And):
        return _PREC_AND
    if isinstance(f, (Box, Diamond, CNeg)):
        return _PREC_PREFIX
    return _PREC_ATOM


_BIN = {IDisj: " \\/ ", Or: " | ", And: " & "}
_PREFIX = {Box: "[] ", Diamond: "<> ", CNeg: "~"}


def _render(f: Formula, ctx: int, rightmost: bool) -> str:
    p = _prec(f)
    paren = p < ctx or (p == _PREC_QUANT and not rightmost)
    right = True if paren else rightmost
    t = type(f)
    if t in _BIN:
        s = _render(f.left, p, False) + _BIN[t] + _render(f.right, p + 1, right)
    elif t in _PREFIX:
        s = _PREFIX[t] + _render(f.sub, _PREC_PREFIX, right)
    elif t in (Exists, Forall):
        s = ("E " if t is Exists else "A ") + f.var + " . " + _render(f.body, _PREC_QUANT, right)
    elif t is Atom:
        s = f.name
    elif t is NegAtom:
        s = "!" + f.name
    elif t is Dep:
        s = "=(" + ",".join(_render(a, _PREC_QUANT, True) for a in f.children()) + ")"
    elif t is Indep:
        s = "ind(" + "; ".join(" ".join(vs) for vs in (f.cond, f.left, f.right)) + ")"
    elif t is Incl:
        s = "inc(" + " ".join(f.left) + ", " + " ".join(f.right) + ")"
    elif t is Rel:
        s = f.symbol + "(" + ", ".join(_render(a, _PREC_QUANT, True) for a in f.args) + ")"
    elif hasattr(f, "render_text"):
        s = f.render_text()
    else:
        raise TypeError(f"cannot render {t.__name__}")
    return f"({s})" if paren else s


def render(f: Formula) -> str:
    """Minimal-parenthesis text accepted by :func:`parse_formula`."""
    return _render(f, _PREC_QUANT, True)


# ------------------------------------------------------------------- JSON


def _load(text_or_obj: Any) -> Any:
    if isinstance(text_or_obj, (str, bytes)):
        try:
            return json.loads(text_or_obj)
        except json.JSONDecodeError as e:
            raise ModelError(f"malformed JSON: {e}") from None
    return text_or_obj


def _bit(x: Any, what: str) -> int:
    if isinstance(x, bool) or x not in (0, 1):
        raise ModelError(f"non-Boolean value {x!r} in {what}")
    return int(x)


def parse_team(text: Any) -> PropTeam:
    """``{"vars": [...], "rows": [[0|1, ...], ...]}``; duplicate rows collapse."""
    doc = _load(text)
    if not isinstance(doc, dict) or "vars" not in doc or "rows" not in doc:
        raise ModelError('team JSON needs "vars" and "rows"')
    names = doc["vars"]
    if not isinstance(names, list) or not all(isinstance(v, str) for v in names):
        raise ModelError('"vars" must be a list of variable names')
    rows = []
    for r in doc["rows"]:
        if not isinstance(r, list) or len(r) != len(names):
            raise ModelError(f"row {r!r} does not match the {len(names)} declared variables")
        rows.append(tuple(_bit(b, "team row") for b in r))
    try:
        return PropTeam(tuple(names), frozenset(rows))
    except ValueError as e:
        raise ModelError(str(e)) from None


def parse_kripke(text: Any) -> KripkeModel:
    """``{"worlds": N, "edges": [[i, j], ...], "val": {"p": [...]}, "relations": {...}}``."""
    doc = _load(text)
    if not isinstance(doc, dict) or "worlds" not in doc:
        raise ModelError('Kripke JSON needs "worlds"')
    n = doc["worlds"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise ModelError('"worlds" must be a natural number')
    edges = []
    for e in doc.get("edges", []):
        if not isinstance(e, list) or len(e) != 2 or not all(isinstance(x, int) for x in e):
            raise ModelError(f"bad edge {e!r}")
        if not all(0 <= x < n for x in e):
            raise ModelError(f"edge {e!r} has a dangling endpoint")
        edges.append(tuple(e))
    val = {}
    for v, ws in doc.get("val", {}).items():
        if not isinstance(ws, list) or not all(isinstance(w, int) and not isinstance(w, bool) for w in ws):
            raise ModelError(f"valuation of {v!r} must list world indices")
        if not all(0 <= w < n for w in ws):
            raise ModelError(f"valuation of {v!r} names a missing world")
        val[v] = frozenset(ws)
    rels = {}
    for s, tuples in doc.get("relations", {}).items():
        rels[s] = frozenset(tuple(_bit(b, f"relation {s}") for b in t) for t in tuples)
    try:
        return KripkeModel(n, frozenset(edges), val, rels)
    except ValueError as e:
        raise ModelError(str(e)) from None


def team_to_json(team: PropTeam) -> dict:
    return {"vars": list(team.domain), "rows": [list(r) for r in sorted(team.rows)]}


def kripke_to_json(model: KripkeModel) -> dict:
    doc = {
        "worlds": model.n,
        "edges": [list(e) for e in sorted(model.edges)],
        "val": {v: sorted(ws) for v, ws in sorted(model.val.items())},
    }
    if model.relations:
        doc["relations"] = {s: [list(t) for t in sorted(ts)] for s, ts in sorted(model.relations.items())}
    return doc
