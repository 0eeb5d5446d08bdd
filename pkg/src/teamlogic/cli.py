"""Command-line front end.

Exit codes: 0 for satisfied / true / success, 1 for violated / false,
2 for any error (parse, fragment, model, resource).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from . import deciders as D
from .adqbf import instance_from_json, instance_to_json, random_instance
from .bench import adqbf_timings, oracle_agreement
from .errors import FragmentError, TeamLogicError
from .models import KripkeModel
from .parser import parse_formula, parse_kripke, parse_team, render
from .reductions import (
    adqbf_pi2_to_pdl_entailment,
    adqbf_sigma1_complement_to_qplinc_entailment,
    adqbf_to_qplind_validity,
    qpdl_to_mdl,
)
from .syntax import FRAGMENT_FEATURES, Formula, Fragment, bottom, classify, conj, features, free_vars
from .tableau import rml_model
from .teamcheck import check_modal, check_prop
from .witness import RelationOracle

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR = 0, 1, 2

_MODAL_OPS = {"box", "diamond"}
# PLInd stays here so that bare independence atoms need an explicit --logic or --oracle
_NO_COMPLETE = {Fragment.MLInd, Fragment.MLInc, Fragment.PLInd}


@dataclass
class RunReport:
    command: List[str]
    verdict: Optional[bool] = None
    logic: Optional[str] = None
    decider: Optional[str] = None
    witness: Any = None
    counters: Dict[str, int] = field(default_factory=dict)
    timing_ms: float = 0.0
    seed: Optional[int] = None

    def to_json(self) -> Dict[str, Any]:
        out = {
            "command": self.command,
            "verdict": self.verdict,
            "logic": self.logic,
            "decider": self.decider,
            "witness": self.witness,
            "counters": self.counters,
            "timing_ms": round(self.timing_ms, 3),
        }
        if self.seed is not None:
            out["seed"] = self.seed
        return out


def _read_text(arg: str) -> str:
    """``@path`` reads a file; anything else is taken literally."""
    if arg.startswith("@"):
        with open(arg[1:], encoding="utf-8") as fh:
            return fh.read()
    return arg


def _formula(arg: str) -> Formula:
    return parse_formula(_read_text(arg).strip())


def _emit(report: RunReport, as_json: bool, text: str) -> None:
    if as_json:
        print(json.dumps(report.to_json(), sort_keys=True))
    else:
        print(text)
        if report.witness is not None:
            print(json.dumps(report.witness, sort_keys=True))


# ----------------------------------------------------------------- check


def cmd_check(args: argparse.Namespace, argv: List[str]) -> int:
    f = _formula(args.formula)
    t0 = time.perf_counter()
    if args.team:
        with open(args.team, encoding="utf-8") as fh:
            team = parse_team(fh.read())
        ok = check_prop(team, f)
    else:
        with open(args.model, encoding="utf-8") as fh:
            doc = json.loads(fh.read())
        model = parse_kripke(doc)
        worlds = _team_arg(args.worlds, doc, model)
        ok = check_modal(model, worlds, f)
    report = RunReport(argv, ok, logic=classify(f).value, decider="teamcheck", timing_ms=(time.perf_counter() - t0) * 1000)
    _emit(report, args.json, "satisfied" if ok else "violated")
    return EXIT_TRUE if ok else EXIT_FALSE


def _team_arg(text: Optional[str], doc: Any, model: KripkeModel) -> List[int]:
    if text is not None:
        return [int(x) for x in text.split(",") if x.strip()]
    if isinstance(doc, dict) and "team" in doc:
        return [int(x) for x in doc["team"]]
    return list(range(model.n))


# ---------------------------------------------------------------- decide


@dataclass
class Decision:
    verdict: D.Verdict
    logic: Fragment
    decider: str


def detect_logic(formulas: Sequence[Formula], override: Optional[str] = None) -> Fragment:
    joined = conj(*formulas)
    if override:
        try:
            logic = Fragment(override)
        except ValueError:
            raise FragmentError(f"unknown logic {override!r}") from None
        extra = features(joined) - FRAGMENT_FEATURES[logic]
        if extra:
            raise FragmentError(f"formulas use {sorted(extra)}, which {logic.value} does not admit")
        return logic
    return classify(joined)


def _sat_via_bottom(f: Formula, caps: D.Caps) -> D.Verdict:
    # a non-empty team satisfies f iff f does not entail a contradiction
    v = sorted(free_vars(f))[0] if free_vars(f) else "p"
    res = D.brute_entails_prop([f], bottom(v), caps)
    return D.Verdict(not res.answer, res.witness, res.counters)


def decide(
    mode: str,
    premises: Sequence[Formula],
    conclusion: Formula,
    logic: Optional[str] = None,
    oracle: str = "auto",
    bound: Optional[int] = None,
    caps: D.Caps = D.DEFAULT_CAPS,
    relations: Optional[Dict[str, Any]] = None,
) -> Decision:
    """Route a sat / valid / entail question to a decider.

    For sat and valid ``conclusion`` is the formula and ``premises`` is empty.
    """
    frag = detect_logic(list(premises) + [conclusion], logic)
    feats = FRAGMENT_FEATURES[frag]
    if frag is Fragment.RML:
        return _decide_rml(mode, premises, conclusion, relations)
    modal = bool(feats & _MODAL_OPS)
    if oracle == "brute":
        if not modal:
            if mode == "sat":
                return Decision(_sat_via_bottom(conclusion, caps), frag, "brute_entails_prop")
            return Decision(D.brute_entails_prop(premises, conclusion, caps), frag, "brute_entails_prop")
        if bound is None:
            raise FragmentError("--oracle brute on a modal logic needs --bound N")
        if mode == "sat":
            w = D.brute_sat_modal(conclusion, bound, caps)
            return Decision(D.Verdict(w is not None, w, {"bound": bound}), frag, "brute_sat_modal")
        return Decision(D.brute_entails_modal(premises, conclusion, bound, caps), frag, "brute_entails_modal")
    if frag in _NO_COMPLETE:
        raise FragmentError(
            f"no complete decider for {frag.value}; use --oracle brute --bound N"
            + ("" if modal else " or --logic QPLInc/QPLInd")
        )
    if frag in (Fragment.PL, Fragment.PDL, Fragment.ML, Fragment.MDL, Fragment.EMDL):
        fn = {"sat": lambda: D.emdl_sat(conclusion, caps), "valid": lambda: D.emdl_valid(conclusion, caps)}
        v = fn[mode]() if mode in fn else D.emdl_entails(premises, conclusion, caps)
        return Decision(v, frag, f"emdl_{mode}s" if mode == "entail" else f"emdl_{mode}")
    if frag in (Fragment.PLIDisj, Fragment.MLIDisj):
        fn = {"sat": lambda: D.mldisj_sat(conclusion, caps), "valid": lambda: D.mldisj_valid(conclusion, caps)}
        v = fn[mode]() if mode in fn else D.mldisj_entails(premises, conclusion, caps)
        return Decision(v, frag, f"mldisj_{mode}s" if mode == "entail" else f"mldisj_{mode}")
    if mode == "sat":
        return Decision(_sat_via_bottom(conclusion, caps), frag, "brute_entails_prop")
    if frag in (Fragment.PLInc, Fragment.QPLInc):
        if mode == "valid":
            return Decision(D.qplinc_valid(conclusion, caps), frag, "qplinc_valid")
        return Decision(D.qplinc_entails(premises, conclusion, caps), frag, "qplinc_entails")
    if frag is Fragment.QPLInd:
        return Decision(D.qplind_entails(premises, conclusion, caps), frag, "qplind_entails")
    return Decision(D.brute_entails_prop(premises, conclusion, caps), frag, "brute_entails_prop")


def _decide_rml(mode, premises, conclusion, relations) -> Decision:
    from .syntax import CNeg, relation_symbols

    if mode == "entail":
        raise FragmentError("RML is decided pointwise; use sat or valid")
    arities = dict(relation_symbols(conclusion))
    rels = {s: frozenset(tuple(t) for t in ts) for s, ts in (relations or {}).items()}
    oracle = RelationOracle(rels, arities)
    target = conclusion if mode == "sat" else CNeg(conclusion)
    found = rml_model(target, oracle)
    witness = D.ModalWitness(found[0], frozenset({found[1]})) if found else None
    answer = (found is not None) if mode == "sat" else (found is None)
    return Decision(D.Verdict(answer, witness), Fragment.RML, "rml_tableau")


def cmd_decide(args: argparse.Namespace, argv: List[str]) -> int:
    caps = D.Caps.parse(args.caps, D.Caps.from_env()) if args.caps else D.Caps.from_env()
    if args.mode == "entail":
        if args.conclusion is None or args.formula is not None:
            raise TeamLogicError("entail takes premises with -p and one conclusion with -c")
        premises = [_formula(p) for p in args.premise]
        concl = _formula(args.conclusion)
    else:
        if args.formula is None or args.premise or args.conclusion:
            raise TeamLogicError(f"{args.mode} takes exactly one formula argument")
        premises, concl = [], _formula(args.formula)
    relations = json.loads(_read_text(args.relations)) if args.relations else None
    t0 = time.perf_counter()
    d = decide(args.mode, premises, concl, args.logic, args.oracle, args.bound, caps, relations)
    out = D.verdict_to_json(d.verdict)
    report = RunReport(
        argv,
        d.verdict.answer,
        d.logic.value,
        d.decider,
        out.get("witness"),
        out.get("counters", {}),
        (time.perf_counter() - t0) * 1000,
    )
    _emit(report, args.json, "true" if d.verdict.answer else "false")
    return EXIT_TRUE if d.verdict.answer else EXIT_FALSE


# ---------------------------------------------------------------- reduce

_REDUCTIONS = {
    "pi2-to-pdl": adqbf_pi2_to_pdl_entailment,
    "adqbf-to-qplind": adqbf_to_qplind_validity,
    "sigma1-to-qplinc": adqbf_sigma1_complement_to_qplinc_entailment,
}


def cmd_reduce(args: argparse.Namespace, argv: List[str]) -> int:
    if args.name == "qpdl-to-mdl":
        lines = [ln.strip() for ln in _read_text("@" + args.input).splitlines() if ln.strip()]
        fs = [parse_formula(ln) for ln in lines]
        if args.kind == "entail":
            out = qpdl_to_mdl("entail", fs[-1:], fs[:-1])
        else:
            out = qpdl_to_mdl(args.kind, fs)
    else:
        with open(args.input, encoding="utf-8") as fh:
            inst = instance_from_json(fh.read())
        out = _REDUCTIONS[args.name](inst)
    os.makedirs(args.out, exist_ok=True)
    files = {
        "sigma.txt": out.sigma_text(),
        "psi.txt": out.psi_text(),
        "varmap.json": json.dumps(out.varmap(), indent=2, sort_keys=True) + "\n",
    }
    for name, text in files.items():
        with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.json:
        print(json.dumps({"command": argv, "kind": out.kind, "files": sorted(files)}, sort_keys=True))
    else:
        for name in sorted(files):
            print(os.path.join(args.out, name))
    return EXIT_TRUE


# ------------------------------------------------------------------- gen


def cmd_gen(args: argparse.Namespace, argv: List[str]) -> int:
    if args.kind == "adqbf":
        inst = random_instance(args.seed, args.shape, args.n, args.fns, args.max_arity, args.matrix_size)
        doc: Any = {**instance_to_json(inst), "seed": args.seed}
    else:
        from .generators import random_formulas

        fs = random_formulas(args.seed, args.count, Fragment(args.fragment), target_size=args.size)
        doc = {"seed": args.seed, "fragment": args.fragment, "formulas": [render(f) for f in fs]}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_TRUE


# ----------------------------------------------------------------- bench


def cmd_bench(args: argparse.Namespace, argv: List[str]) -> int:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    if args.suite == "oracle-agreement":
        rows = oracle_agreement(args.seed, args.count)
        writer.writerow(["suite", "instances", "disagreements", "millis"])
        for r in rows:
            writer.writerow([r.suite, r.instances, r.disagreements, f"{r.millis:.1f}"])
        return EXIT_TRUE if all(r.disagreements == 0 for r in rows) else EXIT_FALSE
    rows = adqbf_timings(args.seed, args.count, args.shape)
    writer.writerow(["instance", "verdict", "millis", "table_space"])
    for r in rows:
        writer.writerow([r["instance"], str(r["verdict"]).lower(), r["millis"], r["table_space"]])
    return EXIT_TRUE


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="teamlogic", description="Team-semantics model checking and decision procedures.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="evaluate a formula on a team or Kripke model")
    c.add_argument("formula", help="formula text, or @file")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--team", help="propositional team JSON file")
    src.add_argument("--model", help="Kripke model JSON file (optional 'team' key)")
    c.add_argument("--worlds", help="comma-separated team of worlds (default: 'team' key or all)")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("decide", help="satisfiability, validity or entailment")
    d.add_argument("mode", choices=["sat", "valid", "entail"])
    d.add_argument("formula", nargs="?", help="formula text or @file (sat/valid)")
    d.add_argument("-p", "--premise", action="append", default=[], help="premise (entail), repeatable")
    d.add_argument("-c", "--conclusion", help="conclusion (entail)")
    d.add_argument("--logic", help="override the detected fragment, e.g. QPLInc")
    d.add_argument("--oracle", choices=["auto", "brute"], default="auto")
    d.add_argument("--bound", type=int, help="world bound for the brute-force modal oracle")
    d.add_argument("--caps", help="resource caps as k=v,... or JSON (default from TEAMLOGIC_CAPS)")
    d.add_argument("--relations", help="RML relation tables as JSON or @file")
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_decide)

    r = sub.add_parser("reduce", help="run a reduction and write sigma.txt, psi.txt, varmap.json")
    r.add_argument("name", choices=sorted(_REDUCTIONS) + ["qpdl-to-mdl"])
    r.add_argument("input", help="ADQBF instance JSON, or a file of formulas (qpdl-to-mdl)")
    r.add_argument("--kind", choices=["sat", "valid", "entail"], default="valid", help="qpdl-to-mdl only")
    r.add_argument("-o", "--out", default=".", help="output directory")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_reduce)

    g = sub.add_parser("gen", help="generate seeded instances")
    g.add_argument("kind", choices=["adqbf", "formula"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--shape", choices=["pi2", "sigma1"], default="pi2")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--fns", type=int, default=2)
    g.add_argument("--max-arity", type=int, default=1)
    g.add_argument("--matrix-size", type=int, default=4)
    g.add_argument("--fragment", default="PDL", choices=[f.value for f in Fragment])
    g.add_argument("--count", type=int, default=5)
    g.add_argument("--size", type=int, default=6)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="CSV timing / agreement tables")
    b.add_argument("suite", choices=["oracle-agreement", "adqbf"])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--count", type=int, default=20)
    b.add_argument("--shape", choices=["pi2", "sigma1"], default="pi2")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_TRUE
    try:
        return args.func(args, argv)
    except (TeamLogicError, ValueError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
