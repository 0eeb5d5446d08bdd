"""Small seeded agreement and timing suites for the command line."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

from .adqbf import evaluate_adqbf, random_instance
from .deciders import brute_entails_prop, emdl_entails, maxsub, qplinc_valid, singletons_valid
from .generators import random_formula
from .models import PropTeam, index_row, submasks
from .syntax import Fragment
from .teamcheck import check_prop_mask, new_evaluator


@dataclass
class SuiteRow:
    suite: str
    instances: int = 0
    disagreements: int = 0
    millis: float = 0.0
    counters: Dict[str, int] = field(default_factory=dict)


def _pdl_triples(seed: int, count: int) -> int:
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        prem = [random_formula(rng, Fragment.PDL, ("p", "q", "r"), rng.randint(1, 4)) for _ in range(rng.randint(0, 2))]
        concl = random_formula(rng, Fragment.PDL, ("p", "q", "r"), rng.randint(1, 4))
        if emdl_entails(prem, concl).answer != brute_entails_prop(prem, concl).answer:
            bad += 1
    return bad


def _qplinc_valid(seed: int, count: int) -> int:
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        f = random_formula(rng, Fragment.QPLInc, ("p", "q"), rng.randint(1, 5))
        if qplinc_valid(f).answer != singletons_valid(f):
            bad += 1
    return bad


def _maxsub(seed: int, count: int) -> int:
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        f = random_formula(rng, Fragment.QPLInc, ("p", "q"), rng.randint(1, 5))
        domain = ("p", "q")
        mask = rng.randrange(16)
        ev = new_evaluator()
        best = 0
        for sub in submasks(mask):
            if check_prop_mask(domain, sub, f, ev):
                best |= sub
        team = PropTeam(domain, frozenset(index_row(i, 2) for i in range(4) if mask >> i & 1))
        if maxsub(team, f).to_mask() != best:
            bad += 1
    return bad


SUITES: Dict[str, Callable[[int, int], int]] = {
    "emdl-vs-brute": _pdl_triples,
    "qplinc-valid-vs-singletons": _qplinc_valid,
    "maxsub-vs-brute": _maxsub,
}


def oracle_agreement(seed: int = 0, count: int = 50) -> List[SuiteRow]:
    rows = []
    for name, fn in SUITES.items():
        t0 = time.perf_counter()
        bad = fn(seed, count)
        rows.append(SuiteRow(name, count, bad, (time.perf_counter() - t0) * 1000))
    return rows


def adqbf_timings(seed: int = 0, count: int = 10, shape: str = "pi2", n: int = 2) -> List[Dict[str, object]]:
    out = []
    for i in range(count):
        inst = random_instance(seed + i, shape=shape, n=n)
        t0 = time.perf_counter()
        verdict = evaluate_adqbf(inst)
        out.append(
            {
                "instance": f"{shape}-{seed + i}",
                "verdict": verdict,
                "millis": round((time.perf_counter() - t0) * 1000, 3),
                "table_space": inst.table_space(),
            }
        )
    return out
