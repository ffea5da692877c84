"""Named verification checks and deterministic reports."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import __version__
from .algebra import (
    GradedFrobeniusAlgebra,
    SamplerConfig,
    invariant_symmetric_forms,
    killing_inertia,
    structure_lie_algebra,
    validate_algebra,
)
from .exact import format_fraction, inertia_exact, preserves_form
from .hodge import (
    RATIONAL_DIRECTIONS,
    bb_extract,
    d_member,
    degree_zero_match,
    generalized_pairing,
    mumford_tate_algebra,
    mumford_tate_skew,
    proportionality,
    random_isometry,
    sample_hk_triples,
    so5_closure,
)
from .models import ModelSpec, apolar_model, matching_sum


def standard_model(b: int, m: int) -> GradedFrobeniusAlgebra:
    return apolar_model(ModelSpec.diagonal([1, 1, 1] + [-1] * (b - 3), m))


def model_bm(A: GradedFrobeniusAlgebra) -> tuple[int, int]:
    return A.dims[2], A.half_degree // 2


def _ref(A):
    return [list(r) for r in A.reference_form]


def _frac(x) -> str:
    return format_fraction(Fraction(x))


@dataclass
class CheckResult:
    ok: bool
    data: dict


# ---------------------------------------------------------------- individual checks

def check_validate(A, seed):
    rep = validate_algebra(A)
    return CheckResult(rep.ok, {"failures": rep.failures()})


def check_graded_dims(A, seed):
    b, m = model_bm(A)
    want = [math.comb(b + i - 1, i) for i in range(m + 1)]
    want = want + want[-2::-1]
    got = [A.dims[2 * i] for i in range(2 * m + 1)]
    odd_zero = all(A.dims[k] == 0 for k in range(1, A.top_degree, 2))
    return CheckResult(got == want and odd_zero, {"dims": got, "expected": want})


def check_model_oracle(A, seed, count: int = 200, height: int = 3):
    """Trace of 2m-fold products of degree-2 classes against the matching sum."""
    b, m = model_bm(A)
    q = _ref(A)
    rng = random.Random(seed)
    ratio, ok = None, True
    for _ in range(count):
        vecs = [[Fraction(rng.randint(-height, height)) for _ in range(b)] for _ in range(2 * m)]
        prod, deg = vecs[0], 2
        for v in vecs[1:]:
            prod = A.multiply(deg, prod, 2, v)
            deg += 2
        lhs, rhs = A.trace_of(prod), matching_sum(q, vecs)
        if rhs == 0:
            ok = ok and lhs == 0
            continue
        r = lhs / rhs
        if ratio is None:
            ratio = r
        ok = ok and r == ratio
    return CheckResult(ok and ratio is not None, {"tuples": count, "constant": _frac(ratio) if ratio is not None else None})


def check_so5(A, seed, count: int = 5):
    triples = sample_hk_triples(A, count, seed)
    rows = []
    for t in triples:
        g = so5_closure(A, t)
        gd = g.graded_dims()
        rows.append({"dim": g.dim, "killing": list(killing_inertia(g).as_tuple()),
                     "graded": [gd.get(k, 0) for k in (-2, 0, 2)]})
    ok = all(r["dim"] == 10 and r["killing"] == [4, 6, 0] and r["graded"] == [3, 4, 3] for r in rows)
    return CheckResult(ok, {"triples": rows})


def check_structure_algebra(A, seed):
    b, m = model_bm(A)
    g = structure_lie_algebra(A, SamplerConfig(seed=seed))
    kin = killing_inertia(g).as_tuple()
    want_dim = (b + 2) * (b + 1) // 2
    want_kill = (4 * (b - 2), 6 + (b - 2) * (b - 3) // 2, 0)
    data = {"dim": g.dim, "killing": list(kin), "expected_dim": want_dim, "expected_killing": list(want_kill),
            "graded": {str(k): v for k, v in sorted(g.graded_dims().items())}}
    ok = g.dim == want_dim and kin == want_kill
    if m == 1:
        forms = invariant_symmetric_forms(g)
        data["invariant_forms"] = len(forms)
        if len(forms) == 1:
            inn = inertia_exact(forms[0]).as_tuple()
            data["invariant_form_inertia"] = list(inn)
            ok = ok and sorted(inn[:2]) == sorted((4, b - 2)) and inn[2] == 0
        else:
            ok = False
    return CheckResult(ok, data)


def check_bb_independence(A, seed, count: int = 10):
    b, _ = model_bm(A)
    q = _ref(A)
    triples = sample_hk_triples(A, count, seed)
    forms = [bb_extract(A, t) for t in triples]
    factors = [proportionality(B, q) for B in forms]
    inert = [inertia_exact(B).as_tuple() for B in forms]
    distinct = sorted({f for f in factors if f is not None})
    ok = (all(f is not None and f > 0 for f in factors) and len(distinct) == 1
          and all(i == (3, b - 3, 0) for i in inert))
    return CheckResult(ok, {"triples": count, "factors": [_frac(f) for f in distinct],
                            "all_proportional": all(f is not None for f in factors),
                            "inertia": list(inert[0])})


def check_mumford_tate(A, seed):
    b, _ = model_bm(A)
    triples = sample_hk_triples(A, 2, seed)
    gM = mumford_tate_algebra(A, triples, RATIONAL_DIRECTIONS[:3])
    B = bb_extract(A, triples[0])
    skew = mumford_tate_skew(A, gM, B)
    want = b * (b - 1) // 2
    return CheckResult(gM.dim == want and skew, {"dim": gM.dim, "expected": want, "skew": skew,
                                                 "triples": 2, "directions": 3})


def check_degree_zero(A, seed):
    triples = sample_hk_triples(A, 2, seed)
    gM = mumford_tate_algebra(A, triples)
    gA = structure_lie_algebra(A, SamplerConfig(seed=seed))
    rep = degree_zero_match(A, gA, gM)
    return CheckResult(rep["equal"] and rep["gM_strictly_inside"], rep)


def check_generalized_pairing(A, seed, count: int = 5):
    triples = sample_hk_triples(A, count, seed)
    pairings = [generalized_pairing(A, t) for t in triples]
    ok = True
    data = {"triples": count, "degrees": {}}
    for k in sorted(pairings[0]):
        P0 = pairings[0][k]
        nondeg = all(inertia_exact(P[k]).as_tuple()[2] == 0 for P in pairings)
        facs = [proportionality(P[k], P0) for P in pairings]
        pos = all(f is not None and f > 0 for f in facs)
        data["degrees"][str(k)] = {"nondegenerate": nondeg, "positive_factors": pos,
                                   "inertia": list(inertia_exact(P0).as_tuple())}
        ok = ok and nondeg and pos
    bb = bb_extract(A, triples[0])
    f2 = proportionality(pairings[0][2], bb)
    data["degree2_over_bb"] = _frac(f2) if f2 is not None else None
    ok = ok and f2 is not None and f2 > 0
    return CheckResult(ok, data)


def check_d_set(A, seed, count: int = 10):
    q = _ref(A)
    triples = sample_hk_triples(A, count, seed)
    member = all(d_member(q, *t.classes) for t in triples)
    rng = random.Random(seed)
    isom = all(preserves_form(q, random_isometry(q, rng)) for _ in range(count))
    return CheckResult(member and isom, {"triples": count, "d_member": member, "cayley_isometries": isom})


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "bb-independence": check_bb_independence,
    "d-set": check_d_set,
    "degree-zero": check_degree_zero,
    "generalized-pairing": check_generalized_pairing,
    "graded-dims": check_graded_dims,
    "model-oracle": check_model_oracle,
    "mumford-tate": check_mumford_tate,
    "so5": check_so5,
    "structure-algebra": check_structure_algebra,
    "validate": check_validate,
}


# ---------------------------------------------------------------- reports

@dataclass
class SuiteConfig:
    checks: list
    seeds: list = field(default_factory=lambda: [0])
    models: list = field(default_factory=list)  # (b, m, q) echoes
    output: str | None = None

    def to_json(self) -> dict:
        return {"checks": list(self.checks), "seeds": list(self.seeds),
                "models": [list(m) for m in self.models], "output": self.output}


def run_check(name: str, A: GradedFrobeniusAlgebra, seed: int) -> dict:
    b, m = model_bm(A)
    try:
        res = CHECKS[name](A, seed)
        status, data = ("pass" if res.ok else "fail"), res.data
    except Exception as exc:  # a crashed check is a failed check, with the reason recorded
        status, data = "fail", {"error": f"{type(exc).__name__}: {exc}"}
    return {"check": name, "model": {"b": b, "m": m}, "seed": seed, "status": status, "data": data}


def _sort_key(rec):
    return (rec["check"], rec["model"].get("b", 0), rec["model"].get("m", 0), rec["seed"])


def assemble_report(records: list, config: SuiteConfig) -> dict:
    records = sorted(records, key=_sort_key)
    passed = sum(r["status"] == "pass" for r in records)
    return {
        "version": __version__,
        "config": config.to_json(),
        "records": records,
        "summary": {"total": len(records), "pass": passed, "fail": len(records) - passed},
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1) + "\n"
