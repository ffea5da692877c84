"""Desk-scale models of the subalgebra of cohomology generated by H^2.

The model for a quadratic form q on Q^b and half-dimension m is the
Gorenstein algebra Sym(V)/Ann(F) with Macaulay dual generator F = q(X)^m.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebra import GradedFrobeniusAlgebra, _EchelonSpace
from .exact import (
    ExactError,
    Inertia,
    format_fraction,
    inertia_exact,
    inverse,
    is_symmetric,
    parse_scalar,
    rank,
    to_fractions,
)

ZERO = Fraction(0)


class ModelError(ExactError):
    pass


class InertiaMismatch(ModelError):
    pass


class DegenerateQ(ModelError):
    pass


class ModelFileError(ModelError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    b: int
    m: int
    q: tuple

    @classmethod
    def make(cls, b: int, m: int, q) -> "ModelSpec":
        q = tuple(tuple(Fraction(x) for x in row) for row in q)
        spec = cls(b, m, q)
        spec.check()
        return spec

    @classmethod
    def diagonal(cls, entries: Sequence[int], m: int) -> "ModelSpec":
        b = len(entries)
        q = [[Fraction(entries[i]) if i == j else ZERO for j in range(b)] for i in range(b)]
        return cls.make(b, m, q)

    def check(self) -> None:
        if self.m < 1:
            raise ModelError("m must be at least 1")
        if len(self.q) != self.b or any(len(r) != self.b for r in self.q):
            raise ModelError(f"q must be a {self.b}x{self.b} matrix")
        if not is_symmetric(self.q):
            raise ModelError("q must be symmetric")
        if rank(self.q) != self.b:
            raise DegenerateQ("q is degenerate")
        if self.b < 4:
            raise ModelError("b must be at least 4")
        inert = inertia_exact(self.q)
        if inert.as_tuple() != (3, self.b - 3, 0):
            raise InertiaMismatch(f"q has inertia {inert.as_tuple()}, need (3, {self.b - 3}, 0)")


# ---------------------------------------------------------------- polynomials

def monomials(b: int, k: int) -> list[tuple[int, ...]]:
    """Exponent vectors of degree k in graded-lex order (x_1^k first)."""
    out = []
    for combo in itertools.combinations_with_replacement(range(b), k):
        e = [0] * b
        for v in combo:
            e[v] += 1
        out.append(tuple(e))
    return out


def _poly_mul(p: dict, r: dict) -> dict:
    out: dict = {}
    for e1, c1 in p.items():
        for e2, c2 in r.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, ZERO) + c1 * c2
    return {e: c for e, c in out.items() if c}


def quadratic_polynomial(q) -> dict:
    b = len(q)
    p: dict = {}
    for i in range(b):
        for j in range(b):
            if q[i][j]:
                e = [0] * b
                e[i] += 1
                e[j] += 1
                e = tuple(e)
                p[e] = p.get(e, ZERO) + q[i][j]
    return {e: c for e, c in p.items() if c}


def dual_generator(q, m: int) -> dict:
    F = {tuple([0] * len(q)): Fraction(1)}
    Q = quadratic_polynomial(q)
    for _ in range(m):
        F = _poly_mul(F, Q)
    return F


def _factorial_vec(e) -> int:
    out = 1
    for x in e:
        out *= math.factorial(x)
    return out


class _Apolar:
    def __init__(self, spec: ModelSpec):
        self.b, self.m = spec.b, spec.m
        self.F = dual_generator(spec.q, spec.m)
        self.norm = math.factorial(2 * spec.m)
        self.mons = {k: monomials(self.b, k) for k in range(2 * self.m + 1)}
        self.basis: dict[int, list] = {}
        self.inv_pair: dict[int, list] = {}
        self._cache: dict = {}
        self._build()

    def trace_monomial(self, e) -> Fraction:
        """lambda(t^e) = e! * coef_e(F) / (2m)!  (contraction against F)."""
        c = self.F.get(tuple(e), ZERO)
        if not c:
            return ZERO
        return c * _factorial_vec(e) / self.norm

    def _row(self, e, cols):
        return [self.trace_monomial(tuple(a + b for a, b in zip(e, c))) for c in cols]

    def _build(self):
        top = 2 * self.m
        for k in range(top + 1):
            cols = self.mons[top - k]
            space = _EchelonSpace()
            chosen = []
            for e in self.mons[k]:
                if space.insert(self._row(e, cols)):
                    chosen.append(e)
            self.basis[k] = chosen
        for k in range(top + 1):
            dual = self.basis[top - k]
            P = [self._row(e, dual) for e in self.basis[k]]
            self.inv_pair[k] = inverse(P)

    def reduce(self, e) -> list:
        """Coordinates of the class of t^e in the pivot-monomial basis."""
        e = tuple(e)
        got = self._cache.get(e)
        if got is None:
            k = sum(e)
            row = self._row(e, self.basis[2 * self.m - k])
            inv = self.inv_pair[k]
            got = [sum((row[r] * inv[r][c] for r in range(len(row)) if row[r]), ZERO)
                   for c in range(len(inv[0]))]
            self._cache[e] = got
        return got


def apolar_model(spec: ModelSpec) -> GradedFrobeniusAlgebra:
    """Sym(V)/Ann(q^m) with trace lambda(p) = p(d)F/(2m)! and reference form q."""
    spec.check()
    ap = _Apolar(spec)
    m = spec.m
    top = 4 * m
    dims = [0] * (top + 1)
    for k in range(2 * m + 1):
        dims[2 * k] = len(ap.basis[k])
    mult = {}
    for i in range(2 * m + 1):
        for j in range(i, 2 * m + 1 - i):
            T = []
            for ea in ap.basis[i]:
                row = []
                for eb in ap.basis[j]:
                    row.append(ap.reduce(tuple(x + y for x, y in zip(ea, eb))))
                T.append(row)
            mult[(2 * i, 2 * j)] = T
    top_mon = ap.basis[2 * m][0]
    trace = [ap.trace_monomial(top_mon)]
    meta = {
        "b": spec.b,
        "m": spec.m,
        "construction": "apolar algebra of F = q^m",
        "basis": {str(2 * k): ["".join(str(x) for x in e) for e in ap.basis[k]]
                  for k in range(2 * m + 1)},
        "note": "models the subalgebra generated by degree 2 only; equality with full cohomology is untested",
    }
    return GradedFrobeniusAlgebra(top, dims, mult, trace, reference_form=spec.q, meta=meta)


def matching_sum(q, vectors: Sequence[Sequence]) -> Fraction:
    """Sum over perfect matchings of prod q(v_a, v_b)."""
    vs = [list(v) for v in vectors]
    if len(vs) % 2:
        raise ModelError("matching sum needs an even number of vectors")

    def qv(u, v):
        return sum((u[i] * q[i][j] * v[j] for i in range(len(u)) if u[i]
                    for j in range(len(v)) if v[j]), ZERO)

    def rec(idx: tuple) -> Fraction:
        if not idx:
            return Fraction(1)
        first, rest = idx[0], idx[1:]
        total = ZERO
        for k, other in enumerate(rest):
            w = qv(vs[first], vs[other])
            if w:
                total += w * rec(rest[:k] + rest[k + 1:])
        return total

    return rec(tuple(range(len(vs))))


# ---------------------------------------------------------------- lattices

@dataclass(frozen=True)
class IntegralLattice:
    gram: tuple

    @property
    def rank(self) -> int:
        return len(self.gram)

    def inertia(self) -> Inertia:
        return inertia_exact(self.gram)

    def to_json(self) -> dict:
        return {"gram": [list(r) for r in self.gram]}


def make_lattice(G) -> IntegralLattice:
    rows = []
    for row in G:
        r = []
        for x in row:
            fx = Fraction(x)
            if fx.denominator != 1:
                raise ModelError("lattice Gram matrix must be integral")
            r.append(int(fx))
        rows.append(tuple(r))
    if any(len(r) != len(rows) for r in rows) or not is_symmetric(rows):
        raise ModelError("lattice Gram matrix must be square symmetric")
    inert = inertia_exact(to_fractions(rows))
    if inert.as_tuple() != (3, len(rows) - 3, 0):
        raise InertiaMismatch(f"lattice inertia {inert.as_tuple()}, need (3, {len(rows) - 3}, 0)")
    return IntegralLattice(tuple(rows))


def diagonal_lattice(entries) -> IntegralLattice:
    n = len(entries)
    return make_lattice([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])


# ---------------------------------------------------------------- files

def model_to_json(A: GradedFrobeniusAlgebra) -> dict:
    mult = []
    for (i, j) in sorted(A.mult):
        T = A.mult[(i, j)]
        for a, row in enumerate(T):
            for b, vec in enumerate(row):
                if i == j and b < a:
                    continue
                for g, c in enumerate(vec):
                    if c:
                        mult.append([i, a, j, b, g, format_fraction(c)])
    out = {
        "top_degree": A.top_degree,
        "dims": list(A.dims),
        "mult": mult,
        "trace": [format_fraction(x) for x in A.trace],
        "meta": A.meta,
    }
    if A.reference_form is not None:
        out["reference_form"] = [[format_fraction(x) for x in row] for row in A.reference_form]
    return out


def save_model(A: GradedFrobeniusAlgebra) -> bytes:
    return (json.dumps(model_to_json(A), sort_keys=True, indent=1) + "\n").encode()


def _require(cond, msg):
    if not cond:
        raise ModelFileError(msg)


def model_from_json(data: dict) -> GradedFrobeniusAlgebra:
    _require(isinstance(data, dict), "model file must be a JSON object")
    for key in ("top_degree", "dims", "mult", "trace"):
        _require(key in data, f"missing field {key!r}")
    top = data["top_degree"]
    _require(isinstance(top, int) and top >= 0 and top % 2 == 0, "field 'top_degree' must be an even integer >= 0")
    dims = data["dims"]
    _require(isinstance(dims, list) and len(dims) == top + 1 and all(isinstance(x, int) and x >= 0 for x in dims),
             f"field 'dims' must list {top + 1} non-negative integers")
    trace = data["trace"]
    _require(isinstance(trace, list) and len(trace) == dims[top],
             f"field 'trace' has length {len(trace) if isinstance(trace, list) else '?'}, expected dims[{top}] = {dims[top]}")
    try:
        trace = [parse_scalar(x) for x in trace]
    except ExactError as exc:
        raise ModelFileError(f"field 'trace': {exc}") from exc

    mult = {}
    seen = {}
    for n, entry in enumerate(data["mult"]):
        where = f"mult[{n}]"
        _require(isinstance(entry, list) and len(entry) == 6, f"{where}: expected [i, a, j, b, g, 'p/q']")
        i, a, j, b, g, c = entry
        _require(all(isinstance(x, int) for x in (i, a, j, b, g)), f"{where}: indices must be integers")
        _require(i <= j, f"{where}: only entries with i <= j may be listed")
        _require(i + j <= top, f"{where}: degree {i + j} exceeds top degree")
        _require(0 <= a < dims[i] and 0 <= b < dims[j] and 0 <= g < dims[i + j], f"{where}: index out of range")
        try:
            val = parse_scalar(c)
        except ExactError as exc:
            raise ModelFileError(f"{where}: {exc}") from exc
        key = (i, a, j, b, g)
        _require(key not in seen, f"{where}: duplicate entry (first at mult[{seen.get(key)}])")
        seen[key] = n
        T = mult.setdefault((i, j), [[[Fraction(0)] * dims[i + j] for _ in range(dims[j])] for _ in range(dims[i])])
        T[a][b][g] = val
    # square blocks: listed lower-triangle pairs must mirror the upper ones
    listed = {}
    for (i, a, j, b, g), n in seen.items():
        if i == j:
            listed.setdefault((i, a, b), n)
    for (i, j), T in mult.items():
        if i != j:
            continue
        sgn = -1 if (i * i) % 2 else 1
        for a in range(dims[i]):
            for b in range(a):
                if (i, a, b) in listed:
                    _require(T[a][b] == [sgn * x for x in T[b][a]],
                             f"mult[{listed[(i, a, b)]}]: entry {[i, a, j, b]} violates graded commutativity "
                             f"with {[i, b, j, a]}")
                else:
                    T[a][b] = [sgn * x for x in T[b][a]]
    # absent blocks are zero
    for i in range(top + 1):
        for j in range(i, top + 1 - i):
            if dims[i] and dims[j] and dims[i + j] and (i, j) not in mult:
                mult[(i, j)] = [[[Fraction(0)] * dims[i + j] for _ in range(dims[j])] for _ in range(dims[i])]
    ref = data.get("reference_form")
    if ref is not None:
        _require(isinstance(ref, list) and len(ref) == dims[2 if top >= 2 else 0] and all(isinstance(r, list) and len(r) == len(ref) for r in ref),
                 "field 'reference_form' must be a square matrix on A_2")
        try:
            ref = [[parse_scalar(x) for x in row] for row in ref]
        except ExactError as exc:
            raise ModelFileError(f"field 'reference_form': {exc}") from exc
    return GradedFrobeniusAlgebra(top, dims, mult, trace, reference_form=ref, meta=data.get("meta", {}))


def load_model(raw: bytes | str) -> GradedFrobeniusAlgebra:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return model_from_json(data)
