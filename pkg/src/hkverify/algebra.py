"""Graded Frobenius algebras, Lefschetz triples and Lie closures.

Degrees are cohomological throughout: ``A[i]`` is the degree-``i`` component,
``top_degree`` is ``2d`` and the grading operator acts on ``A[i]`` by ``i - d``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import (
    ExactError,
    Inertia,
    identity,
    inertia_exact,
    inverse,
    is_zero_matrix,
    matmul,
    matvec,
    nullspace,
    rank,
    transpose,
    zeros,
)

ZERO = Fraction(0)
ONE = Fraction(1)


class AlgebraError(ExactError):
    pass


class NotLefschetzType(AlgebraError):
    pass


class NoLefschetzElement(AlgebraError):
    pass


# ---------------------------------------------------------------- the algebra

class GradedFrobeniusAlgebra:
    """Finite graded-commutative algebra given by structure constants.

    ``mult[(i, j)]`` (only ``i <= j``) is a nested list ``T[alpha][beta]`` of
    coefficient vectors in ``A[i + j]``.  Products with ``i > j`` follow from
    graded commutativity.  ``trace`` is the coefficient vector of the linear
    functional on ``A[top_degree]``.
    """

    def __init__(self, top_degree: int, dims: Sequence[int], mult: dict, trace: Sequence,
                 reference_form=None, meta: dict | None = None):
        if len(dims) != top_degree + 1:
            raise AlgebraError(f"dims has length {len(dims)}, expected {top_degree + 1}")
        self.top_degree = top_degree
        self.dims = tuple(int(x) for x in dims)
        self.mult = mult
        self.trace = tuple(Fraction(x) for x in trace)
        self.reference_form = (None if reference_form is None
                               else tuple(tuple(Fraction(x) for x in row) for row in reference_form))
        self.meta = dict(meta or {})
        self._left_cache: dict = {}

    @property
    def half_degree(self) -> int:
        return self.top_degree // 2

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def degrees(self) -> list[int]:
        return [i for i, n in enumerate(self.dims) if n]

    def offset(self, deg: int) -> int:
        return sum(self.dims[:deg])

    def __eq__(self, other):
        if not isinstance(other, GradedFrobeniusAlgebra):
            return NotImplemented
        return (self.top_degree == other.top_degree and self.dims == other.dims
                and self.trace == other.trace and self.reference_form == other.reference_form
                and _canon_mult(self) == _canon_mult(other) and self.meta == other.meta)

    def constant(self, i: int, a: int, j: int, b: int) -> list:
        """Coefficient vector of e^i_a * e^j_b in A[i+j]."""
        k = i + j
        if k > self.top_degree or not self.dims[i] or not self.dims[j] or not self.dims[k]:
            return [ZERO] * (self.dims[k] if k <= self.top_degree else 0)
        if i <= j:
            T = self.mult.get((i, j))
            return list(T[a][b]) if T is not None else [ZERO] * self.dims[k]
        T = self.mult.get((j, i))
        if T is None:
            return [ZERO] * self.dims[k]
        sgn = -1 if (i * j) % 2 else 1
        return [sgn * x for x in T[b][a]]

    def left_matrix(self, i: int, u: Sequence, j: int):
        """Matrix of x -> u*x from A[j] to A[i+j] (rows index A[i+j])."""
        k = i + j
        if k > self.top_degree:
            return []
        out = zeros(self.dims[k], self.dims[j])
        for a, ua in enumerate(u):
            if not ua:
                continue
            cols = self._left_basis(i, a, j)
            for b in range(self.dims[j]):
                col = cols[b]
                for g, c in enumerate(col):
                    if c:
                        out[g][b] += ua * c
        return out

    def _left_basis(self, i, a, j):
        key = (i, a, j)
        got = self._left_cache.get(key)
        if got is None:
            got = [self.constant(i, a, j, b) for b in range(self.dims[j])]
            self._left_cache[key] = got
        return got

    def multiply(self, i: int, u: Sequence, j: int, v: Sequence) -> list:
        k = i + j
        if k > self.top_degree:
            return []
        out = [ZERO] * self.dims[k]
        for a, ua in enumerate(u):
            if not ua:
                continue
            cols = self._left_basis(i, a, j)
            for b, vb in enumerate(v):
                if not vb:
                    continue
                c = ua * vb
                for g, x in enumerate(cols[b]):
                    if x:
                        out[g] += c * x
        return out

    def power(self, i: int, u: Sequence, k: int) -> tuple[int, list]:
        """(degree, vector) of u^k for u in A[i]; k >= 0."""
        deg, vec = 0, unit_vector(self)
        for _ in range(k):
            vec = self.multiply(i, u, deg, vec)
            deg += i
            if deg > self.top_degree:
                return deg, []
        return deg, vec

    def trace_of(self, vec: Sequence) -> Fraction:
        return sum((t * x for t, x in zip(self.trace, vec)), ZERO)

    def pairing_matrix(self, i: int):
        """Poincare pairing <e^i_a, e^{top-i}_b> = trace(e_a e_b)."""
        j = self.top_degree - i
        return [[self.trace_of(self.constant(i, a, j, b)) for b in range(self.dims[j])]
                for a in range(self.dims[i])]


def unit_vector(A: GradedFrobeniusAlgebra) -> list:
    return [ONE] + [ZERO] * (A.dims[0] - 1)


def _canon_mult(A: GradedFrobeniusAlgebra):
    out = []
    for (i, j) in sorted(A.mult):
        T = A.mult[(i, j)]
        for a, row in enumerate(T):
            for b, vec in enumerate(row):
                if i == j and b < a:
                    continue
                for g, c in enumerate(vec):
                    if c:
                        out.append((i, a, j, b, g, c))
    return tuple(out)


# ---------------------------------------------------------------- validation

@dataclass
class ValidationReport:
    checks: dict = field(default_factory=dict)

    def record(self, name: str, ok: bool, detail=None):
        self.checks[name] = {"pass": bool(ok), "detail": detail}

    @property
    def ok(self) -> bool:
        return all(c["pass"] for c in self.checks.values())

    def failures(self) -> list[str]:
        return [n for n, c in self.checks.items() if not c["pass"]]


def validate_algebra(A: GradedFrobeniusAlgebra) -> ValidationReport:
    rep = ValidationReport()
    top = A.top_degree
    degs = A.degrees()

    # graded commutativity inside square blocks (i, i)
    witness = None
    for i in degs:
        if 2 * i > top or (i, i) not in A.mult:
            continue
        sgn = -1 if (i * i) % 2 else 1
        T = A.mult[(i, i)]
        for a in range(A.dims[i]):
            for b in range(a + 1, A.dims[i]):
                if list(T[a][b]) != [sgn * x for x in T[b][a]]:
                    witness = witness or [i, a, i, b]
    rep.record("graded_commutativity", witness is None, witness)

    # unit
    ok_unit = A.dims[0] == 1
    witness = None
    if ok_unit:
        for j in degs:
            for b in range(A.dims[j]):
                e = [ZERO] * A.dims[j]
                e[b] = ONE
                if A.constant(0, 0, j, b) != e:
                    ok_unit = False
                    witness = witness or [j, b]
    rep.record("unit", ok_unit, witness)

    # associativity on all basis triples
    witness = None
    for i in degs:
        for j in degs:
            if i + j > top:
                continue
            for k in degs:
                if i + j + k > top or witness:
                    continue
                for a in range(A.dims[i]):
                    for b in range(A.dims[j]):
                        ab = A.constant(i, a, j, b)
                        for c in range(A.dims[k]):
                            lhs = A.multiply(i + j, ab, k, _basis(A.dims[k], c))
                            bc = A.constant(j, b, k, c)
                            rhs = A.multiply(i, _basis(A.dims[i], a), j + k, bc)
                            if lhs != rhs:
                                witness = [[i, a], [j, b], [k, c]]
                                break
                        if witness:
                            break
                    if witness:
                        break
    rep.record("associativity", witness is None, witness)

    # Poincare duality
    ok_pd = A.dims[top] == 1 and len(A.trace) == 1 and A.trace[0] != 0
    bad = None
    if ok_pd:
        for i in range(top + 1):
            if A.dims[i] != A.dims[top - i]:
                ok_pd, bad = False, i
                break
            if A.dims[i] and rank(A.pairing_matrix(i)) != A.dims[i]:
                ok_pd, bad = False, i
                break
    rep.record("poincare_pairing", ok_pd, bad)
    return rep


def _basis(n: int, k: int) -> list:
    v = [ZERO] * n
    v[k] = ONE
    return v


# ---------------------------------------------------------------- graded endomorphisms

class GradedEndo:
    """Homogeneous endomorphism of degree ``delta``: blocks A[s] -> A[s + delta]."""

    __slots__ = ("dims", "delta", "blocks")

    def __init__(self, dims: Sequence[int], delta: int, blocks: dict):
        self.dims = tuple(dims)
        self.delta = delta
        self.blocks = {}
        for s in range(len(self.dims)):
            t = s + delta
            if 0 <= t < len(self.dims) and self.dims[s] and self.dims[t]:
                M = blocks.get(s)
                self.blocks[s] = [list(r) for r in M] if M is not None else zeros(self.dims[t], self.dims[s])

    @classmethod
    def zero(cls, dims, delta):
        return cls(dims, delta, {})

    def __matmul__(self, other: "GradedEndo") -> "GradedEndo":
        blocks = {}
        for s, B in other.blocks.items():
            A = self.blocks.get(s + other.delta)
            if A is not None:
                blocks[s] = matmul(A, B)
        return GradedEndo(self.dims, self.delta + other.delta, blocks)

    def bracket(self, other: "GradedEndo") -> "GradedEndo":
        return (self @ other) - (other @ self)

    def _combine(self, other, f):
        if self.delta != other.delta:
            raise AlgebraError("adding endomorphisms of different degrees")
        blocks = {s: [[f(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(M, other.blocks[s])]
                  for s, M in self.blocks.items()}
        return GradedEndo(self.dims, self.delta, blocks)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def scale(self, c) -> "GradedEndo":
        return GradedEndo(self.dims, self.delta,
                          {s: [[c * x for x in r] for r in M] for s, M in self.blocks.items()})

    def __neg__(self):
        return self.scale(-1)

    def is_zero(self) -> bool:
        return all(is_zero_matrix(M) for M in self.blocks.values())

    def __eq__(self, other):
        if not isinstance(other, GradedEndo):
            return NotImplemented
        if self.dims != other.dims:
            return False
        if self.delta != other.delta:
            return self.is_zero() and other.is_zero()
        return self.blocks == other.blocks

    def apply(self, deg: int, vec: Sequence) -> list:
        M = self.blocks.get(deg)
        if M is None:
            t = deg + self.delta
            return [ZERO] * self.dims[t] if 0 <= t < len(self.dims) else []
        return matvec(M, vec)

    def flatten(self) -> list:
        """Row-major concatenation of blocks in ascending source degree."""
        out = []
        for s in sorted(self.blocks):
            for row in self.blocks[s]:
                out.extend(row)
        return out

    @classmethod
    def from_flat(cls, dims, delta, flat):
        proto = cls.zero(dims, delta)
        blocks, pos = {}, 0
        for s in sorted(proto.blocks):
            r, c = len(proto.blocks[s]), dims[s]
            blocks[s] = [list(flat[pos + k * c: pos + (k + 1) * c]) for k in range(r)]
            pos += r * c
        return cls(dims, delta, blocks)

    def dense(self):
        """Full matrix on the direct sum of all components (degree order)."""
        n = sum(self.dims)
        offs = [sum(self.dims[:i]) for i in range(len(self.dims))]
        out = zeros(n, n)
        for s, M in self.blocks.items():
            t = s + self.delta
            for r, row in enumerate(M):
                for c, x in enumerate(row):
                    if x:
                        out[offs[t] + r][offs[s] + c] = x
        return out

    def trace(self):
        if self.delta != 0:
            return ZERO
        return sum((M[i][i] for M in self.blocks.values() for i in range(len(M))), ZERO)

    def __repr__(self):
        return f"GradedEndo(delta={self.delta}, dims={self.dims})"


def grading_operator(A: GradedFrobeniusAlgebra) -> GradedEndo:
    d = A.half_degree
    return GradedEndo(A.dims, 0, {s: identity(A.dims[s], Fraction(s - d), ZERO)
                                  for s in range(A.top_degree + 1) if A.dims[s]})


def left_multiplication(A: GradedFrobeniusAlgebra, deg: int, u: Sequence) -> GradedEndo:
    return GradedEndo(A.dims, deg, {s: A.left_matrix(deg, u, s)
                                    for s in range(A.top_degree + 1 - deg) if A.dims[s]})


# ---------------------------------------------------------------- Lefschetz theory

def _power_matrix(L: GradedEndo, src: int, k: int):
    """Matrix of L^k from A[src] (L of degree 2)."""
    dims = L.dims
    M = identity(dims[src])
    deg = src
    for _ in range(k):
        B = L.blocks.get(deg)
        if B is None:
            return zeros(dims[deg + 2] if deg + 2 < len(dims) else 0, dims[src])
        M = matmul(B, M)
        deg += 2
    return M


def lefschetz_type(A: GradedFrobeniusAlgebra, a: Sequence) -> bool:
    """Hard-Lefschetz rank criterion: L_a^k : A[d-k] -> A[d+k] bijective, k = 1..d."""
    if all(x == 0 for x in a):
        return False
    L = left_multiplication(A, 2, a)
    d = A.half_degree
    for k in range(1, d + 1):
        src, tgt = d - k, d + k
        if A.dims[src] != A.dims[tgt]:
            return False
        if not A.dims[src]:
            continue
        if rank(_power_matrix(L, src, k)) != A.dims[src]:
            return False
    return True


@dataclass
class LefschetzDecomposition:
    """Basis of A adapted to the sl(2) of L: vectors L^j p with p primitive."""
    # per degree: list of (r, j, p_index, vector); r = degree of the primitive p
    columns: dict

    def basis_matrix(self, deg: int):
        return transpose([c[3] for c in self.columns[deg]])


def lefschetz_decomposition(A: GradedFrobeniusAlgebra, L: GradedEndo) -> LefschetzDecomposition:
    d = A.half_degree
    top = A.top_degree
    cols = {s: [] for s in range(top + 1) if A.dims[s]}
    for r in range(d + 1):
        if not A.dims[r]:
            continue
        k = d - r + 1
        P = _power_matrix(L, r, k) if r + 2 * k <= top else None
        prim = nullspace(P, A.dims[r]) if P else [_basis(A.dims[r], t) for t in range(A.dims[r])]
        for pi, p in enumerate(prim):
            vec, deg = list(p), r
            for j in range(d - r + 1):
                cols[deg].append((r, j, pi, vec))
                if j < d - r:
                    vec = L.apply(deg, vec)
                    deg += 2
    for s, c in cols.items():
        if len(c) != A.dims[s] or rank([v[3] for v in c]) != A.dims[s]:
            raise NotLefschetzType(f"primitive decomposition does not span degree {s}")
    return LefschetzDecomposition(cols)


def lefschetz_dual(A: GradedFrobeniusAlgebra, a: Sequence) -> GradedEndo:
    """The unique degree -2 operator completing (L_a, H) to an sl(2)-triple."""
    if not lefschetz_type(A, a):
        raise NotLefschetzType("element is not of Lefschetz type")
    L = left_multiplication(A, 2, a)
    dec = lefschetz_decomposition(A, L)
    d = A.half_degree
    blocks = {}
    for s, cols in dec.columns.items():
        if s < 2 or not A.dims[s - 2]:
            continue
        T = dec.basis_matrix(s)
        index = {(r, j, pi): v for (r, j, pi, v) in dec.columns[s - 2]}
        images = []
        for (r, j, pi, _) in cols:
            n = d - r
            if j == 0:
                images.append([ZERO] * A.dims[s - 2])
            else:
                coef = Fraction(j * (n - j + 1))
                images.append([coef * x for x in index[(r, j - 1, pi)]])
        blocks[s] = matmul(transpose(images), inverse(T))
    Lam = GradedEndo(A.dims, -2, blocks)
    H = grading_operator(A)
    if not (L.bracket(Lam) == H and H.bracket(L) == L.scale(2) and H.bracket(Lam) == Lam.scale(-2)):
        raise AlgebraError("Lefschetz triple relations failed (internal error)")
    return Lam


def solve_lefschetz_dual(A: GradedFrobeniusAlgebra, a: Sequence):
    """Solve [L_a, X] = H directly for a degree -2 operator X.

    Independent of the primitive-decomposition route; returns None when the
    linear system has no solution.  Cost grows quickly, meant for small models.
    """
    L = left_multiplication(A, 2, a)
    H = grading_operator(A)
    proto = GradedEndo.zero(A.dims, -2)
    nvars = len(proto.flatten())
    rows, rhs = [], []
    # equation is linear in X; build columns by applying to unit flats
    cols = []
    for v in range(nvars):
        flat = [ZERO] * nvars
        flat[v] = ONE
        X = GradedEndo.from_flat(A.dims, -2, flat)
        cols.append(L.bracket(X).flatten())
    target = H.flatten()
    M = transpose(cols)
    for row, t in zip(M, target):
        rows.append(row)
        rhs.append(t)
    from .exact import solve
    x = solve(rows, rhs)
    if x is None:
        return None
    if nullspace(rows, nvars):
        raise AlgebraError("Lefschetz dual is not unique")
    return GradedEndo.from_flat(A.dims, -2, x)


# ---------------------------------------------------------------- Lie subalgebras

class _EchelonSpace:
    """Incrementally maintained reduced row-echelon basis of flat vectors."""

    def __init__(self):
        self.rows: list[list] = []
        self.pivots: list[int] = []

    def reduce(self, v: list) -> list:
        v = list(v)
        for row, p in zip(self.rows, self.pivots):
            c = v[p]
            if c:
                v = [x - c * y if y else x for x, y in zip(v, row)]
        return v

    def insert(self, v: list) -> bool:
        r = self.reduce(v)
        p = next((i for i, x in enumerate(r) if x), None)
        if p is None:
            return False
        inv = 1 / r[p]
        r = [x * inv for x in r]
        for k, row in enumerate(self.rows):
            c = row[p]
            if c:
                self.rows[k] = [x - c * y if y else x for x, y in zip(row, r)]
        pos = next((k for k, q in enumerate(self.pivots) if q > p), len(self.pivots))
        self.rows.insert(pos, r)
        self.pivots.insert(pos, p)
        return True

    def coordinates(self, v: list) -> list:
        return [v[p] for p in self.pivots]


class LieSubalgebra:
    """Span of homogeneous endomorphisms, kept graded by map degree."""

    def __init__(self, dims: Sequence[int]):
        self.dims = tuple(dims)
        self._spaces: dict[int, _EchelonSpace] = {}
        self._added: list[GradedEndo] = []
        self.closed = False

    @property
    def dim(self) -> int:
        return sum(len(s.rows) for s in self._spaces.values())

    def degrees(self) -> list[int]:
        return sorted(k for k, s in self._spaces.items() if s.rows)

    def graded_dims(self) -> dict[int, int]:
        return {k: len(self._spaces[k].rows) for k in self.degrees()}

    def add(self, x: GradedEndo) -> GradedEndo | None:
        """Insert x; return the reduced new direction or None if already spanned."""
        space = self._spaces.setdefault(x.delta, _EchelonSpace())
        flat = x.flatten()
        r = space.reduce(flat)
        if not any(r):
            return None
        space.insert(r)
        y = GradedEndo.from_flat(self.dims, x.delta, r)
        self._added.append(y)
        self.closed = False
        return y

    def contains(self, x: GradedEndo) -> bool:
        if x.is_zero():
            return True
        space = self._spaces.get(x.delta)
        if space is None:
            return False
        return not any(space.reduce(x.flatten()))

    def basis(self) -> list[GradedEndo]:
        """Canonical basis: echelon rows, ascending degree."""
        out = []
        for k in self.degrees():
            for row in self._spaces[k].rows:
                out.append(GradedEndo.from_flat(self.dims, k, row))
        return out

    def canonical(self) -> dict:
        return {k: tuple(tuple(r) for r in self._spaces[k].rows) for k in self.degrees()}

    def __eq__(self, other):
        if not isinstance(other, LieSubalgebra):
            return NotImplemented
        return self.dims == other.dims and self.canonical() == other.canonical()

    def coordinates(self, x: GradedEndo) -> list:
        """Coordinates of a homogeneous x against basis()."""
        out = []
        for k in self.degrees():
            if k == x.delta:
                out.extend(self._spaces[k].coordinates(x.flatten()))
            else:
                out.extend([ZERO] * len(self._spaces[k].rows))
        return out

    def close(self, max_dim: int | None = None) -> "LieSubalgebra":
        """Bracket-close in place; every pair of inserted directions is bracketed once."""
        pending = []
        done = getattr(self, "_bracketed", 0)
        added = self._added
        for idx in range(done, len(added)):
            for jdx in range(idx):
                pending.append((idx, jdx))
        self._bracketed = len(added)
        while pending:
            i, j = pending.pop()
            z = added[i].bracket(added[j])
            if z.is_zero():
                continue
            if self.add(z) is not None:
                new = len(added) - 1
                pending.extend((new, k) for k in range(new))
                self._bracketed = len(added)
                if max_dim is not None and self.dim > max_dim:
                    raise AlgebraError("closure exceeded its dimension bound")
        self.closed = True
        return self

    def graded_parts(self) -> dict[int, list[GradedEndo]]:
        return {k: [GradedEndo.from_flat(self.dims, k, r) for r in self._spaces[k].rows]
                for k in self.degrees()}


def lie_closure(generators: Iterable[GradedEndo]) -> LieSubalgebra:
    gens = list(generators)
    if not gens:
        raise AlgebraError("lie_closure needs at least one generator")
    g = LieSubalgebra(gens[0].dims)
    for x in gens:
        if x.dims != g.dims:
            raise AlgebraError("generators act on different algebras")
        g.add(x)
    bound = sum(g.dims) ** 2
    return g.close(max_dim=bound)


def graded_parts(g: LieSubalgebra) -> dict[int, list[GradedEndo]]:
    return g.graded_parts()


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    count: int = 20
    height: int = 3
    window: int = 3


def structure_lie_algebra(A: GradedFrobeniusAlgebra, config: SamplerConfig = SamplerConfig()) -> LieSubalgebra:
    """Closure of {L_a, Lambda_a} over a seeded sample of Lefschetz-type a in A[2]."""
    b = A.dims[2]
    g = LieSubalgebra(A.dims)
    found = 0

    def absorb(a):
        g.add(left_multiplication(A, 2, a))
        g.add(lefschetz_dual(A, a))
        g.close()

    for i in range(b):
        e = _basis(b, i)
        if lefschetz_type(A, e):
            absorb(e)
            found += 1
    rng = random.Random(config.seed)
    stale, tries = 0, 0
    while stale < config.window and tries < config.count:
        tries += 1
        a = [Fraction(rng.randint(-config.height, config.height)) for _ in range(b)]
        if not lefschetz_type(A, a):
            continue
        found += 1
        before = g.dim
        absorb(a)
        stale = stale + 1 if g.dim == before else 0
    if not found:
        raise NoLefschetzElement("no Lefschetz-type element found in A[2]")
    return g


# ---------------------------------------------------------------- forms on g and on A

def killing_matrix(g: LieSubalgebra):
    basis = g.basis()
    n = len(basis)
    ad = []
    for x in basis:
        cols = [g.coordinates(x.bracket(y)) for y in basis]
        ad.append(transpose(cols))  # ad[x][k][l] = coord k of [x, y_l]
    B = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            s = ZERO
            Ai, Aj = ad[i], ad[j]
            for k in range(n):
                rowi = Ai[k]
                for l in range(n):
                    if rowi[l]:
                        c = Aj[l][k]
                        if c:
                            s += rowi[l] * c
            B[i][j] = B[j][i] = s
    return B


def killing_inertia(g: LieSubalgebra) -> Inertia:
    return inertia_exact(killing_matrix(g))


def invariant_symmetric_forms(g: LieSubalgebra, degrees: Sequence[int] | None = None) -> list:
    """Symmetric B on A (or on the listed degrees) with B(Xu, v) + B(u, Xv) = 0 for X in g."""
    dims = g.dims
    degs = [d for d in (degrees if degrees is not None else range(len(dims))) if dims[d]]
    idx = []
    for d in degs:
        idx.extend((d, k) for k in range(dims[d]))
    pos = {key: n for n, key in enumerate(idx)}
    n = len(idx)
    unknowns = [(i, j) for i in range(n) for j in range(i, n)]
    uidx = {u: k for k, u in enumerate(unknowns)}

    def var(i, j):
        return uidx[(i, j) if i <= j else (j, i)]

    eqs = []
    for X in g.basis():
        # X restricted to the chosen degrees: entries x[(t,r),(s,c)]
        Xm = {}
        for s, M in X.blocks.items():
            t = s + X.delta
            if s in degs and t in degs:
                for r, row in enumerate(M):
                    for c, val in enumerate(row):
                        if val:
                            Xm.setdefault(pos[(s, c)], []).append((pos[(t, r)], val))
        if not Xm:
            continue
        # sum_k X[k,i] B[k,j] + B[i,k] X[k,j] = 0
        for i in range(n):
            for j in range(i, n):
                eq = {}
                for k, val in Xm.get(i, ()):
                    v = var(k, j)
                    eq[v] = eq.get(v, ZERO) + val
                for k, val in Xm.get(j, ()):
                    v = var(i, k)
                    eq[v] = eq.get(v, ZERO) + val
                if any(eq.values()):
                    row = [ZERO] * len(unknowns)
                    for v, val in eq.items():
                        row[v] = val
                    eqs.append(row)
    sols = nullspace(eqs, len(unknowns)) if eqs else nullspace([], len(unknowns))
    forms = []
    total = sum(dims[d] for d in degs)
    for sol in sols:
        Bm = zeros(total, total)
        for (i, j), k in uidx.items():
            Bm[i][j] = Bm[j][i] = sol[k]
        forms.append(Bm)
    return forms
