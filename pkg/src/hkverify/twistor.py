"""Period-domain geometry: twistor planes, paths between them and Neron-Severi checks.

A twistor line is encoded by a positive 3-plane W with an equal-norm
q-orthogonal frame. A period point is a complex line span(u + i v) stored
through the real pair (u, v). Scalars are Fractions or QuadScalars in Q(sqrt d).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import (
    ExactError,
    QuadScalar,
    SubspaceExact,
    bilinear,
    antisymmetric_for_form,
    cayley_orthogonal,
    exact_sqrt,
    format_scalar,
    identity,
    inertia_exact,
    intersect_subspaces,
    matmul,
    matvec,
    nullspace,
    parse_scalar,
    rank,
    rational_sqrt,
    split_rational_parts,
    transpose,
    zeros,
)
from .hodge import positive_frame
from .models import IntegralLattice

ZERO = Fraction(0)
ONE = Fraction(1)


class TwistorError(ExactError):
    pass


class NotPositive(TwistorError):
    pass


class NotThreeDim(TwistorError):
    pass


class NormMismatch(TwistorError):
    pass


class IrrationalDirection(TwistorError):
    pass


class SearchExhausted(TwistorError):
    def __init__(self, message: str, max_height: int | None = None, max_steps: int | None = None):
        super().__init__(f"{message} (max_height={max_height}, max_steps={max_steps})")
        self.max_height = max_height
        self.max_steps = max_steps


class PreconditionNS(TwistorError):
    pass


class PeriodNotOnLine(TwistorError):
    pass


# ---------------------------------------------------------------- small vector helpers

def _lin(*terms):
    """Linear combination sum(c * v)."""
    out = None
    for c, v in terms:
        cv = [c * x for x in v]
        out = cv if out is None else [a + b for a, b in zip(out, cv)]
    return out


def _reflect(q, w, v):
    c = 2 * bilinear(q, v, w) / bilinear(q, w, w)
    return [a - c * b for a, b in zip(v, w)]


def _is_zero(v) -> bool:
    return all(x == 0 for x in v)


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class PeriodSpace:
    gram: tuple
    d: int | None = 3

    @classmethod
    def make(cls, gram, d: int | None = 3) -> "PeriodSpace":
        G = tuple(tuple(Fraction(x) for x in row) for row in gram)
        n = len(G)
        if any(len(r) != n for r in G) or any(G[i][j] != G[j][i] for i in range(n) for j in range(n)):
            raise TwistorError("gram must be a symmetric square matrix")
        if inertia_exact([list(r) for r in G]).as_tuple() != (3, n - 3, 0):
            raise TwistorError(f"period space needs inertia (3, {n - 3}, 0)")
        return cls(G, d)

    @property
    def b(self) -> int:
        return len(self.gram)

    @property
    def q(self):
        return [list(r) for r in self.gram]

    def sqrt(self, x):
        """Square root inside the scalar context, or None."""
        if self.d is None:
            if isinstance(x, QuadScalar):
                if not x.is_rational():
                    return None
                x = x.a
            return rational_sqrt(x)
        if not isinstance(x, QuadScalar):
            x = QuadScalar(x, 0, self.d)
        return exact_sqrt(x)


@dataclass(frozen=True)
class PeriodPoint:
    u: tuple
    v: tuple

    @classmethod
    def make(cls, ps: PeriodSpace, u, v) -> "PeriodPoint":
        u, v = tuple(u), tuple(v)
        q = ps.q
        quu, qvv = bilinear(q, u, u), bilinear(q, v, v)
        if not (quu == qvv and quu > 0 and bilinear(q, u, v) == 0):
            raise TwistorError("period pair must be q-orthogonal with equal positive norms")
        if rank([list(u), list(v)]) != 2:
            raise TwistorError("period pair is linearly dependent")
        return cls(u, v)

    def isotropic(self, ps: PeriodSpace) -> bool:
        """(l, l) = q(u,u) - q(v,v) + 2i q(u,v) vanishes; (l, conj l) > 0."""
        q = ps.q
        return (bilinear(q, self.u, self.u) - bilinear(q, self.v, self.v) == 0
                and bilinear(q, self.u, self.v) == 0 and bilinear(q, self.u, self.u) > 0)

    def real_plane(self, n: int) -> SubspaceExact:
        return SubspaceExact(n, [list(self.u), list(self.v)])

    def same_line(self, other: "PeriodPoint") -> bool:
        """u' + i v' = c (u + i v) for some complex c = a + i b."""
        M = transpose([list(self.u), [-x for x in self.v]])
        sol = nullspace([row + [-x] for row, x in zip(M, other.u)], 3)
        for s in sol:
            if s[2] != 0:
                a, b = s[0] / s[2], s[1] / s[2]
                return list(other.v) == [b * x + a * y for x, y in zip(self.u, self.v)]
        return False

    def to_json(self) -> dict:
        return {"u": [format_scalar(x) for x in self.u], "v": [format_scalar(x) for x in self.v]}


@dataclass(frozen=True)
class TwistorPlane:
    space: SubspaceExact
    frame: tuple
    norm: object

    def contains(self, vec) -> bool:
        return self.space.contains(list(vec))

    def to_json(self) -> list:
        return [[format_scalar(x) for x in f] for f in self.frame]


@dataclass
class TwistorPath:
    edges: list
    vertices: list  # one entry per junction: PeriodPoint or None
    endpoints: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.edges) - 1

    def to_json(self, ps: PeriodSpace) -> dict:
        return {
            "space": {"gram": [[format_scalar(x) for x in r] for r in ps.gram], "d": ps.d},
            "edges": [e.to_json() for e in self.edges],
            "vertices": [None if v is None else v.to_json() for v in self.vertices],
            "endpoints": {k: p.to_json() for k, p in sorted(self.endpoints.items())},
            "notes": list(self.notes),
        }


def _parse_vec(xs, d):
    return [parse_scalar(x, d) for x in xs]


def path_from_json(data: dict) -> tuple[PeriodSpace, TwistorPath]:
    d = data["space"].get("d")
    ps = PeriodSpace.make([[parse_scalar(x) for x in r] for r in data["space"]["gram"]], d)
    edges = [_frame_plane(ps, [_parse_vec(f, d) for f in fr]) for fr in data["edges"]]
    verts = [None if v is None else PeriodPoint.make(ps, _parse_vec(v["u"], d), _parse_vec(v["v"], d))
             for v in data["vertices"]]
    ends = {k: PeriodPoint.make(ps, _parse_vec(p["u"], d), _parse_vec(p["v"], d))
            for k, p in data.get("endpoints", {}).items()}
    return ps, TwistorPath(edges, verts, ends, list(data.get("notes", [])))


@dataclass(frozen=True)
class NSLattice:
    basis: tuple  # canonical Hermite normal form rows

    @property
    def rank(self) -> int:
        return len(self.basis)

    def to_json(self) -> list:
        return [list(r) for r in self.basis]


# ---------------------------------------------------------------- planes and periods

def _frame_plane(ps: PeriodSpace, frame) -> TwistorPlane:
    q = ps.q
    frame = tuple(tuple(f) for f in frame)
    s = bilinear(q, frame[0], frame[0])
    for i in range(3):
        for j in range(3):
            if bilinear(q, frame[i], frame[j]) != (s if i == j else 0):
                raise NormMismatch("frame is not q-orthogonal with a common norm")
    if not s > 0:
        raise NotPositive("frame norm is not positive")
    return TwistorPlane(SubspaceExact(ps.b, [list(f) for f in frame]), frame, s)


def plane_make(ps: PeriodSpace, x, y, z) -> TwistorPlane:
    q = ps.q
    vecs = [list(x), list(y), list(z)]
    if rank(vecs) != 3:
        raise NotThreeDim("vectors do not span a 3-dimensional subspace")
    gram = [[bilinear(q, a, b) for b in vecs] for a in vecs]
    if inertia_exact(gram).as_tuple() != (3, 0, 0):
        raise NotPositive("q is not positive definite on the span")
    ortho = []
    for v in vecs:
        w = list(v)
        for u in ortho:
            c = bilinear(q, w, u) / bilinear(q, u, u)
            w = [a - c * b for a, b in zip(w, u)]
        ortho.append(w)
    s = bilinear(q, ortho[0], ortho[0])
    frame = [ortho[0]]
    for w in ortho[1:]:
        r = ps.sqrt(s / bilinear(q, w, w))
        if r is None:
            raise NormMismatch("no common-norm frame over the scalar context")
        frame.append([r * a for a in w])
    return _frame_plane(ps, frame)


def _check_direction(direction):
    a, b, c = (Fraction(v) for v in direction)
    if a * a + b * b + c * c != 1:
        raise IrrationalDirection(f"direction {direction} is not a rational unit vector")
    return a, b, c


def rotation_to(direction):
    """Rational R in SO(3) with R e1 = direction (Householder times a flip)."""
    n = list(_check_direction(direction))
    e1 = [ONE, ZERO, ZERO]
    if n == e1:
        return identity(3)
    w = [a - b for a, b in zip(e1, n)]
    ww = sum(a * a for a in w)
    H = [[(ONE if i == j else ZERO) - 2 * w[i] * w[j] / ww for j in range(3)] for i in range(3)]
    return matmul(H, [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, -ONE]])


def rotate_frame(frame, R):
    """f'_a = sum_j R[j][a] f_j."""
    return tuple(tuple(_lin(*[(R[j][a], frame[j]) for j in range(3)])) for a in range(3))


def period_of_induced(W: TwistorPlane, direction) -> PeriodPoint:
    f = rotate_frame(W.frame, rotation_to(direction))
    return PeriodPoint(f[1], f[2])


@dataclass(frozen=True)
class Intersection:
    intersect: bool
    shared: SubspaceExact
    vertices: tuple
    note: str = ""


def _vertex_pair(ps: PeriodSpace, P: SubspaceExact):
    """Equal-norm orthogonal pair spanning P (canonical basis order), or None."""
    q = ps.q
    u = list(P.basis[0])
    v = list(P.basis[1])
    c = bilinear(q, v, u) / bilinear(q, u, u)
    v = [a - c * b for a, b in zip(v, u)]
    r = ps.sqrt(bilinear(q, u, u) / bilinear(q, v, v))
    if r is None:
        return None
    return u, [r * a for a in v]


def lines_intersect(ps: PeriodSpace, W1: TwistorPlane, W2: TwistorPlane) -> Intersection:
    shared = intersect_subspaces(W1.space, W2.space)
    if shared.dim < 2:
        return Intersection(False, shared, ())
    if shared.dim == 3:
        # same line: every point is shared; use the leading frame pair of the canonical plane
        P = SubspaceExact(ps.b, [list(shared.basis[0]), list(shared.basis[1])])
    else:
        P = shared
    pair = _vertex_pair(ps, P)
    if pair is None:
        return Intersection(True, shared, (), "NoRationalVertex: no equal-norm orthogonal pair in the shared plane")
    u, v = pair
    return Intersection(True, shared, (PeriodPoint(tuple(u), tuple(v)), PeriodPoint(tuple(u), tuple(-x for x in v))))


# ---------------------------------------------------------------- connectivity

def _same_plane(A: TwistorPlane, B: TwistorPlane) -> bool:
    return A.space == B.space


def _shortcut(ps, edges):
    out = [edges[0]]
    i = 0
    while i < len(edges) - 1:
        j = len(edges) - 1
        while j > i + 1 and intersect_subspaces(edges[i].space, edges[j].space).dim < 2:
            j -= 1
        out.append(edges[j])
        i = j
    return out


def _attach_vertices(ps, edges):
    verts, notes = [], []
    for a, b in zip(edges, edges[1:]):
        res = lines_intersect(ps, a, b)
        if not res.intersect:
            raise TwistorError("internal: consecutive edges do not intersect")
        verts.append(res.vertices[0] if res.vertices else None)
        if res.note:
            notes.append(res.note)
    return verts, notes


def connect_planes(ps: PeriodSpace, W: TwistorPlane, W2: TwistorPlane, max_height: int = 20) -> TwistorPath:
    """Path from W to W2 by at most three reflections carrying one frame onto the other."""
    if _same_plane(W, W2):
        return TwistorPath([W], [])
    q = ps.q
    ratio = ps.sqrt(W.norm / W2.norm)
    if ratio is None:
        raise SearchExhausted("frame norms lie in different square classes; no isometry carries one frame to the other",
                              max_height, 3)
    target = [[ratio * x for x in f] for f in W2.frame]
    frame = [list(f) for f in W.frame]
    edges = [W]
    for i in range(3):
        if frame[i] == target[i]:
            continue
        w = [a - b for a, b in zip(frame[i], target[i])]
        if bilinear(q, w, w) == 0:
            w = [a + b for a, b in zip(frame[i], target[i])]
        frame = [_reflect(q, w, f) for f in frame]
        edges.append(_frame_plane(ps, frame))
    edges.append(W2)
    dedup = [edges[0]]
    for e in edges[1:]:
        if not _same_plane(e, dedup[-1]):
            dedup.append(e)
    edges = _shortcut(ps, dedup)
    verts, notes = _attach_vertices(ps, edges)
    return TwistorPath(edges, verts, {}, notes)


def validate_path(ps: PeriodSpace, path: TwistorPath) -> list[str]:
    """Independent check of a path; returns the list of violations (empty when valid)."""
    q = ps.q
    errs = []
    if not path.edges:
        return ["path has no edges"]
    for k, e in enumerate(path.edges):
        fr = [list(f) for f in e.frame]
        gram = [[bilinear(q, a, b) for b in fr] for a in fr]
        if rank(fr) != 3:
            errs.append(f"edge {k}: frame not of rank 3")
            continue
        if inertia_exact(gram).as_tuple() != (3, 0, 0):
            errs.append(f"edge {k}: not positive definite")
        if any(gram[i][j] != (gram[0][0] if i == j else 0) for i in range(3) for j in range(3)):
            errs.append(f"edge {k}: frame not orthogonal with equal norms")
        if rank(fr + [list(b) for b in e.space.basis]) != 3:
            errs.append(f"edge {k}: frame does not span the stored plane")
    if len(path.vertices) != len(path.edges) - 1:
        errs.append("vertex count differs from junction count")
    for k, (a, b) in enumerate(zip(path.edges, path.edges[1:])):
        fa, fb = [list(f) for f in a.frame], [list(f) for f in b.frame]
        if 6 - rank(fa + fb) < 2:
            errs.append(f"junction {k}: intersection dimension below 2")
        v = path.vertices[k] if k < len(path.vertices) else None
        if v is not None:
            if not v.isotropic(ps):
                errs.append(f"junction {k}: vertex not on the quadric with positive norm")
            for f in (fa, fb):
                if rank(f + [list(v.u), list(v.v)]) != 3:
                    errs.append(f"junction {k}: vertex not contained in an adjacent edge")
    for name, idx in (("I", 0), ("I'", len(path.edges) - 1)):
        p = path.endpoints.get(name)
        if p is not None:
            if not p.isotropic(ps):
                errs.append(f"endpoint {name}: not on the quadric with positive norm")
            if rank([list(f) for f in path.edges[idx].frame] + [list(p.u), list(p.v)]) != 3:
                errs.append(f"endpoint {name}: not induced by its edge")
    return errs


# ---------------------------------------------------------------- integral lattices

def _integer_rows(rows):
    out = []
    for r in rows:
        den = 1
        for x in r:
            den = den * Fraction(x).denominator // _gcd(den, Fraction(x).denominator)
        out.append([int(Fraction(x) * den) for x in r])
    return out


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def integer_kernel(rows, n: int) -> list[list[int]]:
    """Saturated basis of {x in Z^n : M x = 0} by unimodular column operations."""
    M = [list(r) for r in _integer_rows(rows) if any(r)]
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]  # columns track the transform
    col = 0
    for r in range(len(M)):
        if col >= n:
            break
        # gcd-reduce row r over columns col..n-1
        while True:
            nz = [j for j in range(col, n) if M[r][j] != 0]
            if not nz:
                break
            p = min(nz, key=lambda j: abs(M[r][j]))
            for j in nz:
                if j != p:
                    f = M[r][j] // M[r][p]
                    for i in range(len(M)):
                        M[i][j] -= f * M[i][p]
                    for i in range(n):
                        U[i][j] -= f * U[i][p]
            if all(M[r][j] == 0 for j in range(col, n) if j != p):
                for X in (M, U):
                    for row in X:
                        row[col], row[p] = row[p], row[col]
                col += 1
                break
    return [[U[i][j] for i in range(n)] for j in range(col, n)]


def hermite_rows(rows) -> list[list[int]]:
    """Row Hermite normal form of an integer lattice basis (canonical)."""
    A = [list(r) for r in rows if any(r)]
    if not A:
        return []
    n = len(A[0])
    r = 0
    for c in range(n):
        while True:
            nz = [i for i in range(r, len(A)) if A[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(A[i][c]))
            A[r], A[p] = A[p], A[r]
            done = True
            for i in range(r + 1, len(A)):
                if A[i][c]:
                    f = A[i][c] // A[r][c]
                    A[i] = [a - f * b for a, b in zip(A[i], A[r])]
                    if A[i][c]:
                        done = False
            if done:
                break
        if r < len(A) and A[r][c] != 0:
            if A[r][c] < 0:
                A[r] = [-a for a in A[r]]
            for i in range(r):
                f = A[i][c] // A[r][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
            r += 1
    return [row for row in A[:r]]


def _orth_lattice(lattice: IntegralLattice, vectors) -> NSLattice:
    G = [list(map(Fraction, r)) for r in lattice.gram]
    n = len(G)
    rows = []
    for v in vectors:
        rows.extend(split_rational_parts(matvec(G, list(v))))
    rows = [r for r in rows if any(x != 0 for x in r)]
    if not rows:
        basis = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    else:
        basis = integer_kernel(rows, n)
    return NSLattice(tuple(tuple(r) for r in hermite_rows(basis)))


def neron_severi(lattice: IntegralLattice, l: PeriodPoint) -> NSLattice:
    return _orth_lattice(lattice, [l.u, l.v])


def lattice_orth_plane(lattice: IntegralLattice, W: TwistorPlane) -> NSLattice:
    return _orth_lattice(lattice, W.frame)


def ns_from_vectors(vectors, n: int) -> NSLattice:
    """Saturation of the span of integer vectors in Z^n, canonical form."""
    vecs = [list(map(Fraction, v)) for v in vectors]
    if not vecs or rank(vecs) == 0:
        return NSLattice(())
    comp = nullspace(vecs, n)
    if not comp:
        return NSLattice(tuple(tuple(r) for r in hermite_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)])))
    return NSLattice(tuple(tuple(r) for r in hermite_rows(integer_kernel(comp, n))))


def _ns_contains(big: NSLattice, small: NSLattice) -> bool:
    if small.rank == 0:
        return True
    if big.rank == 0:
        return False
    return rank([list(map(Fraction, r)) for r in big.basis + small.basis]) == big.rank


def general_type2(lattice: IntegralLattice, W: TwistorPlane, l: PeriodPoint) -> bool:
    """Degree-2 general type: NS(l) equals the integral classes orthogonal to W."""
    if not (W.contains(l.u) and W.contains(l.v)):
        raise PeriodNotOnLine("period is not induced by the plane")
    ns = neron_severi(lattice, l)
    inv = lattice_orth_plane(lattice, W)
    if not _ns_contains(ns, inv):
        raise TwistorError("internal: integral classes orthogonal to W are not all in NS(l)")
    return ns == inv


def is_admissible(lattice: IntegralLattice, path: TwistorPath) -> dict:
    checks = []

    def record(what, edge, point):
        if point is None:
            checks.append({"what": what, "edge": edge, "general_type(degree-2)": False,
                           "reason": "no vertex period"})
            return
        ok = general_type2(lattice, path.edges[edge], point)
        checks.append({"what": what, "edge": edge, "general_type(degree-2)": ok,
                       "ns_rank": neron_severi(lattice, point).rank})

    last = len(path.edges) - 1
    record("endpoint I", 0, path.endpoints.get("I"))
    record("endpoint I'", last, path.endpoints.get("I'"))
    for k, v in enumerate(path.vertices):
        record(f"vertex {k + 1}", k, v)
        record(f"vertex {k + 1}", k + 1, v)
    return {"admissible": all(c["general_type(degree-2)"] for c in checks), "checks": checks}


# ---------------------------------------------------------------- admissible paths inside Q-perp

def _rand_scalar(rng: random.Random, height: int, d: int | None):
    a = Fraction(rng.randint(-height, height), rng.randint(1, height))
    if d is None:
        return a
    return QuadScalar(a, Fraction(rng.randint(-height, height), rng.randint(1, height)), d)


def random_rotation3(rng: random.Random, height: int):
    """Rational element of SO(3) via the Cayley transform."""
    a, b, c = (Fraction(rng.randint(-height, height), rng.randint(1, height)) for _ in range(3))
    S = [[ZERO, -c, b], [c, ZERO, -a], [-b, a, ZERO]]
    return cayley_orthogonal(identity(3), S)


def random_plane_image(ps: PeriodSpace, basis, frame, rng: random.Random, height: int = 2,
                       field_d: int | None = None) -> TwistorPlane:
    """Image of a framed plane inside span(basis) under a seeded Cayley isometry of q restricted there."""
    q = ps.q
    B = [list(v) for v in basis]
    k = len(B)
    G = [[bilinear(q, u, v) for v in B] for u in B]
    coords = []
    for f in frame:
        if B == identity(len(B)):
            coords.append(list(f))
            continue
        sol = nullspace([row + [-x] for row, x in zip(transpose(B), f)], k + 1)
        c = [x for x in sol[0]]
        coords.append([x / c[k] for x in c[:k]])
    for _ in range(100):
        K = zeros(k, k)
        for i in range(k):
            for j in range(i + 1, k):
                x = _rand_scalar(rng, height, field_d)
                K[i][j], K[j][i] = x, -x
        try:
            R = cayley_orthogonal(G, antisymmetric_for_form(G, K))
        except ExactError:
            continue
        return _frame_plane(ps, [_lin(*zip(matvec(R, c), B)) for c in coords])
    raise SearchExhausted("no invertible Cayley parameter found", height, 100)


def q_perp_basis(ps: PeriodSpace, Q: NSLattice):
    """Rational basis of the q-orthogonal complement of Q (the whole space when Q = 0)."""
    n = ps.b
    if not Q.rank:
        return identity(n)
    return nullspace([matvec(ps.q, list(map(Fraction, v))) for v in Q.basis], n)


def base_frame(ps: PeriodSpace, basis):
    """Equal-norm positive frame inside span(basis)."""
    q = ps.q
    G = [[bilinear(q, u, v) for v in basis] for u in basis]
    coords = positive_frame(G)
    return [_lin(*zip(c, basis)) for c in coords]


def admissible_instance(lattice: IntegralLattice, Q: NSLattice, rng: random.Random, d: int | None = 3,
                        height: int = 2, tries: int = 50):
    """Seeded endpoints (I, W, I', W') inside Q-perp with NS(I) = NS(I') = Q."""
    ps = PeriodSpace.make(lattice.gram, d)
    U = q_perp_basis(ps, Q)
    frame = base_frame(ps, U)
    for _ in range(tries):
        Wa = random_plane_image(ps, U, frame, rng, height, d)
        Wb = random_plane_image(ps, U, frame, rng, height, d)
        Ia, Ib = period_of_induced(Wa, (1, 0, 0)), period_of_induced(Wb, (1, 0, 0))
        if neron_severi(lattice, Ia) == Q and neron_severi(lattice, Ib) == Q:
            return Ia, Wa, Ib, Wb
    if d is None:
        raise PreconditionNS("rational periods have NS of rank at least b-2, so they can never be of general type")
    raise PreconditionNS(f"no instance with NS equal to Q found in {tries} tries")


def _normal_in(ps: PeriodSpace, U: SubspaceExact, W: TwistorPlane):
    """Negative vector n in U, q-orthogonal to W, scaled so q(n) = -norm(W)."""
    q = ps.q
    rows = [matvec(q, list(f)) for f in W.frame]
    # solve within U: n = sum c_i u_i
    Ub = [list(u) for u in U.basis]
    M = [[sum((r[j] * u[j] for j in range(ps.b)), ZERO * 0) for u in Ub] for r in rows]
    sol = nullspace(M, len(Ub))
    if len(sol) != 1:
        raise TwistorError("plane must have codimension one in the ambient subspace")
    n = _lin(*[(c, u) for c, u in zip(sol[0], Ub)])
    qn = bilinear(q, n, n)
    if not qn < 0:
        raise TwistorError("normal of the plane is not negative")
    r = ps.sqrt(-W.norm / qn)
    if r is None:
        raise SearchExhausted("normal cannot be scaled to norm -s in the scalar context", None, None)
    return [r * x for x in n]


def _boost(q, s, n, w, ch, sh, v):
    """Isometry rotating span(n, w) hyperbolically: n -> ch n + sh w, w -> sh n + ch w."""
    a = -bilinear(q, v, n) / s
    b = bilinear(q, v, w) / s
    rest = [x - a * y - b * z for x, y, z in zip(v, n, w)]
    na, nb = ch * a + sh * b, sh * a + ch * b
    return [r + na * y + nb * z for r, y, z in zip(rest, n, w)]


def _uhs(x):
    """Upper half-space coordinates (z1, z2, t) of a unit hyperboloid point x."""
    den = x[3] - x[2]
    return (x[0] / den, x[1] / den, 1 / den)


def _from_uhs(z1, z2, t):
    zz = z1 * z1 + z2 * z2
    plus = (t * t + zz) / t
    minus = 1 / t
    return [z1 / t, z2 / t, (plus - minus) / 2, (plus + minus) / 2]


def _frame_to(q, frame, w):
    """Reflect an orthogonal frame so its first vector becomes +-w (same norm)."""
    f1 = list(frame[0])
    if f1 == list(w):
        return [list(f) for f in frame]
    r = [a - b for a, b in zip(f1, w)]
    if bilinear(q, r, r) == 0:
        r = [a + b for a, b in zip(f1, w)]
    return [_reflect(q, r, list(f)) for f in frame]


def _walk(ps, n0, s, targets, frame0):
    """Follow boosts through hyperboloid points `targets` (coords in frame (f1,f2,f3,n0)).

    Returns (frames, vertex pairs). Each step moves between points whose cosh^2 - 1 is a square.
    """
    q = ps.q
    f1, f2, f3 = frame0

    def point(x):
        return _lin((x[0], f1), (x[1], f2), (x[2], f3), (x[3], n0))

    cur_frame = [list(f) for f in frame0]
    cur_n = list(n0)
    frames, pairs = [], []
    for x in targets:
        nxt = point(x)
        ch = -bilinear(q, cur_n, nxt) / s
        sh = ps.sqrt(ch * ch - 1)
        if sh is None or sh == 0:
            return None
        w = [(a - ch * b) / sh for a, b in zip(nxt, cur_n)]
        turned = _frame_to(q, cur_frame, w)
        pairs.append((turned[1], turned[2]))
        cur_frame = [_boost(q, s, cur_n, w, ch, sh, f) for f in cur_frame]
        cur_n = nxt
        frames.append(cur_frame)
    return frames, pairs


def connect_admissible(lattice: IntegralLattice, Q: NSLattice, I: PeriodPoint, W: TwistorPlane,
                       I2: PeriodPoint, W2: TwistorPlane, seed: int = 0, d: int | None = 3,
                       max_height: int = 20, max_tries: int = 400) -> TwistorPath:
    """Admissible path from (I, W) to (I2, W2) with all planes inside Q-perp.

    Q-perp must be 4-dimensional. Points of the hyperbolic 3-space of positive
    planes are moved vertically, horizontally at a height T making the step
    length exact, and vertically again.
    """
    ps = PeriodSpace.make(lattice.gram, d)
    q = ps.q
    n = ps.b
    for name, p, w in (("I", I, W), ("I'", I2, W2)):
        if neron_severi(lattice, p) != Q:
            raise PreconditionNS(f"NS({name}) differs from Q")
        if not (w.contains(p.u) and w.contains(p.v)):
            raise PeriodNotOnLine(f"{name} is not induced by its plane")
    U = SubspaceExact(n, q_perp_basis(ps, Q))
    if U.dim != 4:
        raise TwistorError(f"admissible construction needs dim Q-perp = 4, got {U.dim}")
    for w in (W, W2):
        if not all(U.contains(list(f)) for f in w.frame):
            raise PreconditionNS("plane is not inside Q-perp")
    ratio = ps.sqrt(W.norm / W2.norm)
    if ratio is None:
        raise SearchExhausted("frame norms lie in different square classes", max_height, 3)
    s = W.norm
    n0 = _normal_in(ps, U, W)
    n1 = _normal_in(ps, U, W2)
    if bilinear(q, n0, n1) > 0:
        n1 = [-x for x in n1]
    rng = random.Random(seed)

    def build(frame0):
        f1, f2, f3 = frame0
        x1 = [bilinear(q, n1, f) / s for f in (f1, f2, f3)] + [-bilinear(q, n1, n0) / s]
        z1, z2, t1 = _uhs(x1)
        D = z1 * z1 + z2 * z2
        if D == 0:
            targets = [x1]
        else:
            # horizontal step at height T = 2Dk/(4D - k^2) has cosh^2 - 1 a square; need 0 < k < 2 sqrt(D)
            h = rng.randint(1, max_height)
            bound = Fraction(2 * float(D) ** 0.5).limit_denominator(max_height)
            k = bound * Fraction(rng.randint(1, h), h + 1)
            if not (k > 0 and k * k < 4 * D):
                return None
            T = 2 * D * k / (4 * D - k * k)
            targets, prev = [], [ZERO, ZERO, ZERO, ONE]
            for x in (_from_uhs(ZERO, ZERO, T), _from_uhs(z1, z2, T), x1):
                if x != prev:
                    targets.append(x)
                prev = x
        walked = _walk(ps, n0, s, targets, frame0)
        if walked is None:
            return None
        frames, pairs = walked
        edges = [_frame_plane(ps, frame0)]
        for fr in frames[:-1]:
            edges.append(_frame_plane(ps, fr))
        if _frame_plane(ps, frames[-1]).space != W2.space:
            return None
        edges.append(W2)
        verts = [PeriodPoint(tuple(u), tuple(v)) for u, v in pairs]
        path = TwistorPath(edges, verts, {"I": I, "I'": I2})
        path.edges[0] = W
        return path

    for _ in range(max_tries):
        R = random_rotation3(rng, max_height)
        frame0 = rotate_frame(W.frame, R)
        path = build([list(f) for f in frame0])
        if path is None:
            continue
        if validate_path(ps, path):
            continue
        if is_admissible(lattice, path)["admissible"]:
            return path
    raise SearchExhausted("no admissible path found", max_height, max_tries)
