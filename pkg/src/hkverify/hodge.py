"""Hyperkaehler triples in a model algebra and the structures they induce.

A triple (x, y, z) of degree-2 classes stands for (omega_I, omega_J, omega_K).
Orientation convention: the Weil operator of I sends omega_J to -2 omega_K and
omega_K to 2 omega_J; on the frame it is -2 [n]_x for the unit direction n.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import (
    GradedEndo,
    GradedFrobeniusAlgebra,
    LieSubalgebra,
    grading_operator,
    killing_inertia,
    left_multiplication,
    lefschetz_decomposition,
    lefschetz_dual,
    lefschetz_type,
    lie_closure,
)
from .exact import (
    ExactError,
    Inertia,
    SubspaceExact,
    antisymmetric_for_form,
    bilinear,
    cayley_orthogonal,
    identity,
    inertia_exact,
    inverse,
    is_symmetric,
    matmul,
    matvec,
    msub,
    nullspace,
    rank,
    rational_sqrt,
    transpose,
    zeros,
)

ZERO = Fraction(0)
ONE = Fraction(1)


class HodgeError(ExactError):
    pass


class SamplerExhausted(HodgeError):
    pass


class IrrationalDirection(HodgeError):
    pass


class LeibnizInconsistent(HodgeError):
    pass


class NonIntegralSpectrum(HodgeError):
    pass


class IndefiniteBlock(HodgeError):
    pass


def d_member(q, x, y, z) -> bool:
    """The five equations of the D-set plus positivity of the common norm."""
    qxx, qyy, qzz = bilinear(q, x, x), bilinear(q, y, y), bilinear(q, z, z)
    return (bilinear(q, x, y) == 0 and bilinear(q, x, z) == 0 and bilinear(q, y, z) == 0
            and qxx == qyy == qzz and qxx > 0)


@dataclass
class HKTriple:
    x: list
    y: list
    z: list
    lam: tuple = field(default=(), repr=False)

    @property
    def classes(self):
        return (self.x, self.y, self.z)


def _reference_form(A: GradedFrobeniusAlgebra):
    if A.reference_form is None:
        raise HodgeError("model has no reference form; triples cannot be validated")
    return [list(r) for r in A.reference_form]


def make_triple(A: GradedFrobeniusAlgebra, x, y, z) -> HKTriple:
    q = _reference_form(A)
    x, y, z = [list(map(Fraction, v)) for v in (x, y, z)]
    if not d_member(q, x, y, z):
        raise HodgeError("classes do not satisfy the D-set equations")
    if rank([x, y, z]) != 3:
        raise HodgeError("classes are linearly dependent")
    for v in (x, y, z):
        if not lefschetz_type(A, v):
            raise HodgeError("class is not of Lefschetz type")
    lam = tuple(lefschetz_dual(A, v) for v in (x, y, z))
    return HKTriple(x, y, z, lam)


def positive_frame(q) -> list[list]:
    """Three q-orthogonal positive vectors of equal norm (rational rescaling only)."""
    n = len(q)
    basis = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    ortho = []
    for v in basis:
        w = list(v)
        for u in ortho:
            c = bilinear(q, w, u) / bilinear(q, u, u)
            w = [a - c * b for a, b in zip(w, u)]
        if bilinear(q, w, w) == 0:
            raise SamplerExhausted("Gram-Schmidt met an isotropic vector")
        ortho.append(w)
    pos = [w for w in ortho if bilinear(q, w, w) > 0][:3]
    if len(pos) < 3:
        raise SamplerExhausted("form has fewer than three positive directions")
    s = bilinear(q, pos[0], pos[0])
    out = [pos[0]]
    for w in pos[1:]:
        r = rational_sqrt(s / bilinear(q, w, w))
        if r is None:
            raise SamplerExhausted("no common-norm rational frame for the positive part of q")
        out.append([r * a for a in w])
    return out


def random_isometry(q, rng: random.Random, height: int = 2):
    n = len(q)
    for _ in range(100):
        K = zeros(n, n)
        for i in range(n):
            for j in range(i + 1, n):
                c = Fraction(rng.randint(-height, height), rng.randint(1, height))
                K[i][j], K[j][i] = c, -c
        S = antisymmetric_for_form(q, K)
        try:
            return cayley_orthogonal(q, S)
        except ExactError:
            continue
    raise SamplerExhausted("could not find an invertible Cayley parameter")


def sample_hk_triples(A: GradedFrobeniusAlgebra, count: int, seed: int = 0, height: int = 2) -> list[HKTriple]:
    q = _reference_form(A)
    base = positive_frame(q)
    out = [make_triple(A, *base)]
    rng = random.Random(seed)
    failures = 0
    while len(out) < count:
        R = random_isometry(q, rng, height)
        cand = [matvec(R, v) for v in base]
        try:
            out.append(make_triple(A, *cand))
        except HodgeError:
            failures += 1
            if failures > 20:
                raise SamplerExhausted("Lefschetz verification failed repeatedly")
    return out[:count]


def so5_closure(A: GradedFrobeniusAlgebra, t: HKTriple) -> LieSubalgebra:
    gens = []
    for v, lam in zip(t.classes, t.lam):
        gens.append(left_multiplication(A, 2, v))
        gens.append(lam)
    return lie_closure(gens)


# ---------------------------------------------------------------- derivations and automorphisms

def _generating_products(A: GradedFrobeniusAlgebra):
    """Per degree k >= 4: pairs (i, beta) with e_i * f_beta spanning A[k]."""
    cached = getattr(A, "_gen_products", None)
    if cached is not None:
        return cached
    from .algebra import _EchelonSpace
    out = {}
    b = A.dims[2]
    for k in range(4, A.top_degree + 1, 2):
        if not A.dims[k]:
            continue
        space, pairs = _EchelonSpace(), []
        for i in range(b):
            for beta in range(A.dims[k - 2]):
                col = A.constant(2, i, k - 2, beta)
                if space.insert(col):
                    pairs.append((i, beta))
                if len(pairs) == A.dims[k]:
                    break
            if len(pairs) == A.dims[k]:
                break
        if len(pairs) != A.dims[k]:
            raise HodgeError(f"degree {k} is not generated by degree 2")
        M = transpose([A.constant(2, i, k - 2, beta) for i, beta in pairs])
        out[k] = (pairs, inverse(M))
    A._gen_products = out
    return out


def _unit(n, k):
    v = [ZERO] * n
    v[k] = ONE
    return v


def extend_derivation(A: GradedFrobeniusAlgebra, W2) -> GradedEndo:
    """Degree-0 derivation of A restricting to W2 on A[2] (Leibniz-checked)."""
    b = A.dims[2]
    blocks = {0: zeros(1, 1), 2: [list(r) for r in W2]}
    gp = _generating_products(A)
    for k in range(4, A.top_degree + 1, 2):
        if not A.dims[k]:
            continue
        pairs, Minv = gp[k]
        cols = []
        for i, beta in pairs:
            ei = _unit(b, i)
            fb = _unit(A.dims[k - 2], beta)
            t1 = A.multiply(2, matvec(W2, ei), k - 2, fb)
            t2 = A.multiply(2, ei, k - 2, matvec(blocks[k - 2], fb))
            cols.append([p + r for p, r in zip(t1, t2)])
        blocks[k] = matmul(transpose(cols), Minv)
    D = GradedEndo(A.dims, 0, blocks)
    _check_leibniz(A, D)
    return D


def _check_leibniz(A, D: GradedEndo):
    degs = A.degrees()
    for i in degs:
        for j in degs:
            if j < i or i + j > A.top_degree:
                continue
            for a in range(A.dims[i]):
                ea = _unit(A.dims[i], a)
                Dea = D.apply(i, ea)
                for c in range(A.dims[j]):
                    ec = _unit(A.dims[j], c)
                    lhs = D.apply(i + j, A.constant(i, a, j, c))
                    r1 = A.multiply(i, Dea, j, ec)
                    r2 = A.multiply(i, ea, j, D.apply(j, ec))
                    if lhs != [p + r for p, r in zip(r1, r2)]:
                        raise LeibnizInconsistent(f"Leibniz rule fails on basis pair {(i, a)}, {(j, c)}")


def extend_automorphism(A: GradedFrobeniusAlgebra, g2) -> GradedEndo:
    """Degree-0 algebra automorphism restricting to g2 on A[2] (multiplicativity-checked)."""
    b = A.dims[2]
    blocks = {0: [[ONE]], 2: [list(r) for r in g2]}
    gp = _generating_products(A)
    for k in range(4, A.top_degree + 1, 2):
        if not A.dims[k]:
            continue
        pairs, Minv = gp[k]
        cols = [A.multiply(2, matvec(g2, _unit(b, i)), k - 2, matvec(blocks[k - 2], _unit(A.dims[k - 2], beta)))
                for i, beta in pairs]
        blocks[k] = matmul(transpose(cols), Minv)
    G = GradedEndo(A.dims, 0, blocks)
    for j in A.degrees():
        for i in A.degrees():
            if i > j or i + j > A.top_degree:
                continue
            for a in range(A.dims[i]):
                ga = G.apply(i, _unit(A.dims[i], a))
                for c in range(A.dims[j]):
                    lhs = G.apply(i + j, A.constant(i, a, j, c))
                    rhs = A.multiply(i, ga, j, G.apply(j, _unit(A.dims[j], c)))
                    if lhs != rhs:
                        raise LeibnizInconsistent(f"not multiplicative on {(i, a)}, {(j, c)}")
    return G


def _frame_basis(A, t: HKTriple):
    """Columns x, y, z followed by a basis of the q-orthocomplement."""
    q = _reference_form(A)
    rows = [matvec(q, v) for v in t.classes]
    comp = nullspace(rows, A.dims[2])
    T = transpose([list(t.x), list(t.y), list(t.z)] + comp)
    return T, len(comp)


def _check_direction(direction):
    a, b, c = (Fraction(v) for v in direction)
    if a * a + b * b + c * c != 1:
        raise IrrationalDirection(f"direction {direction} is not a rational unit vector")
    return a, b, c


def weil_on_a2(A: GradedFrobeniusAlgebra, t: HKTriple, direction):
    a, b, c = _check_direction(direction)
    T, ncomp = _frame_basis(A, t)
    n = A.dims[2]
    Wf = zeros(n, n)
    # -2 [n]_x
    cross = [[ZERO, -c, b], [c, ZERO, -a], [-b, a, ZERO]]
    for i in range(3):
        for j in range(3):
            Wf[i][j] = -2 * cross[i][j]
    return matmul(matmul(T, Wf), inverse(T))


def weil_operator(A: GradedFrobeniusAlgebra, t: HKTriple, direction) -> GradedEndo:
    return extend_derivation(A, weil_on_a2(A, t, direction))


AXES = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def weil_triple(A, t: HKTriple) -> tuple[GradedEndo, GradedEndo, GradedEndo]:
    return tuple(weil_operator(A, t, d) for d in AXES)


def casimir(A, t: HKTriple) -> GradedEndo:
    WI, WJ, WK = weil_triple(A, t)
    total = (WI @ WI) + (WJ @ WJ) + (WK @ WK)
    return total.scale(-1)


def su2_isotypic(A: GradedFrobeniusAlgebra, t: HKTriple) -> dict:
    """(degree, weight) -> SubspaceExact; Casimir acts by w(w+2) on the block."""
    C = casimir(A, t)
    out = {}
    for k in A.degrees():
        M = C.blocks[k]
        n = A.dims[k]
        total = 0
        for w in range(k % 2, k + 1, 2):
            shifted = msub(M, identity(n, Fraction(w * (w + 2)), ZERO))
            ker = nullspace(shifted, n)
            if ker:
                out[(k, w)] = SubspaceExact(n, ker)
                total += len(ker)
        if total != n:
            raise NonIntegralSpectrum(f"Casimir blocks span only {total} of {n} dims in degree {k}")
    return out


# ---------------------------------------------------------------- pairings

def _block_form(T, D):
    """Gram matrix in standard coordinates of the form with Gram D in the column basis T."""
    Ti = inverse(T)
    return matmul(matmul(transpose(Ti), D), Ti)


def bb_extract(A: GradedFrobeniusAlgebra, t: HKTriple):
    """Form on A[2]: lambda(u v x^(2m-2)) on invariants, common value on span(x, y, z)."""
    d = A.half_degree
    n = A.dims[2]
    WI, WJ, WK = weil_triple(A, t)
    inv = nullspace(WI.blocks[2] + WJ.blocks[2] + WK.blocks[2], n)
    xdeg, xp = A.power(2, t.x, d - 2)

    def hr(u, v):
        uv = A.multiply(2, u, 2, v)
        return A.trace_of(A.multiply(4, uv, xdeg, xp)) if xdeg else A.trace_of(uv)

    s = hr(t.y, t.y)
    k = len(inv)
    D = zeros(3 + k, 3 + k)
    for i in range(3):
        D[i][i] = s
    for i in range(k):
        for j in range(k):
            D[3 + i][3 + j] = hr(inv[i], inv[j])
    T = transpose([list(t.x), list(t.y), list(t.z)] + inv)
    return _block_form(T, D)


def hodge_star(A: GradedFrobeniusAlgebra, t: HKTriple) -> dict:
    """Algebraic Hodge star for the complex structure of x: degree k -> matrix A[k] -> A[top-k].

    *(x^j p) = (-1)^(r(r+1)/2) j!/(n-r-j)! x^(n-r-j) C(p) for primitive p of degree r,
    with n the complex dimension and C the Weil element (y, z -> -y, -z).
    """
    n = A.half_degree
    Lx = left_multiplication(A, 2, t.x)
    dec = lefschetz_decomposition(A, Lx)
    T2, ncomp = _frame_basis(A, t)
    flip = [[ZERO] * (3 + ncomp) for _ in range(3 + ncomp)]
    for i in range(3 + ncomp):
        flip[i][i] = ONE if i == 0 or i >= 3 else -ONE
    C2 = matmul(matmul(T2, flip), inverse(T2))
    Cw = extend_automorphism(A, C2)
    prim = {}
    for s, cols in dec.columns.items():
        for (r, j, pi, vec) in cols:
            if j == 0:
                prim[(r, pi)] = vec
    out = {}
    for s, cols in dec.columns.items():
        imgs = []
        for (r, j, pi, _) in cols:
            e = n - r - j
            sign = -1 if (r * (r + 1) // 2) % 2 else 1
            coef = Fraction(sign * math.factorial(j), math.factorial(e))
            cp = Cw.apply(r, prim[(r, pi)])
            xdeg, xe = A.power(2, t.x, e)
            img = A.multiply(xdeg, xe, r, cp) if e else cp
            imgs.append([coef * v for v in img])
        out[s] = matmul(transpose(imgs), inverse(dec.basis_matrix(s)))
    return out


def hermitian_stand_in(A: GradedFrobeniusAlgebra, t: HKTriple) -> dict:
    """Per degree Gram matrix of (u, v) -> lambda(u * star v)."""
    star = hodge_star(A, t)
    out = {}
    for k, S in star.items():
        P = A.pairing_matrix(k)
        out[k] = matmul(P, S)
    return out


def generalized_pairing(A: GradedFrobeniusAlgebra, t: HKTriple) -> dict:
    """Per degree: (-1)^((k-w)/2) times the hermitian stand-in on each isotypic block."""
    her = hermitian_stand_in(A, t)
    iso = su2_isotypic(A, t)
    out = {}
    for k in A.degrees():
        H = her[k]
        if not is_symmetric(H):
            raise IndefiniteBlock(f"hermitian stand-in is not symmetric in degree {k}")
        blocks = sorted((w, sub) for (kk, w), sub in iso.items() if kk == k)
        cols, spans = [], []
        for w, sub in blocks:
            start = len(cols)
            cols.extend(list(v) for v in sub.basis)
            spans.append((w, start, len(cols)))
        T = transpose(cols)
        D = matmul(matmul(transpose(T), H), T)
        for w, a0, a1 in spans:
            for v, b0, b1 in spans:
                if w != v and any(D[i][j] for i in range(a0, a1) for j in range(b0, b1)):
                    raise IndefiniteBlock(f"isotypic blocks {w}, {v} not orthogonal in degree {k}")
        for w, a0, a1 in spans:
            block = [row[a0:a1] for row in D[a0:a1]]
            if inertia_exact(block).as_tuple() != (a1 - a0, 0, 0):
                raise IndefiniteBlock(f"degree {k}, weight {w}: hermitian stand-in not positive definite")
            sgn = -1 if ((k - w) // 2) % 2 else 1
            for i in range(a0, a1):
                for j in range(a0, a1):
                    D[i][j] = sgn * D[i][j]
        out[k] = _block_form(T, D)
    return out


def proportionality(P, Q):
    """c with P = c Q, or None."""
    c = None
    for rp, rq in zip(P, Q):
        for a, b in zip(rp, rq):
            if b == 0:
                if a != 0:
                    return None
                continue
            r = a / b
            if c is None:
                c = r
            elif r != c:
                return None
    return c


def is_skew_for(B, X) -> bool:
    """B(Xu, v) + B(u, Xv) = 0."""
    return all(v == 0 for row in _skew_defect(B, X) for v in row)


def _skew_defect(B, X):
    XtB = matmul(transpose(X), B)
    BX = matmul(B, X)
    return [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(XtB, BX)]


# ---------------------------------------------------------------- g_M and the grading-zero part

RATIONAL_DIRECTIONS = (
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
    (Fraction(3, 5), Fraction(4, 5), 0),
    (Fraction(1, 3), Fraction(2, 3), Fraction(2, 3)),
)


def mumford_tate_algebra(A: GradedFrobeniusAlgebra, triples: Sequence[HKTriple],
                         directions: Sequence = RATIONAL_DIRECTIONS[:3]) -> LieSubalgebra:
    if len(triples) < 2 or len(directions) < 3:
        raise HodgeError("need at least two triples and three directions")
    gens = [weil_operator(A, t, d) for t in triples for d in directions]
    return lie_closure(gens)


def mumford_tate_skew(A, gM: LieSubalgebra, B) -> bool:
    return all(is_skew_for(B, X.blocks[2]) for X in gM.basis())


ID_NOTE = ("compared against g_M + span(H), not g_M + span(Id): every generator and bracket "
           "of g(A) is traceless, so Id never lies in g(A)")


def degree_zero_match(A: GradedFrobeniusAlgebra, gA: LieSubalgebra, gM: LieSubalgebra) -> dict:
    H = grading_operator(A)
    zero_part = LieSubalgebra(A.dims)
    for X in gA.graded_parts().get(0, []):
        zero_part.add(X)
    target = LieSubalgebra(A.dims)
    for X in gM.basis():
        target.add(X)
    target.add(H)
    gm_only = LieSubalgebra(A.dims)
    for X in gM.basis():
        gm_only.add(X)
    Id = GradedEndo(A.dims, 0, {k: identity(A.dims[k]) for k in A.degrees()})
    return {
        "equal": zero_part == target,
        "dim_degree_zero": zero_part.dim,
        "dim_gM_plus_H": target.dim,
        "dim_gM": gM.dim,
        "gM_strictly_inside": all(zero_part.contains(X) for X in gM.basis()) and gm_only.dim < zero_part.dim,
        "H_in_gA": gA.contains(H),
        "Id_in_gA": gA.contains(Id),
        "note": ID_NOTE,
    }


def killing_of(g: LieSubalgebra) -> Inertia:
    return killing_inertia(g)
