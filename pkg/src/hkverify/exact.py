"""Exact scalars and dense linear algebra over Q and Q(sqrt d).

Matrices are plain lists of row lists.  Every routine works for any
field element type supporting ``+ - * /`` and comparison with ``0``;
in practice that means :class:`fractions.Fraction` and :class:`QuadScalar`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

DEFAULT_D = 3


class ExactError(ValueError):
    pass


class AmbientMismatch(ExactError):
    pass


class DegenerateForm(ExactError):
    pass


class SingularMatrix(ExactError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def is_squarefree(d: int) -> bool:
    if d < 2:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


class QuadScalar:
    """Element ``a + b*sqrt(d)`` of the real quadratic field Q(sqrt d)."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = DEFAULT_D):
        object.__setattr__(self, "a", _frac(a))
        object.__setattr__(self, "b", _frac(b))
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("QuadScalar is immutable")

    def _coerce(self, other):
        if isinstance(other, QuadScalar):
            if other.d != self.d:
                raise ExactError(f"mixed quadratic fields sqrt({self.d}) and sqrt({other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadScalar(other, 0, self.d)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadScalar(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadScalar(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return QuadScalar(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadScalar(self.a * o.a + self.d * self.b * o.b,
                          self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm a^2 - d b^2."""
        return self.a * self.a - self.d * self.b * self.b

    def conjugate(self) -> "QuadScalar":
        return QuadScalar(self.a, -self.b, self.d)

    def inverse(self) -> "QuadScalar":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("QuadScalar division by zero")
        return QuadScalar(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadScalar(1, 0, self.d)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa >= 0 and sb >= 0:
            return 1 if (sa or sb) else 0
        if sa <= 0 and sb <= 0:
            return -1
        # opposite signs: compare a^2 with d b^2
        diff = self.a * self.a - self.d * self.b * self.b
        sd = (diff > 0) - (diff < 0)
        return sd if sa > 0 else -sd

    def __eq__(self, other):
        if isinstance(other, QuadScalar):
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def is_rational(self) -> bool:
        return self.b == 0

    def __repr__(self):
        return f"QuadScalar({format_scalar(self)!r})"


Scalar = Fraction  # alias used in annotations


def sign(x) -> int:
    if isinstance(x, QuadScalar):
        return x.sign()
    return (x > 0) - (x < 0)


def rational_sqrt(x: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None."""
    x = _frac(x)
    if x < 0:
        return None
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


def exact_sqrt(x):
    """Square root inside the field of ``x`` (Q or Q(sqrt d)); None if absent.

    The positive root is returned.
    """
    if not isinstance(x, QuadScalar):
        return rational_sqrt(x)
    if x.b == 0:
        r = rational_sqrt(x.a)
        if r is not None:
            return QuadScalar(r, 0, x.d)
        # a = d*y^2 gives root y*sqrt(d)
        r = rational_sqrt(x.a / x.d)
        if r is not None:
            return QuadScalar(0, r, x.d)
        return None
    # (u + v sqrt d)^2 = a + b sqrt d, u^2 = (a +- sqrt(norm))/2
    rn = rational_sqrt(x.norm())
    if rn is None:
        return None
    for u2 in ((x.a + rn) / 2, (x.a - rn) / 2):
        u = rational_sqrt(u2)
        if u is None or u == 0:
            continue
        v = x.b / (2 * u)
        root = QuadScalar(u, v, x.d)
        if root * root == x:
            return root if root.sign() > 0 else -root
    return None


def is_square(x) -> bool:
    return exact_sqrt(x) is not None


# ---------------------------------------------------------------- serialization

_QUAD_RE = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)\s*([+-])\s*(\d+(?:/\d+)?)\*sqrt\((\d+)\)\s*$")


def format_fraction(x: Fraction) -> str:
    x = _frac(x)
    return f"{x.numerator}/{x.denominator}"


def format_scalar(x) -> str:
    if isinstance(x, QuadScalar):
        b = x.b
        if b == 0:
            return format_fraction(x.a)
        op = "-" if b < 0 else "+"
        return f"{format_fraction(x.a)}{op}{format_fraction(abs(b))}*sqrt({x.d})"
    return format_fraction(x)


def parse_scalar(s: str, d: int | None = None):
    """Parse ``"p/q"`` or ``"p/q+r/s*sqrt(d)"``.

    When ``d`` is given, rational strings are lifted into Q(sqrt d).
    """
    if not isinstance(s, str):
        raise ExactError(f"expected a string scalar, got {s!r}")
    m = _QUAD_RE.match(s)
    if m:
        a, op, b, dd = m.groups()
        bb = Fraction(b) * (-1 if op == "-" else 1)
        dd = int(dd)
        if d is not None and dd != d:
            raise ExactError(f"scalar {s!r} lives in sqrt({dd}), expected sqrt({d})")
        return QuadScalar(Fraction(a), bb, dd)
    try:
        val = Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ExactError(f"malformed scalar {s!r}") from exc
    if d is not None:
        return QuadScalar(val, 0, d)
    return val


def format_matrix(M) -> list[list[str]]:
    return [[format_scalar(x) for x in row] for row in M]


def parse_matrix(rows, d: int | None = None):
    return [[parse_scalar(x, d) for x in row] for row in rows]


# ---------------------------------------------------------------- matrices

def zeros(r: int, c: int, zero=Fraction(0)):
    return [[zero] * c for _ in range(r)]


def identity(n: int, one=Fraction(1), zero=Fraction(0)):
    out = zeros(n, n, zero)
    for i in range(n):
        out[i][i] = one
    return out


def diag(entries):
    entries = [_frac(e) if not isinstance(e, QuadScalar) else e for e in entries]
    n = len(entries)
    out = zeros(n, n)
    for i, e in enumerate(entries):
        out[i][i] = e
    return out


def to_fractions(M):
    return [[_frac(x) for x in row] for row in M]


def transpose(M):
    return [list(col) for col in zip(*M)] if M else []


def matmul(A, B):
    if not A or not B:
        return [[Fraction(0)] * (len(B[0]) if B else 0) for _ in A]
    Bt = list(zip(*B))
    out = []
    for row in A:
        nz = [(k, a) for k, a in enumerate(row) if a]
        out.append([sum((a * col[k] for k, a in nz), Fraction(0)) for col in Bt])
    return out


def matvec(A, v):
    out = []
    for row in A:
        s = Fraction(0)
        for a, x in zip(row, v):
            if a and x:
                s = s + a * x
        out.append(s)
    return out


def madd(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def msub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mscale(c, A):
    return [[c * a for a in row] for row in A]


def dot(u, v):
    s = Fraction(0)
    for a, b in zip(u, v):
        if a and b:
            s = s + a * b
    return s


def bilinear(G, u, v):
    """u^T G v."""
    return dot(u, matvec(G, v))


def is_zero_matrix(M) -> bool:
    return all(x == 0 for row in M for x in row)


def is_symmetric(M) -> bool:
    n = len(M)
    return all(len(row) == n for row in M) and all(
        M[i][j] == M[j][i] for i in range(n) for j in range(i + 1, n))


def rref(M):
    """Reduced row-echelon form. Returns (rows, pivot_columns); zero rows dropped."""
    A = [list(row) for row in M]
    if not A:
        return [], []
    ncols = len(A[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        prow = A[r]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y if y else x for x, y in zip(A[i], prow)]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def rank(M) -> int:
    return len(rref(M)[1])


def nullspace(M, ncols: int | None = None):
    """Basis (list of vectors) of {x : M x = 0}."""
    if not M:
        n = ncols or 0
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    n = len(M[0])
    R, piv = rref(M)
    zero = R[0][0] * 0 if R else M[0][0] * 0
    free = [c for c in range(n) if c not in set(piv)]
    basis = []
    for f in free:
        v = [zero] * n
        v[f] = zero + 1
        for row, pc in zip(R, piv):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def solve(A, b):
    """One solution x of A x = b, or None if inconsistent."""
    n = len(A[0]) if A else 0
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, piv = rref(aug)
    if piv and piv[-1] == n:
        return None
    zero = Fraction(0)
    x = [zero] * n
    for row, pc in zip(R, piv):
        x[pc] = row[n]
    return x


def inverse(M):
    n = len(M)
    one = M[0][0] * 0 + 1 if n else Fraction(1)
    aug = [list(row) + [one * 0 + (1 if i == j else 0) for j in range(n)] for i, row in enumerate(M)]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise SingularMatrix("matrix is not invertible")
    return [row[n:] for row in R]


def det(M):
    n = len(M)
    A = [list(r) for r in M]
    out = A[0][0] * 0 + 1 if n else Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c] != 0), None)
        if p is None:
            return out * 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            out = -out
        out = out * A[c][c]
        for i in range(c + 1, n):
            if A[i][c] != 0:
                f = A[i][c] / A[c][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return out


# ---------------------------------------------------------------- inertia

@dataclass(frozen=True)
class Inertia:
    n_pos: int
    n_neg: int
    n_zero: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_pos, self.n_neg, self.n_zero)

    def flipped(self) -> "Inertia":
        return Inertia(self.n_neg, self.n_pos, self.n_zero)


def inertia_exact(G) -> Inertia:
    """Sylvester inertia by symmetric Gaussian elimination (congruences only).

    Pivot choice: the lowest-index non-zero diagonal entry; if the remaining
    diagonal is zero but an off-diagonal entry G[i][j] is not, the congruence
    e_i -> e_i + e_j produces a non-zero diagonal entry 2 G[i][j].
    """
    if not is_symmetric(G):
        raise ExactError("inertia_exact needs a symmetric matrix")
    A = [list(r) for r in G]
    n = len(A)
    pos = neg = 0
    active = list(range(n))
    while active:
        p = next((i for i in active if A[i][i] != 0), None)
        if p is None:
            pair = next(((i, j) for i in active for j in active if j > i and A[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # row/column operation e_i += e_j
            for k in range(n):
                A[i][k] = A[i][k] + A[j][k]
            for k in range(n):
                A[k][i] = A[k][i] + A[k][j]
            p = i
        piv = A[p][p]
        s = sign(piv)
        if s > 0:
            pos += 1
        else:
            neg += 1
        rest = [i for i in active if i != p]
        for i in rest:
            if A[i][p] != 0:
                f = A[i][p] / piv
                for j in rest:
                    if A[p][j] != 0:
                        A[i][j] = A[i][j] - f * A[p][j]
        for i in rest:
            A[i][p] = A[i][p] * 0
            A[p][i] = A[p][i] * 0
        active = rest
    return Inertia(pos, neg, n - pos - neg)


# ---------------------------------------------------------------- subspaces

class SubspaceExact:
    """Subspace of K^n stored as its unique reduced row-echelon basis."""

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, ambient: int, vectors: Sequence[Sequence] = ()):
        vectors = [list(v) for v in vectors]
        for v in vectors:
            if len(v) != ambient:
                raise AmbientMismatch(f"vector of length {len(v)} in ambient {ambient}")
        R, piv = rref(vectors) if vectors else ([], [])
        self.ambient = ambient
        self.basis = tuple(tuple(r) for r in R)
        self.pivots = tuple(piv)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __eq__(self, other):
        if not isinstance(other, SubspaceExact):
            return NotImplemented
        return self.ambient == other.ambient and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient, self.basis))

    def __repr__(self):
        rows = [[format_scalar(x) for x in r] for r in self.basis]
        return f"SubspaceExact(ambient={self.ambient}, basis={rows})"

    def contains(self, v) -> bool:
        if len(v) != self.ambient:
            raise AmbientMismatch("vector length differs from ambient dimension")
        return rank(list(self.basis) + [list(v)]) == self.dim

    def contains_subspace(self, other: "SubspaceExact") -> bool:
        return all(self.contains(v) for v in other.basis)

    def coordinates(self, v):
        """Coordinates of v in the echelon basis (read off at pivots)."""
        if not self.contains(v):
            raise ExactError("vector not in subspace")
        return [v[p] for p in self.pivots]

    def __add__(self, other: "SubspaceExact") -> "SubspaceExact":
        if self.ambient != other.ambient:
            raise AmbientMismatch("ambient dimensions differ")
        return SubspaceExact(self.ambient, list(self.basis) + list(other.basis))


def intersect_subspaces(U: SubspaceExact, W: SubspaceExact) -> SubspaceExact:
    if U.ambient != W.ambient:
        raise AmbientMismatch(f"ambient {U.ambient} vs {W.ambient}")
    if U.dim == 0 or W.dim == 0:
        return SubspaceExact(U.ambient)
    # columns u_1..u_k, -w_1..-w_l ; kernel vectors give common elements
    k = U.dim
    cols = [list(u) for u in U.basis] + [[-x for x in w] for w in W.basis]
    M = transpose(cols)
    vecs = []
    for sol in nullspace(M):
        vec = [sum((sol[i] * U.basis[i][j] for i in range(k)), U.basis[0][j] * 0) for j in range(U.ambient)]
        vecs.append(vec)
    return SubspaceExact(U.ambient, vecs)


def orth_complement(G, U: SubspaceExact) -> SubspaceExact:
    """{x : G(x, u) = 0 for all u in U}.

    Entries may live in Q(sqrt d); each quadratic-extension condition is kept
    as is (the solution space is computed over the field of the entries).
    """
    n = len(G)
    if U.ambient != n:
        raise AmbientMismatch(f"form of size {n}, subspace ambient {U.ambient}")
    if rank(G) != n:
        raise DegenerateForm("orth_complement requires a non-degenerate form")
    if U.dim == 0:
        return SubspaceExact(n, identity(n))
    rows = [matvec(transpose(G), list(u)) for u in U.basis]  # G^T u; G symmetric
    return SubspaceExact(n, nullspace(rows))


def rational_orth_complement(G, U: SubspaceExact) -> SubspaceExact:
    """Rational vectors x with G(x, u) = 0 for all u in U.

    Each Q(sqrt d) condition is split into its rational and sqrt(d) parts.
    """
    n = len(G)
    if rank(G) != n:
        raise DegenerateForm("orth_complement requires a non-degenerate form")
    rows = []
    for u in U.basis:
        r = matvec(transpose(G), list(u))
        rows.extend(split_rational_parts(r))
    rows = [r for r in rows if any(x != 0 for x in r)]
    if not rows:
        return SubspaceExact(n, identity(n))
    return SubspaceExact(n, nullspace(rows, n))


def split_rational_parts(vec):
    """[rational part, sqrt(d) coefficient] of a Q(sqrt d) vector."""
    if any(isinstance(x, QuadScalar) for x in vec):
        return [[_part(x, 0) for x in vec], [_part(x, 1) for x in vec]]
    return [[_frac(x) for x in vec]]


def _part(x, which):
    if isinstance(x, QuadScalar):
        return x.a if which == 0 else x.b
    return _frac(x) if which == 0 else Fraction(0)


# ---------------------------------------------------------------- Cayley transform

def is_form_antisymmetric(G, S) -> bool:
    return is_zero_matrix(madd(matmul(transpose(S), G), matmul(G, S)))


def cayley_orthogonal(G, S):
    """R = (I - S)(I + S)^{-1}; an isometry of G whenever S^T G + G S = 0."""
    n = len(G)
    if not is_form_antisymmetric(G, S):
        raise ExactError("S is not antisymmetric with respect to G")
    one = G[0][0] * 0 + 1
    I = identity(n, one, one * 0)
    try:
        inv = inverse(madd(I, S))
    except SingularMatrix as exc:
        raise SingularMatrix("I + S is singular") from exc
    return matmul(msub(I, S), inv)


def antisymmetric_for_form(G, K):
    """S = G^{-1} K for an antisymmetric K: satisfies S^T G + G S = 0."""
    return matmul(inverse(G), K)


def preserves_form(G, R) -> bool:
    return matmul(matmul(transpose(R), G), R) == G
