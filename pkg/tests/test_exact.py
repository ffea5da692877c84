import random
from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from hkverify.exact import (
    AmbientMismatch,
    DegenerateForm,
    ExactError,
    QuadScalar,
    SingularMatrix,
    SubspaceExact,
    antisymmetric_for_form,
    cayley_orthogonal,
    det,
    diag,
    exact_sqrt,
    format_scalar,
    identity,
    inertia_exact,
    intersect_subspaces,
    inverse,
    matmul,
    nullspace,
    orth_complement,
    parse_matrix,
    parse_scalar,
    preserves_form,
    rank,
    rational_orth_complement,
    transpose,
)

R3 = QuadScalar(0, 1)  # sqrt(3)


def e(i, n):
    return [F(int(i == j)) for j in range(n)]


def sub(*vecs, n):
    return SubspaceExact(n, [list(map(F, v)) if not any(isinstance(x, QuadScalar) for x in v) else list(v)
                             for v in vecs])


# ---------------------------------------------------------------- scalars

def test_quad_field_arithmetic():
    x = QuadScalar(1, 2)
    y = QuadScalar(F(1, 2), -1)
    assert x * y == QuadScalar(F(1, 2) - 6, -1 + 1)
    assert (x / y) * y == x
    assert x - x == 0
    assert R3 * R3 == 3
    assert x.inverse() * x == 1


def test_quad_sign_examples():
    assert QuadScalar(2, -1).sign() == 1       # 2 > sqrt 3
    assert QuadScalar(1, -1).sign() == -1
    assert QuadScalar(-7, 4).sign() == -1      # 4 sqrt 3 = 6.93
    assert QuadScalar(-6, 4).sign() == 1
    assert QuadScalar(0, 0).sign() == 0


def test_quad_sign_matches_symbolic_evaluation():
    rng = random.Random(1)
    for _ in range(1000):
        a = F(rng.randint(-50, 50), rng.randint(1, 20))
        b = F(rng.randint(-50, 50), rng.randint(1, 20))
        x = QuadScalar(a, b)
        exact = sympy.Rational(a.numerator, a.denominator) + sympy.Rational(b.numerator, b.denominator) * sympy.sqrt(3)
        want = int(sympy.sign(exact))
        assert x.sign() == want


def test_mixed_fields_rejected():
    with pytest.raises(ExactError):
        QuadScalar(1, 1, 3) + QuadScalar(1, 1, 5)


def test_exact_sqrt():
    assert exact_sqrt(F(9, 4)) == F(3, 2)
    assert exact_sqrt(F(2)) is None
    assert exact_sqrt(QuadScalar(3, 0)) == R3
    r = exact_sqrt(QuadScalar(7, 4))  # (2 + sqrt 3)^2
    assert r == QuadScalar(2, 1)
    assert exact_sqrt(QuadScalar(1, 1)) is None


def test_scalar_serialization():
    assert format_scalar(F(3)) == "3/1"
    assert format_scalar(F(-6, 4)) == "-3/2"
    assert format_scalar(QuadScalar(F(1, 2), F(-1, 3))) == "1/2-1/3*sqrt(3)"
    assert parse_scalar("1/2-1/3*sqrt(3)") == QuadScalar(F(1, 2), F(-1, 3))
    assert parse_scalar("4/6") == F(2, 3)
    assert parse_matrix([["1/1", "0/1"]]) == [[1, 0]]
    with pytest.raises(ExactError):
        parse_scalar("1.5e")
    with pytest.raises(ExactError):
        parse_scalar("1/1+1/1*sqrt(5)", 3)


@given(st.fractions(max_denominator=50), st.fractions(max_denominator=50))
def test_scalar_roundtrip(a, b):
    for x in (a, QuadScalar(a, b)):
        assert parse_scalar(format_scalar(x)) == x


# ---------------------------------------------------------------- inertia

@pytest.mark.parametrize("G, want", [
    (diag([1, 1, -1]), (2, 1, 0)),
    ([[0, 1], [1, 0]], (1, 1, 0)),
    (diag([1, 1, 1, -1, -1]), (3, 2, 0)),
    (diag([0, 1, -2]), (1, 1, 1)),
    ([[0, 0], [0, 0]], (0, 0, 2)),
])
def test_inertia_examples(G, want):
    assert inertia_exact([list(map(F, r)) for r in G]).as_tuple() == want


def _sign_changes(coeffs):
    signs = [c > 0 for c in coeffs if c != 0]
    return sum(a != b for a, b in zip(signs, signs[1:]))


def _charpoly_inertia(G):
    """Descartes' rule is exact for the real-rooted characteristic polynomial of a symmetric matrix."""
    lam = sympy.Symbol("lam")
    coeffs = sympy.Matrix(G).charpoly(lam).all_coeffs()
    n = len(G)
    zero = next(i for i, c in enumerate(reversed(coeffs)) if c != 0)
    pos = _sign_changes(coeffs)
    neg = _sign_changes([c * (-1) ** (n - i) for i, c in enumerate(coeffs)])
    return pos, neg, zero


small = st.integers(-3, 3)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=4, max_size=4))
def test_inertia_matches_eigenvalue_oracle(rows):
    G = [[F(rows[i][j] + rows[j][i]) for j in range(4)] for i in range(4)]
    assert inertia_exact(G).as_tuple() == _charpoly_inertia([[int(x) for x in r] for r in G])


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=16, max_size=16))
def test_inertia_congruence_invariant(entries):
    P = [[F(entries[4 * i + j]) for j in range(4)] for i in range(4)]
    if det(P) == 0:
        return
    G = [list(map(F, r)) for r in diag([1, 1, 1, -1])]
    assert inertia_exact(matmul(matmul(transpose(P), G), P)).as_tuple() == (3, 1, 0)


def test_inertia_quadratic_entries():
    G = [[QuadScalar(1, 0), QuadScalar(2, 0)], [QuadScalar(2, 0), QuadScalar(3, 0) - R3]]
    # det = 3 - sqrt3 - 4 < 0
    assert inertia_exact(G).as_tuple() == (1, 1, 0)


# ---------------------------------------------------------------- subspaces

def test_subspace_canonical():
    a = sub([1, 2, 0], [0, 1, 1], n=3)
    b = sub([1, 3, 1], [2, 5, 1], n=3)
    assert a == b and hash(a) == hash(b)
    assert a.dim == 2
    with pytest.raises(AmbientMismatch):
        SubspaceExact(3, [[1, 2]])


def test_intersections():
    n = 4
    assert intersect_subspaces(sub(e(0, n), e(1, n), n=n), sub(e(1, n), e(2, n), n=n)) == sub(e(1, n), n=n)
    U = sub([1, 2, 3, 4], [0, 1, 0, 1], n=n)
    assert intersect_subspaces(U, U) == U
    n = 5
    W1 = sub(e(0, n), e(1, n), e(2, n), n=n)
    W2 = sub(e(0, n), e(1, n), [0, 0, 2, 1, 0], n=n)
    assert intersect_subspaces(W1, W2) == sub(e(0, n), e(1, n), n=n)


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=12, max_size=12), st.lists(small, min_size=8, max_size=8))
def test_dimension_formula(a, b):
    U = SubspaceExact(4, [[F(x) for x in a[4 * i:4 * i + 4]] for i in range(3)])
    W = SubspaceExact(4, [[F(x) for x in b[4 * i:4 * i + 4]] for i in range(2)])
    assert intersect_subspaces(U, W).dim + (U + W).dim == U.dim + W.dim


def test_orth_complement_examples():
    G = [list(map(F, r)) for r in diag([1, 1, 1, -1])]
    assert orth_complement(G, sub(e(0, 4), e(1, 4), e(2, 4), n=4)) == sub(e(3, 4), n=4)
    assert orth_complement(G, SubspaceExact(4, identity(4))).dim == 0
    G5 = [list(map(F, r)) for r in diag([1, 1, 1, -1, -1])]
    z, o = QuadScalar(0, 0), QuadScalar(1, 0)
    U = SubspaceExact(5, [[o, z, z, z, z], [z, o, R3, z, z]])
    assert rational_orth_complement(G5, U) == sub(e(3, 5), e(4, 5), n=5)
    assert orth_complement(G5, U).dim == 3
    with pytest.raises(DegenerateForm):
        orth_complement(diag([1, 0]), sub([1, 0], n=2))


@settings(max_examples=30, deadline=None)
@given(st.lists(small, min_size=8, max_size=8))
def test_double_complement_contains(a):
    G = [list(map(F, r)) for r in diag([1, 1, 1, -1])]
    U = SubspaceExact(4, [[F(x) for x in a[:4]], [F(x) for x in a[4:]]])
    back = orth_complement(G, orth_complement(G, U))
    assert back.contains_subspace(U) and back == U


def test_linear_solvers_against_sympy():
    M = [[F(2), F(1), F(-1)], [F(-3), F(-1), F(2)], [F(-2), F(1), F(2)]]
    inv = inverse(M)
    want = sympy.Matrix([[2, 1, -1], [-3, -1, 2], [-2, 1, 2]]).inv()
    assert [[sympy.Rational(x.numerator, x.denominator) for x in r] for r in inv] == want.tolist()
    assert det(M) == -1
    with pytest.raises(SingularMatrix):
        inverse([[F(1), F(2)], [F(2), F(4)]])
    assert rank([[F(1), F(2)], [F(2), F(4)]]) == 1
    assert nullspace([[F(1), F(2)], [F(2), F(4)]]) == [[F(-2), F(1)]]


# ---------------------------------------------------------------- Cayley transform

def test_cayley_zero_is_identity():
    G = [list(map(F, r)) for r in diag([1, 1, 1, -1])]
    assert cayley_orthogonal(G, [[F(0)] * 4 for _ in range(4)]) == identity(4)


def test_cayley_plane_rotation():
    S = [[F(0), F(1)], [F(-1), F(0)]]
    R = cayley_orthogonal(identity(2), S)
    oracle = (sympy.eye(2) - sympy.Matrix(S)) * (sympy.eye(2) + sympy.Matrix(S)).inv()
    assert R == [[F(int(x)) for x in row] for row in oracle.tolist()]
    assert R == [[0, -1], [1, 0]]
    assert matmul(transpose(R), R) == identity(2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6), st.integers(1, 3))
def test_cayley_preserves_form(k, den):
    G = [list(map(F, r)) for r in diag([1, 1, 1, -1])]
    K = [[F(0)] * 4 for _ in range(4)]
    idx = 0
    for i in range(4):
        for j in range(i + 1, 4):
            K[i][j], K[j][i] = F(k[idx], den), F(-k[idx], den)
            idx += 1
    S = antisymmetric_for_form(G, K)
    try:
        R = cayley_orthogonal(G, S)
    except SingularMatrix:
        return
    assert preserves_form(G, R)


def test_cayley_over_quadratic_field():
    G = [[QuadScalar(int(i == j) * (1 if i < 3 else -1), 0) for j in range(4)] for i in range(4)]
    z = QuadScalar(0, 0)
    K = [[z] * 4 for _ in range(4)]
    K[0][1], K[1][0] = R3, -R3
    K[2][3], K[3][2] = QuadScalar(F(1, 2), 1), -QuadScalar(F(1, 2), 1)
    R = cayley_orthogonal(G, antisymmetric_for_form(G, K))
    assert preserves_form(G, R)


def test_cayley_rejects_non_antisymmetric():
    with pytest.raises(ExactError):
        cayley_orthogonal(identity(2), [[F(1), F(0)], [F(0), F(0)]])
