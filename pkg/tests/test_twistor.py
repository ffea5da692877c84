import json
import random
from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.matrices.normalforms import smith_normal_form

from hkverify.exact import QuadScalar, identity
from hkverify.models import make_lattice
from hkverify.twistor import (
    NormMismatch,
    NotPositive,
    NotThreeDim,
    PeriodNotOnLine,
    PeriodPoint,
    PeriodSpace,
    PreconditionNS,
    SearchExhausted,
    TwistorPath,
    IrrationalDirection,
    admissible_instance,
    base_frame,
    connect_admissible,
    connect_planes,
    general_type2,
    hermite_rows,
    integer_kernel,
    is_admissible,
    lattice_orth_plane,
    lines_intersect,
    neron_severi,
    ns_from_vectors,
    path_from_json,
    period_of_induced,
    plane_make,
    random_plane_image,
    validate_path,
)

R3 = QuadScalar(0, 1, 3)


def diag(*xs):
    return [[x if i == j else 0 for j in range(len(xs))] for i, x in enumerate(xs)]


def e(i, n):
    return [F(int(i == j)) for j in range(n)]


def lin(*terms):
    n = len(terms[0][1])
    return [sum((c * v[j] for c, v in terms), F(0)) for j in range(n)]


PS4 = PeriodSpace.make(diag(1, 1, 1, -1))
PS5 = PeriodSpace.make(diag(1, 1, 1, -1, -1))
PS5Q = PeriodSpace.make(diag(1, 1, 1, -1, -1), None)
L4 = make_lattice(diag(1, 1, 1, -1))
L5 = make_lattice(diag(1, 1, 1, -1, -1))


def _parts(x):
    return (x.a, x.b) if isinstance(x, QuadScalar) else (F(x), F(0))


def ns_rank_oracle(gram, l: PeriodPoint) -> int:
    """b minus the number of independent rational conditions q(v, .) = 0 cut out by u and v."""
    n = len(gram)
    rows = []
    for w in (l.u, l.v):
        for part in (0, 1):
            rows.append([sum(_parts(w[i])[part] * gram[i][j] for i in range(n)) for j in range(n)])
    return n - sympy.Matrix(rows).rank()


# ---------------------------------------------------------------- planes

def test_plane_make_examples():
    W = plane_make(PS5, e(0, 5), e(1, 5), e(2, 5))
    assert W.norm == 1
    with pytest.raises(NotPositive):
        plane_make(PS5, e(0, 5), e(1, 5), e(3, 5))
    v = lin((2, e(2, 5)), (1, e(3, 5)))
    with pytest.raises(NormMismatch):
        plane_make(PS5Q, e(0, 5), e(1, 5), v)
    assert plane_make(PS5, e(0, 5), e(1, 5), v).space.contains(v)
    with pytest.raises(NotThreeDim):
        plane_make(PS5, e(0, 5), e(1, 5), lin((1, e(0, 5)), (1, e(1, 5))))


def test_period_of_induced():
    W = plane_make(PS5, e(0, 5), e(1, 5), e(2, 5))
    f1, f2, f3 = W.frame
    l = period_of_induced(W, (1, 0, 0))
    assert (list(l.u), list(l.v)) == (list(f2), list(f3))
    assert l.isotropic(PS5)
    anti = period_of_induced(W, (-1, 0, 0))
    assert anti.same_line(PeriodPoint(f2, tuple(-x for x in f3)))
    assert not anti.same_line(l)
    tilted = period_of_induced(W, (F(3, 5), F(4, 5), 0))
    assert tilted.isotropic(PS5)
    a = [F(3, 5) * x + F(4, 5) * y for x, y in zip(f1, f2)]
    assert all(sum(a[i] * w[i] for i in range(5)) == 0 for w in (tilted.u, tilted.v))
    with pytest.raises(IrrationalDirection):
        period_of_induced(W, (1, 1, 0))


# ---------------------------------------------------------------- intersections

def test_lines_intersect_examples():
    W1 = plane_make(PS5, e(0, 5), e(1, 5), e(2, 5))
    W2 = plane_make(PS5, e(0, 5), e(1, 5), lin((2, e(2, 5)), (1, e(3, 5))))
    res = lines_intersect(PS5, W1, W2)
    assert res.intersect and res.shared.dim == 2
    assert {(tuple(p.u), tuple(p.v)) for p in res.vertices} == {
        (tuple(e(0, 5)), tuple(e(1, 5))), (tuple(e(0, 5)), tuple(-x for x in e(1, 5)))}
    same = lines_intersect(PS5, W1, W1)
    assert same.intersect and same.shared.dim == 3
    W3 = plane_make(PS5, e(0, 5), lin((2, e(1, 5)), (R3, e(3, 5))), lin((2, e(2, 5)), (R3, e(4, 5))))
    far = lines_intersect(PS5, W1, W3)
    assert not far.intersect and far.shared.dim == 1 and far.vertices == ()


def _random_pair(seed, ps=PS5Q):
    rng = random.Random(seed)
    base = base_frame(ps, identity(ps.b))
    return (random_plane_image(ps, identity(ps.b), base, rng, 2),
            random_plane_image(ps, identity(ps.b), base, rng, 2))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_lines_intersect_symmetric(seed):
    W1, W2 = _random_pair(seed)
    a, b = lines_intersect(PS5Q, W1, W2), lines_intersect(PS5Q, W2, W1)
    assert a.intersect == b.intersect and a.shared == b.shared


def test_no_rational_vertex_note():
    W1 = plane_make(PS5Q, e(0, 5), e(1, 5), e(2, 5))
    # the shared plane span(e1, e2 - e3) carries the form <1, 2>: no rational equal-norm pair
    u = lin((1, e(1, 5)), (-1, e(2, 5)))
    w = lin((3, e(1, 5)), (3, e(2, 5)), (4, e(3, 5)))
    W2 = plane_make(PS5Q, e(0, 5), lin((F(1, 2), u), (F(1, 2), w)), lin((F(1, 2), u), (F(-1, 2), w)))
    res = lines_intersect(PS5Q, W1, W2)
    assert res.intersect and res.shared.dim == 2
    assert res.vertices == () and "NoRationalVertex" in res.note
    path = connect_planes(PS5Q, W1, W2)
    assert path.length == 1 and path.vertices == [None]
    assert validate_path(PS5Q, path) == []


# ---------------------------------------------------------------- connectivity

def test_connect_same_plane():
    W = plane_make(PS5, e(0, 5), e(1, 5), e(2, 5))
    path = connect_planes(PS5, W, W)
    assert path.length == 0 and validate_path(PS5, path) == []


def test_connect_adjacent_pair():
    W1 = plane_make(PS5, e(0, 5), e(1, 5), e(2, 5))
    W2 = plane_make(PS5, e(0, 5), e(1, 5), lin((2, e(2, 5)), (1, e(3, 5))))
    path = connect_planes(PS5, W1, W2)
    assert path.length == 1 and validate_path(PS5, path) == []
    assert path.edges[0].space == W1.space and path.edges[1].space == W2.space


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_connect_planes_valid(seed):
    W1, W2 = _random_pair(seed)
    path = connect_planes(PS5Q, W1, W2)
    assert validate_path(PS5Q, path) == []
    assert path.length <= 6
    assert path.edges[0].space == W1.space and path.edges[-1].space == W2.space


def test_connect_norm_classes_differ():
    W1 = plane_make(PS5Q, e(0, 5), e(1, 5), e(2, 5))
    W2 = plane_make(PS5Q, lin((1, e(0, 5)), (1, e(1, 5))), lin((1, e(0, 5)), (-1, e(1, 5))), lin((F(3, 2), e(2, 5)), (F(1, 2), e(3, 5))))
    assert W2.norm == 2
    with pytest.raises(SearchExhausted):
        connect_planes(PS5Q, W1, W2)


def test_validator_catches_corruption():
    W1, W2 = _random_pair(17)
    path = connect_planes(PS5Q, W1, W2)
    assert path.length >= 1
    stranger = PeriodPoint.make(PS5Q, e(0, 5), e(1, 5))
    bad = TwistorPath(path.edges, [stranger] + path.vertices[1:])
    if not all(W.contains(stranger.u) and W.contains(stranger.v) for W in path.edges[:2]):
        assert any("vertex not contained" in m for m in validate_path(PS5Q, bad))
    W3 = plane_make(PS5, e(0, 5), lin((2, e(1, 5)), (R3, e(3, 5))), lin((2, e(2, 5)), (R3, e(4, 5))))
    W4 = plane_make(PS5, e(0, 5), e(1, 5), e(2, 5))
    broken = TwistorPath([W3, W4], [None])
    assert any("intersection dimension" in m for m in validate_path(PS5, broken))
    assert validate_path(PS5, TwistorPath([W4, W4], [])) == ["vertex count differs from junction count"]


def test_path_json_round_trip():
    W1 = plane_make(PS5, e(0, 5), e(1, 5), e(2, 5))
    W2 = plane_make(PS5, e(0, 5), e(1, 5), lin((2, e(2, 5)), (1, e(3, 5))))
    path = connect_planes(PS5, W1, W2)
    data = json.loads(json.dumps(path.to_json(PS5)))
    ps2, back = path_from_json(data)
    assert ps2 == PS5
    assert [w.space for w in back.edges] == [w.space for w in path.edges]
    assert back.to_json(ps2) == path.to_json(PS5)


# ---------------------------------------------------------------- lattices

def test_ns_examples():
    gram = diag(1, 1, 1, -1)
    l = PeriodPoint.make(PS4, e(0, 4), lin((F(1, 2), e(1, 4)), (R3 / 2, e(2, 4))))
    assert neron_severi(L4, l).to_json() == [[0, 0, 0, 1]]
    assert ns_rank_oracle(gram, l) == 1
    r = PeriodPoint.make(PS4, e(0, 4), e(1, 4))
    assert neron_severi(L4, r).to_json() == [[0, 0, 1, 0], [0, 0, 0, 1]]
    assert ns_rank_oracle(gram, r) == 2


def test_ns_generic_is_zero():
    rng = random.Random(0)
    base = base_frame(PS4, identity(4))
    seen = 0
    for _ in range(10):
        W = random_plane_image(PS4, identity(4), base, rng, 2, 3)
        l = period_of_induced(W, (1, 0, 0))
        ns = neron_severi(L4, l)
        assert ns.rank == ns_rank_oracle(diag(1, 1, 1, -1), l)
        irrational = all(isinstance(x, QuadScalar) and x.b != 0 for x in l.u + l.v)
        if irrational and ns.rank == 0:
            seen += 1
    assert seen > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_ns_rank_matches_oracle(seed):
    rng = random.Random(seed)
    W = random_plane_image(PS5, identity(5), base_frame(PS5, identity(5)), rng, 2, rng.choice([None, 3]))
    l = period_of_induced(W, (1, 0, 0))
    ns = neron_severi(L5, l)
    assert ns.rank == ns_rank_oracle(diag(1, 1, 1, -1, -1), l)
    # every basis vector is integral and orthogonal to the period
    for v in ns.basis:
        for w in (l.u, l.v):
            assert sum(F(v[i]) * w[i] * L5.gram[i][i] for i in range(5)) == 0


int_rows = st.lists(st.lists(st.integers(-4, 4), min_size=5, max_size=5), min_size=1, max_size=3)


@settings(max_examples=50, deadline=None)
@given(int_rows)
def test_integer_kernel_saturated(rows):
    K = integer_kernel(rows, 5)
    M = sympy.Matrix(rows)
    assert len(K) == 5 - M.rank()
    for v in K:
        assert all(x == 0 for x in M * sympy.Matrix(v))
    if K:
        snf = smith_normal_form(sympy.Matrix(K), domain=sympy.ZZ)
        assert all(abs(snf[i, i]) == 1 for i in range(len(K)))


@settings(max_examples=50, deadline=None)
@given(int_rows)
def test_hermite_canonical(rows):
    H = hermite_rows(rows)
    assert hermite_rows(H) == H
    # unchanged by a unimodular row operation
    shuffled = [list(r) for r in reversed(rows)]
    shuffled[0] = [a + 2 * b for a, b in zip(shuffled[0], shuffled[-1])] if len(shuffled) > 1 else shuffled[0]
    assert hermite_rows(shuffled) == H


def test_ns_from_vectors_saturates():
    assert ns_from_vectors([[2, 0, 0, 0]], 4).to_json() == [[1, 0, 0, 0]]
    assert ns_from_vectors([[2, 2, 0, 0]], 4).to_json() == [[1, 1, 0, 0]]
    assert ns_from_vectors([], 4).rank == 0


# ---------------------------------------------------------------- general type and admissibility

def _W0():
    return plane_make(PS4, e(0, 4), e(1, 4), e(2, 4))


def test_general_type_examples():
    W = _W0()
    l = PeriodPoint.make(PS4, e(0, 4), lin((F(1, 2), e(1, 4)), (R3 / 2, e(2, 4))))
    assert general_type2(L4, W, l)
    r = PeriodPoint.make(PS4, e(0, 4), e(1, 4))
    assert not general_type2(L4, W, r)
    inv = lattice_orth_plane(L4, W)
    assert inv.to_json() == [[0, 0, 0, 1]]
    off = PeriodPoint.make(PS5, e(0, 5), lin((2, e(1, 5)), (R3, e(3, 5))))
    with pytest.raises(PeriodNotOnLine):
        general_type2(L5, plane_make(PS5, e(0, 5), e(1, 5), e(2, 5)), off)


def test_rational_vertex_fails_both_sides():
    W0 = _W0()
    W1 = plane_make(PS4, e(0, 4), e(1, 4), lin((2, e(2, 4)), (1, e(3, 4))))
    r = PeriodPoint.make(PS4, e(0, 4), e(1, 4))
    rep = is_admissible(L4, TwistorPath([W0, W1], [r]))
    vertex = [c for c in rep["checks"] if c["what"].startswith("vertex")]
    assert len(vertex) == 2 and not any(c["general_type(degree-2)"] for c in vertex)
    assert all(c["ns_rank"] == 2 for c in vertex)
    assert not rep["admissible"]


def test_length_zero_path_admissible():
    W = _W0()
    l = PeriodPoint.make(PS4, e(0, 4), lin((F(1, 2), e(1, 4)), (R3 / 2, e(2, 4))))
    rep = is_admissible(L4, TwistorPath([W], [], {"I": l, "I'": l}))
    assert rep["admissible"] and len(rep["checks"]) == 2


def test_connect_admissible_b5():
    Q = ns_from_vectors([e(4, 5)], 5)
    for seed in range(3):
        I, W, I2, W2 = admissible_instance(L5, Q, random.Random(seed))
        path = connect_admissible(L5, Q, I, W, I2, W2, seed=seed)
        assert validate_path(PS5, path) == []
        assert is_admissible(L5, path)["admissible"]
        assert all(neron_severi(L5, v) == Q for v in path.vertices)


def test_connect_admissible_b4_q0():
    Q = ns_from_vectors([], 4)
    I, W, I2, W2 = admissible_instance(L4, Q, random.Random(1))
    path = connect_admissible(L4, Q, I, W, I2, W2, seed=1)
    assert is_admissible(L4, path)["admissible"]
    assert all(neron_severi(L4, v).rank == 0 for v in path.vertices)


def test_precondition_ns():
    Q = ns_from_vectors([e(4, 5)], 5)
    W = plane_make(PS5, e(0, 5), e(1, 5), e(2, 5))
    I = PeriodPoint.make(PS5, e(0, 5), e(1, 5))
    _, _, I2, W2 = admissible_instance(L5, Q, random.Random(0))
    with pytest.raises(PreconditionNS):
        connect_admissible(L5, Q, I, W, I2, W2)
    with pytest.raises(PreconditionNS):
        admissible_instance(L5, Q, random.Random(0), d=None, tries=5)
