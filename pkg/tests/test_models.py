import json
import math
import random
from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from conftest import model
from hkverify.algebra import validate_algebra
from hkverify.models import (
    DegenerateQ,
    InertiaMismatch,
    ModelError,
    ModelFileError,
    ModelSpec,
    apolar_model,
    diagonal_lattice,
    load_model,
    make_lattice,
    matching_sum,
    model_to_json,
    save_model,
)
from hkverify.suite import check_model_oracle

GRID = [(b, m) for b in (4, 5, 6) for m in (1, 2)]


def even_dims(A):
    return tuple(A.dims[k] for k in range(0, A.top_degree + 1, 2))


def product(A, vecs):
    prod, deg = vecs[0], 2
    for v in vecs[1:]:
        prod = A.multiply(deg, prod, 2, v)
        deg += 2
    return prod


@pytest.mark.parametrize("b, m, dims", [
    (4, 1, (1, 4, 1)),
    (5, 2, (1, 5, 15, 5, 1)),
    (4, 2, (1, 4, 10, 4, 1)),
    (6, 2, (1, 6, 21, 6, 1)),
])
def test_dims_examples(b, m, dims):
    assert even_dims(model(b, m)) == dims


@pytest.mark.parametrize("b, m", GRID)
def test_graded_dims_and_validity(b, m):
    A = model(b, m)
    d = even_dims(A)
    assert all(d[i] == math.comb(b + i - 1, i) for i in range(m + 1))
    assert d == d[::-1]
    assert all(A.dims[k] == 0 for k in range(1, A.top_degree, 2))
    assert validate_algebra(A).ok


def test_m1_trace_is_q():
    A = model(4, 1)
    rng = random.Random(0)
    q = [list(r) for r in A.reference_form]
    for _ in range(20):
        x = [F(rng.randint(-4, 4)) for _ in range(4)]
        y = [F(rng.randint(-4, 4)) for _ in range(4)]
        assert A.trace_of(A.multiply(2, x, 2, y)) == sum(x[i] * q[i][j] * y[j] for i in range(4) for j in range(4))


def _sympy_trace(q, vecs, m):
    """p(d)F/(2m)! with F = q(X)^m, p = product of linear forms, by symbolic differentiation."""
    b = len(q)
    X = sympy.symbols(f"X0:{b}")
    Fpoly = sympy.expand(sum(int(q[i][j]) * X[i] * X[j] for i in range(b) for j in range(b)) ** m)
    expr = Fpoly
    for v in vecs:
        expr = sum(sympy.Rational(v[i].numerator, v[i].denominator) * sympy.diff(expr, X[i]) for i in range(b) if v[i])
    return F(int(sympy.numer(expr)), int(sympy.denom(expr))) / math.factorial(2 * m)


@pytest.mark.parametrize("b, m", [(4, 1), (4, 2), (5, 2)])
def test_trace_matches_symbolic_differentiation(b, m):
    A = model(b, m)
    q = [list(r) for r in A.reference_form]
    rng = random.Random(b + m)
    for _ in range(8):
        vecs = [[F(rng.randint(-2, 2)) for _ in range(b)] for _ in range(2 * m)]
        assert A.trace_of(product(A, vecs)) == _sympy_trace(q, vecs, m)


@pytest.mark.parametrize("b, m, const", [(4, 1, F(1)), (5, 1, F(1)), (4, 2, F(1, 3)), (5, 2, F(1, 3))])
def test_matching_oracle(b, m, const):
    res = check_model_oracle(model(b, m), seed=1)
    assert res.ok
    assert res.data["constant"] == f"{const.numerator}/{const.denominator}"


def test_matching_sum_small():
    q = [[F(1), F(0)], [F(0), F(-1)]]
    e1, e2 = [F(1), F(0)], [F(0), F(1)]
    assert matching_sum(q, [e1, e1]) == 1
    assert matching_sum(q, [e1, e1, e2, e2]) == -1
    assert matching_sum(q, [e1, e1, e1, e1]) == 3
    with pytest.raises(ModelError):
        matching_sum(q, [e1])


def test_spec_gates():
    with pytest.raises(InertiaMismatch):
        ModelSpec.diagonal([1, 1, -1, -1], 1).check()
    with pytest.raises(DegenerateQ):
        ModelSpec.diagonal([1, 1, 1, 0], 1).check()
    with pytest.raises(ModelError):
        ModelSpec.diagonal([1, 1, 1, -1], 0).check()
    with pytest.raises(ModelError):
        ModelSpec.make(4, 1, [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]]).check()


def test_non_diagonal_q():
    q = [[2, 1, 0, 0], [1, 2, 0, 0], [0, 0, 1, 0], [0, 0, 0, -3]]
    A = apolar_model(ModelSpec.make(4, 1, q))
    assert even_dims(A) == (1, 4, 1)
    assert validate_algebra(A).ok
    x, y = [F(1), F(0), F(0), F(0)], [F(0), F(1), F(0), F(0)]
    assert A.trace_of(A.multiply(2, x, 2, y)) == 1


def test_lattices():
    assert diagonal_lattice([1, 1, 1, -1]).inertia().as_tuple() == (3, 1, 0)
    assert diagonal_lattice([1, 1, 1, -1, -1]).rank == 5
    with pytest.raises(InertiaMismatch):
        diagonal_lattice([1, 1, -1, -1])
    with pytest.raises(ModelError):
        make_lattice([[F(1, 2), 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]])


# ---------------------------------------------------------------- files

@pytest.mark.parametrize("b, m", [(4, 1), (5, 2)])
def test_roundtrip(b, m):
    A = model(b, m)
    raw = save_model(A)
    B = load_model(raw)
    assert B == A
    assert save_model(B) == raw
    assert B.reference_form == A.reference_form


def test_build_is_reproducible():
    spec = ModelSpec.diagonal([1, 1, 1, -1, -1], 2)
    assert save_model(apolar_model(spec)) == save_model(apolar_model(spec))


def _data():
    return model_to_json(model(4, 1))


def test_load_rejects_wrong_trace_length():
    d = _data()
    d["trace"] = ["1/1", "1/1"]
    with pytest.raises(ModelFileError, match="trace"):
        load_model(json.dumps(d))


def test_load_rejects_duplicate_entry():
    d = _data()
    d["mult"].append(list(d["mult"][-1]))
    with pytest.raises(ModelFileError, match=r"duplicate entry"):
        load_model(json.dumps(d))


def test_load_rejects_non_symmetric_mirror():
    d = model_to_json(model(4, 2))
    entry = next(e for e in d["mult"] if e[0] == e[2] == 2 and e[1] < e[3])
    i, a, j, b, g, c = entry
    d["mult"].append([i, b, j, a, g, "7/1"])
    with pytest.raises(ModelFileError, match=r"mult\[\d+\].*graded commutativity"):
        load_model(json.dumps(d))


def test_load_accepts_consistent_mirror():
    d = model_to_json(model(4, 2))
    entry = next(e for e in d["mult"] if e[0] == e[2] == 2 and e[1] < e[3])
    i, a, j, b, g, c = entry
    d["mult"].append([i, b, j, a, g, c])
    assert load_model(json.dumps(d)) == model(4, 2)


@pytest.mark.parametrize("mutate, pattern", [
    (lambda d: d.pop("dims"), "missing field 'dims'"),
    (lambda d: d["mult"].append([2, 0, 0, 0, 0, "1/1"]), "i <= j"),
    (lambda d: d["mult"].append([0, 0, 2, 9, 0, "1/1"]), "out of range"),
    (lambda d: d["mult"].append([0, 0, 2, 0, 0, "x"]), "malformed"),
    (lambda d: d.update(top_degree=3), "even integer"),
])
def test_load_diagnostics(mutate, pattern):
    d = _data()
    mutate(d)
    with pytest.raises(ModelFileError, match=pattern):
        load_model(json.dumps(d))


def test_load_reports_json_line():
    with pytest.raises(ModelFileError, match="line 2"):
        load_model('{\n "a": }')


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=8, max_size=8))
def test_m1_product_is_symmetric_bilinear(xs):
    A = model(4, 1)
    x, y = [F(v) for v in xs[:4]], [F(v) for v in xs[4:]]
    assert A.multiply(2, x, 2, y) == A.multiply(2, y, 2, x)
