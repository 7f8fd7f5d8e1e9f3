import itertools
from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp

from partlab.algebra import (NPoly, PartitionVector, gram_entry, gram_solve, mul, rho_matrix,
                             rho_vector, synthesize, trace_pairing, unit)
from partlab.errors import (CapacityError, MissingEntryError, SingularGramError,
                            SizeMismatchError)
from partlab.partition import (compose, contraction, enumerate_family, identity, join, one,
                               tensor, transpose, transposition)

from conftest import dense_rho

T2, C2 = transposition(1, 2, 2), contraction(1, 2, 2)


# ---------------------------------------------------------------------------
# NPoly

def test_npoly_ring():
    a = NPoly({1: 2, 0: -1})
    b = NPoly({-1: Fraction(1, 2)})
    assert (a + b).evaluate(2) == a.evaluate(2) + b.evaluate(2)
    assert (a * b).evaluate(3) == a.evaluate(3) * b.evaluate(3)
    assert NPoly({2: 0}).terms == {}
    assert (a - a).terms == {}


# ---------------------------------------------------------------------------
# products

def test_mul_examples():
    t = PartitionVector.basis(T2)
    c = PartitionVector.basis(C2)
    assert mul(t, t) == unit(2)
    assert mul(c, c) == PartitionVector(2, {C2: NPoly.monomial(1)})
    x = PartitionVector(2, {T2: 3, C2: NPoly({1: 1})})
    assert mul(unit(2), x) == x and mul(x, unit(2)) == x


def test_mul_size_mismatch():
    with pytest.raises(SizeMismatchError):
        mul(unit(1), unit(2))


def test_mul_associative_on_p2():
    P2 = enumerate_family(2, "P")
    vecs = [PartitionVector(2, {P2[i]: 1, P2[(3 * i + 1) % 15]: NPoly({1: i})})
            for i in range(5)]
    for x, y, z in itertools.product(vecs, repeat=3):
        assert mul(mul(x, y), z) == mul(x, mul(y, z))


def test_rho_vector_is_homomorphism():
    x = PartitionVector(2, {T2: 2, C2: NPoly({-1: 1}), one(2): 1})
    y = PartitionVector(2, {identity(2): NPoly({1: 1}), C2: -1})
    N = 3
    lhs = rho_vector(mul(x, y), N).toarray()
    rhs = (rho_vector(x, N) @ rho_vector(y, N)).toarray()
    assert np.allclose(lhs, rhs)


# ---------------------------------------------------------------------------
# representation against the loop oracle

@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("N", [2, 3])
def test_rho_matches_loop_oracle(k, N):
    for p in enumerate_family(k, "P"):
        assert np.array_equal(rho_matrix(p, N).toarray(), dense_rho(p.blocks, k, N))


def test_rho_examples():
    assert np.array_equal(rho_matrix(identity(1), 3).toarray(), np.eye(3))
    assert np.array_equal(rho_matrix(one(1), 2).toarray(), np.ones((2, 2)))
    for N in (2, 3):
        for p in enumerate_family(2, "P"):
            assert rho_matrix(p, N).diagonal().sum() == N ** p.cycles


def test_rho_cap():
    with pytest.raises(CapacityError):
        rho_matrix(identity(3), 200)


@pytest.mark.parametrize("N", [2, 3])
def test_representation_property(N):
    for k in (1, 2, 3):
        fam = enumerate_family(k, "P")
        rho = {p: rho_matrix(p, N) for p in fam}
        for p in fam:
            for q in fam:
                r, kap = compose(p, q)
                D = rho[p] @ rho[q] - N ** kap * rho[r]
                assert abs(D).sum() == 0


def test_trace_pairing_oracle():
    for p in enumerate_family(2, "P"):
        for q in enumerate_family(2, "P"):
            assert trace_pairing(p, q, 3) == gram_entry(p, q).evaluate(3)


@pytest.mark.parametrize("N", [2, 3, 5])
def test_gram_identity(N):
    for k in (1, 2, 3):
        fam = enumerate_family(k, "P")
        rho = {p: rho_matrix(p, N) for p in fam}
        for p in fam:
            for q in fam:
                tr = rho[p].multiply(rho[transpose(q)].T).sum()
                assert tr == gram_entry(p, q).evaluate(N)


def test_gram_entry_examples():
    assert gram_entry(identity(2), identity(2)) == NPoly.monomial(2)
    assert gram_entry(T2, identity(2)) == NPoly.monomial(1)
    assert gram_entry(T2, T2) == NPoly.monomial(2)
    assert gram_entry(T2, identity(2)).evaluate(5) == 5 ** join(T2, identity(2)).nc


def test_tensor_compatibility():
    for N in (2, 3):
        for p in enumerate_family(1, "P"):
            for q in enumerate_family(2, "P"):
                big = rho_matrix(tensor(p, q), N).toarray()
                assert np.array_equal(big, np.kron(rho_matrix(p, N).toarray(),
                                                   rho_matrix(q, N).toarray()))


# ---------------------------------------------------------------------------
# Gram solves

def _traces(T, members, N):
    """Tr[T rho(tp')] for a dense matrix T."""
    return {p: sum(Fraction(x) for x in (T * rho_matrix(transpose(p), N).T.toarray()).ravel())
            for p in members}


def test_gram_solve_examples():
    N = 4
    members = enumerate_family(1, "P")
    c = gram_solve(1, "P", _traces(np.eye(N, dtype=object), members, N), N)
    assert c[identity(1)] == 1 and c[one(1)] == 0
    J = np.full((N, N), Fraction(1, N), dtype=object)
    c = gram_solve(1, "P", _traces(J, members, N), N)
    assert c[identity(1)] == 0 and c[one(1)] == Fraction(1, N)


def test_gram_solve_missing_and_extra_keys():
    with pytest.raises(MissingEntryError):
        gram_solve(1, "P", {identity(1): 1}, 4)
    with pytest.raises(MissingEntryError):
        gram_solve(1, "S", {identity(1): 1, one(1): 1}, 4)


def test_gram_solve_singular():
    traces = {p: 1 for p in enumerate_family(2, "P")}
    with pytest.raises(SingularGramError):
        gram_solve(2, "P", traces, 1)


@pytest.mark.parametrize("tag,k,N", [("P", 2, 4), ("S", 3, 6), ("B", 2, 4), ("H", 2, 4),
                                      ("Bs", 2, 4)])
def test_gram_solve_resynthesis(tag, k, N):
    rng = np.random.default_rng(7)
    members = enumerate_family(k, tag)
    coeffs = {p: Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for p in members}
    T = synthesize(coeffs, N)
    got = gram_solve(k, tag, _traces(T, members, N), N)
    assert got == coeffs
    assert np.array_equal(synthesize(got, N), T)


def test_gram_solve_float_path_matches_exact():
    N, k = 5, 2
    members = enumerate_family(k, "P")
    coeffs = {p: Fraction(i + 1, 7) for i, p in enumerate(members)}
    tr = _traces(synthesize(coeffs, N), members, N)
    approx = gram_solve(k, "P", {p: float(v) for p, v in tr.items()}, N, exact=False)
    for p in members:
        assert approx[p] == pytest.approx(float(coeffs[p]), abs=1e-9)


def test_rho_vector_empty_and_sparse():
    assert sp.issparse(rho_matrix(T2, 2))
    x = PartitionVector(2, {}, N=2)
    assert rho_vector(x, 2).nnz == 0
