import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from partlab.algebra import rho_matrix
from partlab.diagnostics import strong_invariance_diagnostic
from partlab.errors import BudgetError, ConfigError, MissingEntryError
from partlab.matio import (format_complex, load_matrix, parse_complex, read_binary, read_csv,
                           write_binary, write_csv)
from partlab.matrices import (MatrixFamily, block_sum, classical_bridge, classical_cumulants,
                              cumulants_from_traces, entry_moment_prediction, entry_product,
                              exclusive_moment, finite_cumulants, p_moment, traces_from_tensor)
from partlab.partition import (Partition, contraction, cycle, enumerate_family, identity,
                               kernel, one, transpose, transposition)
from partlab.sampling import Estimate, SampleSpec, haar_sample, law_moments, sample_rng
from partlab.transforms import cumulants_to_moments
from partlab.tables import CumulantTable

T2, C2 = transposition(1, 2, 2), contraction(1, 2, 2)


def int_mats(k, N, seed):
    rng = np.random.default_rng(seed)
    return [rng.integers(-3, 4, size=(N, N)).astype(object) for _ in range(k)]


def loop_moment(mats, p):
    """Definition of m_p as a plain loop over block assignments."""
    N = mats[0].shape[0]
    total = Fraction(0)
    for f in itertools.product(range(N), repeat=p.nc):
        term = 1
        for j, M in enumerate(mats):
            term *= M[f[p.labels[2 * j + 1]], f[p.labels[2 * j]]]
        total += term
    return total / Fraction(N) ** p.cycles


def jn_exact(N):
    return np.full((N, N), Fraction(1, N), dtype=object)


# ---------------------------------------------------------------------------
# p-moments

def test_p_moment_examples():
    assert p_moment(np.eye(5, dtype=int), identity(1)) == 1
    M = np.diag([1, 2]).astype(object)
    assert p_moment(M, T2) == Fraction(5, 2)
    rng = np.random.default_rng(1)
    A = rng.integers(-4, 5, size=(3, 3)).astype(object)
    assert p_moment(A, C2) == Fraction(int((A ** 2).sum()), 3)


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_p_moment_matches_loop_and_dense_oracles(k, N):
    mats = int_mats(k, N, 10 * k + N)
    fam = {chr(97 + j): m for j, m in enumerate(mats)}
    word = tuple(sorted(fam))
    big = mats[0]
    for m in mats[1:]:
        big = np.kron(big, m)
    for p in enumerate_family(k, "P"):
        got = p_moment(fam, p, word)
        assert got == loop_moment(mats, p)
        R = rho_matrix(transpose(p), N).toarray()
        dense = sum(Fraction(x) for x in (big * R.T).ravel()) / Fraction(N) ** p.cycles
        assert got == dense


def test_permutation_moments_are_trace_products():
    A, B, C = int_mats(3, 3, 4)
    fam = {"a": A, "b": B, "c": C}
    tr = lambda M: Fraction(int(np.trace(M)), 3)
    assert p_moment(fam, T2, ("a", "b")) == tr(A.dot(B))
    assert p_moment(fam, identity(2), ("a", "b")) == tr(A) * tr(B)
    val = p_moment(fam, cycle(3), ("a", "b", "c"))
    assert val in (tr(A.dot(B).dot(C)), tr(C.dot(B).dot(A)))


def test_p_moment_float_and_budget():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(4, 4))
    assert p_moment(A, T2) == pytest.approx(np.trace(A @ A) / 4)
    with pytest.raises(BudgetError):
        block_sum([A, A], identity(2), budget=1)
    with pytest.raises(BudgetError):
        block_sum([A.astype(object)] * 2, identity(2), budget=1)


def test_p_moment_mode_errors():
    spec = SampleSpec("gue", 4, 1)
    with pytest.raises(ValueError):
        p_moment({"a": spec}, T2)
    with pytest.raises(ValueError):
        p_moment({"a": spec}, T2, mode="mc")
    with pytest.raises(ValueError):
        p_moment(np.eye(2), T2, mode="guess")


def test_p_moment_mc_gue():
    est = p_moment({"a": SampleSpec("gue", 30, 3)}, T2, mode="mc", samples=200)
    assert isinstance(est, Estimate)
    assert abs(est.mean - 1) < 4 * est.stderr + 0.02


def test_family_validation():
    with pytest.raises(ValueError):
        MatrixFamily({})
    with pytest.raises(ValueError):
        MatrixFamily({"a": np.eye(2), "b": np.eye(3)})
    with pytest.raises(ValueError):
        MatrixFamily({"a": np.ones((2, 3))})
    fam = MatrixFamily.random({"a": ("gue", {}), "b": ("haar:U", {})}, 4, seed=9)
    assert fam.N == 4 and not fam.deterministic
    d0, d1 = fam.draw(0), fam.draw(1)
    assert not np.allclose(d0["a"], d1["a"])
    assert np.allclose(fam.draw(0)["a"], d0["a"])


# ---------------------------------------------------------------------------
# exclusive moments

def test_exclusive_moment_examples():
    I = np.eye(4, dtype=int)
    assert exclusive_moment(I, one(1)) == 0
    assert exclusive_moment(I, identity(1)) == 1
    A = int_mats(1, 3, 5)[0]
    assert p_moment(A, one(1)) == exclusive_moment(A, one(1)) + exclusive_moment(A, identity(1))


def test_exclusive_moment_loop_oracle():
    mats = int_mats(2, 3, 6)
    fam = {"a": mats[0], "b": mats[1]}
    for p in enumerate_family(2, "P"):
        if p.nc > 3:
            with pytest.raises(ValueError):
                exclusive_moment(fam, p, ("a", "b"))
            continue
        total = Fraction(0)
        for f in itertools.permutations(range(3), p.nc):
            term = 1
            for j, M in enumerate(mats):
                term *= M[f[p.labels[2 * j + 1]], f[p.labels[2 * j]]]
            total += term
        assert exclusive_moment(fam, p, ("a", "b")) == total / Fraction(3) ** p.cycles


# ---------------------------------------------------------------------------
# finite-dimensional cumulants

def test_finite_cumulant_examples():
    N = 4
    k = finite_cumulants(np.eye(N, dtype=int), 1)
    assert k[identity(1)] == 1 and k[one(1)] == 0
    k = finite_cumulants(jn_exact(N), 1)
    assert k[identity(1)] == 0 and k[one(1)] == 1


def test_gue_mean_tensor_cumulants():
    N = 5
    basis = enumerate_family(2, "P")
    T = rho_matrix(T2, N).toarray().astype(object) * Fraction(1, N)
    kap = cumulants_from_traces(traces_from_tensor(T, basis, N), 2, "P", N)
    assert kap[T2] == 1
    assert all(v == 0 for p, v in kap.items() if p != T2)


@pytest.mark.parametrize("tag", ["P", "S", "B"])
def test_finite_cumulants_reproduce_moments(tag):
    N = 6
    A = int_mats(1, N, 8)[0]
    for k in (1, 2):
        kap = finite_cumulants(A, k, tag)
        table = CumulantTable(tag=tag)
        for p, v in kap.items():
            table.set(p, ("a",) * k, v)
        m = cumulants_to_moments(table, N=N)
        for p in enumerate_family(k, tag):
            assert m.get(p, ("a",) * k) == p_moment(A, p)


def test_finite_relation_tends_to_geodesic_sum():
    kappa = CumulantTable()
    for i, p in enumerate(enumerate_family(2, "P")):
        kappa.set(p, ("a", "a"), Fraction(i + 1))
    limit = cumulants_to_moments(kappa)
    big = cumulants_to_moments(kappa, N=10 ** 9)
    for (p, w), v in limit.items():
        assert abs(float(big.get(p, w) - v)) < 1e-6


def test_finite_cumulants_mc_estimates():
    spec = SampleSpec("gue", 6, 4)
    res = finite_cumulants({"a": spec}, 2, "S", mode="mc", samples=100)
    assert set(res) == set(enumerate_family(2, "S"))
    assert abs(res[T2].mean - 1) < 5 * res[T2].stderr + 0.05


# ---------------------------------------------------------------------------
# entry moments

def test_entry_prediction_examples():
    for N in (4, 8):
        kap = finite_cumulants(jn_exact(N), 1)
        pred = entry_moment_prediction(kap, "P", (1, 1), N)
        assert pred == Fraction(1, N) == entry_product([jn_exact(N)], (1, 1))
    kap = finite_cumulants(np.eye(4, dtype=int), 1)
    assert entry_moment_prediction(kap, "P", (1, 1), 4) == 1


def test_entry_prediction_matches_invariant_constructions():
    N = 4
    M = 2 * np.eye(N, dtype=object) + 3 * jn_exact(N)
    for k in (1, 2):
        kap = finite_cumulants(M, k)
        for tup in itertools.product(range(1, 3), repeat=2 * k):
            assert entry_moment_prediction(kap, "P", tup, N) == entry_product([M] * k, tup)


def test_entry_prediction_missing_cumulant():
    with pytest.raises(MissingEntryError):
        entry_moment_prediction({identity(1): 1}, "P", (1, 1), 4)


def test_entry_tuple_convention():
    A = np.arange(16).reshape(4, 4)
    assert entry_product([A, A], (1, 1, 2, 1)) == A[0, 0] * A[0, 1]
    assert kernel((1, 1, 2, 1)) == Partition.from_blocks([[1, -1, -2], [2]])


# ---------------------------------------------------------------------------
# classical bridge

def test_classical_bridge_examples():
    mom = law_moments("bernoulli(0.5)", 4)
    assert classical_bridge(mom, 2, 4) == Fraction(1, 4)
    assert classical_bridge(mom, 3, 4) == 0
    const = [Fraction(3) ** j for j in range(5)]
    for k in (2, 3, 4):
        assert classical_bridge(const, k, 4) == 0
    with pytest.raises(ValueError):
        classical_bridge(mom, 4, 3)


def test_classical_bridge_matches_recursion():
    mom = law_moments("atoms(0,1,3)", 4)
    cums = classical_cumulants(mom, 4)
    for k in range(1, 5):
        assert classical_bridge(mom, k, 6) == cums[k - 1]


def test_classical_cumulants_gaussian():
    assert classical_cumulants(law_moments("normal", 4), 4) == [0, 1, 0, 0]


def test_classical_bridge_mc():
    est = classical_bridge(None, 2, 6, mode="mc", samples=400, seed=3, law="bernoulli(0.5)")
    assert abs(est.mean - 0.25) < 5 * est.stderr + 0.02


# ---------------------------------------------------------------------------
# Haar samples and estimates

@pytest.mark.parametrize("N", [3, 6])
def test_haar_samples(N):
    rng = np.random.default_rng(N)
    U = haar_sample("U", N, rng=rng)
    assert np.abs(U @ U.conj().T - np.eye(N)).max() < 1e-12
    O = haar_sample("O", N, rng=rng)
    assert np.abs(O @ O.T - np.eye(N)).max() < 1e-12 and np.isrealobj(O)
    S = haar_sample("S", N, rng=rng)
    assert set(np.unique(S)) <= {0, 1}
    assert (S.sum(0) == 1).all() and (S.sum(1) == 1).all()
    H = haar_sample("H", N, rng=rng)
    assert (np.abs(H).sum(0) == 1).all() and set(np.unique(H)) <= {-1, 0, 1}
    B = haar_sample("B", N, rng=rng)
    assert np.abs(B.sum(0) - 1).max() < 1e-12 and np.abs(B.sum(1) - 1).max() < 1e-12
    assert np.abs(B @ B.T - np.eye(N)).max() < 1e-12


def test_haar_seeded_reproducible():
    assert np.array_equal(haar_sample("U", 4, seed=5), haar_sample("U", 4, seed=5))
    with pytest.raises(ValueError):
        haar_sample("X", 4, seed=1)


@given(st.lists(st.floats(-100, 100), min_size=2, max_size=40), st.integers(1, 39))
def test_estimate_merge_order_independent(values, cut):
    cut = min(cut, len(values) - 1)
    a, b = Estimate.of(values[:cut]), Estimate.of(values[cut:])
    whole = Estimate.of(values)
    for m in (a + b, b + a):
        assert m.n == whole.n
        assert m.mean == pytest.approx(whole.mean, abs=1e-9)
        assert m.stderr == pytest.approx(whole.stderr, rel=1e-6, abs=1e-9)


def test_sample_spec_validation():
    with pytest.raises(ConfigError):
        SampleSpec("nope", 4, 1)
    with pytest.raises(ConfigError):
        SampleSpec("haar:Q", 4, 1)
    with pytest.raises(ConfigError):
        SampleSpec("gue", 0, 1)
    with pytest.raises(ConfigError):
        SampleSpec("gue", 4, 1, {"conjugate": "Z"})
    s = SampleSpec("gue", 4, 1)
    assert np.array_equal(s.sample(3), s.sample(3))
    assert np.allclose(s.sample(0), s.sample(0).conj().T)


def test_sample_rng_streams_differ():
    a = sample_rng(1, 2).normal(size=4)
    b = sample_rng(1, 3).normal(size=4)
    assert not np.allclose(a, b)


# ---------------------------------------------------------------------------
# strong invariance diagnostic

def test_strong_invariance_examples():
    half = SampleSpec("const:halfhalf", 4, 0)
    d = strong_invariance_diagnostic(half, 1)
    assert d[identity(1)] == pytest.approx(1.0)
    assert d[one(1)] == 0
    scal = SampleSpec("const:scalar", 3, 0, {"value": 2.5})
    assert all(v == 0 for v in strong_invariance_diagnostic(scal, 2).values())


def test_strong_invariance_of_invariant_family():
    spec = SampleSpec("diag-iid:bernoulli(0.5)", 3, 0, {"conjugate": "S"})
    d = strong_invariance_diagnostic(spec, 1, samples=3000, seed=5, with_stderr=True)
    for p, (val, err) in d.items():
        assert val <= 6 * err + 1e-12


def test_strong_invariance_budget():
    with pytest.raises(BudgetError):
        strong_invariance_diagnostic(SampleSpec("gue", 10, 0), 3, samples=1)


# ---------------------------------------------------------------------------
# matrix files

@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_complex_text_round_trip(z):
    assert parse_complex(format_complex(z)) == z


def test_matrix_files_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    write_csv(M, tmp_path / "m.csv")
    write_binary(M, tmp_path / "m.palb")
    assert np.array_equal(read_csv(tmp_path / "m.csv"), M)
    assert np.array_equal(read_binary(tmp_path / "m.palb"), M)
    assert np.array_equal(load_matrix(tmp_path / "m.palb"), M)
    R = rng.normal(size=(2, 2))
    write_csv(R, tmp_path / "r.csv")
    assert np.isrealobj(load_matrix(tmp_path / "r.csv"))


def test_matrix_file_errors(tmp_path):
    with pytest.raises(ValueError):
        write_csv(np.ones((2, 3)), tmp_path / "x.csv")
    (tmp_path / "bad.palb").write_bytes(b"PALB\x01\x00")
    with pytest.raises(ValueError):
        read_binary(tmp_path / "bad.palb")
    (tmp_path / "bad2.palb").write_bytes(b"XXXX" + bytes(12))
    with pytest.raises(ValueError):
        read_binary(tmp_path / "bad2.palb")
