import itertools
import math
import random
from fractions import Fraction

import pytest

from partlab.exponentials import (boxtimes_evolution, degree_restriction, exp_boxplus,
                                  exp_boxplus_moment, exp_boxplus_table, n_fold_sum, rescale)
from partlab.freeness import (expand_products, free_product, free_sum, freeness_check,
                              is_deterministic)
from partlab.partition import (Partition, contraction, cycle, enumerate_family, from_cycles,
                               identity, one, orbit_rep, restrict_columns, tensor, transposition, zero)
from partlab.processes import generator_spectral_form, reference_moments
from partlab.tables import CumulantTable, MomentTable, SpectralForm
from partlab.transforms import cumulants_to_moments, moments_to_cumulants

T2 = transposition(1, 2, 2)


def random_cumulants(kmax, seed, label="a", tag="P"):
    rnd = random.Random(seed)
    t = CumulantTable(tag=tag)
    for k in range(1, kmax + 1):
        for p in enumerate_family(k, tag):
            t.set(p, (label,) * k, Fraction(rnd.randint(-5, 5), rnd.randint(1, 3)))
    return t


def scalar(t, p):
    return t.get(p, (t.labels[0],) * p.k)


# ---------------------------------------------------------------------------
# free sums and products

def test_free_sum_examples():
    a, b = random_cumulants(2, 1), random_cumulants(2, 2)
    s = free_sum(a, b)
    assert scalar(s, T2) == scalar(a, T2) + scalar(b, T2)
    id1, id2 = identity(1), identity(2)
    assert scalar(s, id2) == scalar(a, id2) + scalar(b, id2) + \
        2 * scalar(a, id1) * scalar(b, id1)


def test_free_sum_with_zero_is_identity():
    a = random_cumulants(3, 3)
    z = CumulantTable()
    for k in (1, 2, 3):
        for p in enumerate_family(k, "P"):
            z.set(p, ("a",) * k, Fraction(0))
    assert free_sum(a, z) == a


def test_free_sum_commutative_and_associative():
    a, b, c = (random_cumulants(3, s) for s in (4, 5, 6))
    assert free_sum(a, b) == free_sum(b, a)
    assert free_sum(free_sum(a, b), c) == free_sum(a, free_sum(b, c))


def test_free_product_examples():
    ka = random_cumulants(2, 7)
    mb = cumulants_to_moments(random_cumulants(2, 8, label="b"))
    out = free_product(ka, mb, mode="moment_form")
    lab = out.labels[0]
    assert out.get(identity(1), (lab,)) == scalar(ka, identity(1)) * scalar(mb, identity(1))
    want = (scalar(ka, identity(2)) * scalar(mb, T2) + scalar(ka, zero(2)) * scalar(mb, zero(2))
            + scalar(ka, T2) * scalar(mb, identity(2)))
    assert out.get(T2, (lab, lab)) == want


def test_free_product_with_unit():
    unit = CumulantTable()
    for k in (1, 2, 3):
        for p in enumerate_family(k, "P"):
            unit.set(p, ("u",) * k, Fraction(int(p == identity(k))))
    mb = cumulants_to_moments(random_cumulants(3, 9, label="b"))
    out = free_product(unit, mb)
    for (p, w), v in out.items():
        assert v == scalar(mb, p)


def test_free_product_forms_agree():
    ka, kb = random_cumulants(2, 10), random_cumulants(2, 11, label="b")
    via_cumulants = free_product(ka, kb, mode="cumulant_form")
    via_moments = free_product(ka, cumulants_to_moments(kb), mode="moment_form")
    assert cumulants_to_moments(via_cumulants) == via_moments


def test_free_product_mode_errors():
    ka = random_cumulants(1, 1)
    with pytest.raises(ValueError):
        free_product(ka, ka, mode="nope")
    with pytest.raises(TypeError):
        free_product(ka, ka, mode="moment_form")


# ---------------------------------------------------------------------------
# products of arguments

def _two_label_moments(kmax, seed):
    rnd = random.Random(seed)
    m = MomentTable()
    for k in range(1, kmax + 1):
        for w in itertools.product("ab", repeat=k):
            for p in enumerate_family(k, "P"):
                if (p, w) not in m:
                    m.set(p, w, Fraction(rnd.randint(-9, 9), rnd.randint(1, 4)))
    return m


def test_expand_products_examples():
    m = _two_label_moments(2, 12)
    assert expand_products(m, identity(1), [("a", "b")]) == m.get(T2, ("a", "b"))
    assert m.get(T2, ("a", "b")) == m.get(T2, ("b", "a"))
    assert expand_products(m, T2, [("a",), ("b",)]) == m.get(T2, ("a", "b"))


def test_expand_products_errors():
    m = _two_label_moments(1, 1)
    with pytest.raises(ValueError):
        expand_products(m, identity(1), [])
    with pytest.raises(ValueError):
        expand_products(m, identity(1), [()])


# ---------------------------------------------------------------------------
# determinism

def _product_table(cls, kmax, seed):
    """A table whose values factorize over the cycles of p."""
    rnd = random.Random(seed)
    base = {}
    t = cls()
    for k in range(1, kmax + 1):
        for p in enumerate_family(k, "P"):
            val = Fraction(1)
            for cyc in p.cycle_columns():
                q = orbit_rep(restrict_columns(p, cyc))
                if q not in base:
                    base[q] = Fraction(rnd.randint(1, 6), rnd.randint(1, 3))
                val *= base[q]
            t.set(p, ("a",) * k, val)
    return t


def test_deterministic_predicates_agree():
    for seed in range(3):
        m = _product_table(MomentTable, 4, seed)
        assert is_deterministic(m, 4)
        assert is_deterministic(moments_to_cumulants(m), 4)
        k = _product_table(CumulantTable, 4, seed + 5)
        assert is_deterministic(k, 4)
        assert is_deterministic(cumulants_to_moments(k), 4)
    bad = random_cumulants(4, 13)
    assert not is_deterministic(bad, 4)
    assert not is_deterministic(cumulants_to_moments(bad), 4)


def test_free_sum_of_deterministic_is_deterministic():
    a = _product_table(CumulantTable, 4, 20)
    b = _product_table(CumulantTable, 4, 21)
    assert is_deterministic(free_sum(a, b), 4)


# ---------------------------------------------------------------------------
# freeness checks

def _independent_scalars(kmax=3):
    mx = [1, Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)]
    my = [1, 2, 5, 14]
    m = MomentTable()
    for k in range(1, kmax + 1):
        for w in itertools.product("ab", repeat=k):
            for p in enumerate_family(k, "P"):
                m.set(p, w, mx[w.count("a")] * my[w.count("b")])
    return m


def test_classical_independent_scalars_are_free():
    m = _independent_scalars()
    for tag in ("P", "S"):
        r = freeness_check(m, {"a"}, {"b"}, tag)
        assert r.free and r.routes_agree


def test_copy_of_itself_is_not_free():
    m = MomentTable()
    cat = [1, 1, 2, 5]
    for k in range(1, 4):
        for w in itertools.product("ab", repeat=k):
            for p in enumerate_family(k, "P"):
                m.set(p, w, Fraction(cat[k]))
    r = freeness_check(m, {"a"}, {"b"}, "P")
    assert not r.free and r.routes_agree
    assert r.witness[0] == identity(2)


def test_freeness_rejects_overlap():
    with pytest.raises(ValueError):
        freeness_check(_independent_scalars(), {"a"}, {"a", "b"})


# ---------------------------------------------------------------------------
# additive exponentials

def test_exp_boxplus_examples():
    phi = SpectralForm({T2: 1})
    t = Fraction(3, 2)
    assert exp_boxplus(phi, t, T2) == t
    assert exp_boxplus(phi, t, from_cycles([(1, 2), (3, 4)], 4)) == t ** 2
    assert exp_boxplus(phi, t, Partition(0, ())) == 1


def test_exp_boxplus_is_free_sum_semigroup():
    phi = SpectralForm({T2: Fraction(2), identity(1): Fraction(1), zero(2): Fraction(-1),
                        cycle(3): Fraction(1, 3)})
    s, t = Fraction(1, 2), Fraction(2, 3)
    a = exp_boxplus_table(phi, s, 3)
    b = exp_boxplus_table(phi, t, 3)
    assert free_sum(a, b) == exp_boxplus_table(phi, s + t, 3)


def test_free_poisson_limit_agreement():
    phi = generator_spectral_form("levy-additive", {"eta": 1, "a": 0, "atoms": [[1, 1]]})
    for k in range(1, 5):
        assert exp_boxplus_moment(phi, 1, cycle(k)) == reference_moments("free-poisson", k)


def test_n_fold_sum_matches_iterated_free_sum():
    a = random_cumulants(3, 30)
    acc = a
    for n in range(2, 6):
        acc = free_sum(acc, a)
        assert n_fold_sum(a, n) == acc


def test_clt_small_n_trend():
    a = random_cumulants(2, 31)
    for p in enumerate_family(1, "P"):
        a.set(p, ("a",), Fraction(0))
    limit = degree_restriction(a, 2)
    errs = []
    for n in (16, 64):
        s = rescale(n_fold_sum(a, n), 1 / math.sqrt(n))
        errs.append(max(abs(float(v) - float(exp_boxplus(limit, 1, p)))
                        for (p, w), v in s.items()))
    assert errs[1] <= errs[0] + 1e-12


def test_rescale_is_homogeneous():
    a = random_cumulants(3, 32)
    c = Fraction(-2, 3)
    for (p, w), v in rescale(a, c).items():
        assert v == a.get(p, w) * c ** p.k


# ---------------------------------------------------------------------------
# multiplicative evolution

def test_unitary_evolution_examples():
    phi = generator_spectral_form("bm-unitary", {"beta": 2})
    ts = [0.5, 1.0, 2.0]
    ev1 = boxtimes_evolution(phi, 1, ts, start=[cycle(1)])
    ev2 = boxtimes_evolution(phi, 2, ts, start=[cycle(2)])
    for t in ts:
        assert ev1[(t, identity(1))] == pytest.approx(math.exp(-t / 2), abs=1e-12)
        assert ev2[(t, T2)] == pytest.approx(math.exp(-t) * (1 - t), abs=1e-12)


@pytest.mark.parametrize("k", range(1, 7))
def test_unitary_evolution_matches_closed_form(k):
    phi = generator_spectral_form("bm-unitary", {"beta": 2})
    ts = [0.5, 1.0, 2.0]
    ev = boxtimes_evolution(phi, k, ts, start=[cycle(k)])
    for t in ts:
        assert abs(ev[(t, cycle(k))] - reference_moments("unitary-bm", k, t)) < 1e-8


def test_zero_generator_is_constant():
    ev = boxtimes_evolution(SpectralForm(), 2, [0.0, 1.0, 3.0])
    assert all(v == 1 for v in ev.values())


@pytest.mark.parametrize("beta", [1, 2])
def test_evolution_preserves_factorization(beta):
    phi = generator_spectral_form("bm-unitary", {"beta": beta})
    t = 0.7

    def m(q):
        return boxtimes_evolution(phi, q.k, [t], start=[q])[(t, q)]

    for q1, q2 in [(T2, identity(1)), (T2, T2), (contraction(1, 2, 2), one(1)),
                   (contraction(1, 2, 2), identity(1)), (cycle(3), identity(1)),
                   (one(1), one(1))]:
        assert m(tensor(q1, q2)) == pytest.approx(m(q1) * m(q2), abs=1e-10)


def test_evolution_rejects_negative_time():
    phi = generator_spectral_form("bm-unitary", {"beta": 2})
    with pytest.raises(ValueError):
        boxtimes_evolution(phi, 1, [1.0, -1.0])
