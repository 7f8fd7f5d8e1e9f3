"""One test per acceptance criterion; each prints its PASS/FAIL line."""

import partlab.acceptance as acc
from partlab.partition import compose, identity, transposition

LINES = {}


def _run(fn, **kw):
    res = fn(**kw)
    line = res.line()
    LINES[res.number] = line
    print(line)
    assert res.passed, line
    return res


def test_criterion_01_representation_and_gram():
    _run(acc.gram_exactness)


def test_criterion_02_transform_round_trips():
    _run(acc.transform_roundtrips)


def test_criterion_03_graph_moment_oracle():
    _run(acc.graph_moment_oracle)


def test_criterion_04_semicircle():
    _run(acc.semicircle)


def test_criterion_05_unitary_brownian_motion():
    _run(acc.unitary_bm)


def test_criterion_06_wick():
    _run(acc.wick)


def test_criterion_07_classical_bridge():
    _run(acc.classical_bridge_check)


def test_criterion_08_free_poisson():
    _run(acc.free_poisson)


def test_criterion_09_entry_moments():
    _run(acc.entry_moments)


def test_criterion_10_freeness_scaling():
    _run(acc.freeness_scaling)


def test_criterion_11_clt():
    _run(acc.clt_property)


def test_criterion_12_s_freeness_obstruction():
    _run(acc.negative_freeness)


# ---------------------------------------------------------------------------
# the battery must be able to fail

def test_tampered_composition_is_caught(monkeypatch):
    swap = transposition(1, 2, 2)

    def bad_compose(p, q):
        r, kap = compose(p, q)
        if p == swap and q == swap:
            return swap, kap
        return r, kap

    monkeypatch.setattr(acc, "compose", bad_compose)
    res = acc.gram_exactness(kmax=2, Ns=(2,))
    assert not res.passed
    assert "counterexample" in res.measured and str(swap) in res.measured
    assert res.details["counterexample"][:2] == (swap, swap)
    assert compose(swap, swap)[0] == identity(2)


def test_tampered_bridge_target_is_caught(monkeypatch):
    monkeypatch.setattr(acc, "classical_cumulants", lambda mom, k: [0] * k)
    assert not acc.classical_bridge_check().passed
