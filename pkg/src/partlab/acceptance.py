"""The acceptance battery: twelve criteria, each returning a measured verdict.

Exact criteria run in seconds; Monte Carlo criteria take up to a few
minutes each.  ``verify_suite`` runs a selection and summarizes it.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .algebra import rho_matrix
from .errors import ConfigError
from .experiments import freeness_scaling_data, inverse_fit, run_experiment
from .exponentials import degree_restriction, exp_boxplus, n_fold_sum, rescale
from .freeness import freeness_check
from .matrices import classical_bridge, classical_cumulants, p_moment
from .partition import (Partition, compose, cycle, enumerate_family, nc_join, orbit_rep,
                        restrict_columns, tensor, transpose)
from .sampling import law_moments
from .tables import CumulantTable, MomentTable
from .transforms import cumulants_to_moments, exclusive_transform, moments_to_cumulants


@dataclass
class Criterion:
    number: int
    title: str
    kind: str
    passed: bool
    measured: str
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return (f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.title}: "
                f"{self.measured} ({self.seconds:.1f}s)")


def _timed(fn):
    def wrapper(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------------------
# exact criteria

@_timed
def gram_exactness(kmax: int = 3, Ns=(4, 6)) -> Criterion:
    """rho(p) rho(q) = N^kappa rho(p o q) and Tr(rho(p) rho(tq)) = N^nc(p v q)."""
    checked, bad = 0, None
    for N in Ns:
        for k in range(1, kmax + 1):
            members = enumerate_family(k, "P")
            rho = {p: rho_matrix(p, N) for p in members}
            rhot = {p: rho[transpose(p)].T.tocsr() for p in members}
            for p in members:
                A = rho[p]
                for q in members:
                    r, kap = compose(p, q)
                    D = A @ rho[q] - (N ** kap) * rho[r]
                    D.eliminate_zeros()
                    tr = int(A.multiply(rhot[q]).sum())
                    checked += 1
                    if D.nnz or tr != N ** nc_join(p, q):
                        bad = bad or (p, q, N)
    msg = f"{checked} (p, q, N) triples" + ("" if bad is None else
                                            f", counterexample p={bad[0]} q={bad[1]} N={bad[2]}")
    return Criterion(1, "representation and Gram exactness", "exact", bad is None, msg,
                     details={"checked": checked, "counterexample": bad})


def _random_table(cls, k: int, labels, rng: random.Random):
    t = cls()
    word = tuple(labels[:k])
    for p in enumerate_family(k, "P"):
        t.set(p, word, Fraction(rng.randint(-50, 50), rng.randint(1, 20)))
    return t


@_timed
def transform_roundtrips(seed: int = 2) -> Criterion:
    """Moment/cumulant and moment/exclusive round trips on all of P_4, exact."""
    rng = random.Random(seed)
    labels = ("a", "b", "c", "d")
    m = _random_table(MomentTable, 4, labels, rng)
    kap = _random_table(CumulantTable, 4, labels, rng)
    ok1 = cumulants_to_moments(moments_to_cumulants(m)) == m
    ok2 = moments_to_cumulants(cumulants_to_moments(kap)) == kap
    exc = exclusive_transform(m)
    ok3 = exclusive_transform(exc, direction="from_exclusive") == m
    ok = ok1 and ok2 and ok3
    msg = (f"{len(m)} entries; m->kappa->m {ok1}, kappa->m->kappa {ok2}, "
           f"m->exclusive->m {ok3}")
    return Criterion(2, "transform round trips", "exact", ok, msg)


@_timed
def graph_moment_oracle(N: int = 4, seed: int = 3) -> Criterion:
    """Block-sum p-moments equal N^-cycles Tr[(x)M rho(tp)] on all of P_3."""
    rng = np.random.default_rng(seed)
    mats = [rng.integers(-3, 4, (N, N)) for _ in range(3)]
    fam = {"x": mats[0], "y": mats[1], "z": mats[2]}
    T = np.kron(np.kron(mats[0], mats[1]), mats[2])
    bad = []
    members = enumerate_family(3, "P")
    for p in members:
        got = p_moment(fam, p, ("x", "y", "z"))
        R = rho_matrix(transpose(p), N)
        want = Fraction(int(R.multiply(T.T).sum()), N ** p.cycles)
        if got != want:
            bad.append(p)
    msg = f"{len(members) - len(bad)}/{len(members)} partitions agree"
    return Criterion(3, "graph-moment oracle", "exact", not bad, msg)


@_timed
def classical_bridge_check(l: int = 8) -> Criterion:
    """kappa_{0_k} of a diagonal iid Bernoulli(1/2) matrix equals cum_k."""
    mom = law_moments("bernoulli(0.5)", 4)
    got = [classical_bridge(mom, k, l) for k in range(1, 5)]
    want = classical_cumulants(mom, 4)
    ok = got == want == [Fraction(1, 2), Fraction(1, 4), Fraction(0), Fraction(-1, 8)]
    return Criterion(7, "classical-cumulant bridge", "exact", ok,
                     "kappa_0k = " + ", ".join(map(str, got)) + "; recursion "
                     + ", ".join(map(str, want)))


def clt_test_table(seed: int = 5, kmax: int = 3) -> CumulantTable:
    """Random rational cumulants on classes of P_1..P_kmax with vanishing degree 1
    and degree-3 values bounded by 1/2."""
    rng = random.Random(seed)
    t = CumulantTable()
    for k in range(1, kmax + 1):
        seen = set()
        for p in enumerate_family(k, "P"):
            r = orbit_rep(p)
            if r in seen:
                continue
            seen.add(r)
            if k == 1:
                v = Fraction(0)
            elif k == 3:
                v = Fraction(rng.randint(-9, 9), 20)
            else:
                v = Fraction(rng.randint(-20, 20), rng.randint(1, 10))
            t.set(r, ("a",) * k, v)
    return t


@_timed
def clt_property(n: int = 256, seed: int = 5) -> Criterion:
    """n-fold rescaled free sum against exp_boxplus of the degree-2 part."""
    kap = clt_test_table(seed)
    summed = rescale(n_fold_sum(kap, n), Fraction(1, 16) if n == 256 else n ** -0.5)
    phi = degree_restriction(kap, 2)
    worst, where = 0, None
    for (p, w), v in summed.items():
        if p.k in (2, 3):
            d = abs(v - exp_boxplus(phi, 1, p))
            if d > worst:
                worst, where = d, p
    ok = worst <= Fraction(8, n)
    return Criterion(11, "CLT for free sums", "exact", ok,
                     f"max |difference| = {float(worst):.5f} at {where} (bound 8/n = {8 / n:.5f})")


def formal_free_pair(seed: int = 7, kmax: int = 4) -> MomentTable:
    """Moments of a formal P-free pair (a, b) with kappa_{0_2}(a) kappa_{0_2}(b) != 0.

    Single-letter cumulants are random per conjugacy class; mixed cumulants
    factorize over the tensor split of a partition and vanish otherwise.
    """
    rng = random.Random(seed)
    single = {}
    for lab in ("a", "b"):
        vals = {}
        for k in range(1, kmax + 1):
            for p in enumerate_family(k, "P"):
                r = orbit_rep(p)
                if r not in vals:
                    vals[r] = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
        vals[Partition(2, [0, 0, 0, 0])] = Fraction(1 + rng.randint(0, 4), 3)
        single[lab] = vals

    def kap1(lab, p):
        return Fraction(1) if p.k == 0 else single[lab][orbit_rep(p)]

    kap = CumulantTable()
    for k in range(1, kmax + 1):
        members = enumerate_family(k, "P")
        for ka in range(k + 1):
            word = ("a",) * ka + ("b",) * (k - ka)
            left, right = list(range(1, ka + 1)), list(range(ka + 1, k + 1))
            for p in members:
                pl, pr = restrict_columns(p, left), restrict_columns(p, right)
                v = kap1("a", pl) * kap1("b", pr) if tensor(pl, pr) == p else Fraction(0)
                kap.set(p, word, v)
    return cumulants_to_moments(kap)


@_timed
def negative_freeness(seed: int = 7) -> Criterion:
    """A formal P-free pair passes the P check and fails the S check at the 4-cycle."""
    m = formal_free_pair(seed)
    rp = freeness_check(m, ["a"], ["b"], tag="P")
    rs = freeness_check(m, ["a"], ["b"], tag="S")
    target = (cycle(4), ("a", "b", "a", "b"))
    ok = rp.free and not rs.free and rs.witness == target and rp.routes_agree and rs.routes_agree
    wit = "none" if rs.witness is None else f"{rs.witness[0]} on {''.join(rs.witness[1])}"
    return Criterion(12, "kappa_0_2 obstruction to S-freeness", "exact", ok,
                     f"P check free={rp.free}; S check free={rs.free}, witness {wit}",
                     details={"P": rp, "S": rs})


# ---------------------------------------------------------------------------
# Monte Carlo criteria

def _scenario(number: int, title: str, config: dict, extra: Callable | None = None) -> Criterion:
    recs = run_experiment(config)
    failed = [r for r in recs if not r.passed]
    worst = max(recs, key=lambda r: r.abs_error / r.tolerance if r.tolerance else
                (0 if r.abs_error == 0 else float("inf")))
    msg = (f"{len(recs) - len(failed)}/{len(recs)} records pass; worst {worst.method} "
           f"k={worst.k} N={worst.N} t={worst.t}: |err| {worst.abs_error:.4g} vs tol "
           f"{worst.tolerance:.4g}")
    return Criterion(number, title, "mc", not failed, msg, details={"records": recs})


@_timed
def semicircle(samples: int = 200, seed: int = 11) -> Criterion:
    return _scenario(4, "semicircle moments", {"scenario": "semicircle", "seed": seed,
                                               "k": [2, 4, 6], "N": [300], "samples": samples})


@_timed
def unitary_bm(samples: int = 200, seed: int = 12) -> Criterion:
    return _scenario(5, "unitary Brownian motion", {
        "scenario": "unitary-bm", "seed": seed, "k": [1, 2, 3, 4, 5, 6], "N": [128],
        "t": [0.5, 1.0, 2.0], "samples": samples, "params": {"steps": 200}})


@_timed
def wick(samples: int = 100000, seed: int = 13) -> Criterion:
    return _scenario(6, "Wick formula", {"scenario": "wick", "seed": seed, "N": [4], "k": [4],
                                          "samples": samples})


@_timed
def free_poisson(samples: int = 200, seed: int = 14) -> Criterion:
    return _scenario(8, "free Poisson", {"scenario": "free-poisson", "seed": seed,
                                         "k": [1, 2, 3, 4], "N": [200], "t": [1.0],
                                         "samples": samples})


@_timed
def entry_moments(samples: int = 2000, seed: int = 15) -> Criterion:
    return _scenario(9, "entry moments", {"scenario": "entries", "seed": seed, "N": [4, 8],
                                          "samples": samples})


@_timed
def freeness_scaling(samples: int = 100, seed: int = 16, Ns=(8, 16, 32)) -> Criterion:
    data = freeness_scaling_data(Ns, samples, seed)
    rms = [d["rms_max"] for d in data]
    exact = [d["exact_max"] for d in data]
    C, r2 = inverse_fit(Ns, rms)
    mono = all(b < a for a, b in zip(rms, rms[1:]))
    ok = mono and r2 > 0.9 and all(e == 0 for e in exact)
    msg = ("rms mixed cumulant " + ", ".join(f"N={n}: {v:.4f}" for n, v in zip(Ns, rms))
           + f"; fit C/N with C={C:.3f}, R^2={r2:.4f}; exact mixed means "
           + ", ".join(str(e) for e in exact))
    return Criterion(10, "freeness scaling", "mc", ok, msg, details={"data": data})


EXACT = (gram_exactness, transform_roundtrips, graph_moment_oracle, classical_bridge_check,
         clt_property, negative_freeness)
MC = (semicircle, unitary_bm, wick, free_poisson, entry_moments, freeness_scaling)


@dataclass
class Summary:
    results: list

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list[str]:
        return [r.line() for r in sorted(self.results, key=lambda r: r.number)]

    def to_dict(self) -> dict:
        return {"ok": self.ok,
                "criteria": [{"number": r.number, "title": r.title, "kind": r.kind,
                              "passed": r.passed, "measured": r.measured,
                              "seconds": round(r.seconds, 3)}
                             for r in sorted(self.results, key=lambda r: r.number)]}


def verify_suite(level: str = "exact", samples: int | None = None, report=None) -> Summary:
    """Run the exact, Monte Carlo or all criteria.

    ``samples`` overrides the sample count of every Monte Carlo criterion.
    ``report``, when given, is called with each finished Criterion.
    """
    if level not in ("exact", "mc", "all"):
        raise ConfigError(f"unknown level {level!r}")
    if samples is not None and samples < 1 and level != "exact":
        raise ConfigError("samples must be positive for Monte Carlo criteria")
    fns = (EXACT if level in ("exact", "all") else ()) + (MC if level in ("mc", "all") else ())
    out = []
    for fn in fns:
        res = fn(samples=samples) if (samples is not None and fn in MC) else fn()
        out.append(res)
        if report is not None:
            report(res)
    return Summary(out)
