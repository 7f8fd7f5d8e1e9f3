"""Finite-N observables of concrete matrices.

The p-moment of matrices M_1, ..., M_k is

    m_p = N^-cycles(p) * sum over maps f from the blocks of p to {1..N}
                         of prod_j (M_j)[f(j'), f(j)],

which equals N^-cycles(p) Tr[(M_1 (x) ... (x) M_k) rho_N(tp)].  The sum is an
einsum with one index per block, so rho_N is never built.

Finite-dimensional cumulants come from the trace pairings t_q = N^cycles(q) m_q:
conjugating the tensor by g^{(x)k} does not change them, since rho_N(q)
commutes with that action, so no Haar average is ever taken.
"""

from __future__ import annotations

import string
from fractions import Fraction
from math import comb, prod
from typing import Any, Mapping, Sequence

import numpy as np

from .algebra import gram_matrix, gram_solve, rho_matrix
from .errors import BudgetError, MissingEntryError
from .partition import (Partition, _set_partitions_rgs, enumerate_family, is_finer, kernel,
                        transpose)
from .sampling import Estimate, SampleSpec, sample_rng

DEFAULT_BUDGET = 10 ** 9
_LETTERS = string.ascii_letters


class MatrixFamily:
    """Labelled N x N matrices, fixed arrays or :class:`SampleSpec` ensembles.

    Random members are drawn independently for each sample index; give each
    spec its own seed (see :meth:`random`).
    """

    def __init__(self, members: Mapping[Any, Any]):
        if not members:
            raise ValueError("empty matrix family")
        self.members = dict(members)
        Ns = set()
        for lab, m in self.members.items():
            if isinstance(m, SampleSpec):
                Ns.add(m.N)
            else:
                a = np.asarray(m)
                if a.ndim != 2 or a.shape[0] != a.shape[1]:
                    raise ValueError(f"member {lab!r} is not a square matrix")
                Ns.add(a.shape[0])
        if len(Ns) != 1:
            raise ValueError(f"members have different sizes {sorted(Ns)}")
        self.N = Ns.pop()

    @classmethod
    def random(cls, specs: Mapping[Any, tuple[str, dict]], N: int, seed: int) -> "MatrixFamily":
        """Independent ensembles with seeds derived from one master seed."""
        members = {}
        for i, (lab, (kind, params)) in enumerate(sorted(specs.items(), key=lambda x: str(x[0]))):
            sub = int(sample_rng(seed, 0xFA, i).integers(2 ** 62))
            members[lab] = SampleSpec(kind, N, sub, dict(params))
        return cls(members)

    @property
    def deterministic(self) -> bool:
        return all(not isinstance(m, SampleSpec) or m.deterministic for m in self.members.values())

    def draw(self, s: int = 0) -> dict:
        return {lab: (m.sample(s) if isinstance(m, SampleSpec) else np.asarray(m))
                for lab, m in self.members.items()}

    def __contains__(self, label):
        return label in self.members


def _as_family(family) -> MatrixFamily:
    if isinstance(family, MatrixFamily):
        return family
    if isinstance(family, Mapping):
        return MatrixFamily(family)
    return MatrixFamily({"a": family})


def _exact_array(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.dtype == object:
        return a
    if np.issubdtype(a.dtype, np.integer):
        return a.astype(object)
    return a


def _subscripts(p: Partition) -> str:
    lab = p.labels
    ops = [_LETTERS[lab[2 * j + 1]] + _LETTERS[lab[2 * j]] for j in range(p.k)]
    return ",".join(ops) + "->"


def block_sum(mats: Sequence[np.ndarray], p: Partition, budget: float | None = None):
    """sum over maps f from blocks of p to [N] of prod_j M_j[f(j'), f(j)].

    Equals Tr[(M_1 (x) ... (x) M_k) rho_N(tp)].  Integer and Fraction input is
    summed exactly; floating input goes through an optimized contraction.
    """
    if len(mats) != p.k:
        raise ValueError(f"{len(mats)} matrices for a partition with k={p.k}")
    budget = DEFAULT_BUDGET if budget is None else budget
    if p.k == 0:
        return 1
    arrs = [_exact_array(m) for m in mats]
    N = arrs[0].shape[0]
    sub = _subscripts(p)
    if any(a.dtype == object for a in arrs):
        cost = N ** p.nc * p.k
        if cost > budget:
            raise BudgetError(f"exact block sum costs N^nc*k = {cost:.3g} > budget {budget:.3g}")
        arrs = [a.astype(object) for a in arrs]
        return np.einsum(sub, *arrs)
    path, info = np.einsum_path(sub, *arrs, optimize="greedy")
    flops = float(info.split("Optimized FLOP count:")[1].split("\n")[0])
    if flops > budget:
        raise BudgetError(f"block sum costs {flops:.3g} flops > budget {budget:.3g}")
    out = np.einsum(sub, *arrs, optimize=path)
    return out.item() if isinstance(out, np.ndarray) else out


def _normalize(value, N: int, power: int):
    if isinstance(value, (int, Fraction)) or (hasattr(value, "denominator") and
                                               not isinstance(value, float)):
        return Fraction(value) / N ** power
    return value / N ** power


def _check_word(fam: MatrixFamily, p: Partition, word) -> tuple:
    word = tuple(word) if word is not None else (next(iter(fam.members)),) * p.k
    if len(word) != p.k:
        raise ValueError(f"word of length {len(word)} for a partition with k={p.k}")
    for x in word:
        if x not in fam:
            raise KeyError(f"label {x!r} not in the family")
    return word


def p_moment(family, p: Partition, word=None, mode: str = "exact", samples: int | None = None,
             budget: float | None = None):
    """m_p of the family along ``word``: an exact value, or an Estimate in ``mc`` mode."""
    fam = _as_family(family)
    word = _check_word(fam, p, word)
    if mode == "exact":
        if not fam.deterministic:
            raise ValueError("exact mode needs deterministic matrices; use mode='mc'")
        mats = fam.draw(0)
        return _normalize(block_sum([mats[x] for x in word], p, budget), fam.N, p.cycles)
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    if not samples:
        raise ValueError("mc mode needs a positive number of samples")
    vals = []
    for s in range(samples):
        mats = fam.draw(s)
        vals.append(block_sum([mats[x] for x in word], p, budget) / fam.N ** p.cycles)
    return Estimate.of(np.array(vals))


def _mobius_merges(nb: int):
    """Set partitions of nb blocks with the Moebius weight of the merge."""
    fact = [1, 1, 2, 6, 24, 120, 720, 5040, 40320, 362880, 3628800]
    for rgs in _set_partitions_rgs(nb):
        sizes = np.bincount(rgs) if nb else []
        mu = prod((-1) ** (s - 1) * fact[s - 1] for s in sizes)
        yield rgs, mu


def exclusive_moment(family, p: Partition, word=None, budget: float | None = None):
    """N^-cycles(p) * sum over injective block assignments of the entry product.

    Computed by Moebius inversion over merges of the blocks of p.
    """
    fam = _as_family(family)
    word = _check_word(fam, p, word)
    N = fam.N
    if p.nc > N:
        raise ValueError(f"nc(p) = {p.nc} exceeds N = {N}: no injective assignment exists")
    if not fam.deterministic:
        raise ValueError("exclusive_moment needs deterministic matrices")
    mats = fam.draw(0)
    ms = [mats[x] for x in word]
    total = 0
    for rgs, mu in _mobius_merges(p.nc):
        q = Partition(p.k, [rgs[b] for b in p.labels])
        total = total + mu * block_sum(ms, q, budget)
    return _normalize(total, N, p.cycles)


# ---------------------------------------------------------------------------
# finite-dimensional cumulants

def traces_from_tensor(T: np.ndarray, basis: Sequence[Partition], N: int) -> dict:
    """t_q = Tr[T rho_N(tq)] for an explicit N^k x N^k tensor T."""
    out = {}
    for q in basis:
        R = rho_matrix(transpose(q), N).tocoo()
        # Tr[T R] = sum_{i,j} T[j, i] R[i, j]
        vals = T[R.col, R.row]
        out[q] = sum(vals.tolist(), Fraction(0)) if T.dtype == object else vals.sum()
    return out


def cumulants_from_traces(traces: Mapping[Partition, Any], k: int, tag: str, N: int,
                          basis: Sequence[Partition] | None = None, exact: bool = True) -> dict:
    """kappa_p = c_p N^(nc(p) - cycles(p)) where sum_p c_p N^nc(p v q) = t_q."""
    c = gram_solve(k, tag, traces, N, basis=basis, exact=exact)
    out = {}
    for p, v in c.items():
        e = p.nc - p.cycles
        out[p] = v * Fraction(N) ** e if exact else v * float(N) ** e
    return out


def _cumulant_operator(k: int, tag: str, N: int, basis=None) -> tuple[list, np.ndarray]:
    members = list(basis) if basis is not None else enumerate_family(k, tag)
    G = np.array(gram_matrix(members, N), dtype=float)
    D = np.array([float(N) ** (p.nc - p.cycles) for p in members])
    return members, D[:, None] * np.linalg.inv(G)


def finite_cumulants(family, k: int, tag: str = "P", word=None, mode: str = "exact",
                     samples: int | None = None, budget: float | None = None,
                     basis: Sequence[Partition] | None = None) -> dict:
    """Finite-dimensional A-cumulants of the family along ``word``.

    Exact mode returns rationals; ``mc`` mode returns an Estimate per
    partition (the solve is linear, so it is applied sample by sample).
    """
    fam = _as_family(family)
    dummy = Partition(k, list(range(2 * k)))
    word = _check_word(fam, dummy, word)
    N = fam.N
    members = list(basis) if basis is not None else enumerate_family(k, tag)
    if mode == "exact":
        if not fam.deterministic:
            raise ValueError("exact mode needs deterministic matrices; use mode='mc'")
        mats = fam.draw(0)
        ms = [mats[x] for x in word]
        traces = {q: Fraction(block_sum(ms, q, budget)) if _exactish(ms) else block_sum(ms, q, budget)
                  for q in members}
        return cumulants_from_traces(traces, k, tag, N, basis=basis, exact=_exactish(ms))
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    if not samples:
        raise ValueError("mc mode needs a positive number of samples")
    members, K = _cumulant_operator(k, tag, N, basis)
    rows = []
    for s in range(samples):
        mats = fam.draw(s)
        ms = [mats[x] for x in word]
        t = np.array([block_sum(ms, q, budget) for q in members])
        rows.append(K @ t)
    rows = np.array(rows)
    return {p: Estimate.of(rows[:, i]) for i, p in enumerate(members)}


def _exactish(ms) -> bool:
    return all(np.asarray(m).dtype == object or np.issubdtype(np.asarray(m).dtype, np.integer)
               for m in ms)


def entry_moment_prediction(kappa: Mapping[Partition, Any], tag: str, kernel_tuple: Sequence[int],
                            N: int):
    """E[prod_j (M_j)[n_j', n_j]] = sum_{p finer than Ker} N^-(nc-cycles) kappa_p.

    ``kernel_tuple`` is (n_1, n_1', ..., n_k, n_k').
    """
    K = kernel(kernel_tuple)
    total = Fraction(0)
    for p in enumerate_family(K.k, tag):
        if p not in kappa:
            raise MissingEntryError(f"cumulant table lacks {p}")
        if is_finer(p, K):
            v = kappa[p]
            e = p.nc - p.cycles
            total = total + (v / Fraction(N) ** e if isinstance(v, (int, Fraction))
                             else v / float(N) ** e)
    return total


def entry_product(mats: Sequence[np.ndarray], kernel_tuple: Sequence[int]):
    """prod_j (M_j)[n_j', n_j] with 1-based indices (n_1, n_1', ..., n_k, n_k')."""
    out = 1
    for j, M in enumerate(mats):
        out = out * np.asarray(M)[kernel_tuple[2 * j + 1] - 1, kernel_tuple[2 * j] - 1]
    return out


# ---------------------------------------------------------------------------
# classical cumulants through diagonal matrices

def classical_cumulants(moments: Sequence, kmax: int) -> list:
    """cum_1..cum_kmax from moments m_0 = 1, m_1, ..., by the standard recursion."""
    m = [Fraction(x) if not isinstance(x, float) else x for x in moments]
    kap = [None] * (kmax + 1)
    for n in range(1, kmax + 1):
        kap[n] = m[n] - sum(comb(n - 1, j - 1) * kap[j] * m[n - j] for j in range(1, n))
    return kap[1:]


def column_basis(k: int) -> list[Partition]:
    """Partitions coarser than id_k: one per set partition of the columns."""
    return [Partition(k, [r for r in rgs for _ in (0, 1)]) for rgs in _set_partitions_rgs(k)]


def _falling(n: int, m: int) -> int:
    return prod(range(n - m + 1, n + 1)) if m > 0 else 1


def diagonal_traces(moments: Sequence, q: Partition, l: int):
    """E Tr[M^{(x)k} rho_l(tq)] for M = diag of l iid copies with the given moments.

    A diagonal M forces equal indices on each column, so the sum runs over maps
    from the cycles of q to [l], grouped by their kernel.
    """
    sizes = [len(c) for c in q.cycle_columns()]
    total = Fraction(0)
    for rgs in _set_partitions_rgs(len(sizes)):
        nb = max(rgs) + 1 if rgs else 0
        weight = [0] * nb
        for s, r in zip(sizes, rgs):
            weight[r] += s
        total += _falling(l, nb) * prod((Fraction(moments[w]) for w in weight), start=Fraction(1))
    return total


def classical_bridge(moments: Sequence, k: int, l: int, mode: str = "exact",
                     samples: int | None = None, seed: int = 0, law: str | None = None):
    """kappa_{0_k} of an l x l diagonal matrix with iid entries.

    ``moments`` lists m_0 = 1, m_1, ..., m_k of the entry law.  The expected
    tensor lies in the span of rho_l over partitions coarser than id_k, and
    that family is independent for l >= k, so the solve runs on it.
    In ``mc`` mode ``law`` names the entry distribution to sample.
    """
    if l < k:
        raise ValueError(f"need l >= k, got l={l} < k={k}")
    basis = column_basis(k)
    zero_k = Partition(k, [0] * (2 * k))
    if mode == "exact":
        traces = {q: diagonal_traces(moments, q, l) for q in basis}
        return cumulants_from_traces(traces, k, "P", l, basis=basis)[zero_k]
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    if law is None or not samples:
        raise ValueError("mc mode needs a law and a positive number of samples")
    spec = SampleSpec(f"diag-iid:{law}", l, seed)
    res = finite_cumulants({"a": spec}, k, "P", mode="mc", samples=samples, basis=basis)
    return res[zero_k]
