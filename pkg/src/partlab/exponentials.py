"""Additive and multiplicative exponentials of spectral forms.

``exp_boxplus`` evaluates e^{(+) t phi} on a partition through groupings of
its cycles; ``boxtimes_evolution`` integrates the linear moment equation

    d/dt m_q = sum_{p1 <= q} phi(p1) m_{tp1 o q},   m_q(0) = 1,

by a stepped Taylor series with a remainder bound.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetError, CapacityError
from .partition import (ENUM_CAPS, Partition, compose, conjugate, enumerate_family,
                        geodesic_leq, orbit_rep, restrict_columns, transpose)
from .tables import CumulantTable, SpectralForm
from .freeness import free_sum


def exp_boxplus(phi: SpectralForm, t, p: Partition):
    """(e^{(+) t phi})(p): sum over set partitions of the cycles of p of the
    products of t * phi(extraction of each group).

    Classes that phi does not define count as zero.
    """
    cyc = p.cycle_columns()
    n = len(cyc)
    if n == 0:
        return Fraction(1)
    weight = {}

    def w(mask):
        if mask not in weight:
            cols = [c for i in range(n) if mask >> i & 1 for c in cyc[i]]
            weight[mask] = t * phi(restrict_columns(p, cols))
        return weight[mask]

    @lru_cache(maxsize=None)
    def E(mask):
        if mask == 0:
            return Fraction(1) if isinstance(t, (int, Fraction)) else 1.0
        low = mask & -mask
        rest = mask ^ low
        total = 0
        sub = rest
        while True:
            g = sub | low
            f = w(g)
            if f != 0:
                total = total + f * E(mask ^ g)
            if sub == 0:
                break
            sub = (sub - 1) & rest
        return total

    return E((1 << n) - 1)


def exp_boxplus_moment(phi: SpectralForm, t, p: Partition, tag: str = "P"):
    """Moment m_p of e^{(+) t phi}: the sum of its cumulants over the down-set of p."""
    from .poset import down_set
    total = 0
    for q in down_set(p, tag):
        total = total + exp_boxplus(phi, t, q)
    return total


def exp_boxplus_table(phi: SpectralForm, t, kmax: int, tag: str = "P", label="a"
                      ) -> CumulantTable:
    """Cumulant table of e^{(+) t phi} on every class of A_k, k <= kmax."""
    out = CumulantTable(tag=tag)
    for k in range(1, kmax + 1):
        seen = set()
        for p in enumerate_family(k, tag):
            r = orbit_rep(p)
            if r not in seen:
                seen.add(r)
                out.set(r, (label,) * k, exp_boxplus(phi, t, r))
    return out


def degree_restriction(kappa: CumulantTable, degree: int) -> SpectralForm:
    """The form p -> kappa_p on classes of the given degree, zero elsewhere."""
    lab = kappa.labels[0]
    vals = {p: v for (p, w), v in kappa.items() if p.k == degree}
    return SpectralForm(vals, name=f"R{degree}({lab})")


def rescale(kappa: CumulantTable, c) -> CumulantTable:
    """Cumulants of c * a: multilinearity gives a factor c^k in degree k."""
    out = CumulantTable(tag=kappa.tag)
    for (p, w), v in kappa.items():
        out.set(p, w, v * c ** p.k)
    return out


def n_fold_sum(kappa: CumulantTable, n: int) -> CumulantTable:
    """Cumulants of a_1 + ... + a_n for free copies of a, by binary doubling."""
    if n < 1:
        raise ValueError("n must be positive")
    result, power = None, kappa
    while n:
        if n & 1:
            result = power if result is None else free_sum(result, power)
        n >>= 1
        if n:
            power = free_sum(power, power)
    return result


# ---------------------------------------------------------------------------
# multiplicative evolution

def _orbit(rep: Partition) -> list[Partition]:
    return sorted({conjugate(rep, s) for s in itertools.permutations(range(rep.k))},
                  key=lambda x: x.labels)


def _support(phi: SpectralForm, k: int) -> list[tuple[Partition, object]]:
    """Members p of P_k with phi(p) != 0, with their values."""
    if getattr(phi, "support", None) is not None:
        reps = phi.support(k)
    elif k <= ENUM_CAPS["P"]:
        reps = list(phi.grade(k))
    else:
        raise CapacityError(f"spectral form has no support list at k={k}")
    out = []
    for r in reps:
        v = phi(r)
        if v != 0:
            out += [(q, v) for q in _orbit(r)]
    return out


def generator(phi: SpectralForm, start: Iterable[Partition], max_states: int = 20000
              ) -> tuple[list[Partition], np.ndarray]:
    """States reachable from ``start`` and the matrix T of the moment equation."""
    start = list(start)
    k = start[0].k
    supp = _support(phi, k)
    index, states, rows = {}, [], []
    queue = []
    for q in start:
        if q not in index:
            index[q] = len(states)
            states.append(q)
            queue.append(q)
    while queue:
        q = queue.pop(0)
        row = {}
        for p1, v in supp:
            if geodesic_leq(p1, q):
                r = compose(transpose(p1), q)[0]
                if r not in index:
                    if len(states) >= max_states:
                        raise BudgetError(f"state space exceeds {max_states}")
                    index[r] = len(states)
                    states.append(r)
                    queue.append(r)
                row[index[r]] = row.get(index[r], 0) + v
        rows.append(row)
    T = np.zeros((len(states), len(states)), dtype=complex)
    for i, row in enumerate(rows):
        for j, v in row.items():
            T[i, j] += complex(v)
    if np.all(T.imag == 0):
        T = T.real
    return states, T


def _taylor_step(T: np.ndarray, v: np.ndarray, h: float, tol: float, max_terms: int):
    term = v.copy()
    out = v.copy()
    x = h * np.abs(T).sum(axis=1).max()
    for j in range(1, max_terms + 1):
        term = (h / j) * (T @ term)
        out = out + term
        # ||term_{j+i}|| <= ||term_j|| x^i, so the tail is below ||term_j|| x / (1 - x)
        if np.abs(term).max() * x / (1 - x) <= tol:
            return out
    raise BudgetError(f"Taylor series did not reach tolerance {tol} in {max_terms} terms")


def boxtimes_evolution(phi: SpectralForm, k: int, t_grid: Sequence, start=None,
                       tol: float = 1e-12, max_terms: int = 200
                       ) -> dict[tuple, float]:
    """Moments m_q(t) of the multiplicative process driven by ``phi``.

    ``start`` lists the partitions of interest (default: all of P_k, or S_k
    when P_k is not enumerable); the state space is their closure under
    q -> tp1 o q.  Returns {(t, q): value} for every state.
    """
    if start is None:
        start = enumerate_family(k, "P" if k <= ENUM_CAPS["P"] else "S")
    states, T = generator(phi, start)
    norm = np.abs(T).sum(axis=1).max() if T.size else 0.0
    v = np.ones(len(states), dtype=T.dtype)
    out = {}
    t_prev = 0.0
    for t in sorted(float(x) for x in t_grid):
        dt = t - t_prev
        if dt < 0:
            raise ValueError("negative times are not supported")
        if dt > 0 and norm > 0:
            steps = max(1, math.ceil(2 * dt * norm))
            h = dt / steps
            for _ in range(steps):
                v = _taylor_step(T, v, h, tol / steps, max_terms)
        t_prev = t
        for q, val in zip(states, v):
            out[(t, q)] = val.real if np.iscomplexobj(v) and abs(val.imag) < tol else val
    return out
