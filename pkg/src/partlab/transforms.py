"""Moment, cumulant and exclusive-moment transforms on formal tables.

For a fixed word the three families of numbers are linked by triangular
systems over a partition family A_k:

    m_p     = sum_{q in A, q <= p} kappa_q        (geodesic order)
    m_p     = sum_{q -| p} m_{q^c}                (coarser, same cycles)
    m_{p^c} = sum_{q |- p} kappa_q                (finer, same nc - cycles)

Each transform runs once per multiset of labels: the vector for any other
ordering of the same labels follows from permutation covariance.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .partition import Partition, family_contains, in_family
from .poset import family_index
from .tables import CumulantTable, ExclusiveTable, MomentTable, Table

_ZERO = Fraction(0)


def _vector(table: Table, fi, word, missing_zero: bool = False) -> list:
    if missing_zero:
        return [table.get(p, word, _ZERO) if in_family(p, table.tag) else _ZERO
                for p in fi.members]
    return [table.get(p, word) for p in fi.members]


def _store(out: Table, fi, word, values) -> None:
    for p, v in zip(fi.members, values):
        out.set(p, word, v)


def moments_to_cumulants(m: MomentTable, tag: str | None = None) -> CumulantTable:
    """A-cumulants: the solution of m_p = sum_{q <= p, q in A_k} kappa_q."""
    tag = tag or m.tag
    out = CumulantTable(tag=tag)
    for k in m.degrees:
        fi = family_index(k, tag)
        below = fi.relation("below")
        order = fi.distance_order()
        for word in m.words(k):
            vals = _vector(m, fi, word)
            kap = [None] * len(vals)
            for i in order:
                s = vals[i]
                for j in below[i]:
                    if j != i:
                        s = s - kap[j]
                kap[i] = s
            _store(out, fi, word, kap)
    return out


def cumulants_to_moments(kappa: CumulantTable, tag: str | None = None,
                         N: int | None = None) -> MomentTable:
    """m_p = sum over the geodesic down-set of p within A_k.

    With a ``tag`` larger than the table's own family, cumulants outside the
    smaller family count as zero (natural extension).  Missing entries are
    zero in any case.

    Given a dimension ``N`` the finite-N relation is used instead:
    m_p = sum_{q in A_k} kappa_q N^{df(q, p)}, where
    df(q, p) = nc(q v p) - cyc(p) - nc(q) + cyc(q) <= 0 vanishes exactly
    when q <= p.  This inverts the finite-dimensional cumulants of a
    matrix family exactly; the plain sum is its large-N limit.
    """
    tag = tag or kappa.tag
    out = MomentTable(tag=tag)
    for k in kappa.degrees:
        fi = family_index(k, tag)
        if N is None:
            below = fi.relation("below")
        else:
            J = fi.join_matrix.astype(np.int64)
            df = J - fi.cyc[:, None] - fi.nc[None, :] + fi.cyc[None, :]
            base = Fraction(N) if isinstance(N, int) else float(N)
        for word in kappa.words(k):
            vals = _vector(kappa, fi, word, missing_zero=True)
            if N is None:
                mom = [sum((vals[j] for j in below[i]), _ZERO) for i in range(len(vals))]
            else:
                mom = [sum((vals[j] * base ** int(df[i, j]) for j in range(len(vals))
                            if vals[j] != 0), _ZERO) for i in range(len(vals))]
            _store(out, fi, word, mom)
    return out


def exclusive_transform(m: Table, tag: str | None = None, direction: str = "to_exclusive"
                        ) -> Table:
    """Switch between moments and exclusive moments over P.

    ``to_exclusive`` solves m_p = sum_{q -| p} m_{q^c}; tables on a smaller
    family are first extended to P by the natural extension.
    ``from_exclusive`` evaluates the sum directly.
    """
    if direction not in ("to_exclusive", "from_exclusive"):
        raise ValueError(f"unknown direction {direction!r}")
    tag = tag or m.tag
    if direction == "to_exclusive" and tag != "P":
        m = restrict_extend(m, tag, "P")
    out = ExclusiveTable(tag="P") if direction == "to_exclusive" else MomentTable(tag="P")
    for k in m.degrees:
        fi = family_index(k, "P")
        cc = fi.relation("cc")
        for word in m.words(k):
            vals = _vector(m, fi, word)
            if direction == "from_exclusive":
                res = [sum((vals[j] for j in cc[i]), _ZERO) for i in range(len(vals))]
            else:
                res = [None] * len(vals)
                # coarser partitions have fewer blocks: solve from the coarsest
                for i in sorted(range(len(vals)), key=lambda i: fi.nc[i]):
                    s = vals[i]
                    for j in cc[i]:
                        if j != i:
                            s = s - res[j]
                    res[i] = s
            _store(out, fi, word, res)
    return out


def cumulants_to_exclusive(kappa: CumulantTable, p: Partition, word=None):
    """m_{p^c} = sum of kappa_q over q finer-compatible with p in the table's family."""
    word = tuple(word) if word is not None else (kappa.labels[0],) * p.k
    if p.k == 0:
        return Fraction(1)
    fi = family_index(p.k, kappa.tag)
    return sum((kappa.get(fi.members[j], word, _ZERO) for j in fi.finer_compatible(p)), _ZERO)


def restrict_extend(table: Table, from_tag: str, to_tag: str) -> Table:
    """Restrict a table to a subfamily, or extend it naturally to a larger one.

    Extension of moments sets m_p = sum_{q in A_from, q <= p} kappa_q, so the
    cumulants in the larger family vanish outside A_from and agree with the
    original ones on it.  Cumulant tables extend by zero.
    """
    if table.tag != from_tag:
        raise ValueError(f"table lives on {table.tag}, not {from_tag}")
    if from_tag == to_tag:
        return table.copy()
    if family_contains(from_tag, to_tag):
        out = type(table)(tag=to_tag)
        for (p, w), v in table.items():
            if in_family(p, to_tag):
                out.set(p, w, v)
        return out
    if not family_contains(to_tag, from_tag):
        raise ValueError(f"families {from_tag} and {to_tag} are not nested")
    if isinstance(table, CumulantTable):
        out = CumulantTable(tag=to_tag)
        for k in table.degrees:
            fi = family_index(k, to_tag)
            for word in table.words(k):
                _store(out, fi, word, _vector(table, fi, word, missing_zero=True))
        return out
    if isinstance(table, MomentTable):
        return cumulants_to_moments(moments_to_cumulants(table, from_tag), tag=to_tag)
    raise TypeError("only moment and cumulant tables can be extended")


class CheckResult(NamedTuple):
    ok: bool
    witness: tuple | None
    detail: str = ""

    def __bool__(self):
        return self.ok


def _close(a, b, tol) -> bool:
    return a == b if tol == 0 else abs(a - b) <= tol


def invariance_check(kappa: CumulantTable, tag2: str, tol=0) -> CheckResult:
    """G(A_2)-invariance of a P-cumulant table.

    Fails at the first (p, word) with p outside A_2 and kappa_p != 0, or where
    kappa on A_2 differs from the A_2-cumulants of the restricted moments.
    """
    if kappa.tag != "P":
        raise ValueError("invariance_check expects a P-cumulant table")
    for (p, w), v in kappa.items():
        if not in_family(p, tag2) and not _close(v, 0, tol):
            return CheckResult(False, (p, w), f"kappa_{p} = {v} with {p} outside {tag2}")
    m = cumulants_to_moments(kappa)
    k2 = moments_to_cumulants(restrict_extend(m, "P", tag2), tag2)
    for (p, w), v in k2.items():
        if not _close(v, kappa.get(p, w, _ZERO), tol):
            return CheckResult(False, (p, w), f"{tag2}-cumulant {v} differs from P-cumulant")
    return CheckResult(True, None)
