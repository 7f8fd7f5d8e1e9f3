"""Free sums, free products, freeness and determinism predicates.

The sum and product laws act on single-element tables (one label each); the
freeness check works on a moment table whose words mix labels from two
families.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .partition import (Partition, compose, conjugate, cycle, enumerate_family, insert,
                        is_finer, orbit_rep, product_index_set, restrict_columns,
                        splittings, tensor, transpose)
from .poset import family_index
from .tables import CumulantTable, MomentTable, Table
from .transforms import exclusive_transform, moments_to_cumulants, restrict_extend

_ZERO = Fraction(0)


def _classes(k: int, tag: str) -> list[Partition]:
    seen, out = set(), []
    for p in enumerate_family(k, tag):
        r = orbit_rep(p)
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


def _label(t: Table):
    labs = t.labels
    if len(labs) != 1:
        raise ValueError("sum and product laws need single-label tables")
    return labs[0]


def _val(t: Table, p: Partition):
    if p.k == 0:
        return Fraction(1)
    return t.get(p, (_label(t),) * p.k, _ZERO)


def free_sum(ka: CumulantTable, kb: CumulantTable, label=None) -> CumulantTable:
    """kappa_p(a + b) = sum over splittings (p1, p2, I) of kappa_p1(a) kappa_p2(b)."""
    if ka.tag != kb.tag:
        raise ValueError(f"family mismatch: {ka.tag} vs {kb.tag}")
    label = label if label is not None else _label(ka)
    out = CumulantTable(tag=ka.tag)
    for k in sorted(set(ka.degrees) | set(kb.degrees)):
        for p in _classes(k, ka.tag):
            s = _ZERO
            for p1, p2, _ in splittings(p):
                s = s + _val(ka, p1) * _val(kb, p2)
            out.set(p, (label,) * k, s)
    return out


def free_product(ka: CumulantTable, b: Table, mode: str = "moment_form", label=None) -> Table:
    """Law of ab for free a and b.

    ``cumulant_form``: kappa_p(ab) = sum over the product index set of p of
    kappa_p1(a) kappa_p2(b), with ``b`` a cumulant table.
    ``moment_form``: m_p(ab) = sum_{p1 <= p} kappa_p1(a) m_{tp1 o p}(b), with
    ``b`` a moment table.
    """
    if mode not in ("cumulant_form", "moment_form"):
        raise ValueError(f"unknown mode {mode!r}")
    if ka.tag != b.tag:
        raise ValueError(f"family mismatch: {ka.tag} vs {b.tag}")
    want = CumulantTable if mode == "cumulant_form" else MomentTable
    if not isinstance(b, want):
        raise TypeError(f"{mode} needs b as a {want.__name__}")
    tag = ka.tag
    label = label if label is not None else f"{_label(ka)}{_label(b)}"
    out = want(tag=tag)
    for k in sorted(set(ka.degrees) & set(b.degrees)):
        fi = family_index(k, tag)
        for p in _classes(k, tag):
            s = _ZERO
            if mode == "cumulant_form":
                for p1, p2 in product_index_set(p, tag):
                    s = s + _val(ka, p1) * _val(b, p2)
            else:
                for j in fi.below(p):
                    p1 = fi.members[j]
                    c = _val(ka, p1)
                    if c != 0:
                        s = s + c * b.get(compose(transpose(p1), p)[0], (_label(b),) * k)
            out.set(p, (label,) * k, s)
    return out


def expand_products(m: Table, p: Partition, products: Sequence[Sequence]):
    """m_p(prod_1, ..., prod_k) rewritten as one moment of the factors.

    Each argument is a sequence of labels read as an ordered product.  The
    insertion of p at the first slot of every product, composed with the
    cyclic permutation running through each product, gives the partition.
    """
    products = [tuple(x) for x in products]
    if len(products) != p.k:
        raise ValueError(f"{len(products)} arguments for a partition with k={p.k}")
    if any(len(x) == 0 for x in products):
        raise ValueError("empty product")
    n = sum(len(x) for x in products)
    starts, perm, pos = [], [], 1
    for x in products:
        starts.append(pos)
        run = list(range(pos, pos + len(x)))
        perm += run[1:] + run[:1]
        pos += len(x)
    from .partition import from_permutation
    q = compose(insert(p, n, starts), from_permutation(perm))[0]
    flat = tuple(a for x in products for a in x)
    return m.get(q, flat)


# ---------------------------------------------------------------------------
# determinism

def is_deterministic(t: Table, kmax: int, tol=0) -> bool:
    """Factorization f(p1 (x) p2) = f(p1) f(p2) on a single-label table.

    For moment tables and for cumulant tables the two predicates are
    equivalent; both are exposed through this one function.
    """
    lab = _label(t)
    for k1 in range(1, kmax):
        for k2 in range(1, kmax - k1 + 1):
            for p1 in _classes(k1, t.tag):
                for p2 in _classes(k2, t.tag):
                    lhs = t.get(tensor(p1, p2), (lab,) * (k1 + k2))
                    rhs = t.get(p1, (lab,) * k1) * t.get(p2, (lab,) * k2)
                    if (lhs != rhs) if tol == 0 else abs(lhs - rhs) > tol:
                        return False
    return True


# ---------------------------------------------------------------------------
# freeness

class FreenessReport(NamedTuple):
    free: bool
    witness: tuple | None
    routes_agree: bool
    detail: str = ""

    def __bool__(self):
        return self.free


def _side_order(A1, A2):
    def key(x):
        return (0 if x in A1 else 1, str(x))
    return key


def _display(p: Partition, word: tuple) -> tuple[Partition, tuple]:
    """Pleasant representative of a (partition, word) orbit for reporting.

    A single-cycle permutation is shown as the standard cycle (1 ... k) with
    the lexicographically least word among the rotations.
    """
    k = p.k
    if p.is_permutation() and p.cycles == 1 and k > 1:
        c = cycle(k)
        best = None
        for s in itertools.permutations(range(k)):
            if conjugate(p, s) == c:
                w = [None] * k
                for i in range(k):
                    w[s[i]] = word[i]
                w = tuple(w)
                if best is None or tuple(map(str, w)) < tuple(map(str, best)):
                    best = w
        return c, best
    return p, word


def _partitions_by_cycles(k: int, tag: str) -> list[Partition]:
    return sorted(enumerate_family(k, tag), key=lambda p: (p.cycles, p.nc, p.labels))


def freeness_check(m: MomentTable, A1: Iterable, A2: Iterable, tag: str = "P",
                   kmax: int | None = None, tol=0) -> FreenessReport:
    """A-freeness of two label families, by cumulants and by exclusive moments.

    Route one: mixed cumulants vanish on partitions linking the two sides,
    and factorize on the others.  Route two: the exclusive moments over P of
    the naturally extended table satisfy the left/right factorization with
    the indicator of p^l (x) p^r being finer-compatible with p.  The routes
    are equivalent; ``routes_agree`` reports whether they gave the same verdict.
    The witness is the first failure of route one, ordered by k, word, then
    by number of cycles.
    """
    A1, A2 = set(A1), set(A2)
    if A1 & A2:
        raise ValueError("the two label families overlap")
    kmax = kmax or max(m.degrees)
    side = _side_order(A1, A2)

    def eq(a, b):
        return a == b if tol == 0 else abs(a - b) <= tol

    src = m if m.tag == tag else restrict_extend(m, m.tag, tag)
    kap = moments_to_cumulants(src, tag)
    ext = src if tag == "P" else restrict_extend(src, tag, "P")
    exc = exclusive_transform(ext, "P")

    witness, detail = None, ""
    ok2 = True
    for k in range(2, kmax + 1):
        words = []
        for w in m.words(k):
            w = tuple(sorted(w, key=side))
            k1 = sum(1 for x in w if x in A1)
            if any(x not in A1 and x not in A2 for x in w):
                continue
            if 0 < k1 < k:
                words.append((w, k1))
        for w, k1 in words:
            wl, wr = w[:k1], w[k1:]
            left = list(range(1, k1 + 1))
            right = list(range(k1 + 1, k + 1))
            for p in _partitions_by_cycles(k, tag):
                pl, pr = restrict_columns(p, left), restrict_columns(p, right)
                compatible = tensor(pl, pr) == p
                got = kap.get(p, w)
                want = kap.get(pl, wl) * kap.get(pr, wr) if compatible else _ZERO
                if witness is None and not eq(got, want):
                    witness = _display(p, w)
                    detail = (f"kappa^{tag}_{p}{w} = {got}, expected {want}"
                              + ("" if compatible else " (incompatible partition)"))
            if ok2:
                for p in enumerate_family(k, "P"):
                    pl, pr = restrict_columns(p, left), restrict_columns(p, right)
                    t = tensor(pl, pr)
                    fc = is_finer(t, p) and t.nc - t.cycles == p.nc - p.cycles
                    want = exc.get(pl, wl) * exc.get(pr, wr) if fc else _ZERO
                    if not eq(exc.get(p, w), want):
                        ok2 = False
                        break
    ok1 = witness is None
    return FreenessReport(ok1, witness, ok1 == ok2, detail)
