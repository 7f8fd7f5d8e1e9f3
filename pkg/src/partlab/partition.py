"""Partitions of the 2k-point set {1..k, 1'..k'}.

Points are written as integers: ``i`` is the top point of column ``i`` and
``-i`` is the bottom (primed) point ``i'``.  Internally a partition is a
restricted growth string over the points listed in the order
1 < 1' < 2 < 2' < ..., so two partitions are equal exactly when their label
tuples agree.
"""

from __future__ import annotations

import itertools
import re
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import CapacityError, MalformedPartitionError, SizeMismatchError

FAMILIES = ("P", "B", "S", "H", "Bs")

# default enumeration caps, per family
ENUM_CAPS = {"P": 4, "H": 4, "Bs": 4, "B": 6, "S": 6}
ORBIT_CAP = 7


def point_index(point: int) -> int:
    """Position of a point in the order 1 < 1' < 2 < 2' < ..."""
    if point > 0:
        return 2 * (point - 1)
    return 2 * (-point - 1) + 1


def index_point(idx: int) -> int:
    col = idx // 2 + 1
    return -col if idx % 2 else col


def _rgs(labels: Iterable) -> tuple:
    seen = {}
    out = []
    for x in labels:
        if x not in seen:
            seen[x] = len(seen)
        out.append(seen[x])
    return tuple(out)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


class Partition:
    """A set partition of {1..k, 1'..k'} in canonical form.

    Parameters
    ----------
    k : int
        Number of columns.
    labels : sequence
        One label per point, in the order 1, 1', 2, 2', ...; points with equal
        labels share a block.  Labels are relabeled to first-occurrence order.
    """

    __slots__ = ("k", "labels", "_hash", "_cache")

    def __init__(self, k: int, labels: Sequence):
        if len(labels) != 2 * k:
            raise MalformedPartitionError(
                f"expected {2 * k} point labels, got {len(labels)}")
        self.k = k
        self.labels = _rgs(labels)
        self._hash = hash((k, self.labels))
        self._cache = {}

    # construction ---------------------------------------------------------
    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], k: int | None = None
                    ) -> "Partition":
        """Build a partition from blocks of points (``i`` or ``-i`` for i')."""
        blocks = [list(b) for b in blocks]
        pts = [x for b in blocks for x in b]
        if k is None:
            k = max((abs(x) for x in pts), default=0)
        labels = [None] * (2 * k)
        for bi, block in enumerate(blocks):
            if not block:
                raise MalformedPartitionError("empty block")
            for x in block:
                if not isinstance(x, (int,)) or x == 0 or abs(x) > k:
                    raise MalformedPartitionError(f"point {x!r} outside 1..{k}")
                idx = point_index(x)
                if labels[idx] is not None:
                    raise MalformedPartitionError(f"point {_fmt_point(x)} in two blocks")
                labels[idx] = bi
        missing = [index_point(i) for i, v in enumerate(labels) if v is None]
        if missing:
            raise MalformedPartitionError(
                "points not covered: " + " ".join(_fmt_point(x) for x in missing))
        return cls(k, labels)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Parse the canonical text encoding, e.g. ``"{1 2'}{2 1'}"``."""
        text = text.strip()
        if text in ("{}", ""):
            return cls(0, ())
        if not re.fullmatch(r"(\{[^{}]*\}\s*)+", text):
            raise MalformedPartitionError(f"cannot parse partition {text!r}")
        blocks = []
        for body in re.findall(r"\{([^{}]*)\}", text):
            block = []
            for tok in body.replace(",", " ").split():
                m = re.fullmatch(r"(\d+)('?)", tok)
                if not m:
                    raise MalformedPartitionError(f"bad point {tok!r}")
                v = int(m.group(1))
                block.append(-v if m.group(2) else v)
            blocks.append(block)
        return cls.from_blocks(blocks)

    # basic data -----------------------------------------------------------
    @property
    def blocks(self) -> list[tuple[int, ...]]:
        """Blocks in canonical order, unprimed ascending then primed ascending."""
        if "blocks" not in self._cache:
            groups = [[] for _ in range(self.nc)]
            for idx, lab in enumerate(self.labels):
                groups[lab].append(index_point(idx))
            self._cache["blocks"] = [
                tuple(sorted(x for x in g if x > 0)) + tuple(sorted((x for x in g if x < 0),
                                                                    reverse=True))
                for g in groups]
        return self._cache["blocks"]

    @property
    def nc(self) -> int:
        return (max(self.labels) + 1) if self.labels else 0

    @property
    def cycles(self) -> int:
        """Number of blocks of p joined with id_k."""
        return len(self.cycle_columns())

    def cycle_columns(self) -> list[tuple[int, ...]]:
        """Columns grouped by the blocks of p v id_k, ordered by least column."""
        if "cyc" not in self._cache:
            uf = _UnionFind(self.nc)
            lab = self.labels
            for c in range(self.k):
                uf.union(lab[2 * c], lab[2 * c + 1])
            groups = {}
            for c in range(self.k):
                groups.setdefault(uf.find(lab[2 * c]), []).append(c + 1)
            self._cache["cyc"] = sorted((tuple(g) for g in groups.values()),
                                        key=lambda g: g[0])
        return self._cache["cyc"]

    def block_of(self, point: int) -> int:
        return self.labels[point_index(point)]

    # dunder ---------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.k == other.k and self.labels == other.labels

    def __lt__(self, other):
        return (self.k, self.labels) < (other.k, other.labels)

    def __hash__(self):
        return self._hash

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"Partition({to_text(self)!r})"

    def __reduce__(self):
        return (Partition, (self.k, self.labels))

    # convenience ----------------------------------------------------------
    def __matmul__(self, other):
        """``p @ q`` is the composition p o q, dropping the loop count."""
        return compose(self, other)[0]

    def __mul__(self, other):
        """``p * q`` is the tensor product."""
        return tensor(self, other)

    def is_permutation(self) -> bool:
        return in_family(self, "S")


def _fmt_point(x: int) -> str:
    return f"{x}" if x > 0 else f"{-x}'"


def to_text(p: Partition) -> str:
    """Canonical text encoding, e.g. ``"{1 2'}{2 1'}"``; ``"{}"`` when k = 0."""
    if p.k == 0:
        return "{}"
    return "".join("{" + " ".join(_fmt_point(x) for x in b) + "}" for b in p.blocks)


def canonicalize(raw_blocks: Iterable[Iterable[int]], k: int) -> Partition:
    """Validate a disjoint cover of the 2k points and return its canonical form."""
    return Partition.from_blocks(raw_blocks, k)


# ---------------------------------------------------------------------------
# named partitions

def identity(k: int) -> Partition:
    return Partition(k, [c for c in range(k) for _ in (0, 1)])


def zero(k: int) -> Partition:
    """0_k: the single block containing every point."""
    return Partition(k, [0] * (2 * k))


def one(k: int) -> Partition:
    """1_k: all points are singletons."""
    return Partition(k, range(2 * k))


def empty() -> Partition:
    return Partition(0, ())


def from_permutation(perm: Sequence[int]) -> Partition:
    """Partition {{i, perm(i)'}} of a permutation given 1-based, as perm[i-1]."""
    k = len(perm)
    if sorted(perm) != list(range(1, k + 1)):
        raise MalformedPartitionError(f"not a permutation: {perm}")
    return Partition.from_blocks([[i + 1, -perm[i]] for i in range(k)], k)


def cycle(k: int) -> Partition:
    """The full cycle (1, ..., k), sending i to i+1."""
    return from_permutation([i % k + 1 for i in range(1, k + 1)])


def from_cycles(cycles: Iterable[Sequence[int]], k: int) -> Partition:
    """Permutation partition from disjoint cycles, e.g. ``[(1, 2), (3,)]``."""
    perm = list(range(1, k + 1))
    for cyc in cycles:
        for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
            perm[a - 1] = b
    return from_permutation(perm)


def transposition(i: int, j: int, k: int) -> Partition:
    """(i, j) = {{i, j'}, {i', j}} together with identity columns."""
    return from_cycles([(i, j)], k)


def contraction(i: int, j: int, k: int) -> Partition:
    """Weyl contraction [i, j] = {{i, j}, {i', j'}} together with identity columns."""
    blocks = [[c, -c] for c in range(1, k + 1) if c not in (i, j)]
    blocks += [[i, j], [-i, -j]]
    return Partition.from_blocks(blocks, k)


# ---------------------------------------------------------------------------
# families

def in_family(p: Partition, tag: str) -> bool:
    if tag == "P":
        return True
    sizes = [0] * p.nc
    for lab in p.labels:
        sizes[lab] += 1
    if tag == "B":
        return all(s == 2 for s in sizes)
    if tag == "H":
        return all(s % 2 == 0 for s in sizes)
    if tag == "Bs":
        return all(s <= 2 for s in sizes)
    if tag == "S":
        if not all(s == 2 for s in sizes):
            return False
        top = {p.labels[2 * c] for c in range(p.k)}
        return len(top) == p.k
    raise ValueError(f"unknown family tag {tag!r}")


FAMILY_ORDER = {"S": 0, "B": 1, "Bs": 1, "H": 2, "P": 3}


def family_contains(big: str, small: str) -> bool:
    """True when the family ``small`` is a subfamily of ``big``."""
    incl = {"P": {"P", "B", "S", "H", "Bs"}, "H": {"H", "B", "S"},
            "B": {"B", "S"}, "Bs": {"Bs", "S"}, "S": {"S"}}
    return small in incl[big]


def _set_partitions_rgs(n: int) -> Iterator[tuple]:
    """Restricted growth strings of length n in lexicographic order."""
    if n == 0:
        yield ()
        return
    a = [0] * n

    def rec(i, m):
        if i == n:
            yield tuple(a)
            return
        for v in range(m + 2):
            a[i] = v
            yield from rec(i + 1, max(m, v))
    a[0] = 0
    yield from rec(1, 0)


def enumerate_family(k: int, tag: str = "P", cap: int | None = None) -> list[Partition]:
    """All members of A_k for the family ``tag``, canonical and in a fixed order.

    The order is lexicographic in the label tuple.  ``cap`` overrides the
    default per-family limit on k.
    """
    if tag not in FAMILIES:
        raise ValueError(f"unknown family tag {tag!r}")
    if k < 0:
        raise ValueError("k must be nonnegative")
    limit = ENUM_CAPS[tag] if cap is None else cap
    if k > limit:
        raise CapacityError(f"enumeration of {tag}_{k} exceeds cap k <= {limit}")
    return list(_enum_cached(k, tag))


_ENUM_CACHE: dict = {}


def _enum_cached(k, tag):
    key = (k, tag)
    if key not in _ENUM_CACHE:
        if tag == "S":
            out = [from_permutation(pm) for pm in itertools.permutations(range(1, k + 1))]
        elif tag == "B":
            out = [Partition(k, lab) for lab in _perfect_matchings(2 * k)]
        else:
            out = [p for p in (Partition(k, r) for r in _set_partitions_rgs(2 * k))
                   if in_family(p, tag)]
        out.sort()
        _ENUM_CACHE[key] = tuple(out)
    return _ENUM_CACHE[key]


def _perfect_matchings(n):
    def rec(free):
        if not free:
            yield []
            return
        a = free[0]
        for i in range(1, len(free)):
            b = free[i]
            rest = free[1:i] + free[i + 1:]
            for m in rec(rest):
                yield [(a, b)] + m
    for m in rec(list(range(n))):
        lab = [0] * n
        for bi, (a, b) in enumerate(m):
            lab[a] = lab[b] = bi
        yield lab


# ---------------------------------------------------------------------------
# operations

def _check_same(p: Partition, q: Partition):
    if p.k != q.k:
        raise SizeMismatchError(f"size mismatch: k={p.k} vs k={q.k}")


def transpose(p: Partition) -> Partition:
    """Swap i and i' in every block."""
    lab = p.labels
    return Partition(p.k, [lab[i ^ 1] for i in range(2 * p.k)])


def join(p: Partition, q: Partition) -> Partition:
    """Finest common coarsening p v q."""
    _check_same(p, q)
    n = 2 * p.k
    uf = _UnionFind(n)
    for lab in (p.labels, q.labels):
        first = {}
        for i, b in enumerate(lab):
            if b in first:
                uf.union(first[b], i)
            else:
                first[b] = i
    return Partition(p.k, [uf.find(i) for i in range(n)])


def nc_join(p: Partition, q: Partition) -> int:
    return join(p, q).nc


def compose(p: Partition, q: Partition) -> tuple[Partition, int]:
    """Composition p o q with q stacked above p.

    The bottom row of q is glued to the top row of p.  Returns the composite
    (top row from q, bottom row from p) and the number of connected
    components that lie entirely in the erased middle row.
    """
    _check_same(p, q)
    k = p.k
    # nodes: top 0..k-1, middle k..2k-1, bottom 2k..3k-1
    uf = _UnionFind(3 * k)

    def glue(lab, upper, lower):
        first = {}
        for c in range(k):
            for node, b in ((upper + c, lab[2 * c]), (lower + c, lab[2 * c + 1])):
                if b in first:
                    uf.union(first[b], node)
                else:
                    first[b] = node

    glue(q.labels, 0, k)
    glue(p.labels, k, 2 * k)
    labels = []
    for c in range(k):
        labels.append(uf.find(c))
        labels.append(uf.find(2 * k + c))
    outer = set(labels)
    middle = {uf.find(k + c) for c in range(k)}
    return Partition(k, labels), len(middle - outer)


def tensor(p: Partition, q: Partition) -> Partition:
    """Place q to the right of p."""
    off = p.nc
    return Partition(p.k + q.k, list(p.labels) + [x + off for x in q.labels])


def restrict_columns(p: Partition, columns: Iterable[int]) -> Partition:
    """Keep the given columns (1-based), relabeled in increasing order."""
    cols = sorted(set(columns))
    lab = p.labels
    return Partition(len(cols), [lab[2 * (c - 1) + e] for c in cols for e in (0, 1)])


def extract(p: Partition, points: Iterable[int]) -> Partition:
    """Intersect the blocks of p with a symmetric point set and relabel.

    ``points`` uses the integer convention (``i`` and ``-i``); it must contain
    i' whenever it contains i.
    """
    pts = set(points)
    cols = {abs(x) for x in pts}
    for c in cols:
        if c < 1 or c > p.k:
            raise MalformedPartitionError(f"column {c} outside 1..{p.k}")
        if c not in pts or -c not in pts:
            raise MalformedPartitionError(f"point set is not symmetric at column {c}")
    return restrict_columns(p, cols)


def column_points(columns: Iterable[int]) -> frozenset:
    return frozenset(x for c in columns for x in (c, -c))


def insert(p: Partition, l: int, positions: Sequence[int]) -> Partition:
    """Place p on the given columns of an l-column diagram, identity elsewhere."""
    positions = list(positions)
    if len(positions) != p.k:
        raise MalformedPartitionError(f"need {p.k} positions, got {len(positions)}")
    if any(b <= a for a, b in zip(positions, positions[1:])):
        raise MalformedPartitionError("positions must be strictly increasing")
    if positions and (positions[0] < 1 or positions[-1] > l):
        raise MalformedPartitionError(f"positions must lie in 1..{l}")
    where = {c: j for j, c in enumerate(positions)}
    labels = []
    for c in range(1, l + 1):
        if c in where:
            j = where[c]
            labels += [("p", p.labels[2 * j]), ("p", p.labels[2 * j + 1])]
        else:
            labels += [("id", c), ("id", c)]
    return Partition(l, labels)


def flip(p: Partition, k1: int) -> Partition:
    """Swap i and i' for every column i > k1."""
    if not 0 <= k1 <= p.k:
        raise ValueError(f"k1 must lie in 0..{p.k}")
    lab = p.labels
    out = list(lab)
    for c in range(k1, p.k):
        out[2 * c], out[2 * c + 1] = lab[2 * c + 1], lab[2 * c]
    return Partition(p.k, out)


def kernel(indices: Sequence[int]) -> Partition:
    """Ker of an index tuple (n_1, n_1', ..., n_k, n_k')."""
    if len(indices) % 2:
        raise MalformedPartitionError("index tuple must have even length")
    return Partition(len(indices) // 2, list(indices))


def conjugate(p: Partition, sigma: Sequence[int]) -> Partition:
    """sigma o p o sigma^-1 for sigma given 0-based: column c moves to sigma[c]."""
    lab = p.labels
    out = [0] * (2 * p.k)
    for c in range(p.k):
        s = sigma[c]
        out[2 * s] = lab[2 * c]
        out[2 * s + 1] = lab[2 * c + 1]
    return Partition(p.k, out)


def orbit_rep(p: Partition, cap: int = ORBIT_CAP) -> Partition:
    """Least canonical form of sigma o p o sigma^-1 over sigma in S_k."""
    if p.k > cap:
        raise CapacityError(f"orbit search over S_{p.k} exceeds cap k <= {cap}")
    if "orbit" not in p._cache:
        best = min((conjugate(p, s) for s in itertools.permutations(range(p.k))),
                   key=lambda x: x.labels)
        p._cache["orbit"] = best
    return p._cache["orbit"]


def orbit_key(p: Partition, word: Sequence) -> tuple[Partition, tuple]:
    """Joint canonical representative of (p, word) under column relabeling."""
    word = tuple(word)
    if len(set(word)) == 1 or p.k <= 1:
        return orbit_rep(p), word
    best = None
    for s in itertools.permutations(range(p.k)):
        q = conjugate(p, s)
        w = [None] * p.k
        for c in range(p.k):
            w[s[c]] = word[c]
        key = (q.labels, tuple(w))
        if best is None or key < best[0]:
            best = (key, q)
    return best[1], best[0][1]


# ---------------------------------------------------------------------------
# statistics

class Stats(NamedTuple):
    nc: int
    cycles: int
    irreducible: bool
    weakly_irreducible: bool
    exclusive_irreducible: bool


def _is_id_column(p: Partition, cyc: tuple) -> bool:
    if len(cyc) != 1:
        return False
    c = cyc[0]
    a, b = p.labels[2 * (c - 1)], p.labels[2 * (c - 1) + 1]
    return a == b and p.labels.count(a) == 2


def stats(p: Partition) -> Stats:
    cyc = p.cycle_columns()
    non_id = [c for c in cyc if not _is_id_column(p, c)]
    non_zero = [c for c in cyc if restrict_columns(p, c).nc != 1]
    return Stats(
        nc=p.nc,
        cycles=len(cyc),
        irreducible=len(cyc) == 1,
        weakly_irreducible=len(non_id) <= 1,
        exclusive_irreducible=len(cyc) >= 1 and len(non_zero) <= 1,
    )


# ---------------------------------------------------------------------------
# distances and orders

class OrderReport(NamedTuple):
    """Comparison of p against q.

    ``finer`` is p finer than q (p is below q in refinement), ``coarser`` the
    reverse; ``coarser_compatible`` adds equal cycle counts and
    ``finer_compatible`` adds equal nc - cycles.
    """
    distance: Fraction
    defect: Fraction
    leq: bool
    finer: bool
    coarser: bool
    coarser_compatible: bool
    finer_compatible: bool


def distance(p: Partition, q: Partition) -> Fraction:
    _check_same(p, q)
    return Fraction(p.nc + q.nc, 2) - nc_join(p, q)


def geodesic_leq(p: Partition, q: Partition) -> bool:
    """p <= q: p lies on a geodesic from id_k to q."""
    _check_same(p, q)
    return nc_join(p, q) == p.nc - p.cycles + q.cycles


def is_finer(p: Partition, q: Partition) -> bool:
    """Every block of p lies inside a block of q."""
    _check_same(p, q)
    return nc_join(p, q) == q.nc


def compare(p: Partition, q: Partition) -> OrderReport:
    _check_same(p, q)
    ncj = nc_join(p, q)
    d = Fraction(p.nc + q.nc, 2) - ncj
    d_id_p = Fraction(p.k + p.nc, 2) - p.cycles
    d_id_q = Fraction(q.k + q.nc, 2) - q.cycles
    defect = d_id_q - d_id_p - d
    finer = ncj == q.nc
    coarser = ncj == p.nc
    return OrderReport(
        distance=d,
        defect=defect,
        leq=defect == 0,
        finer=finer,
        coarser=coarser,
        coarser_compatible=coarser and p.cycles == q.cycles,
        finer_compatible=finer and p.nc - p.cycles == q.nc - q.cycles,
    )


# ---------------------------------------------------------------------------
# splittings and product index sets

def splittings(p: Partition) -> list[tuple[Partition, Partition, frozenset]]:
    """F_2(p): splits along unions of cycles, with the left point set I."""
    cyc = p.cycle_columns()
    out = []
    for mask in range(1 << len(cyc)):
        left = [c for i, cy in enumerate(cyc) if mask >> i & 1 for c in cy]
        right = [c for i, cy in enumerate(cyc) if not mask >> i & 1 for c in cy]
        out.append((restrict_columns(p, left), restrict_columns(p, right),
                    column_points(left)))
    return out


def shuffle_tau(k: int) -> Partition:
    """tau = (1, k+1)(2, k+2)...(k, 2k) in S_2k."""
    return from_cycles([(i, i + k) for i in range(1, k + 1)], 2 * k)


def product_index_set(p: Partition, tag: str = "P") -> set[tuple[Partition, Partition]]:
    """Pairs (p1, p2) with p1 o p2 = p and p1 (x) p2 <= (p (x) id_k) o tau.

    Every such pair has p1 <= p and p2 <= tp1 o p, so the search runs over
    those two down-sets only.  ``tag`` keeps both factors in the family A.
    """
    from .poset import down_set
    k = p.k
    target = compose(tensor(p, identity(k)), shuffle_tau(k))[0]
    out = set()
    for p1 in down_set(p, tag):
        r = compose(transpose(p1), p)[0]
        for p2 in down_set(r, tag):
            if compose(p1, p2)[0] == p and geodesic_leq(tensor(p1, p2), target):
                out.add((p1, p2))
    return out
