"""Order relations on a whole family A_k, computed in bulk.

Every relation used by the transforms (geodesic order, refinement, the two
compatible orders) is a function of the block counts nc(p), nc(p v id) and
nc(p v q).  Up to the P enumeration cap the whole matrix nc(p v q) comes
from a table of single merges; beyond it, one row at a time by min-label
propagation in numpy.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .partition import ENUM_CAPS, Partition, enumerate_family


def _join_counts(p: Partition, labels: np.ndarray, same: np.ndarray) -> np.ndarray:
    """nc(p v q) for every q whose labels are the rows of ``labels``.

    ``same[i, x, y]`` says whether points x and y share a block of q_i.
    """
    n, m = labels.shape
    if m == 0:
        return np.ones(n, dtype=np.int64)
    big = m
    lab = np.tile(np.arange(m), (n, 1))
    blocks = [np.flatnonzero(np.array(p.labels) == b) for b in range(p.nc)]
    while True:
        for b in blocks:
            if len(b) > 1:
                lab[:, b] = lab[:, b].min(axis=1, keepdims=True)
        new = np.where(same, lab[:, None, :], big).min(axis=2)
        if np.array_equal(new, lab):
            break
        lab = new
    return (lab == np.arange(m)).sum(axis=1)


@lru_cache(maxsize=None)
def _p_join_matrix(k: int) -> np.ndarray:
    """nc(p v q) over all of P_k.

    Each q is the join of the two-point merges along its blocks, so p v q is
    reached from p by following a table of single merges, vectorized over p.
    """
    members = enumerate_family(k, "P")
    index = {p.labels: i for i, p in enumerate(members)}
    n, m = len(members), 2 * k
    atoms = [(x, y) for x in range(m) for y in range(x + 1, m)]
    atom_id = {a: j for j, a in enumerate(atoms)}
    table = np.empty((n, max(len(atoms), 1)), dtype=np.int64)
    for i, p in enumerate(members):
        lab = p.labels
        for j, (x, y) in enumerate(atoms):
            a, b = lab[x], lab[y]
            if a == b:
                table[i, j] = i
            else:
                lo, hi = min(a, b), max(a, b)
                table[i, j] = index[Partition(k, [lo if v == hi else v for v in lab]).labels]
    nc = np.array([p.nc for p in members], dtype=np.int8)
    J = np.empty((n, n), dtype=np.int8)
    for jq, q in enumerate(members):
        idx = np.arange(n)
        first = {}
        for x, b in enumerate(q.labels):
            if b in first:
                idx = table[idx, atom_id[(first[b], x)]]
            first[b] = x
        J[:, jq] = nc[idx]
    return J


class FamilyIndex:
    """Members of A_k with block statistics and lazily built relations."""

    def __init__(self, k: int, tag: str = "P"):
        self.k = k
        self.tag = tag
        self.members = enumerate_family(k, tag)
        self.index = {p: i for i, p in enumerate(self.members)}
        self.nc = np.array([p.nc for p in self.members], dtype=np.int64)
        self.cyc = np.array([p.cycles for p in self.members], dtype=np.int64)
        self.labels = np.array([p.labels for p in self.members], dtype=np.int64
                               ).reshape(len(self.members), 2 * k)
        self._same = self.labels[:, :, None] == self.labels[:, None, :]
        self._join = None
        self._rel = {}

    def __len__(self):
        return len(self.members)

    def join_row(self, p: Partition) -> np.ndarray:
        """nc(p v q) for every member q."""
        i = self.index.get(p)
        if i is not None and self._join is not None:
            return self._join[i].astype(np.int64)
        return _join_counts(p, self.labels, self._same)

    @property
    def join_matrix(self) -> np.ndarray:
        if self._join is None:
            if self.k <= ENUM_CAPS["P"]:
                full = _p_join_matrix(self.k)
                if self.tag == "P":
                    self._join = full
                else:
                    pidx = family_index(self.k, "P").index
                    sel = np.array([pidx[p] for p in self.members], dtype=np.int64)
                    self._join = full[np.ix_(sel, sel)]
            else:
                n = len(self.members)
                J = np.empty((n, n), dtype=np.int8)
                for i, p in enumerate(self.members):
                    J[i] = _join_counts(p, self.labels, self._same)
                self._join = J
        return self._join

    # single-row queries -----------------------------------------------------
    def below(self, p: Partition) -> np.ndarray:
        """Indices of members q with q <= p in the geodesic order."""
        J = self.join_row(p)
        return np.flatnonzero(J == self.nc - self.cyc + p.cycles)

    def above(self, p: Partition) -> np.ndarray:
        """Indices of members q with p <= q."""
        J = self.join_row(p)
        return np.flatnonzero(J == p.nc - p.cycles + self.cyc)

    def coarser_compatible(self, p: Partition) -> np.ndarray:
        """Members q coarser than p with the same cycle count (q -| p)."""
        J = self.join_row(p)
        return np.flatnonzero((J == self.nc) & (self.cyc == p.cycles))

    def finer_compatible(self, p: Partition) -> np.ndarray:
        """Members q finer than p with the same nc - cycles (q |- p)."""
        J = self.join_row(p)
        return np.flatnonzero((J == p.nc) & (self.nc - self.cyc == p.nc - p.cycles))

    # bulk relations -----------------------------------------------------------
    def relation(self, name: str) -> list[np.ndarray]:
        """For each member i, the array of related members, by relation name.

        ``below``: q <= p_i; ``cc``: q -| p_i; ``fc``: q |- p_i.
        """
        if name not in self._rel:
            J = self.join_matrix.astype(np.int64)
            nc, cyc = self.nc, self.cyc
            out = []
            for i in range(len(self.members)):
                row = J[i]
                if name == "below":
                    mask = row == nc - cyc + cyc[i]
                elif name == "cc":
                    mask = (row == nc) & (cyc == cyc[i])
                elif name == "fc":
                    mask = (row == nc[i]) & (nc - cyc == nc[i] - cyc[i])
                else:
                    raise ValueError(name)
                out.append(np.flatnonzero(mask))
            self._rel[name] = out
        return self._rel[name]

    def distance_order(self) -> np.ndarray:
        """Member indices sorted by d(id, p), ties by index: a linear extension of <=."""
        d2 = self.k + self.nc - 2 * self.cyc
        return np.lexsort((np.arange(len(self.members)), d2))


@lru_cache(maxsize=None)
def family_index(k: int, tag: str = "P") -> FamilyIndex:
    return FamilyIndex(k, tag)


def down_set(p: Partition, tag: str = "P") -> list[Partition]:
    """Members of A_k below p in the geodesic order."""
    fi = family_index(p.k, tag)
    return [fi.members[j] for j in fi.below(p)]


def up_set(p: Partition, tag: str = "P") -> list[Partition]:
    fi = family_index(p.k, tag)
    return [fi.members[j] for j in fi.above(p)]
