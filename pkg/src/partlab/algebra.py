"""The partition algebra C[P_k(N)] and its tensor representation.

The product is p . q = N^kappa (p o q).  Coefficients are either Laurent
polynomials in N (:class:`NPoly`) or exact rationals once N is fixed.
"""

from __future__ import annotations

from fractions import Fraction
from math import prod
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, MissingEntryError, SingularGramError, SizeMismatchError
from .partition import Partition, compose, enumerate_family, identity, join, transpose

RHO_CAP = 10 ** 6


class NPoly:
    """Laurent polynomial in the dimension symbol N with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, object] | None = None):
        clean = {}
        for e, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[int(e)] = clean.get(int(e), 0) + c
        self.terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def monomial(cls, exponent: int, coeff=1) -> "NPoly":
        return cls({exponent: coeff})

    @classmethod
    def const(cls, c) -> "NPoly":
        return cls({0: c})

    def _coerce(self, other):
        if isinstance(other, NPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return NPoly.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return NPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return NPoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return NPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __call__(self, N) -> Fraction:
        return self.evaluate(N)

    def evaluate(self, N) -> Fraction:
        N = Fraction(N)
        return sum((c * N ** e for e, c in self.terms.items()), Fraction(0))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms):
            c = self.terms[e]
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                var = "N" if e == 1 else f"N^{e}"
                body = var if mag == 1 else f"{mag}*{var}"
            sign = "-" if c < 0 else "+"
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __repr__(self):
        return f"NPoly({str(self)!r})"


class PartitionVector:
    """Element of C[P_k(N)]: a finite combination of partitions.

    Coefficients are NPoly when N is symbolic, or rationals when ``N`` is set.
    """

    def __init__(self, k: int, terms: Mapping[Partition, object] | None = None, N=None):
        self.k = k
        self.N = N
        self.terms = {}
        for p, c in (terms or {}).items():
            if p.k != k:
                raise SizeMismatchError(f"term {p} does not have k={k}")
            self._add(p, c)

    def _zero(self):
        return Fraction(0) if self.N is not None else NPoly()

    def _add(self, p, c):
        if self.N is not None and isinstance(c, NPoly):
            c = c.evaluate(self.N)
        elif self.N is None and not isinstance(c, NPoly):
            c = NPoly.const(c)
        new = self.terms.get(p, self._zero()) + c
        if new:
            self.terms[p] = new
        else:
            self.terms.pop(p, None)

    @classmethod
    def basis(cls, p: Partition, N=None) -> "PartitionVector":
        return cls(p.k, {p: 1}, N=N)

    def __add__(self, other):
        _same(self, other)
        out = PartitionVector(self.k, dict(self.terms), N=self.N)
        for p, c in other.terms.items():
            out._add(p, c)
        return out

    def scale(self, c) -> "PartitionVector":
        return PartitionVector(self.k, {p: v * c for p, v in self.terms.items()}, N=self.N)

    def __mul__(self, other):
        return mul(self, other)

    def __eq__(self, other):
        return isinstance(other, PartitionVector) and self.k == other.k and \
            self.terms == other.terms

    def evaluate(self, N) -> "PartitionVector":
        return PartitionVector(self.k, self.terms, N=N)

    def __repr__(self):
        inner = " + ".join(f"({c})*{p}" for p, c in sorted(self.terms.items()))
        return f"PartitionVector(k={self.k}: {inner or '0'})"


def _same(x, y):
    if x.k != y.k:
        raise SizeMismatchError(f"size mismatch: k={x.k} vs k={y.k}")
    if x.N != y.N:
        raise ValueError("vectors evaluated at different N")


def mul(x: PartitionVector, y: PartitionVector) -> PartitionVector:
    """Bilinear extension of p . q = N^kappa(p, q) (p o q)."""
    _same(x, y)
    out = PartitionVector(x.k, N=x.N)
    for p, a in x.terms.items():
        for q, b in y.terms.items():
            r, kappa = compose(p, q)
            w = Fraction(x.N) ** kappa if x.N is not None else NPoly.monomial(kappa)
            out._add(r, a * b * w)
    return out


def gram_entry(p: Partition, q: Partition) -> NPoly:
    """Tr(rho_N(p) rho_N(tq)) = N^nc(p v q) as a monomial."""
    return NPoly.monomial(join(p, q).nc)


def rho_matrix(p: Partition, N: int, cap: int = RHO_CAP) -> sp.csr_matrix:
    """Sparse 0/1 matrix of rho_N(p) on (C^N)^{(x) k}.

    The entry in row (i_1', ..., i_k') and column (i_1, ..., i_k) is 1 when
    every block of p carries a single index value.  Multi-indices are read
    with the first tensor factor most significant, matching ``np.kron``.
    """
    k = p.k
    if N ** k > cap:
        raise CapacityError(f"dense representation N^k = {N ** k} exceeds cap {cap}")
    nb = p.nc
    grids = np.indices((N,) * nb).reshape(nb, -1) if nb else np.zeros((0, 1), dtype=np.int64)
    row = np.zeros(grids.shape[1], dtype=np.int64)
    col = np.zeros(grids.shape[1], dtype=np.int64)
    for c in range(k):
        col = col * N + grids[p.labels[2 * c]]
        row = row * N + grids[p.labels[2 * c + 1]]
    data = np.ones(len(row), dtype=np.int64)
    return sp.csr_matrix((data, (row, col)), shape=(N ** k, N ** k))


def rho_vector(x: PartitionVector, N: int) -> sp.csr_matrix:
    """rho_N applied to a combination of partitions (coefficients evaluated at N)."""
    out = sp.csr_matrix((N ** x.k, N ** x.k), dtype=float)
    total = None
    for p, c in x.terms.items():
        c = c.evaluate(N) if isinstance(c, NPoly) else c
        term = rho_matrix(p, N).astype(float) * float(c)
        total = term if total is None else total + term
    return total if total is not None else out


# ---------------------------------------------------------------------------
# Gram solves

def gram_matrix(basis: Sequence[Partition], N: int, others: Sequence[Partition] | None = None
                ) -> list[list[int]]:
    others = basis if others is None else others
    return [[N ** join(q, p).nc for p in basis] for q in others]


def _falling(N: int, m: int) -> int:
    return prod(range(N - m + 1, N + 1)) if m > 0 else 1


def _solve_fraction(A: list[list], b: list) -> list[Fraction]:
    """Exact Gauss-Jordan elimination with partial pivoting on the first nonzero."""
    n = len(A)
    M = [[Fraction(v) for v in row] + [Fraction(bv)] for row, bv in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise SingularGramError("singular Gram matrix")
        M[col], M[piv] = M[piv], M[col]
        pr = M[col]
        inv = 1 / pr[col]
        for j in range(col, n + 1):
            pr[j] *= inv
        for r in range(n):
            if r != col:
                f = M[r][col]
                if f:
                    row = M[r]
                    for j in range(col, n + 1):
                        if pr[j]:
                            row[j] -= f * pr[j]
    return [M[r][n] for r in range(n)]


def _solve_on_p(k: int, traces: Sequence, N: int, exact: bool) -> list:
    """Solve sum_p c_p N^nc(p v p') = t_p' over all of P_k.

    N^nc(s) counts maps from the blocks of s to [N] sorted by their kernel r,
    so the Gram matrix factors as Z^T D Z with Z the refinement incidence and
    D = diag((N)_nc(r)).  Both triangular factors are inverted by recursion
    along refinement, so no dense elimination is needed.
    """
    from .poset import family_index
    fi = family_index(k, "P")
    n = len(fi)
    J = fi.join_matrix
    nc = fi.nc
    order = np.argsort(nc, kind="stable")
    zero = Fraction(0) if exact else 0.0
    # forward: t_p' = sum_{r >= p'} u_r with u = D Z c ; solve for u from coarsest
    u = [zero] * n
    for i in order:
        row = J[i]
        strictly_coarser = np.flatnonzero((row == nc) & (nc < nc[i]))
        u[i] = traces[i] - sum((u[r] for r in strictly_coarser), zero)
    for i in range(n):
        f = _falling(N, int(nc[i]))
        if f == 0:
            raise SingularGramError(
                f"N={N} is too small for P_{k}: (N)_{int(nc[i])} vanishes")
        u[i] = u[i] / f if exact else u[i] / float(f)
    # u_r = sum_{p finer than r} c_p ; solve from finest
    c = [zero] * n
    for i in order[::-1]:
        row = J[i]
        strictly_finer = np.flatnonzero((row == nc[i]) & (nc > nc[i]))
        c[i] = u[i] - sum((c[p] for p in strictly_finer), zero)
    return c


def gram_solve(k: int, tag: str, traces: Mapping[Partition, object], N: int,
               basis: Sequence[Partition] | None = None, exact: bool = True
               ) -> dict[Partition, object]:
    """Coefficients c with sum_p c_p N^nc(p v p') = traces[p'] for p' in the basis.

    The basis defaults to the family A_k named by ``tag``; an explicit list of
    partitions may be given instead.  With ``exact`` the solve is in rational
    arithmetic, otherwise in floating point.
    """
    members = list(basis) if basis is not None else enumerate_family(k, tag)
    missing = [p for p in members if p not in traces]
    if missing:
        raise MissingEntryError(f"missing trace for {missing[0]}")
    if len(traces) != len(members):
        extra = [p for p in traces if p not in set(members)]
        if extra:
            raise MissingEntryError(f"trace key {extra[0]} is not in the basis")
    if basis is None and tag == "P":
        from .poset import family_index
        fi = family_index(k, "P")
        if exact:
            t = [Fraction(traces[p]) for p in fi.members]
        else:
            t = [complex(traces[p]) for p in fi.members]
            if all(v.imag == 0 for v in t):
                t = [v.real for v in t]
        c = _solve_on_p(k, t, N, exact)
        return dict(zip(fi.members, c))
    G = gram_matrix(members, N)
    if exact:
        sol = _solve_fraction(G, [Fraction(traces[p]) for p in members])
    else:
        Gf = np.array(G, dtype=float)
        rhs = np.array([complex(traces[p]) for p in members])
        if np.linalg.matrix_rank(Gf) < len(members):
            raise SingularGramError(f"singular Gram matrix for {tag}_{k} at N={N}")
        sol = np.linalg.solve(Gf, rhs)
        if np.all(np.abs(sol.imag) == 0):
            sol = sol.real
        sol = list(sol)
    return dict(zip(members, sol))


def synthesize(coeffs: Mapping[Partition, object], N: int) -> np.ndarray:
    """Dense sum_p c_p rho_N(p), for checking solves against an explicit tensor."""
    out = None
    for p, c in coeffs.items():
        term = rho_matrix(p, N).toarray().astype(object) * Fraction(c) \
            if isinstance(c, (int, Fraction)) else rho_matrix(p, N).toarray() * c
        out = term if out is None else out + term
    return out


def unit(k: int, N=None) -> PartitionVector:
    return PartitionVector.basis(identity(k), N=N)


def trace_pairing(p: Partition, q: Partition, N: int) -> int:
    """Tr(rho_N(p) rho_N(tq)) computed from dense matrices (test oracle)."""
    a = rho_matrix(p, N)
    b = rho_matrix(transpose(q), N)
    return int(a.multiply(b.T).sum())
