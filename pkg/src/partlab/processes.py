"""Brownian motions, Lévy processes, the matricial Wick formula and reference moments.

Conventions.  Gaussian ensembles are normalized so that a matrix Brownian
motion H_t has E[H_t (x) H_t] = (t/N)(eps (1,2) + (2 - beta)[1,2]) in the
partition basis.  Additive Lévy processes are compensated, so that
E[X_t] = eta t Id; multiplicative ones carry a scalar phase drift chosen so
that d/dt E tr U_t = i arg(omega) - b/2 + int (Re zeta - 1) dnu.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Any, Mapping, Sequence

import numpy as np

from .algebra import PartitionVector
from .errors import BudgetError, ConfigError
from .partition import (Partition, contraction, cycle, identity, orbit_rep, restrict_columns, tensor,
                        transposition)
from .sampling import SampleSpec
from .tables import SpectralForm

MAX_STEPS = 10 ** 6


# ---------------------------------------------------------------------------
# triplets and pairings

def _exact(x):
    """Integers and fractions stay exact; anything else becomes a float."""
    if isinstance(x, bool):
        raise ConfigError("expected a number")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    try:
        return float(x)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {x!r}") from None


@dataclass(frozen=True)
class LevyTriplet:
    """Characteristic data (drift, diffusion, jump atoms) of a free Lévy process.

    Additive: (eta, a, rho) with atoms at real locations x != 0.
    Multiplicative: (arg omega, b, nu) with atoms at angles theta in
    [-pi, pi] minus {0}, the jump being the eigenvalue e^{i theta}.
    """

    mode: str
    drift: float = 0.0
    diffusion: float = 0.0
    atoms: tuple = ()

    def __post_init__(self):
        if self.mode not in ("additive", "multiplicative"):
            raise ConfigError(f"triplet mode must be additive or multiplicative, not {self.mode!r}")
        if self.diffusion < 0:
            raise ConfigError("diffusion must be nonnegative")
        atoms = tuple((_exact(x), _exact(w)) for x, w in self.atoms)
        object.__setattr__(self, "drift", _exact(self.drift))
        object.__setattr__(self, "diffusion", _exact(self.diffusion))
        for x, w in atoms:
            if w < 0:
                raise ConfigError(f"negative jump weight {w}")
            if x == 0:
                raise ConfigError("jump measure charges the identity")
            if self.mode == "multiplicative" and not -math.pi <= x <= math.pi:
                raise ConfigError(f"jump angle {x} outside [-pi, pi]")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_config(cls, cfg: Mapping[str, Any]) -> "LevyTriplet":
        """Parse {"mode", "eta", "a", "atoms": [[x, w], ...]}.

        For multiplicative triplets "omega" and "b" are accepted as aliases of
        "eta" (the angle of omega) and "a".
        """
        allowed = {"mode", "eta", "a", "omega", "b", "atoms"}
        extra = set(cfg) - allowed
        if extra:
            raise ConfigError(f"unknown triplet keys {sorted(extra)}")
        mode = cfg.get("mode", "additive")
        drift = cfg.get("eta", cfg.get("omega", 0.0))
        diff = cfg.get("a", cfg.get("b", 0.0))
        atoms = cfg.get("atoms", [])
        try:
            atoms = [(x, w) for x, w in atoms]
        except (TypeError, ValueError):
            raise ConfigError("atoms must be a list of [location, weight] pairs") from None
        return cls(mode, drift, diff, tuple(atoms))

    @property
    def mass(self) -> float:
        return sum(w for _, w in self.atoms)

    def integral(self, f) -> Any:
        return sum(w * f(x) for x, w in self.atoms)


@dataclass(frozen=True)
class PairingTwoSpecies:
    """A perfect matching of {1..n} whose pairs are tagged T or W."""

    pairs: tuple
    species: tuple

    def __post_init__(self):
        pts = [x for pr in self.pairs for x in pr]
        n = len(pts)
        if sorted(pts) != list(range(1, n + 1)):
            raise ValueError("pairs must partition {1..n}")
        if len(self.species) != len(self.pairs) or any(s not in ("T", "W") for s in self.species):
            raise ValueError("one species letter (T or W) per pair")

    @property
    def n(self) -> int:
        return 2 * len(self.pairs)

    @property
    def transpositions(self) -> int:
        return sum(s == "T" for s in self.species)


def brauer_element(pi: PairingTwoSpecies) -> Partition:
    """b_pi: product of the transpositions (i, j) for T pairs and contractions [i, j] for W pairs."""
    blocks = []
    for (i, j), s in zip(pi.pairs, pi.species):
        if s == "T":
            blocks += [(i, -j), (j, -i)]
        else:
            blocks += [(i, j), (-i, -j)]
    return Partition.from_blocks(blocks, pi.n)


def _matchings(points: list):
    if not points:
        yield ()
        return
    a = points[0]
    for i in range(1, len(points)):
        for rest in _matchings(points[1:i] + points[i + 1:]):
            yield ((a, points[i]),) + rest


def two_species_pairings(k: int, beta: int = 1):
    """All pairings of {1..k}; with beta = 2 only the T species is used."""
    if k % 2:
        return
    choices = ("T",) if beta == 2 else ("T", "W")
    for pairs in _matchings(list(range(1, k + 1))):
        for sp in itertools.product(choices, repeat=len(pairs)):
            yield PairingTwoSpecies(pairs, sp)


def wick_tensor(k: int, epsilon: int = 1, beta: int = 2, covariance=None, N=None
                ) -> PartitionVector:
    """E[M_1 (x) ... (x) M_k] = sum_pi eps^#T prod C(M_i, M_j) rho_N(b_pi).

    ``covariance`` is a symmetric k x k array (default all ones).
    """
    if epsilon not in (1, -1) or beta not in (1, 2):
        raise ValueError("epsilon must be +-1 and beta 1 or 2")
    C = np.ones((k, k), dtype=object) if covariance is None else np.asarray(covariance, dtype=object)
    if C.shape != (k, k) or np.any(C != C.T):
        raise ValueError("covariance must be a symmetric k x k array")
    terms = {}
    for pi in two_species_pairings(k, beta):
        c = Fraction(epsilon) ** pi.transpositions
        for i, j in pi.pairs:
            v = C[i - 1, j - 1]
            c = c * (Fraction(v) if isinstance(v, (int, Fraction)) else v)
        if c != 0:
            b = brauer_element(pi)
            terms[b] = terms.get(b, 0) + c
    return PartitionVector(k, terms, N=N)


# ---------------------------------------------------------------------------
# generators

def _padded(p: Partition, k: int) -> Partition:
    return tensor(p, identity(k - p.k)) if k > p.k else p


def _is_full_cycle(p: Partition) -> bool:
    return p.is_permutation() and p.cycles == 1


def generator_spectral_form(kind: str, params: Mapping[str, Any] | None = None) -> SpectralForm:
    """Limit R-transform of the generator of a matrix process.

    Kinds and parameters: ``bm-additive`` (epsilon, beta), ``bm-unitary``
    (beta), ``levy-additive`` and ``levy-mult`` (a triplet, or its config).
    """
    params = dict(params or {})
    if kind == "bm-additive":
        eps, beta = params.get("epsilon", 1), params.get("beta", 2)
        vals = {transposition(1, 2, 2): Fraction(eps)}
        if beta != 2:
            vals[contraction(1, 2, 2)] = Fraction(2 - beta)
        return SpectralForm(vals, is_infinitesimal_character=True, name="bm-additive",
                            support=lambda k: list(vals) if k == 2 else [])
    if kind == "bm-unitary":
        beta = params.get("beta", 2)
        return _mult_form(beta, Fraction(0), Fraction(1), (), "bm-unitary")
    trip = params.get("triplet", params)
    trip = trip if isinstance(trip, LevyTriplet) else LevyTriplet.from_config(trip)
    if kind == "levy-additive":
        if trip.mode != "additive":
            raise ConfigError("levy-additive needs an additive triplet")

        def rule(p):
            if not _is_full_cycle(p):
                return 0
            if p.k == 1:
                return trip.drift
            m = trip.integral(lambda x: x ** p.k)
            return trip.diffusion + m if p.k == 2 else m
        return SpectralForm(rule=rule, is_infinitesimal_character=True, name="levy-additive",
                            support=lambda k: [cycle(k)])
    if kind == "levy-mult":
        if trip.mode != "multiplicative":
            raise ConfigError("levy-mult needs a multiplicative triplet")
        return _mult_form(params.get("beta", 2), trip.drift, trip.diffusion, trip.atoms,
                          "levy-mult")
    raise ConfigError(f"unsupported generator kind {kind!r}")


def _mult_form(beta, angle, b, atoms, name) -> SpectralForm:
    """id_k -> k(i angle - b/2 + int (Re zeta - 1)), (1,2) (x) id -> -b + int (zeta - 1)^2,
    m-cycle (x) id -> int (zeta - 1)^m, [1,2] (x) id -> (2 - beta) b."""
    zetas = [(complex(math.cos(x), math.sin(x)), w) for x, w in atoms]

    def nu(f):
        v = sum(w * f(z) for z, w in zetas)
        return v.real if abs(complex(v).imag) < 1e-15 else v

    exact = not atoms and angle == 0
    half = Fraction(1, 2) if exact else 0.5

    def rule(p):
        k = p.k
        if p == identity(k):
            v = k * (-half * b + nu(lambda z: z.real - 1))
            return v + 1j * k * angle if angle else v
        cols = [c for c in p.cycle_columns()
                if restrict_columns(p, c) != identity(len(c))]
        if len(cols) != 1:
            return 0
        q = orbit_rep(p)
        m = len(cols[0])
        if q == orbit_rep(_padded(cycle(m), k)):
            s = nu(lambda z: (z - 1) ** m)
            return -b + s if m == 2 else s
        if beta != 2 and q == orbit_rep(_padded(contraction(1, 2, 2), k)):
            return (2 - beta) * b
        return 0

    def support(k):
        reps = [identity(k)] + [_padded(cycle(m), k) for m in range(2, k + 1)]
        if beta != 2 and k >= 2:
            reps.append(_padded(contraction(1, 2, 2), k))
        return reps

    return SpectralForm(rule=rule, is_infinitesimal_character=True, name=name, support=support)


# ---------------------------------------------------------------------------
# Gaussian approximants of the degree-2 dual forms

def _p(blocks) -> Partition:
    return Partition.from_blocks(blocks, 2)


# Each builder takes N and a dict of iid standard Gaussian arrays and is
# linear in them; shapes lists the arrays it needs.
_APPROX = [
    ("id2", _p([(1, -1), (2, -2)]), {"b": ()}, lambda N, g: g["b"] * np.eye(N)),
    ("zero2", _p([(1, -1, 2, -2)]), {"b": ("N",)}, lambda N, g: np.diag(g["b"])),
    ("one2", _p([(1,), (-1,), (2,), (-2,)]), {"b": ()}, lambda N, g: g["b"] * np.full((N, N), 1 / N)),
    ("contraction", _p([(1, 2), (-1, -2)]), {"b": ("N", "N")}, lambda N, g: g["b"] / math.sqrt(N)),
    ("transposition", _p([(1, -2), (2, -1)]), {"x": ("N", "N"), "y": ("N", "N")},
     lambda N, g: _hermitian(N, g["x"], g["y"])),
    ("top-pair", _p([(-1,), (-2,), (1, 2)]), {"b": ("N",)},
     lambda N, g: np.tile(g["b"][None, :], (N, 1)) / N),
    ("bottom-pair", _p([(1,), (2,), (-1, -2)]), {"b": ("N",)},
     lambda N, g: np.tile(g["b"][:, None], (1, N)) / N),
    ("cross", _p([(1, -2), (2,), (-1,)]), {"b1": ("N",), "b2": ("N",), "b3": ("N",)},
     lambda N, g: (g["b1"][:, None] + g["b1"][None, :] - 1j * g["b2"][:, None]
                   - 1j * g["b3"][None, :]) / N),
    ("triple-top", _p([(1, 2, -2), (-1,)]), {"b1": ("N",), "b2": ("N",), "c": ("N",)},
     lambda N, g: _triple(N, g)),
    ("triple-bottom", _p([(2, -1, -2), (1,)]), {"b1": ("N",), "b2": ("N",), "c": ("N",)},
     lambda N, g: _triple(N, g).T),
    ("column", _p([(1, -1), (2,), (-2,)]), {"b1": (), "b2": (), "b3": ()},
     lambda N, g: g["b1"] * (np.eye(N) + np.full((N, N), 1 / N)) - 1j * g["b2"] * np.eye(N)
     - 1j * g["b3"] * np.full((N, N), 1 / N)),
]


def _triple(N, g):
    """delta_ij (B1_i - i B2_i) + B1_j / N, corrected by an independent
    i * (top-pair construction): without it the tensor keeps a term
    N^-2 {1 2}{1'}{2'}, whose cumulant is 1 rather than 0."""
    H = np.diag(g["b1"] - 1j * g["b2"]) + np.tile(g["b1"][None, :], (N, 1)) / N
    return H + 1j * np.tile(g["c"][None, :], (N, 1)) / N


def _hermitian(N, x, y):
    A = (x + 1j * y) / math.sqrt(2)
    return (A + A.conj().T) / math.sqrt(2 * N)


def approximant_classes() -> dict[str, Partition]:
    return {name: orbit_rep(p) for name, p, _, _ in _APPROX}


def _approx_entry(p_class):
    if isinstance(p_class, str):
        for e in _APPROX:
            if e[0] == p_class:
                return e
        p_class = Partition.parse(p_class)
    if isinstance(p_class, Partition) and p_class.k == 2:
        r = orbit_rep(p_class)
        for e in _APPROX:
            if orbit_rep(e[1]) == r:
                return e
    raise ValueError(f"no Gaussian approximant for class {p_class}")


def _shape(s, N):
    return tuple(N if d == "N" else d for d in s)


def gaussian_approximant(p_class, N: int, t: float = 1.0, seed=None,
                         rng: np.random.Generator | None = None) -> np.ndarray:
    """One sample at time t of the matrix process whose generator tends to p*."""
    _, _, shapes, build = _approx_entry(p_class)
    rng = rng if rng is not None else np.random.default_rng(seed)
    g = {name: math.sqrt(t) * rng.standard_normal(_shape(s, N)) for name, s in shapes.items()}
    return build(N, g)


def approximant_second_moment(p_class, N: int) -> np.ndarray:
    """E[H_1 (x) H_1] of the approximant, exactly from the linear builder."""
    _, _, shapes, build = _approx_entry(p_class)
    zero = {name: np.zeros(_shape(s, N)) for name, s in shapes.items()}
    T = np.zeros((N * N, N * N), dtype=complex)
    for name, s in shapes.items():
        for idx in np.ndindex(*_shape(s, N)):
            g = {k: v.copy() for k, v in zero.items()}
            g[name][idx] = 1.0
            A = np.asarray(build(N, g), dtype=complex)
            T += np.kron(A, A)
    return T


# ---------------------------------------------------------------------------
# process samplers

def _bm_increment(N: int, eps: int, beta: int, dt: float, rng) -> np.ndarray:
    """Gaussian matrix with covariance (dt/N)(eps (1,2) + (2 - beta)[1,2])."""
    scale = math.sqrt(dt / N)
    if beta == 2:
        A = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / math.sqrt(2)
        H = (A + A.conj().T) / math.sqrt(2)
        return scale * (H if eps == 1 else 1j * H)
    X = rng.standard_normal((N, N))
    return scale * (X + eps * X.T) / math.sqrt(2)


def _expm_skew(A: np.ndarray) -> np.ndarray:
    """exp(A) for skew-Hermitian (or real antisymmetric) A, via eigh of iA."""
    w, V = np.linalg.eigh(1j * A)
    E = (V * np.exp(-1j * w)) @ V.conj().T
    return E.real if np.isrealobj(A) else E


def _unit_vector(N: int, beta: int, rng) -> np.ndarray:
    v = rng.standard_normal(N) + (1j * rng.standard_normal(N) if beta == 2 else 0)
    return v / np.linalg.norm(v)


def _steps(params, default=100) -> int:
    steps = int(params.get("steps", default))
    if steps < 1:
        raise ConfigError("steps must be at least 1")
    if steps > MAX_STEPS:
        raise BudgetError(f"{steps} steps exceed the step budget {MAX_STEPS}")
    return steps


def _triplet(params) -> LevyTriplet:
    t = params.get("triplet")
    if t is None:
        raise ConfigError("Lévy kinds need params['triplet']")
    return t if isinstance(t, LevyTriplet) else LevyTriplet.from_config(t)


def _jump_location(trip: LevyTriplet, rng) -> float:
    xs = np.array([float(x) for x, _ in trip.atoms])
    w = np.array([float(w) for _, w in trip.atoms])
    return float(xs[rng.choice(len(xs), p=w / w.sum())])


def sample_process(spec: SampleSpec, s: int = 0) -> np.ndarray:
    """Endpoint at time params['t'] of the process named by ``spec.kind``."""
    N, p = spec.N, dict(spec.params)
    rng = spec.rng(s)
    t = float(p.get("t", 1.0))
    beta = int(p.get("beta", 2))
    if beta not in (1, 2):
        raise ConfigError("beta must be 1 or 2")
    if spec.base == "bm-additive":
        eps = int(p.get("epsilon", 1))
        if eps not in (1, -1):
            raise ConfigError("epsilon must be +1 or -1")
        return _bm_increment(N, eps, beta, t, rng)
    if spec.base == "bm-unitary":
        return unitary_bm_path(N, [t], _steps(p), rng, beta)[0]
    if spec.base == "levy-additive":
        trip = _triplet(p)
        if trip.mode != "additive":
            raise ConfigError("levy-additive needs an additive triplet")
        comp = float(trip.drift - trip.integral(lambda x: x))
        X = comp * t * np.eye(N, dtype=complex if beta == 2 else float)
        if trip.diffusion > 0:
            X = X + math.sqrt(float(trip.diffusion)) * _bm_increment(N, 1, beta, t, rng)
        if trip.mass > 0:
            n = rng.poisson(N * trip.mass * t)
            if n:
                V = rng.standard_normal((N, n)) + (1j * rng.standard_normal((N, n)) if beta == 2 else 0)
                V /= np.linalg.norm(V, axis=0)
                xs = np.array([float(x) for x, _ in trip.atoms])
                w = np.array([float(w) for _, w in trip.atoms])
                loc = xs[rng.choice(len(xs), size=n, p=w / w.sum())]
                X = X + (V * loc) @ V.conj().T
        return X
    if spec.base == "levy-mult":
        trip = _triplet(p)
        if trip.mode != "multiplicative":
            raise ConfigError("levy-mult needs a multiplicative triplet")
        steps = _steps(p)
        dt = t / steps
        cplx = beta == 2
        phase = float(trip.drift) - trip.integral(math.sin)
        U = np.eye(N, dtype=complex if cplx else float)
        for _ in range(steps):
            if trip.diffusion > 0:
                U = _expm_skew(_bm_increment(N, -1, beta, float(trip.diffusion) * dt, rng)) @ U
            if trip.mass > 0:
                for _ in range(rng.poisson(N * trip.mass * dt)):
                    U = _rotation(N, _jump_location(trip, rng), cplx, rng) @ U
        if cplx and phase:
            U = np.exp(1j * phase * t) * U
        return U
    raise ConfigError(f"{spec.kind!r} is not a process kind")


def unitary_bm_path(N: int, times: Sequence[float], steps: int, rng, beta: int = 2
                    ) -> list[np.ndarray]:
    """Geodesic scheme U_{j+1} = exp(dH_j) U_j on [0, max(times)] with ``steps``
    equal steps; returns U at the grid points nearest to each requested time."""
    tmax = max(times)
    dt = tmax / steps
    marks = {}
    for i, t in enumerate(times):
        marks.setdefault(int(round(t / dt)), []).append(i)
    out = [None] * len(times)
    U = np.eye(N, dtype=complex if beta == 2 else float)
    for i in marks.get(0, []):
        out[i] = U.copy()
    for j in range(1, steps + 1):
        U = _expm_skew(_bm_increment(N, -1, beta, dt, rng)) @ U
        for i in marks.get(j, []):
            out[i] = U.copy()
    return out


def _rotation(N: int, theta: float, cplx: bool, rng) -> np.ndarray:
    """Id + (e^{i theta} - 1) v v* (complex), or a plane rotation by theta (real)."""
    if cplx:
        v = _unit_vector(N, 2, rng)
        return np.eye(N) + (np.exp(1j * theta) - 1) * np.outer(v, v.conj())
    Q, _ = np.linalg.qr(rng.standard_normal((N, 2)))
    v1, v2 = Q[:, 0], Q[:, 1]
    return (np.eye(N) + (math.cos(theta) - 1) * (np.outer(v1, v1) + np.outer(v2, v2))
            + math.sin(theta) * (np.outer(v2, v1) - np.outer(v1, v2)))


# ---------------------------------------------------------------------------
# closed forms

def noncrossing_partitions(k: int):
    """Noncrossing set partitions of {0..k-1} as lists of blocks."""
    from .partition import _set_partitions_rgs
    for rgs in _set_partitions_rgs(k):
        ok = True
        for a in range(k):
            for b in range(a + 1, k):
                if rgs[a] == rgs[b]:
                    continue
                for c in range(b + 1, k):
                    if rgs[c] != rgs[a]:
                        continue
                    if any(rgs[d] == rgs[b] for d in range(c + 1, k)):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            yield rgs


def reference_moments(which: str, k: int, t: float = 1.0, lam=1):
    """Closed-form moments: ``semicircle`` (noncrossing pairings), ``unitary-bm``
    (E tr U_t^k) and ``free-poisson`` (sum over NC(k) of lam^#blocks)."""
    if k < 1:
        raise ValueError("k must be positive")
    if which == "semicircle":
        return 0 if k % 2 else comb(k, k // 2) // (k // 2 + 1)
    if which == "unitary-bm":
        s = sum((-t) ** l / factorial(l) * k ** (l - 1) * comb(k, l + 1) for l in range(k))
        return math.exp(-k * t / 2) * s
    if which == "free-poisson":
        # Narayana numbers count NC(k) by block count
        lam = Fraction(lam) if isinstance(lam, (int, Fraction)) else lam
        return sum(Fraction(comb(k, j) * comb(k, j - 1), k) * lam ** j for j in range(1, k + 1))
    raise ValueError(f"unknown reference {which!r}")
