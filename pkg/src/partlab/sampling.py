"""Random matrix ensembles, Haar samplers and Monte Carlo estimates.

Sample s of a spec with seed S is drawn from ``np.random.default_rng([S, s])``
(extra integers select sub-streams), so every sample is reproducible on its
own and results do not depend on how samples are scheduled.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

import numpy as np
from scipy.stats import ortho_group, unitary_group

from .errors import ConfigError


# ---------------------------------------------------------------------------
# estimates

@dataclass(frozen=True)
class Estimate:
    """Running (n, sum, sum of squared moduli) summary of a scalar statistic."""

    n: int = 0
    total: complex | float = 0.0
    total_sq: float = 0.0

    @classmethod
    def of(cls, values: Iterable) -> "Estimate":
        v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
        if v.size == 0:
            return cls()
        tot = v.sum()
        if not np.iscomplexobj(v):
            tot = float(tot)
        else:
            tot = complex(tot)
        return cls(int(v.size), tot, float((np.abs(v) ** 2).sum()))

    def __add__(self, other: "Estimate") -> "Estimate":
        return Estimate(self.n + other.n, self.total + other.total,
                        self.total_sq + other.total_sq)

    @property
    def samples(self) -> int:
        return self.n

    @property
    def mean(self):
        return self.total / self.n if self.n else float("nan")

    @property
    def stderr(self) -> float:
        """Sample standard deviation (n - 1 denominator) over sqrt(n)."""
        if self.n < 2:
            return float("inf")
        var = (self.total_sq - abs(self.total) ** 2 / self.n) / (self.n - 1)
        return math.sqrt(max(var, 0.0) / self.n)

    def __repr__(self):
        return f"Estimate(mean={self.mean!r}, stderr={self.stderr:.3g}, samples={self.n})"


def sample_rng(seed: int, *counters: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, counters)])


# ---------------------------------------------------------------------------
# Haar samplers

def haar_sample(group: str, N: int, seed=None, rng: np.random.Generator | None = None
                ) -> np.ndarray:
    """One Haar-distributed element of U(N), O(N), S(N), H(N) or B(N).

    B(N) is the group of orthogonal matrices with all row and column sums 1;
    it is sampled as a Haar O(N-1) rotation of the complement of the unit
    all-ones vector.
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    if N < 1:
        raise ValueError("N must be positive")
    if group == "U":
        return unitary_group.rvs(N, random_state=rng) if N > 1 else \
            np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    if group == "O":
        return ortho_group.rvs(N, random_state=rng) if N > 1 else \
            rng.choice([-1.0, 1.0]) * np.ones((1, 1))
    if group == "S":
        return np.eye(N)[rng.permutation(N)]
    if group == "H":
        return np.eye(N)[rng.permutation(N)] * rng.choice([-1.0, 1.0], size=N)[:, None]
    if group == "B":
        if N < 2:
            raise ValueError("B(N) needs N >= 2")
        e = np.ones(N) / math.sqrt(N)
        # orthonormal basis whose first vector is e
        v = e.copy()
        v[0] -= 1.0
        Q = np.eye(N) - 2 * np.outer(v, v) / (v @ v) if np.linalg.norm(v) > 1e-15 else np.eye(N)
        O = np.eye(N)
        O[1:, 1:] = haar_sample("O", N - 1, rng=rng)
        return Q @ O @ Q.T
    raise ValueError(f"unsupported group {group!r}")


# ---------------------------------------------------------------------------
# Gaussian ensembles (unit variance per independent real coordinate, scaled)

def gue(N: int, rng: np.random.Generator, normalized: bool = True) -> np.ndarray:
    """Hermitian Gaussian matrix with E[M_ab M_cd] = delta_ad delta_bc (/N if normalized)."""
    A = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / math.sqrt(2)
    M = (A + A.conj().T) / math.sqrt(2)
    return M / math.sqrt(N) if normalized else M


def goe(N: int, rng: np.random.Generator, normalized: bool = True) -> np.ndarray:
    """Real symmetric Gaussian matrix with covariance (1,2) + [1,2] (/N if normalized)."""
    X = rng.standard_normal((N, N))
    M = (X + X.T) / math.sqrt(2)
    return M / math.sqrt(N) if normalized else M


def antisym_gaussian(N: int, rng: np.random.Generator, normalized: bool = True) -> np.ndarray:
    """Real antisymmetric Gaussian matrix with covariance -(1,2) + [1,2]."""
    X = rng.standard_normal((N, N))
    M = (X - X.T) / math.sqrt(2)
    return M / math.sqrt(N) if normalized else M


def skew_hermitian_gaussian(N: int, rng: np.random.Generator, normalized: bool = True
                            ) -> np.ndarray:
    """i times a GUE matrix: covariance -(1,2)."""
    return 1j * gue(N, rng, normalized)


def jn(N: int) -> np.ndarray:
    return np.full((N, N), 1.0 / N)


# ---------------------------------------------------------------------------
# laws for diagonal ensembles

_LAW = re.compile(r"^(\w+)(?:\(([^)]*)\))?$")


def parse_law(text: str) -> tuple[str, list[float]]:
    m = _LAW.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse law {text!r}")
    name, args = m.group(1), m.group(2)
    vals = [float(x) for x in args.split(",")] if args else []
    if name not in ("bernoulli", "normal", "rademacher", "uniform", "exponential", "atoms"):
        raise ConfigError(f"unknown law {name!r}")
    return name, vals


def draw_law(text: str, size, rng: np.random.Generator) -> np.ndarray:
    name, a = parse_law(text)
    if name == "bernoulli":
        return (rng.random(size) < (a[0] if a else 0.5)).astype(float)
    if name == "normal":
        mu, sd = (a + [0.0, 1.0][len(a):])[:2]
        return mu + sd * rng.standard_normal(size)
    if name == "rademacher":
        return rng.choice([-1.0, 1.0], size=size)
    if name == "uniform":
        lo, hi = (a + [0.0, 1.0][len(a):])[:2]
        return rng.uniform(lo, hi, size)
    if name == "exponential":
        return rng.exponential(a[0] if a else 1.0, size)
    # atoms(x1, x2, ...): uniform over the listed values
    return rng.choice(np.array(a), size=size)


def law_moments(text: str, kmax: int):
    """Exact moments E[X^j], j = 0..kmax, as Fractions where the law allows."""
    from fractions import Fraction
    name, a = parse_law(text)
    if name == "bernoulli":
        p = Fraction(a[0]).limit_denominator(10 ** 9) if a else Fraction(1, 2)
        return [Fraction(1)] + [p] * kmax
    if name == "rademacher":
        return [Fraction(int(j % 2 == 0)) for j in range(kmax + 1)]
    if name == "atoms":
        xs = [Fraction(x).limit_denominator(10 ** 9) for x in a]
        return [sum(x ** j for x in xs) / len(xs) for j in range(kmax + 1)]
    if name == "uniform":
        lo, hi = (a + [0.0, 1.0][len(a):])[:2]
        lo, hi = Fraction(lo).limit_denominator(10 ** 9), Fraction(hi).limit_denominator(10 ** 9)
        return [Fraction(1)] + [(hi ** (j + 1) - lo ** (j + 1)) / ((j + 1) * (hi - lo))
                                for j in range(1, kmax + 1)]
    if name == "normal" and not a:
        out = []
        for j in range(kmax + 1):
            out.append(Fraction(0) if j % 2 else Fraction(math.prod(range(1, j, 2))))
        return out
    raise ConfigError(f"no exact moments for law {text!r}")


# ---------------------------------------------------------------------------
# sample specifications

KINDS = ("gue", "goe", "antisym-gaussian", "haar", "diag-iid", "jn", "const",
         "bm-additive", "bm-unitary", "levy-additive", "levy-mult", "gaussian-approx")


@dataclass(frozen=True)
class SampleSpec:
    """Descriptor of a random matrix ensemble.

    ``kind`` is one of :data:`KINDS`, optionally with a suffix after a colon
    (``haar:U``, ``diag-iid:bernoulli(0.5)``, ``const:halfhalf``,
    ``gaussian-approx:contraction``).  ``params``
    carries kind-specific values; the extra key ``conjugate`` (a Haar group
    letter) conjugates every sample by an independent Haar element.
    """

    kind: str
    N: int
    seed: int
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        base = self.kind.split(":", 1)[0]
        if base not in KINDS:
            raise ConfigError(f"unknown sample kind {self.kind!r}")
        if not isinstance(self.N, int) or self.N < 1:
            raise ConfigError("N must be a positive integer")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")
        arg = self.kind.split(":", 1)[1] if ":" in self.kind else None
        if base == "haar" and arg not in ("U", "O", "S", "H", "B"):
            raise ConfigError(f"haar kind needs a group in U, O, S, H, B, got {arg!r}")
        if base == "diag-iid":
            if arg is None:
                raise ConfigError("diag-iid needs a law, e.g. diag-iid:bernoulli(0.5)")
            parse_law(arg)
        if base == "const" and arg is None and "matrix" not in self.params:
            raise ConfigError("const needs a name (identity, halfhalf, jn) or params.matrix")
        if base == "gaussian-approx":
            from .processes import approximant_classes
            if arg not in approximant_classes():
                raise ConfigError(f"gaussian-approx needs one of {sorted(approximant_classes())}")
        conj = self.params.get("conjugate")
        if conj is not None and conj not in ("U", "O", "S", "H", "B"):
            raise ConfigError(f"conjugate must be a Haar group letter, got {conj!r}")

    @property
    def base(self) -> str:
        return self.kind.split(":", 1)[0]

    @property
    def arg(self) -> str | None:
        return self.kind.split(":", 1)[1] if ":" in self.kind else None

    @property
    def deterministic(self) -> bool:
        return self.base in ("jn", "const") and self.params.get("conjugate") is None

    def rng(self, s: int, *stream: int) -> np.random.Generator:
        return sample_rng(self.seed, s, *stream)

    def sample(self, s: int = 0) -> np.ndarray:
        M = _draw(self, s)
        g = self.params.get("conjugate")
        if g is not None:
            G = haar_sample(g, self.N, rng=self.rng(s, 1))
            M = G @ M @ G.conj().T
        return M


def _const(spec: SampleSpec) -> np.ndarray:
    N = spec.N
    if "matrix" in spec.params:
        M = np.asarray(spec.params["matrix"], dtype=complex)
        if M.shape != (N, N):
            raise ConfigError(f"const matrix has shape {M.shape}, expected {(N, N)}")
        return M.real.copy() if np.all(M.imag == 0) else M
    name = spec.arg
    if name == "identity":
        return np.eye(N)
    if name == "halfhalf":
        return np.diag([0.0] * (N // 2) + [1.0] * (N - N // 2))
    if name == "jn":
        return jn(N)
    if name == "scalar":
        return float(spec.params.get("value", 1.0)) * np.eye(N)
    raise ConfigError(f"unknown constant matrix {name!r}")


def _draw(spec: SampleSpec, s: int) -> np.ndarray:
    N, base = spec.N, spec.base
    rng = spec.rng(s)
    scale = math.sqrt(float(spec.params.get("t", 1.0)))
    if base == "gue":
        return scale * gue(N, rng, spec.params.get("normalized", True))
    if base == "goe":
        return scale * goe(N, rng, spec.params.get("normalized", True))
    if base == "antisym-gaussian":
        return scale * antisym_gaussian(N, rng, spec.params.get("normalized", True))
    if base == "haar":
        return haar_sample(spec.arg, N, rng=rng)
    if base == "diag-iid":
        return np.diag(draw_law(spec.arg, N, rng))
    if base == "jn":
        return jn(N)
    if base == "const":
        return _const(spec)
    if base == "gaussian-approx":
        from .processes import gaussian_approximant
        return gaussian_approximant(spec.arg, N, float(spec.params.get("t", 1.0)), rng=rng)
    from .processes import sample_process
    return sample_process(spec, s)


def monte_carlo(stat: Callable[[int], Any], samples: int, chunk: int = 256) -> Any:
    """Estimates of ``stat(s)`` over s = 0..samples-1.

    ``stat`` may return a scalar, or an array (one Estimate per entry is then
    returned as a pair of arrays: mean and stderr).
    """
    if samples < 1:
        raise ConfigError("samples must be positive")
    first = np.asarray(stat(0))
    if first.ndim == 0:
        vals = [first[()]] + [stat(s) for s in range(1, samples)]
        return Estimate.of(np.array(vals))
    tot = first.astype(complex if np.iscomplexobj(first) else float).copy()
    tot_sq = np.abs(first) ** 2
    for s in range(1, samples):
        v = np.asarray(stat(s))
        tot = tot + v
        tot_sq = tot_sq + np.abs(v) ** 2
    mean = tot / samples
    var = np.maximum((tot_sq - np.abs(tot) ** 2 / samples) / max(samples - 1, 1), 0.0)
    return mean, np.sqrt(var / samples)
