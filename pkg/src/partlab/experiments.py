"""Predictor-versus-simulation scenarios with deterministic CSV and JSON reports.

A config is a JSON object::

    {"scenario": "semicircle", "seed": 7, "k": [2, 4, 6], "N": [300],
     "samples": 200, "tolerance": {"sigmas": 4, "floor": 0.05}}

Optional keys: "t", "family" (label -> {"kind", "params"}), "output"
({"csv", "json"} file names) and "params" (scenario specific).  Unknown keys
are rejected with the JSON pointer of the offending entry.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .algebra import synthesize
from .errors import ConfigError
from .exponentials import boxtimes_evolution, exp_boxplus_moment
from .matrices import (MatrixFamily, block_sum, classical_bridge, classical_cumulants,
                       cumulants_from_traces, entry_moment_prediction, entry_product,
                       finite_cumulants, traces_from_tensor)
from .diagnostics import strong_invariance_diagnostic
from .partition import (Partition, conjugate, cycle, enumerate_family, join, orbit_rep,
                        restrict_columns, tensor, to_text)
from .processes import (LevyTriplet, _matchings, approximant_classes, approximant_second_moment,
                        generator_spectral_form, reference_moments, unitary_bm_path, wick_tensor)
from .sampling import Estimate, SampleSpec, law_moments, sample_rng

CSV_VERSION = 1
COLUMNS = ("scenario", "method", "k", "partition", "N", "t", "estimate", "stderr",
           "prediction", "abs_error", "tolerance", "pass")

SCENARIOS = ("semicircle", "unitary-bm", "wick", "free-poisson", "freeness-scaling", "entries",
             "classical-bridge", "gaussian-approx", "strong-invariance")

_TOP_KEYS = {"scenario", "seed", "k", "N", "t", "samples", "family", "tolerance", "output",
             "params"}

# scenario -> defaults; "floor" and "combine" feed the tolerance policy
_DEFAULTS: dict[str, dict[str, Any]] = {
    "semicircle": dict(k=[2, 4, 6], N=[300], samples=200, floor=0.05, combine="max"),
    "unitary-bm": dict(k=[1, 2, 3, 4, 5, 6], N=[128], t=[0.5, 1.0, 2.0], samples=200,
                       floor=0.02, combine="sum", params={"steps": 200, "ode_tol": 1e-8}),
    "wick": dict(k=[4], N=[4], samples=100000, floor=0.0, combine="max",
                 params={"ensembles": ["gue", "goe"], "z": 5.0}),
    "free-poisson": dict(k=[1, 2, 3, 4], N=[200], t=[1.0], samples=200, floor=0.1,
                         combine="sum",
                         params={"triplet": {"mode": "additive", "eta": 1, "a": 0,
                                             "atoms": [[1, 1]]}}),
    "freeness-scaling": dict(k=[4], N=[8, 16, 32], samples=100, floor=0.0, combine="max",
                             params={"r2_min": 0.9}),
    "entries": dict(k=[1], N=[4, 8], samples=2000, floor=0.0, combine="max"),
    "classical-bridge": dict(k=[1, 2, 3, 4], N=[8], samples=0, floor=0.0, combine="max",
                             params={"law": "bernoulli(0.5)"}),
    "gaussian-approx": dict(k=[2], N=[4, 8], samples=0, floor=1e-9, combine="max",
                            params={}),
    "strong-invariance": dict(k=[1], N=[4], samples=500, floor=0.0, combine="max",
                              params={"expect": {}}),
}
_STOCHASTIC_ALWAYS = {"semicircle", "wick", "freeness-scaling", "strong-invariance"}


# ---------------------------------------------------------------------------
# configuration

def _err(pointer: str, msg: str) -> ConfigError:
    return ConfigError(f"{pointer or '/'}: {msg}")


def _int_list(value, pointer: str, minimum: int = 1) -> tuple[int, ...]:
    items = value if isinstance(value, list) else [value]
    out = []
    for i, v in enumerate(items):
        p = f"{pointer}/{i}" if isinstance(value, list) else pointer
        if isinstance(v, bool) or not isinstance(v, int):
            raise _err(p, f"expected an integer, got {v!r}")
        if v < minimum:
            raise _err(p, f"must be at least {minimum}")
        out.append(v)
    if not out:
        raise _err(pointer, "empty list")
    return tuple(out)


def _float_list(value, pointer: str) -> tuple[float, ...]:
    items = value if isinstance(value, list) else [value]
    out = []
    for i, v in enumerate(items):
        p = f"{pointer}/{i}" if isinstance(value, list) else pointer
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
            raise _err(p, f"expected a nonnegative number, got {v!r}")
        out.append(float(v))
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    seed: int | None
    k: tuple
    N: tuple
    t: tuple
    samples: int
    family: dict
    tolerance: dict
    output: dict
    params: dict

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ExperimentConfig":
        if not isinstance(raw, Mapping):
            raise _err("", "config must be a JSON object")
        for key in raw:
            if key not in _TOP_KEYS:
                raise _err(f"/{key}", "unknown key")
        if "scenario" not in raw:
            raise _err("/scenario", "missing required key")
        sc = raw["scenario"]
        if sc not in SCENARIOS:
            raise _err("/scenario", f"unknown scenario {sc!r}; expected one of {', '.join(SCENARIOS)}")
        d = _DEFAULTS[sc]
        samples = raw.get("samples", d["samples"])
        if isinstance(samples, bool) or not isinstance(samples, int) or samples < 0:
            raise _err("/samples", "expected a nonnegative integer")
        seed = raw.get("seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
            raise _err("/seed", "expected an integer")
        stochastic = sc in _STOCHASTIC_ALWAYS or samples > 0
        if stochastic and seed is None:
            raise _err("/seed", f"missing required key: scenario {sc} is stochastic")
        if sc in _STOCHASTIC_ALWAYS and samples == 0:
            raise _err("/samples", f"scenario {sc} needs a positive number of samples")
        k = _int_list(raw.get("k", d["k"]), "/k")
        N = _int_list(raw.get("N", d["N"]), "/N")
        t = _float_list(raw.get("t", d.get("t", [1.0])), "/t")
        tol = dict(sigmas=4.0, floor=d["floor"], combine=d["combine"])
        rt = raw.get("tolerance", {})
        if not isinstance(rt, Mapping):
            raise _err("/tolerance", "expected an object")
        for key, v in rt.items():
            if key not in tol:
                raise _err(f"/tolerance/{key}", "unknown key")
            if key == "combine":
                if v not in ("max", "sum"):
                    raise _err("/tolerance/combine", "expected 'max' or 'sum'")
            elif isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
                raise _err(f"/tolerance/{key}", "expected a nonnegative number")
            tol[key] = v
        out = raw.get("output", {})
        if not isinstance(out, Mapping):
            raise _err("/output", "expected an object")
        for key, v in out.items():
            if key not in ("csv", "json"):
                raise _err(f"/output/{key}", "unknown key")
            if not isinstance(v, str) or not v:
                raise _err(f"/output/{key}", "expected a file name")
        fam = raw.get("family", {})
        if not isinstance(fam, Mapping):
            raise _err("/family", "expected an object")
        for lab, entry in fam.items():
            if not isinstance(entry, Mapping):
                raise _err(f"/family/{lab}", "expected an object")
            for key in entry:
                if key not in ("kind", "params"):
                    raise _err(f"/family/{lab}/{key}", "unknown key")
            if "kind" not in entry:
                raise _err(f"/family/{lab}/kind", "missing required key")
            try:
                SampleSpec(entry["kind"], N[0], 0, dict(entry.get("params", {})))
            except ConfigError as e:
                raise _err(f"/family/{lab}", str(e)) from None
        params = dict(d.get("params", {}))
        rp = raw.get("params", {})
        if not isinstance(rp, Mapping):
            raise _err("/params", "expected an object")
        allowed = _PARAM_KEYS[sc]
        for key, v in rp.items():
            if key not in allowed:
                raise _err(f"/params/{key}", "unknown key")
            params[key] = v
        if "triplet" in params:
            try:
                LevyTriplet.from_config(params["triplet"])
            except (ConfigError, TypeError, AttributeError) as e:
                raise _err("/params/triplet", str(e)) from None
        return cls(sc, seed, k, N, t, samples, {k_: dict(v) for k_, v in fam.items()}, tol,
                   dict(out), params)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "seed": self.seed, "k": list(self.k),
                "N": list(self.N), "t": list(self.t), "samples": self.samples,
                "family": self.family, "tolerance": self.tolerance, "output": self.output,
                "params": self.params}

    def tolerance_for(self, stderr: float, floor: float | None = None) -> float:
        f = self.tolerance["floor"] if floor is None else floor
        s = self.tolerance["sigmas"] * stderr
        return s + f if self.tolerance["combine"] == "sum" else max(s, f)

    def spec(self, label: str, default_kind: str, N: int, stream: int, params=None) -> SampleSpec:
        entry = self.family.get(label, {"kind": default_kind, "params": params or {}})
        sub = int(sample_rng(self.seed or 0, 0x5EED, stream).integers(2 ** 62))
        return SampleSpec(entry["kind"], N, sub, dict(entry.get("params", {})))


_PARAM_KEYS = {
    "semicircle": set(),
    "unitary-bm": {"steps", "ode_tol", "beta"},
    "wick": {"ensembles", "z"},
    "free-poisson": {"triplet"},
    "freeness-scaling": {"r2_min"},
    "entries": set(),
    "classical-bridge": {"law"},
    "gaussian-approx": {"classes"},
    "strong-invariance": {"expect"},
}


# ---------------------------------------------------------------------------
# records

@dataclass(frozen=True)
class ResultRecord:
    scenario: str
    method: str
    k: int
    partition: str
    N: int | None
    t: float | None
    estimate: Any
    stderr: float
    prediction: Any
    abs_error: float
    tolerance: float
    passed: bool

    @classmethod
    def make(cls, cfg: ExperimentConfig, method, k, p, N, t, estimate, stderr, prediction,
             floor=None) -> "ResultRecord":
        err = abs(complex(estimate) - complex(prediction))
        tol = cfg.tolerance_for(stderr, floor)
        text = to_text(p) if isinstance(p, Partition) else (p or "")
        return cls(cfg.scenario, method, k, text, N, t, estimate, float(stderr), prediction,
                   float(err), float(tol), bool(err <= tol))

    def row(self) -> list[str]:
        return [self.scenario, self.method, str(self.k), self.partition,
                "" if self.N is None else str(self.N), "" if self.t is None else repr(self.t),
                _num(self.estimate), repr(self.stderr), _num(self.prediction),
                repr(self.abs_error), repr(self.tolerance), "1" if self.passed else "0"]

    def to_json(self) -> dict:
        return {"scenario": self.scenario, "method": self.method, "k": self.k,
                "partition": self.partition, "N": self.N, "t": self.t,
                "estimate": _jnum(self.estimate), "stderr": self.stderr,
                "prediction": _jnum(self.prediction), "abs_error": self.abs_error,
                "tolerance": self.tolerance, "pass": self.passed}


def _num(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    z = complex(v)
    if abs(z.imag) > 1e-12 * max(1.0, abs(z.real)):
        from .matio import format_complex
        return format_complex(z)
    return repr(float(z.real))


def _jnum(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    z = complex(v)
    if abs(z.imag) > 1e-12 * max(1.0, abs(z.real)):
        return [z.real, z.imag]
    return float(z.real)


def records_csv(records: Sequence[ResultRecord]) -> str:
    buf = io.StringIO()
    buf.write(f"# partlab results v{CSV_VERSION}: " + ",".join(COLUMNS) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def records_json(cfg: ExperimentConfig, records: Sequence[ResultRecord]) -> str:
    passed = sum(r.passed for r in records)
    doc = {"version": CSV_VERSION, "config": cfg.to_dict(),
           "records": [r.to_json() for r in records],
           "summary": {"total": len(records), "passed": passed,
                       "failed": len(records) - passed}}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# scenario helpers

def _trace_powers(M: np.ndarray, ks: Sequence[int]) -> dict[int, complex]:
    """m_(1..k) = tr(M^k)/N for each k."""
    N = M.shape[0]
    out, P, last = {}, np.eye(N, dtype=M.dtype), 0
    for k in sorted(set(ks)):
        for _ in range(k - last):
            P = P @ M
        last = k
        out[k] = np.trace(P) / N
    return out


def _moment_estimates(values: Mapping[int, list]):
    return {k: Estimate.of(np.array(v)) for k, v in values.items()}


def wick_deviation(ensemble: str, N: int, k: int, samples: int, seed: int, chunk: int = 2000
                   ) -> tuple[float, float, float]:
    """Largest |MC mean - Wick prediction| / stderr over the entries of E[M^(x)k].

    Returns (max z, deviation at that entry, its stderr).  M^(x)k is built as
    y y^T with y = vec(M^(x)k/2), so only N^k-dimensional vectors are stored.
    """
    if k % 2:
        raise ConfigError("the Wick check needs an even k")
    eps, beta = {"gue": (1, 2), "goe": (1, 1), "antisym-gaussian": (-1, 1)}[ensemble]
    spec = SampleSpec(ensemble, N, seed)
    h = k // 2
    dim = N ** k
    S = np.zeros((dim, dim), dtype=complex if beta == 2 else float)
    S2 = np.zeros((dim, dim))
    for start in range(0, samples, chunk):
        rows = []
        for s in range(start, min(samples, start + chunk)):
            M = spec.sample(s)
            Y = M
            for _ in range(h - 1):
                Y = np.kron(Y, M)
            rows.append(Y.ravel())
        Y = np.array(rows)
        S += Y.T @ Y
        A = np.abs(Y) ** 2
        S2 += A.T @ A
    mean, sq = S / samples, S2 / samples
    err = np.sqrt(np.maximum(sq - np.abs(mean) ** 2, 0.0) / max(samples - 1, 1))
    # (r_1..r_h, c_1..c_h) x (r_h+1.., c_h+1..) -> (r_1..r_k), (c_1..c_k)
    shape = [N] * (2 * k)
    order = list(range(h)) + list(range(2 * h, 3 * h)) + list(range(h, 2 * h)) + \
        list(range(3 * h, 4 * h))
    mean = mean.reshape(shape).transpose(order).reshape(dim, dim)
    err = err.reshape(shape).transpose(order).reshape(dim, dim)
    wt = wick_tensor(k, eps, beta, N=N)
    pred = synthesize({p: c / Fraction(N) ** h for p, c in wt.terms.items()}, N).astype(complex) \
        if wt.terms else np.zeros((dim, dim))
    dev = np.abs(mean - pred)
    z = np.where(err > 0, dev / np.where(err > 0, err, 1), np.where(dev > 1e-12, np.inf, 0.0))
    i = np.unravel_index(np.argmax(z), z.shape)
    return float(z[i]), float(dev[i]), float(err[i])


def _halfhalf(N: int) -> np.ndarray:
    return np.diag([0.0] * (N // 2) + [1.0] * (N - N // 2))


def gue_diag_traces(N: int, word: Sequence[str], tag: str) -> dict:
    """Exact E t_q for a = normalized GUE and b = diag(0..0, 1..1) along ``word``.

    The Gaussian expectation pairs the a positions by Wick's formula,
    E[a_{x'x} a_{y'y}] = delta_{x'y} delta_{xy'} / N, which merges blocks of q;
    the remaining block sum involves b only and is an integer.
    """
    k = len(word)
    b = _halfhalf(N)
    ones = np.ones((N, N))
    apos = [i for i, x in enumerate(word) if x == "a"]
    rest = [(c + 1,) for c in range(k) if c not in apos] + \
        [(-(c + 1),) for c in range(k) if c not in apos]
    mats = [ones if x == "a" else b for x in word]
    out = {}
    for q in enumerate_family(k, tag):
        total = Fraction(0)
        for m in _matchings(apos):
            blocks = []
            for i, j in m:
                blocks += [(i + 1, -(j + 1)), (j + 1, -(i + 1))]
            pi = Partition.from_blocks(blocks + rest, k)
            total += Fraction(int(round(block_sum(mats, join(q, pi))))) / N ** len(m)
        out[q] = total
    return out


def _linking(p: Partition, word: Sequence[str], first: str = "a") -> bool:
    order = sorted(range(len(word)), key=lambda i: (word[i] != first, i))
    q = conjugate(p, [order.index(i) for i in range(len(word))])
    k1 = sum(1 for x in word if x == first)
    left = list(range(1, k1 + 1))
    right = list(range(k1 + 1, len(word) + 1))
    return tensor(restrict_columns(q, left), restrict_columns(q, right)) != q


def freeness_scaling_data(Ns: Sequence[int], samples: int, seed: int, tag: str = "S",
                          word=("a", "b", "a", "b")) -> list[dict]:
    """Mixed cumulants of a normalized GUE a and a permutation-conjugated b = diag(0.., 1..).

    Per N: the exact expected mixed cumulants (largest magnitude over
    partitions linking the two letters) and the root mean square over samples
    of the per-sample mixed cumulants (largest over the same partitions).
    """
    out = []
    k = len(word)
    for N in Ns:
        exact = cumulants_from_traces(gue_diag_traces(N, word, tag), k, tag, N)
        linking = [p for p in exact if _linking(p, word)]
        fam = MatrixFamily({
            "a": SampleSpec("gue", N, int(sample_rng(seed, N, 1).integers(2 ** 62))),
            "b": SampleSpec("const:halfhalf", N, int(sample_rng(seed, N, 2).integers(2 ** 62)),
                            {"conjugate": "S"})})
        mc = finite_cumulants(fam, k, tag, word=word, mode="mc", samples=samples)
        rms = {p: math.sqrt(mc[p].total_sq / mc[p].n) for p in linking}
        worst = max(linking, key=lambda p: rms[p])
        out.append({"N": N, "exact_max": max(abs(exact[p]) for p in linking),
                    "rms_max": rms[worst], "rms_partition": worst,
                    "mean": mc[worst].mean, "stderr": mc[worst].stderr})
    return out


def inverse_fit(Ns: Sequence[int], values: Sequence[float]) -> tuple[float, float]:
    """Least squares fit values ~ C/N; returns (C, R^2)."""
    x = 1.0 / np.asarray(Ns, dtype=float)
    y = np.asarray(values, dtype=float)
    C = float(x @ y / (x @ x))
    ss_res = float(((y - C * x) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return C, (1.0 - ss_res / ss_tot) if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)


# ---------------------------------------------------------------------------
# scenarios

def _semicircle(cfg: ExperimentConfig) -> list[ResultRecord]:
    recs = []
    for N in cfg.N:
        spec = cfg.spec("a", "gue", N, N)
        vals = {k: [] for k in cfg.k}
        for s in range(cfg.samples):
            for k, v in _trace_powers(spec.sample(s), cfg.k).items():
                vals[k].append(v)
        for k, e in _moment_estimates(vals).items():
            recs.append(ResultRecord.make(cfg, "mc", k, cycle(k), N, None, _real(e.mean),
                                          e.stderr, reference_moments("semicircle", k)))
    return recs


def _real(z):
    z = complex(z)
    return z.real if abs(z.imag) <= 1e-12 * max(1.0, abs(z.real)) else z


def _unitary(cfg: ExperimentConfig) -> list[ResultRecord]:
    recs = []
    beta = int(cfg.params.get("beta", 2))
    phi = generator_spectral_form("bm-unitary", {"beta": beta})
    ts = sorted(cfg.t)
    for k in cfg.k:
        ev = boxtimes_evolution(phi, k, ts, start=[cycle(k)])
        for t in ts:
            recs.append(ResultRecord.make(cfg, "ode", k, cycle(k), None, t,
                                          _real(ev[(t, cycle(k))]), 0.0,
                                          reference_moments("unitary-bm", k, t),
                                          floor=float(cfg.params["ode_tol"])))
    if cfg.samples and beta == 2:
        steps = int(cfg.params["steps"])
        for N in cfg.N:
            spec = cfg.spec("u", "bm-unitary", N, N, {"t": max(ts), "steps": steps})
            vals = {(k, t): [] for k in cfg.k for t in ts}
            for s in range(cfg.samples):
                path = unitary_bm_path(N, ts, steps, spec.rng(s))
                for t, U in zip(ts, path):
                    lam = np.linalg.eigvals(U)
                    for k in cfg.k:
                        vals[(k, t)].append(np.mean(lam ** k))
            for (k, t), v in sorted(vals.items()):
                e = Estimate.of(np.array(v))
                recs.append(ResultRecord.make(cfg, "mc", k, cycle(k), N, t, _real(e.mean),
                                              e.stderr, reference_moments("unitary-bm", k, t)))
    return recs


def _wick(cfg: ExperimentConfig) -> list[ResultRecord]:
    recs = []
    for i, ens in enumerate(cfg.params["ensembles"]):
        if ens not in ("gue", "goe", "antisym-gaussian"):
            raise _err(f"/params/ensembles/{i}", f"unsupported ensemble {ens!r}")
        for N in cfg.N:
            for k in cfg.k:
                seed = int(sample_rng(cfg.seed, i, N, k).integers(2 ** 62))
                z, dev, err = wick_deviation(ens, N, k, cfg.samples, seed)
                recs.append(ResultRecord.make(cfg, f"max-z:{ens}", k, "", N, None, z, 0.0, 0.0,
                                              floor=float(cfg.params["z"])))
    return recs


def _free_poisson(cfg: ExperimentConfig) -> list[ResultRecord]:
    trip = LevyTriplet.from_config(cfg.params["triplet"])
    phi = generator_spectral_form("levy-additive", {"triplet": trip})
    recs = []
    for t in cfg.t:
        preds = {k: exp_boxplus_moment(phi, t, cycle(k)) for k in cfg.k}
        simple = trip.atoms == ((1.0, 1.0),) and trip.drift == 1 and trip.diffusion == 0
        if simple:
            for k in cfg.k:
                recs.append(ResultRecord.make(cfg, "exact", k, cycle(k), None, t, preds[k], 0.0,
                                              reference_moments("free-poisson", k, lam=Fraction(t)
                                                                if float(t).is_integer() else t),
                                              floor=1e-12))
        if cfg.samples:
            for N in cfg.N:
                spec = cfg.spec("x", "levy-additive", N, N,
                                {"triplet": cfg.params["triplet"], "t": t})
                vals = {k: [] for k in cfg.k}
                for s in range(cfg.samples):
                    for k, v in _trace_powers(spec.sample(s), cfg.k).items():
                        vals[k].append(v)
                for k, e in _moment_estimates(vals).items():
                    recs.append(ResultRecord.make(cfg, "mc", k, cycle(k), N, t, _real(e.mean),
                                                  e.stderr, preds[k]))
    return recs


def _freeness(cfg: ExperimentConfig) -> list[ResultRecord]:
    data = freeness_scaling_data(cfg.N, cfg.samples, cfg.seed)
    recs = []
    for d in data:
        recs.append(ResultRecord.make(cfg, "exact-mean", 4, "", d["N"], None,
                                      float(d["exact_max"]), 0.0, 0.0, floor=0.0))
        recs.append(ResultRecord.make(cfg, "mc-mean", 4, d["rms_partition"], d["N"], None,
                                      _real(d["mean"]), d["stderr"], 0.0, floor=0.0))
    rms = [d["rms_max"] for d in data]
    C, r2 = inverse_fit(cfg.N, rms)
    bad = sum(1 for a, b in zip(rms, rms[1:]) if b >= a)
    recs.append(ResultRecord.make(cfg, "monotone-violations", 4, "", None, None, bad, 0.0, 0,
                                  floor=0.0))
    for d in data:
        recs.append(ResultRecord.make(cfg, "rms-vs-C/N", 4, "", d["N"], None, d["rms_max"], 0.0,
                                      C / d["N"], floor=0.5 * C / d["N"]))
    recs.append(ResultRecord.make(cfg, "fit-r2", 4, "", None, None, r2, 0.0, 1.0,
                                  floor=1.0 - float(cfg.params["r2_min"])))
    return recs


def _entries(cfg: ExperimentConfig) -> list[ResultRecord]:
    recs = []
    for N in cfg.N:
        J = np.full((N, N), Fraction(1, N), dtype=object)
        kap = finite_cumulants(J, 1, "P")
        pred = entry_moment_prediction(kap, "P", (1, 1), N)
        recs.append(ResultRecord.make(cfg, "exact:J", 1, "", N, None, J[0, 0], 0.0, pred,
                                      floor=0.0))
    if cfg.samples:
        for N in cfg.N:
            spec = cfg.spec("m", "const:halfhalf", N, N, {"conjugate": "U"})
            vals = [entry_product([M, M], (1, 1, 2, 1))
                    for M in (spec.sample(s) for s in range(cfg.samples))]
            e = Estimate.of(np.array(vals))
            recs.append(ResultRecord.make(cfg, "mc:M11M12", 2, "", N, None, _real(e.mean),
                                          e.stderr, 0.0, floor=0.0))
    return recs


def _bridge(cfg: ExperimentConfig) -> list[ResultRecord]:
    law = cfg.params["law"]
    kmax = max(cfg.k)
    mom = law_moments(law, kmax)
    cums = classical_cumulants(mom, kmax)
    recs = []
    for l in cfg.N:
        for k in cfg.k:
            if l < k:
                continue
            zero_k = Partition(k, [0] * (2 * k))
            v = classical_bridge(mom, k, l)
            recs.append(ResultRecord.make(cfg, "exact", k, zero_k, l, None, v, 0.0, cums[k - 1],
                                          floor=0.0))
            if cfg.samples:
                seed = int(sample_rng(cfg.seed, l, k).integers(2 ** 62))
                e = classical_bridge(mom, k, l, mode="mc", samples=cfg.samples, seed=seed, law=law)
                recs.append(ResultRecord.make(cfg, "mc", k, zero_k, l, None, _real(e.mean),
                                              e.stderr, cums[k - 1]))
    return recs


def _approx(cfg: ExperimentConfig) -> list[ResultRecord]:
    classes = approximant_classes()
    names = cfg.params.get("classes") or list(classes)
    recs = []
    basis = enumerate_family(2, "P")
    for name in names:
        if name not in classes:
            raise _err("/params/classes", f"unknown class {name!r}")
        rep = classes[name]
        for N in cfg.N:
            T = approximant_second_moment(name, N)
            kap = cumulants_from_traces(traces_from_tensor(T, basis, N), 2, "P", N, exact=False)
            own = max((kap[p] for p in basis if orbit_rep(p) == rep), key=lambda v: abs(v))
            other = max((abs(kap[p]) for p in basis if orbit_rep(p) != rep), default=0.0)
            recs.append(ResultRecord.make(cfg, f"exact:{name}", 2, rep, N, None, _real(own),
                                          0.0, 1.0))
            recs.append(ResultRecord.make(cfg, f"exact-others:{name}", 2, "", N, None, other,
                                          0.0, 0.0))
            if cfg.samples:
                spec = cfg.spec(name, f"gaussian-approx:{name}", N, N)
                mc = finite_cumulants(MatrixFamily({"h": spec}), 2, "P", mode="mc",
                                      samples=cfg.samples)
                e = mc[rep]
                recs.append(ResultRecord.make(cfg, f"mc:{name}", 2, rep, N, None, _real(e.mean),
                                              e.stderr, 1.0, floor=0.05))
    return recs


def _strong(cfg: ExperimentConfig) -> list[ResultRecord]:
    expect = {Partition.parse(s) if isinstance(s, str) else s: v
              for s, v in cfg.params.get("expect", {}).items()}
    recs = []
    for N in cfg.N:
        spec = cfg.spec("a", "haar:U", N, N)
        for k in cfg.k:
            res = strong_invariance_diagnostic(spec, k, samples=cfg.samples, with_stderr=True)
            for p, (v, e) in res.items():
                recs.append(ResultRecord.make(cfg, "diagnostic", k, p, N, None, v, e,
                                              expect.get(p, 0.0)))
    return recs


_RUNNERS = {"semicircle": _semicircle, "unitary-bm": _unitary, "wick": _wick,
            "free-poisson": _free_poisson, "freeness-scaling": _freeness, "entries": _entries,
            "classical-bridge": _bridge, "gaussian-approx": _approx,
            "strong-invariance": _strong}


def run_experiment(config, out_dir=None) -> list[ResultRecord]:
    """Run one scenario; with ``out_dir`` also write its CSV and JSON reports."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    records = _RUNNERS[cfg.scenario](cfg)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / cfg.output.get("csv", f"{cfg.scenario}.csv")).write_text(records_csv(records))
        (out / cfg.output.get("json", f"{cfg.scenario}.json")).write_text(
            records_json(cfg, records))
    return records
