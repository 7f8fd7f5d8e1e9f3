"""Invariance diagnostics computed from Monte Carlo entry moments."""

from __future__ import annotations

import itertools
import string
from typing import Sequence

import numpy as np

from .errors import BudgetError
from .matrices import MatrixFamily, _as_family
from .partition import Partition, kernel
from .sampling import SampleSpec

MAX_TUPLES = 1 << 16


def _entry_tensor(ms: Sequence[np.ndarray]) -> np.ndarray:
    """L[i_1, i_1', ..., i_k, i_k'] = prod_j (M_j)[i_j', i_j]."""
    letters = string.ascii_letters
    ops = [letters[2 * j + 1] + letters[2 * j] for j in range(len(ms))]
    return np.einsum(",".join(ops) + "->" + letters[:2 * len(ms)], *ms)


def strong_invariance_diagnostic(spec, k: int, word=None, samples: int = 100, seed=None,
                                 with_stderr: bool = False) -> dict:
    """Per kernel class p: N^(nc - cycles) * max |E[L_I] - E[L_I']| over tuples with kernel p.

    ``spec`` is a SampleSpec (reseeded with ``seed`` when given), a
    MatrixFamily or a fixed matrix.  With ``with_stderr`` each value comes
    with the largest standard error among the tuples of its class.
    """
    if isinstance(spec, SampleSpec):
        if seed is not None:
            spec = SampleSpec(spec.kind, spec.N, int(seed), spec.params)
        fam = MatrixFamily({"a": spec})
    else:
        fam = _as_family(spec)
    N = fam.N
    if N ** (2 * k) > MAX_TUPLES:
        raise BudgetError(f"N^(2k) = {N ** (2 * k)} index tuples exceed {MAX_TUPLES}")
    word = tuple(word) if word is not None else (next(iter(fam.members)),) * k
    n = 1 if fam.deterministic else samples
    tot = tot_sq = 0
    for s in range(n):
        mats = fam.draw(s)
        L = _entry_tensor([np.asarray(mats[x], dtype=complex) for x in word]).ravel()
        tot = tot + L
        tot_sq = tot_sq + np.abs(L) ** 2
    mean = tot / n
    var = np.maximum((tot_sq - np.abs(tot) ** 2 / n) / max(n - 1, 1), 0.0) if n > 1 else 0 * tot_sq
    err = np.sqrt(var / n)
    classes: dict[Partition, list[int]] = {}
    for flat, idx in enumerate(itertools.product(range(N), repeat=2 * k)):
        classes.setdefault(kernel([i + 1 for i in idx]), []).append(flat)
    out = {}
    for p, members in sorted(classes.items(), key=lambda x: x[0].labels):
        v = mean[members]
        spread = float(np.abs(v[:, None] - v[None, :]).max()) if len(v) > 1 else 0.0
        val = float(N) ** (p.nc - p.cycles) * spread
        out[p] = (val, float(N) ** (p.nc - p.cycles) * float(err[members].max())) \
            if with_stderr else val
    return out
