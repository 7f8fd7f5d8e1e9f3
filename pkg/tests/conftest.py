"""Shared brute-force oracles, written independently of the package internals."""

import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def set_partitions(items):
    """All set partitions of a list, as lists of lists (recursive oracle)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def points(k):
    return [x for c in range(1, k + 1) for x in (c, -c)]


def bell(n):
    b = [1]
    for m in range(n):
        b.append(sum(comb(m, j) * b[j] for j in range(m + 1)))
    return b[n]


def dense_rho(blocks, k, N):
    """Matrix of rho_N(p) by looping over all index tuples (rows = outputs)."""
    dim = N ** k
    R = np.zeros((dim, dim), dtype=np.int64)
    where = {}
    for b, blk in enumerate(blocks):
        for x in blk:
            where[x] = b
    for out in itertools.product(range(N), repeat=k):
        for inp in itertools.product(range(N), repeat=k):
            val = {}
            ok = True
            for c in range(k):
                for x, v in ((c + 1, inp[c]), (-(c + 1), out[c])):
                    b = where[x]
                    if val.setdefault(b, v) != v:
                        ok = False
            if ok:
                r = int(np.ravel_multi_index(out, (N,) * k)) if k else 0
                s = int(np.ravel_multi_index(inp, (N,) * k)) if k else 0
                R[r, s] = 1
    return R


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
