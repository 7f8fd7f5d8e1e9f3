"""Labeled multilinear tables: moments, cumulants, exclusive moments and
graded spectral forms.

A table maps (p, word) to a value, where ``word`` lists one label per column
of p.  Entries are stored under the joint orbit key of (p, word) under column
relabelling, so the permutation covariance

    m_p(a_1, ..., a_k) = m_{s p s^-1}(a_{s^-1(1)}, ..., a_{s^-1(k)})

holds by construction.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import MissingEntryError
from .partition import FAMILIES, Partition, in_family, orbit_key, orbit_rep


def format_value(v) -> str:
    """Exact values as "num/den", floats in repr form."""
    if isinstance(v, int) and not isinstance(v, bool):
        v = Fraction(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, complex):
        return repr(v)
    return repr(float(v))


def parse_value(s: str):
    s = s.strip()
    if "j" in s:
        return complex(s)
    try:
        return Fraction(s)
    except ValueError:
        return float(s)


class Table:
    """Mapping (partition, word) -> value with orbit-canonical keys.

    ``kind`` is ``"moment"``, ``"cumulant"`` or ``"exclusive"``; ``tag`` the
    partition family the table lives on.
    """

    kind = "moment"

    def __init__(self, entries: Mapping | Iterable = (), tag: str = "P"):
        if tag not in FAMILIES:
            raise ValueError(f"unknown family tag {tag!r}")
        self.tag = tag
        self._data: dict[tuple[Partition, tuple], object] = {}
        self._keycache: dict = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for (p, word), v in items:
            self.set(p, word, v)

    # keys ------------------------------------------------------------------
    def key(self, p: Partition, word: Sequence) -> tuple[Partition, tuple]:
        word = tuple(word)
        if len(word) != p.k:
            raise ValueError(f"word of length {len(word)} for a partition with k={p.k}")
        ck = (p, word)
        got = self._keycache.get(ck)
        if got is None:
            got = orbit_key(p, word)
            self._keycache[ck] = got
        return got

    def set(self, p: Partition, word: Sequence, value) -> None:
        if not in_family(p, self.tag):
            raise ValueError(f"{p} is not in the family {self.tag}")
        self._data[self.key(p, word)] = value

    def get(self, p: Partition, word: Sequence, default=None):
        if p.k == 0:
            return Fraction(1)
        got = self._data.get(self.key(p, word))
        if got is None:
            if default is not None:
                return default
            raise MissingEntryError(f"no {self.kind} entry for {p} on word {tuple(word)}")
        return got

    def __contains__(self, key) -> bool:
        p, word = key
        return p.k == 0 or self.key(p, word) in self._data

    def __getitem__(self, key):
        return self.get(*key)

    def __setitem__(self, key, value):
        self.set(key[0], key[1], value)

    def __len__(self) -> int:
        return len(self._data)

    def items(self) -> Iterator[tuple[tuple[Partition, tuple], object]]:
        return iter(sorted(self._data.items(), key=lambda kv: (kv[0][0].k, kv[0][0].labels,
                                                                 tuple(map(str, kv[0][1])))))

    def keys(self):
        return [k for k, _ in self.items()]

    @property
    def degrees(self) -> list[int]:
        return sorted({p.k for p, _ in self._data})

    @property
    def labels(self) -> list:
        return sorted({x for _, w in self._data for x in w}, key=str)

    def words(self, k: int) -> list[tuple]:
        """Sorted words of length k present in the table, one per multiset."""
        return sorted({tuple(sorted(w, key=str)) for p, w in self._data if p.k == k},
                      key=lambda w: tuple(map(str, w)))

    def scalar(self, p: Partition):
        """Value on the constant word of a single-label table."""
        labs = self.labels
        if len(labs) != 1:
            raise ValueError("scalar access needs a table with exactly one label")
        return self.get(p, (labs[0],) * p.k)

    def copy(self, cls=None, tag=None) -> "Table":
        out = (cls or type(self))(tag=tag or self.tag)
        out._data = dict(self._data)
        return out

    def __eq__(self, other):
        if not isinstance(other, Table):
            return NotImplemented
        return self.kind == other.kind and self.tag == other.tag and self._data == other._data

    def __repr__(self):
        return f"{type(self).__name__}(tag={self.tag}, entries={len(self)})"

    # serialization ----------------------------------------------------------
    def to_records(self) -> list[dict]:
        return [{"k": p.k, "partition": str(p), "word": [str(x) for x in w],
                 "value": format_value(v)} for (p, w), v in self.items()]

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "tag": self.tag, "entries": self.to_records()},
                          indent=1)

    @classmethod
    def from_records(cls, records: Iterable[Mapping], tag: str = "P") -> "Table":
        out = cls(tag=tag)
        for r in records:
            p = Partition.parse(r["partition"])
            if "k" in r and int(r["k"]) != p.k:
                raise ValueError(f"record k={r['k']} disagrees with partition {r['partition']}")
            out.set(p, tuple(r["word"]), parse_value(str(r["value"])))
        return out

    @staticmethod
    def from_json(text: str) -> "Table":
        doc = json.loads(text)
        if isinstance(doc, list):
            doc = {"kind": "moment", "tag": "P", "entries": doc}
        kind = doc.get("kind", "moment")
        cls = {"moment": MomentTable, "cumulant": CumulantTable,
               "exclusive": ExclusiveTable}[kind]
        return cls.from_records(doc["entries"], tag=doc.get("tag", "P"))


class MomentTable(Table):
    kind = "moment"


class CumulantTable(Table):
    kind = "cumulant"


class ExclusiveTable(Table):
    kind = "exclusive"


def single(values: Mapping[Partition, object], label="a", cls=MomentTable, tag: str = "P"
           ) -> Table:
    """Table for one element from a mapping partition -> value."""
    t = cls(tag=tag)
    for p, v in values.items():
        t.set(p, (label,) * p.k, v)
    return t


class SpectralForm:
    """Graded linear form on conjugacy classes of partitions.

    Values live on orbit representatives.  Classes absent from ``values`` are
    filled by ``rule`` when given, otherwise they are zero; a spectral form
    never raises on a missing class.  ``support(k)``, when given, lists class
    representatives outside of which the grade-k values vanish, which lets
    evolutions run beyond the P enumeration cap.
    """

    def __init__(self, values: Mapping[Partition, object] | None = None,
                 rule: Callable[[Partition], object] | None = None,
                 is_character: bool = False, is_infinitesimal_character: bool = False,
                 name: str = "", support: Callable[[int], list] | None = None):
        self.values = {}
        self.support = support
        for p, v in (values or {}).items():
            self.values[orbit_rep(p)] = v
        self.rule = rule
        self.is_character = is_character
        self.is_infinitesimal_character = is_infinitesimal_character
        self.name = name

    def __call__(self, p: Partition):
        if p.k == 0:
            return Fraction(int(self.is_character))
        rep = orbit_rep(p)
        if rep in self.values:
            return self.values[rep]
        if self.rule is not None:
            return self.rule(rep)
        return Fraction(0)

    def grade(self, k: int, tag: str = "P") -> dict[Partition, object]:
        """Nonzero values on the classes of A_k."""
        from .partition import enumerate_family
        out = {}
        for p in enumerate_family(k, tag):
            rep = orbit_rep(p)
            if rep not in out:
                v = self(rep)
                if v != 0:
                    out[rep] = v
        return out

    def support_violations(self, k: int, predicate: Callable[[Partition], bool]
                           ) -> list[Partition]:
        return [p for p, v in self.grade(k).items() if v != 0 and not predicate(p)]

    def __repr__(self):
        return f"SpectralForm({self.name or len(self.values)})"


def spectral_from_table(table: Table, kmax: int | None = None) -> SpectralForm:
    """R-transform style form p -> table.scalar(p) of a single-label table."""
    vals = {}
    labs = table.labels
    for (p, w), v in table.items():
        if kmax is not None and p.k > kmax:
            continue
        if len(labs) == 1:
            vals[p] = v
    return SpectralForm(vals)
