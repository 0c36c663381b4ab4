"""Core sequence types: alphabets, symbol sequences, frequency tables.

Numeric series are plain 1-D ``float64`` numpy arrays; :func:`as_series`
validates them. Symbols are interned to integer ids once, and everything
downstream works on ids.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_series(values, *, name: str = "series") -> np.ndarray:
    """Return ``values`` as a finite 1-D float64 array (read-only copy if needed)."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise ValueError(f"{name} contains a non-finite value at index {bad}")
    return x


@dataclass(frozen=True, eq=False)
class Alphabet:
    """Ordered set of distinct symbol labels."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not symbols:
            raise ValueError("alphabet must contain at least one symbol")
        index = {s: i for i, s in enumerate(symbols)}
        if len(index) != len(symbols):
            seen = set()
            dup = next(s for s in symbols if s in seen or seen.add(s))
            raise ValueError(f"duplicate symbol in alphabet: {dup!r}")
        object.__setattr__(self, "_index", index)

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, label) -> bool:
        return label in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"symbol not in alphabet: {label!r}") from None


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """A token stream stored as integer ids into an :class:`Alphabet`."""

    alphabet: Alphabet
    ids: np.ndarray

    def __post_init__(self):
        ids = np.array(self.ids, dtype=np.int64, copy=True).reshape(-1)
        if ids.size and (ids.min() < 0 or ids.max() >= self.alphabet.size):
            raise ValueError("symbol id out of range for alphabet")
        object.__setattr__(self, "ids", _frozen(ids))

    @classmethod
    def _trusted(cls, alphabet: Alphabet, ids: np.ndarray) -> SymbolSequence:
        # adopt a freshly built, already valid int64 array without copying
        obj = object.__new__(cls)
        object.__setattr__(obj, "alphabet", alphabet)
        object.__setattr__(obj, "ids", _frozen(ids))
        return obj

    @classmethod
    def from_labels(cls, labels: Iterable[str], alphabet: Alphabet | None = None) -> SymbolSequence:
        """Intern ``labels``. Without an explicit alphabet, symbols are ordered by first occurrence.

        An empty input with no alphabet gets a one-symbol placeholder alphabet
        ``("",)`` since alphabets cannot be empty.
        """
        labels = list(labels)
        if alphabet is None:
            index: dict[str, int] = {}
            ids = [index.setdefault(w, len(index)) for w in labels]
            alphabet = Alphabet(tuple(index) or ("",))
        else:
            lookup = alphabet._index
            try:
                ids = [lookup[w] for w in labels]
            except KeyError as e:
                raise KeyError(f"symbol not in alphabet: {e.args[0]!r}") from None
        return cls(alphabet, np.fromiter(ids, dtype=np.int64, count=len(ids)))

    def __len__(self) -> int:
        return int(self.ids.size)

    def labels(self) -> list[str]:
        syms = self.alphabet.symbols
        return [syms[i] for i in self.ids.tolist()]

    def counts(self) -> np.ndarray:
        """Occurrences of each alphabet symbol, indexed like the alphabet."""
        return np.bincount(self.ids, minlength=self.alphabet.size).astype(np.int64)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SymbolSequence)
            and self.alphabet == other.alphabet
            and np.array_equal(self.ids, other.ids)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class FrequencyTable:
    """Vocabulary in Zipf order: ``alphabet.symbols[r - 1]`` has rank ``r``.

    ``counts`` is non-increasing, every entry is at least 1, and the entries
    sum to ``total``.
    """

    alphabet: Alphabet
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True).reshape(-1)
        if counts.size != self.alphabet.size:
            raise ValueError("counts and alphabet differ in length")
        if counts.min() < 1:
            raise ValueError("every count must be >= 1")
        if np.any(np.diff(counts) > 0):
            raise ValueError("counts must be sorted non-increasing")
        object.__setattr__(self, "counts", _frozen(counts))

    @classmethod
    def from_counts(cls, symbols: Sequence[str], counts: Sequence[int]) -> FrequencyTable:
        """Build a table from unsorted (symbol, count) pairs; ties keep the given order."""
        counts = np.asarray(counts, dtype=np.int64)
        order = np.argsort(-counts, kind="stable")
        return cls(Alphabet(tuple(symbols[i] for i in order)), counts[order])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def size(self) -> int:
        return self.alphabet.size

    def frequencies(self) -> np.ndarray:
        return self.counts / self.total

    def rank_of(self, label: str) -> int:
        return self.alphabet.index(label) + 1

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FrequencyTable)
            and self.alphabet == other.alphabet
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None


def build_frequency_table(seq: SymbolSequence) -> FrequencyTable:
    """Count symbols and order them by descending frequency.

    Ties are broken by first occurrence in ``seq``, then lexicographically
    (the latter only matters for symbols that never occur, which are dropped
    anyway). Symbols with zero count are excluded.
    """
    if len(seq) == 0:
        raise ValueError("empty input")
    counts = seq.counts()
    present = np.flatnonzero(counts)
    # position of the first occurrence of each present symbol
    first = np.full(seq.alphabet.size, len(seq), dtype=np.int64)
    uniq, first_idx = np.unique(seq.ids, return_index=True)
    first[uniq] = first_idx
    order = present[np.lexsort((first[present], -counts[present]))]
    syms = seq.alphabet.symbols
    return FrequencyTable(Alphabet(tuple(syms[i] for i in order)), counts[order])


def rank_ids(seq: SymbolSequence, table: FrequencyTable) -> np.ndarray:
    """Zero-based Zipf rank of every token of ``seq`` under ``table``."""
    if seq.alphabet == table.alphabet:
        return np.asarray(seq.ids)
    used = np.flatnonzero(seq.counts())
    remap = np.zeros(seq.alphabet.size, dtype=np.int64)
    syms = seq.alphabet.symbols
    for i in used.tolist():
        label = syms[i]
        if label not in table.alphabet:
            raise KeyError(f"symbol not in frequency table: {label!r}")
        remap[i] = table.alphabet.index(label)
    return remap[seq.ids]


def zipf_rank_encode(seq: SymbolSequence, table: FrequencyTable) -> np.ndarray:
    """Replace every token by its rank (1 = most frequent), as float64."""
    return (rank_ids(seq, table) + 1).astype(np.float64)


def zipf_rank_decode(ranks, table: FrequencyTable) -> SymbolSequence:
    """Inverse of :func:`zipf_rank_encode`; the result uses ``table.alphabet``."""
    r = np.asarray(ranks)
    ids = np.rint(r).astype(np.int64) - 1
    if ids.size and (ids.min() < 0 or ids.max() >= table.size or np.any(ids + 1 != r)):
        raise ValueError(f"ranks must be integers in [1, {table.size}]")
    return SymbolSequence(table.alphabet, ids)


def zipf_table(size: int, total: int, gamma: float = 1.0, prefix: str = "w") -> FrequencyTable:
    """Synthetic table with counts close to ``total * r**-gamma / H`` and every count >= 1.

    Rounding leftovers go to the symbols with the largest fractional parts
    (ties to the better rank), so the counts sum to ``total`` exactly.
    """
    if size < 1 or total < size:
        raise ValueError("need 1 <= size <= total")
    w = np.arange(1, size + 1, dtype=np.float64) ** -gamma
    spare = total - size
    ideal = spare * w / w.sum()
    counts = 1 + np.floor(ideal).astype(np.int64)
    left = total - int(counts.sum())
    if left:
        frac = ideal - np.floor(ideal)
        counts[np.argsort(-frac, kind="stable")[:left]] += 1
    counts = np.sort(counts)[::-1]
    width = len(str(size))
    return FrequencyTable(Alphabet(tuple(f"{prefix}{i:0{width}d}" for i in range(1, size + 1))), counts)
