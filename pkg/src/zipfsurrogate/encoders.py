"""Turn raw text and FASTA files into symbol sequences and numeric series."""

from __future__ import annotations

import enum
import io
import unicodedata
from dataclasses import dataclass
from typing import BinaryIO, NamedTuple

import numpy as np

from .seqmodel import Alphabet, SymbolSequence

DNA_ALPHABET = Alphabet(("A", "C", "G", "T"))


class PunctuationMode(str, enum.Enum):
    STRIP = "strip"
    AS_TOKENS = "as_tokens"


class NonAcgtPolicy(str, enum.Enum):
    SKIP = "skip"
    FAIL = "fail"


@dataclass(frozen=True)
class TokenizerOptions:
    lowercase: bool = True
    punctuation_mode: PunctuationMode = PunctuationMode.STRIP

    def __post_init__(self):
        object.__setattr__(self, "punctuation_mode", PunctuationMode(self.punctuation_mode))


@dataclass(frozen=True)
class DnaEncodeOptions:
    non_acgt_policy: NonAcgtPolicy = NonAcgtPolicy.SKIP

    def __post_init__(self):
        object.__setattr__(self, "non_acgt_policy", NonAcgtPolicy(self.non_acgt_policy))


class FastaParseError(ValueError):
    pass


def decode_utf8(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ValueError(f"invalid UTF-8 at byte offset {e.start}") from None


def is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _split_word(raw: str, as_tokens: bool) -> list[str]:
    start, end = 0, len(raw)
    while start < end and is_punct(raw[start]):
        start += 1
    while end > start and is_punct(raw[end - 1]):
        end -= 1
    core = raw[start:end]
    if not as_tokens:
        return [core] if core else []
    return list(raw[:start]) + ([core] if core else []) + list(raw[end:])


def tokenize_words(text: str | bytes, opts: TokenizerOptions | None = None) -> list[str]:
    """Split ``text`` on whitespace, handling edge punctuation per ``opts``.

    Punctuation means any character in a Unicode ``P*`` category. Only
    leading and trailing marks are touched, so ``well-known`` and ``don't``
    stay single tokens. In ``as_tokens`` mode each stripped mark becomes a
    token of its own.
    """
    opts = opts or TokenizerOptions()
    if isinstance(text, (bytes, bytearray)):
        text = decode_utf8(bytes(text))
    if opts.lowercase:
        text = text.lower()
    as_tokens = opts.punctuation_mode is PunctuationMode.AS_TOKENS
    out: list[str] = []
    for raw in text.split():
        out.extend(_split_word(raw, as_tokens))
    return out


def tokenize(text: str | bytes, opts: TokenizerOptions | None = None) -> SymbolSequence:
    return SymbolSequence.from_labels(tokenize_words(text, opts))


class FastaResult(NamedTuple):
    sequence: SymbolSequence
    skipped: int


# byte -> base id 0..3; 4 marks anything else (whitespace is removed before lookup)
_BASE_LUT = np.full(256, 4, dtype=np.int8)
for _i, _b in enumerate(b"ACGT"):
    _BASE_LUT[_b] = _i
    _BASE_LUT[_b + 32] = _i


def parse_fasta(
    stream: BinaryIO | bytes,
    record: str | None = None,
    opts: DnaEncodeOptions | None = None,
) -> FastaResult:
    """Read DNA from a FASTA stream.

    All records are concatenated in file order unless ``record`` names one
    (matched against the first word of the header). Bases are uppercased.
    With the ``skip`` policy, non-ACGT characters are dropped and counted;
    with ``fail``, the first one raises :class:`FastaParseError`.
    """
    opts = opts or DnaEncodeOptions()
    data = stream if isinstance(stream, (bytes, bytearray)) else stream.read()
    chunks: list[bytes] = []
    current = None
    found = record is None
    n_bases = 0
    for line_no, line in enumerate(io.BytesIO(data), start=1):
        if line.startswith(b">"):
            words = line[1:].split(None, 1)
            current = words[0].decode("utf-8", "replace") if words else ""
            if record is not None and current == record:
                found = True
            continue
        if record is not None and current != record:
            continue
        seq = b"".join(line.split())
        if not seq:
            continue
        if opts.non_acgt_policy is NonAcgtPolicy.FAIL:
            codes = _BASE_LUT[np.frombuffer(seq, dtype=np.uint8)]
            bad = np.flatnonzero(codes == 4)
            if bad.size:
                col = line.index(seq[bad[0] : bad[0] + 1]) + 1
                offset = n_bases + int(bad[0])
                raise FastaParseError(
                    f"non-ACGT character {seq[bad[0]:bad[0] + 1].decode('latin-1')!r} "
                    f"at line {line_no}, column {col} (base offset {offset})"
                )
        chunks.append(seq)
        n_bases += len(seq)
    if record is not None and not found:
        raise FastaParseError(f"record {record!r} not found")
    raw = b"".join(chunks)
    if not raw:
        raise FastaParseError("no sequence lines in FASTA input")
    codes = _BASE_LUT[np.frombuffer(raw, dtype=np.uint8)]
    keep = codes != 4
    skipped = int(codes.size - np.count_nonzero(keep))
    return FastaResult(SymbolSequence(DNA_ALPHABET, codes[keep]), skipped)


_RY = {"A": 1.0, "G": 1.0, "C": -1.0, "T": -1.0}


def ry_encode(dna: SymbolSequence) -> np.ndarray:
    """Purine/pyrimidine walk steps: A, G -> +1 and C, T -> -1."""
    try:
        lut = np.array([_RY[s] for s in dna.alphabet.symbols], dtype=np.float64)
    except KeyError as e:
        raise ValueError(f"symbol outside {{A,C,G,T}}: {e.args[0]!r}") from None
    return lut[dna.ids]


def base_composition(dna: SymbolSequence) -> dict[str, float]:
    counts = dna.counts()
    n = counts.sum()
    if n == 0:
        raise ValueError("empty sequence has no composition")
    return {s: float(c / n) for s, c in zip(dna.alphabet.symbols, counts)}
