"""Shuffling null models at the character, word and sentence level.

Every shuffle is a Fisher-Yates permutation drawn from the same seeded
PCG64 stream used for noise generation (``Generator.permutation``).
"""

from __future__ import annotations

import enum
import re

import numpy as np

from ._random import make_rng
from .encoders import TokenizerOptions, tokenize_words
from .seqmodel import SymbolSequence

# a sentence ends at . ! or ? followed by whitespace
SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")


class ShuffleLevel(str, enum.Enum):
    CHARACTERS = "chars"
    WORDS = "words"
    SENTENCES = "sentences"


def shuffle_words(seq: SymbolSequence, seed: int) -> SymbolSequence:
    perm = make_rng(seed).permutation(len(seq))
    return SymbolSequence(seq.alphabet, seq.ids[perm])


def split_sentences(text: str) -> list[str]:
    return [s for s in SENTENCE_BREAK.split(text) if s.strip()]


def shuffle_sentences(text: str, seed: int, opts: TokenizerOptions | None = None) -> SymbolSequence:
    """Permute sentence order, keep word order inside each sentence, then tokenize."""
    sentences = split_sentences(text)
    perm = make_rng(seed).permutation(len(sentences))
    tokens: list[str] = []
    for i in perm.tolist():
        tokens.extend(tokenize_words(sentences[i], opts))
    return SymbolSequence.from_labels(tokens)


def shuffle_characters(text: str, seed: int) -> str:
    chars = np.array(list(text), dtype=object)
    return "".join(chars[make_rng(seed).permutation(len(chars))].tolist())
