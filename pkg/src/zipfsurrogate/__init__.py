"""Zipf-preserving, long-range correlated surrogates for symbolic sequences."""

__version__ = "0.1.0"

from .dfa import DfaConfig, DfaResult, alpha_from_zeta, beta_from_alpha, dfa_exponent, fluctuation, profile
from .encoders import TokenizerOptions, parse_fasta, ry_encode, tokenize
from .fgn import FgnConfig, generate_fgn
from .seqmodel import (
    Alphabet,
    FrequencyTable,
    SymbolSequence,
    build_frequency_table,
    zipf_rank_decode,
    zipf_rank_encode,
    zipf_table,
)
from .surrogate import (
    MatchConfig,
    SurrogateResult,
    TargetUnreachableError,
    discretize_rank_based,
    generate_surrogate,
    match_target_exponent,
)
from .baselines import shuffle_characters, shuffle_sentences, shuffle_words

__all__ = [
    "Alphabet",
    "DfaConfig",
    "DfaResult",
    "FgnConfig",
    "FrequencyTable",
    "MatchConfig",
    "SurrogateResult",
    "SymbolSequence",
    "TargetUnreachableError",
    "TokenizerOptions",
    "alpha_from_zeta",
    "beta_from_alpha",
    "build_frequency_table",
    "dfa_exponent",
    "discretize_rank_based",
    "fluctuation",
    "generate_fgn",
    "generate_surrogate",
    "match_target_exponent",
    "parse_fasta",
    "profile",
    "ry_encode",
    "shuffle_characters",
    "shuffle_sentences",
    "shuffle_words",
    "tokenize",
    "zipf_rank_decode",
    "zipf_rank_encode",
    "zipf_table",
]


def sample_corpus_path():
    """Path of the bundled public-domain English sample (KJV, Genesis to Numbers)."""
    from importlib.resources import files

    return files(__name__) / "data" / "kjv_genesis_numbers.txt"
