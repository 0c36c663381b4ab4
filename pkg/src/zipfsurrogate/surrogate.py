"""Zipf-preserving long-range correlated surrogates.

A fractional Gaussian noise realisation is sorted; the sorted positions are
filled with symbol ids in Zipf order (rank 1 repeated ``f(a_1)`` times, then
rank 2, ...), and the inverse permutation puts them back in time order. The
symbol histogram is therefore copied exactly, and each symbol owns one
contiguous quantile block of the noise. Quantising the noise lowers its DFA
exponent, so :func:`match_target_exponent` bisects on the input exponent
until the measured one is within tolerance of the target.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from ._random import check_seed, derive_seed
from .dfa import DfaConfig, dfa_exponent
from .encoders import ry_encode
from .fgn import FgnConfig, generate_fgn
from .seqmodel import FrequencyTable, SymbolSequence, as_series

log = logging.getLogger(__name__)


class Encoding(str, enum.Enum):
    RANK = "rank"
    RY = "ry"


class TargetUnreachableError(RuntimeError):
    pass


def numerify(seq: SymbolSequence, encoding: Encoding | str) -> np.ndarray:
    """Numeric series used to measure a surrogate's exponent.

    ``rank`` assumes ``seq`` is indexed by a frequency table's alphabet, so
    id + 1 is the Zipf rank.
    """
    if Encoding(encoding) is Encoding.RY:
        return ry_encode(seq)
    return seq.ids.astype(np.float64) + 1.0


def default_encoding(table: FrequencyTable) -> Encoding:
    return Encoding.RY if set(table.alphabet.symbols) <= set("ACGT") else Encoding.RANK


def _grid_cell(x: np.ndarray, lo: float, scale: float, cells: int) -> np.ndarray:
    # monotone non-decreasing in x, so cell(a) < cell(b) implies a < b
    c = x - lo
    c *= scale
    np.minimum(c, cells - 1, out=c)
    return c.astype(np.int32)


# values per block in the grid lookup; keeps temporaries in cache
_BLOCK = 1 << 13


def _block_index(z: np.ndarray, edges: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """``searchsorted(edges, z, side="right")`` via a uniform grid on ``[lo, hi]``.

    A value whose grid cell holds no edge is classified by the edges in lower
    cells alone; only values sharing a cell with some edge need a binary
    search. This keeps the cost near linear for large alphabets.
    """
    span = hi - lo
    if not np.isfinite(span) or span <= 0:
        return np.searchsorted(edges, z, side="right")
    cells = int(np.clip(64 * (edges.size + 1), 2**12, min(2**22, max(2**12, 8 * z.size))))
    scale = cells / span
    edge_cell = _grid_cell(edges, lo, scale, cells)
    below = np.searchsorted(edge_cell, np.arange(cells, dtype=np.int32), side="left")
    has_edge = np.zeros(cells, dtype=bool)
    has_edge[edge_cell] = True
    ids = np.empty(z.size, dtype=np.int64)
    for start in range(0, z.size, _BLOCK):
        zc = z[start : start + _BLOCK]
        cz = _grid_cell(zc, lo, scale, cells)
        out = ids[start : start + _BLOCK]
        np.take(below, cz, out=out)
        hard = np.flatnonzero(has_edge[cz])
        if hard.size:
            out[hard] = np.searchsorted(edges, zc[hard], side="right")
    return ids


def discretize_rank_based(z, table: FrequencyTable) -> SymbolSequence:
    """Map a real series onto ``table``'s symbols by rank.

    The smallest ``f(a_1)`` values of ``z`` become the most frequent symbol,
    the next ``f(a_2)`` the second, and so on. Ties in ``z`` go to the earlier
    index (stable sort). Output is indexed by ``table.alphabet``.

    Only one sort is needed: when every block boundary in the sorted values
    is a strict gap, a value's block is decided by comparing it with the
    boundary values. A tie across a boundary falls back to a stable argsort.
    """
    z = as_series(z, name="z")
    if z.size != table.total:
        raise ValueError(f"length mismatch: series has {z.size} values, table counts sum to {table.total}")
    if table.size == 1:
        return SymbolSequence._trusted(table.alphabet, np.zeros(z.size, dtype=np.int64))
    # sorted position where each block after the first starts
    starts = np.cumsum(table.counts)[:-1]
    zs = np.sort(z)
    if not np.any(zs[starts - 1] == zs[starts]):
        edges = zs[starts]
        lo, hi = float(zs[0]), float(zs[-1])
        del zs
        return SymbolSequence._trusted(table.alphabet, _block_index(z, edges, lo, hi))
    del zs
    order = np.argsort(z, kind="stable")
    ids = np.empty(z.size, dtype=np.int64)
    ids[order] = np.repeat(np.arange(table.size, dtype=np.int64), table.counts)
    return SymbolSequence._trusted(table.alphabet, ids)


def generate_surrogate(table: FrequencyTable, alpha0: float, seed: int) -> SymbolSequence:
    """Noise with input exponent ``alpha0`` and ``seed``, discretised onto ``table``."""
    # only the order of the noise matters, so skip the rescaling pass
    z = generate_fgn(FgnConfig(table.total, alpha0, seed), normalize=False)
    return discretize_rank_based(z, table)


@dataclass(frozen=True)
class MatchConfig:
    target_alpha: float
    epsilon: float = 0.01
    bracket: tuple[float, float] = (0.5, 0.99)
    max_iters: int = 40
    reseed_after: int = 5
    base_seed: int = 0
    dfa_config: DfaConfig = field(default_factory=DfaConfig)
    encoding: Encoding | None = None

    def __post_init__(self):
        lo, hi = (float(v) for v in self.bracket)
        object.__setattr__(self, "bracket", (lo, hi))
        if not 0.5 <= lo < hi < 1.0:
            raise ValueError(f"bracket must satisfy 0.5 <= lo < hi < 1, got {self.bracket}")
        if not 0.5 <= self.target_alpha < 1.0:
            raise ValueError(f"target_alpha must lie in [0.5, 1), got {self.target_alpha}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1 or self.reseed_after < 1:
            raise ValueError("max_iters and reseed_after must be positive")
        check_seed(self.base_seed)
        if self.encoding is not None:
            object.__setattr__(self, "encoding", Encoding(self.encoding))

    def to_dict(self) -> dict:
        return {
            "target_alpha": self.target_alpha,
            "epsilon": self.epsilon,
            "bracket": list(self.bracket),
            "max_iters": self.max_iters,
            "reseed_after": self.reseed_after,
            "base_seed": self.base_seed,
            "dfa_config": self.dfa_config.to_dict(),
            "encoding": self.encoding.value if self.encoding is not None else None,
        }


@dataclass(frozen=True)
class TraceStep:
    iteration: int
    alpha0: float
    alpha_s: float
    seed: int
    note: str = ""


@dataclass(frozen=True)
class SurrogateResult:
    sequence: SymbolSequence
    achieved_alpha: float
    final_alpha0: float
    iterations: int
    seeds_used: tuple[int, ...]
    converged: bool
    trace: tuple[TraceStep, ...]
    dfa_config: DfaConfig
    encoding: Encoding

    def trace_dicts(self) -> list[dict]:
        return [
            {"iteration": s.iteration, "alpha0": s.alpha0, "alpha_s": s.alpha_s, "seed": s.seed, "note": s.note}
            for s in self.trace
        ]


def match_target_exponent(table: FrequencyTable, cfg: MatchConfig) -> SurrogateResult:
    """Bisect on the input exponent until the surrogate's DFA exponent hits the target.

    The first two iterations evaluate the bracket ends. A target at or below
    the lower end can only be met there, so later iterations redraw the seed
    at the lower end instead of bisecting. If the upper end
    still measures below ``target - epsilon`` the target is unreachable and
    :class:`TargetUnreachableError` is raised. Bisection then runs with the
    seed held fixed, so the response to the input exponent is deterministic.
    The seed is replaced by a derived one, and the bracket reset, when the
    measured exponent moves against the input exponent (non-monotone step) or
    when ``reseed_after`` consecutive iterations fail to improve on the best
    error so far. Without convergence the best iterate is returned with
    ``converged=False``.
    """
    encoding = cfg.encoding or default_encoding(table)
    dfa_cfg = cfg.dfa_config.resolve(table.total)
    target, eps = cfg.target_alpha, cfg.epsilon
    lo0, hi0 = cfg.bracket

    trace: list[TraceStep] = []
    seeds = [derive_seed(cfg.base_seed, 0)]
    best: tuple[float, float, float, SymbolSequence] | None = None  # (err, alpha0, alpha_s, seq)
    stale = 0

    def measure(alpha0: float, note: str = "") -> float:
        nonlocal best, stale
        seq = generate_surrogate(table, alpha0, seeds[-1])
        alpha_s = dfa_exponent(numerify(seq, encoding), dfa_cfg).alpha
        trace.append(TraceStep(len(trace) + 1, alpha0, alpha_s, seeds[-1], note))
        log.debug("iter %d: alpha0=%.6f alpha_s=%.6f seed=%d %s", len(trace), alpha0, alpha_s, seeds[-1], note)
        err = abs(alpha_s - target)
        if best is None or err < best[0]:
            best = (err, alpha0, alpha_s, seq)
            stale = 0
        else:
            stale += 1
        return alpha_s

    def done() -> bool:
        return best[0] < eps or len(trace) >= cfg.max_iters

    lo, hi = lo0, hi0
    a_lo = measure(lo, "bracket lo")
    if target <= lo0:
        # discretisation only lowers the exponent, so nothing above the floor
        # can do better; draw fresh noise at the floor instead
        while not done():
            seeds.append(derive_seed(cfg.base_seed, len(seeds)))
            measure(lo, "floor target; reseed")
    elif not done():
        a_hi = measure(hi, "bracket hi")
        if not done() and a_hi < target - eps:
            raise TargetUnreachableError(
                f"target unreachable: alpha_s = {a_hi:.4f} at alpha0 = {hi} is below {target} - {eps}"
            )
    while not done():
        mid = 0.5 * (lo + hi)
        a_mid = measure(mid)
        if best[0] < eps:
            break
        non_monotone = a_mid < a_lo - eps or a_mid > a_hi + eps
        if non_monotone or stale >= cfg.reseed_after:
            seeds.append(derive_seed(cfg.base_seed, len(seeds)))
            trace[-1] = TraceStep(**{**trace[-1].__dict__, "note": "non-monotone; reseed" if non_monotone else "stalled; reseed"})
            lo, hi = lo0, hi0
            # endpoint values for the new seed are unknown; assume the usual ordering
            a_lo, a_hi = -np.inf, np.inf
            stale = 0
            continue
        if a_mid < target:
            lo, a_lo = mid, a_mid
        else:
            hi, a_hi = mid, a_mid

    err, alpha0, alpha_s, seq = best
    return SurrogateResult(
        sequence=seq,
        achieved_alpha=alpha_s,
        final_alpha0=alpha0,
        iterations=len(trace),
        seeds_used=tuple(seeds),
        converged=err < eps,
        trace=tuple(trace),
        dfa_config=dfa_cfg,
        encoding=encoding,
    )
