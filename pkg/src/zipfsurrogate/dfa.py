"""Detrended fluctuation analysis.

The profile is split into segments of length ``L``; an order-``m`` polynomial
is removed from each by least squares, and ``F(L)`` is the RMS of what is
left. ``F(L) ~ L**alpha`` on a log-log plot gives the exponent.

Per-segment detrending projects every segment onto an orthonormal
polynomial basis of the local index (QR of a scaled Vandermonde matrix), so
all segments of a given length are detrended with two matrix products.
"""

from __future__ import annotations

import enum
import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import signal, stats

from .seqmodel import as_series

# elements per detrending batch; bounds peak memory on long profiles
_CHUNK = 1 << 21
_CUMSUM_BLOCK = 4096


class Segmentation(str, enum.Enum):
    FORWARD_ONLY = "forward_only"
    BOTH_ENDS = "both_ends"


class DegenerateFluctuationError(ValueError):
    pass


def default_windows(n: int, order: int = 1, count: int = 20) -> np.ndarray:
    """About ``count`` log-spaced integer window sizes from ``2*(order+2)`` to ``n // 4``."""
    lo, hi = 2 * (order + 2), n // 4
    if hi < lo:
        raise ValueError(f"series of length {n} is too short for DFA of order {order}")
    return np.unique(np.rint(np.logspace(math.log10(lo), math.log10(hi), count)).astype(np.int64))


@dataclass(frozen=True)
class DfaConfig:
    """Measurement protocol. ``None`` fields are filled in from the series length."""

    order: int = 1
    window_sizes: tuple[int, ...] | None = None
    fit_range: tuple[int, int] | None = None
    segmentation: Segmentation = Segmentation.BOTH_ENDS
    n_windows: int = 20

    def __post_init__(self):
        object.__setattr__(self, "segmentation", Segmentation(self.segmentation))
        if self.order < 1:
            raise ValueError("detrending order must be >= 1")
        if self.window_sizes is not None:
            ws = tuple(int(w) for w in self.window_sizes)
            if not ws or any(b <= a for a, b in zip(ws, ws[1:])):
                raise ValueError("window_sizes must be non-empty and strictly increasing")
            if ws[0] < self.order + 2:
                raise ValueError(f"every window must be >= order + 2 = {self.order + 2}")
            object.__setattr__(self, "window_sizes", ws)
        if self.fit_range is not None:
            lo, hi = (int(v) for v in self.fit_range)
            if lo > hi:
                raise ValueError("fit_range must satisfy lo <= hi")
            object.__setattr__(self, "fit_range", (lo, hi))

    def resolve(self, n: int) -> DfaConfig:
        """Materialize windows and fit range for a series of length ``n``."""
        ws = self.window_sizes
        if ws is None:
            ws = tuple(default_windows(n, self.order, self.n_windows).tolist())
        if ws[-1] > n:
            raise ValueError(f"window {ws[-1]} exceeds series length {n}")
        lo, hi = self.fit_range if self.fit_range is not None else (ws[0], ws[-1])
        inside = [w for w in ws if lo <= w <= hi]
        if not inside:
            raise ValueError(f"fit range [{lo}, {hi}] contains no window sizes")
        if inside[-1] > n // 4:
            raise ValueError(f"fit range upper window {inside[-1]} exceeds N/4 = {n // 4}")
        return replace(self, window_sizes=ws, fit_range=(inside[0], inside[-1]))

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "window_sizes": list(self.window_sizes) if self.window_sizes is not None else None,
            "fit_range": list(self.fit_range) if self.fit_range is not None else None,
            "segmentation": self.segmentation.value,
            "n_windows": self.n_windows,
        }


@dataclass(frozen=True)
class DfaResult:
    window_sizes: np.ndarray
    fluctuations: np.ndarray
    alpha: float
    fit_stderr: float
    r_squared: float
    fit_range: tuple[int, int]
    intercept: float = 0.0
    config: DfaConfig = field(default_factory=DfaConfig)

    def refit(self, lo: int, hi: int) -> DfaResult:
        """Re-fit the stored curve over another window range."""
        return _fit(self.window_sizes, self.fluctuations, (lo, hi), replace(self.config, fit_range=(lo, hi)))

    def summary(self) -> dict:
        return {
            "alpha": self.alpha,
            "stderr": self.fit_stderr,
            "r2": self.r_squared,
            "fit_lo": int(self.fit_range[0]),
            "fit_hi": int(self.fit_range[1]),
        }


def profile(x) -> np.ndarray:
    """Cumulative sum of the mean-removed series.

    Sums run in blocks (within-block cumsum plus a cumsum of block totals),
    which keeps rounding error near ``eps * (B + N/B)`` instead of ``eps * N``.
    """
    x = as_series(x)
    if x.size == 0:
        raise ValueError("empty input")
    d = x - x.mean()
    n = d.size
    if n <= _CUMSUM_BLOCK:
        return np.cumsum(d)
    nb = -(-n // _CUMSUM_BLOCK)
    padded = np.zeros(nb * _CUMSUM_BLOCK)
    padded[:n] = d
    blocks = padded.reshape(nb, _CUMSUM_BLOCK)
    inner = np.cumsum(blocks, axis=1)
    offsets = np.concatenate(([0.0], np.cumsum(inner[:, -1])[:-1]))
    inner += offsets[:, None]
    return inner.reshape(-1)[:n]


@functools.lru_cache(maxsize=256)
def _poly_basis(length: int, order: int) -> np.ndarray:
    t = np.linspace(-1.0, 1.0, length)
    q, _ = np.linalg.qr(np.vander(t, order + 1, increasing=True))
    q.setflags(write=False)
    return q


def _segment_rss(y: np.ndarray, length: int, order: int) -> float:
    """Total squared detrending residual over the segments tiling ``y``."""
    segs = y.reshape(-1, length)
    q = _poly_basis(length, order)
    total = 0.0
    step = max(1, _CHUNK // length)
    for start in range(0, segs.shape[0], step):
        s = segs[start : start + step]
        s = s - s.mean(axis=1, keepdims=True)
        resid = s - (s @ q) @ q.T
        total += float(np.einsum("ij,ij->", resid, resid))
    return total


def _fluctuation_of_profile(y: np.ndarray, length: int, order: int, segmentation: Segmentation) -> float:
    n = y.size
    if length < order + 2 or length > n:
        raise ValueError(f"window {length} outside [{order + 2}, {n}]")
    k = n // length
    covered = k * length
    rss = _segment_rss(y[:covered], length, order)
    nseg = k
    if segmentation is Segmentation.BOTH_ENDS:
        rss += _segment_rss(y[n - covered :], length, order)
        nseg *= 2
    return math.sqrt(rss / (nseg * length))


def fluctuation(x, length: int, order: int = 1, segmentation: Segmentation | str = Segmentation.BOTH_ENDS) -> float:
    """F(L) for one window size."""
    return _fluctuation_of_profile(profile(x), int(length), int(order), Segmentation(segmentation))


def fluctuation_curve(x, window_sizes, order: int = 1, segmentation=Segmentation.BOTH_ENDS, workers: int = 1) -> np.ndarray:
    y = profile(x)
    seg = Segmentation(segmentation)
    ws = [int(w) for w in window_sizes]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(lambda w: _fluctuation_of_profile(y, w, order, seg), ws))
    else:
        out = [_fluctuation_of_profile(y, w, order, seg) for w in ws]
    return np.array(out)


def _fit(windows: np.ndarray, fluct: np.ndarray, fit_range, config: DfaConfig) -> DfaResult:
    lo, hi = fit_range
    mask = (windows >= lo) & (windows <= hi)
    if not mask.any():
        raise ValueError(f"fit range [{lo}, {hi}] contains no window sizes")
    if np.any(fluct[mask] <= 0):
        bad = int(windows[mask][np.argmax(fluct[mask] <= 0)])
        raise DegenerateFluctuationError(f"degenerate fluctuation: F({bad}) = 0")
    lx, ly = np.log10(windows[mask]), np.log10(fluct[mask])
    if lx.size < 2:
        raise ValueError("need at least two window sizes inside the fit range")
    fit = stats.linregress(lx, ly)
    used = (int(windows[mask][0]), int(windows[mask][-1]))
    stderr = float(fit.stderr) if lx.size > 2 else float("nan")
    return DfaResult(
        window_sizes=windows,
        fluctuations=fluct,
        alpha=float(fit.slope),
        fit_stderr=stderr,
        r_squared=float(fit.rvalue**2),
        fit_range=used,
        intercept=float(fit.intercept),
        config=config,
    )


def dfa_exponent(x, cfg: DfaConfig | None = None, *, workers: int = 1) -> DfaResult:
    """Run DFA over every window in ``cfg`` and fit the exponent over its fit range.

    ``workers > 1`` computes window sizes concurrently; the result does not
    depend on it.
    """
    x = as_series(x)
    cfg = (cfg or DfaConfig()).resolve(x.size)
    windows = np.asarray(cfg.window_sizes, dtype=np.int64)
    fluct = fluctuation_curve(x, windows, cfg.order, cfg.segmentation, workers=workers)
    return _fit(windows, fluct, cfg.fit_range, cfg)


def alpha_from_zeta(zeta: float) -> float:
    """DFA exponent for an autocorrelation decaying as ``s**-zeta``.

    ``zeta = 1`` is accepted as the white-noise boundary.
    """
    if not 0.0 < zeta <= 1.0:
        raise ValueError(f"zeta must lie in (0, 1], got {zeta}")
    return 1.0 - zeta / 2.0


def beta_from_alpha(alpha: float) -> float:
    """Spectral exponent for ``S(f) ~ f**-beta`` given a DFA exponent."""
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    return 2.0 * alpha - 1.0


def spectral_beta(x, fmax: float = 0.1) -> float:
    """Minus the slope of the log periodogram against log frequency, over ``0 < f <= fmax``."""
    x = as_series(x)
    f, p = signal.periodogram(x, detrend="constant")
    keep = (f > 0) & (f <= fmax) & (p > 0)
    slope = np.polyfit(np.log10(f[keep]), np.log10(p[keep]), 1)[0]
    return float(-slope)
