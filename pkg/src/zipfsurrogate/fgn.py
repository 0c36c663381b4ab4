"""Fractional Gaussian noise by circulant embedding (Davies-Harte).

The exact FGN autocovariance is embedded in a circulant matrix of size
``M = 2m`` (``m >= n - 1``, chosen so ``M`` is FFT friendly). Its
eigenvalues come from a type-I DCT, and a Hermitian Gaussian spectrum
scaled by their square roots is inverted back to the time domain. When every
eigenvalue is non-negative the output is exact in distribution. Otherwise the
negative eigenvalues are clipped to zero, which turns the method into plain
Fourier filtering of the target spectrum, and a :class:`FgnApproximationWarning`
is emitted.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft
from scipy import special

from ._random import check_seed, make_rng


_SERIES_FROM = 64
_SERIES_TERMS = 6


class FgnApproximationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FgnConfig:
    n: int
    alpha0: float
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if not 0.0 < self.alpha0 < 1.0:
            raise ValueError(f"alpha0 must lie in (0, 1), got {self.alpha0}")
        check_seed(self.seed)


def _series_coefs(p: float) -> list[float]:
    return [special.binom(p, 2 * j) for j in range(1, _SERIES_TERMS + 1)]


def _series_tail(k: np.ndarray, p: float, coefs: list[float] | None = None) -> np.ndarray:
    """Large-lag autocovariance ``k^(p-2) * sum_j C(p, 2j) k^(2-2j)``, overwriting ``k``."""
    if coefs is None:
        coefs = _series_coefs(p)
    u2 = np.multiply(k, k)
    np.reciprocal(u2, out=u2)
    acc = np.full_like(k, coefs[-1])
    for c in coefs[-2::-1]:
        acc *= u2
        acc += c
    del u2
    np.power(k, p - 2.0, out=k)
    acc *= k
    return acc


def fgn_autocovariance(k, hurst: float) -> np.ndarray:
    """Unit-variance FGN autocovariance ``0.5 * (|k+1|^2H - 2|k|^2H + |k-1|^2H)`` at integer lags.

    The three-term form cancels catastrophically at large lags, so for
    ``k >= 64`` the even binomial series
    ``k^(2H-2) * sum_j C(2H, 2j) * k^(2 - 2j)`` is used instead (truncated
    where the next term is below double precision).
    """
    k = np.abs(np.asarray(k, dtype=np.float64))
    p = 2.0 * hurst
    out = np.empty_like(k)
    small = k < _SERIES_FROM
    ks = k[small]
    out[small] = 0.5 * (np.abs(ks + 1) ** p - 2 * ks**p + np.abs(ks - 1) ** p)
    out[~small] = _series_tail(k[~small], p)
    return out


# lags per block when filling long autocovariance arrays; keeps temporaries in cache
_BLOCK = 1 << 13


def _autocovariance_lags(count: int, hurst: float) -> np.ndarray:
    """``fgn_autocovariance(arange(count))`` computed block by block."""
    head = min(count, _SERIES_FROM)
    out = np.empty(count)
    out[:head] = fgn_autocovariance(np.arange(head), hurst)
    p = 2.0 * hurst
    coefs = _series_coefs(p)
    for start in range(head, count, _BLOCK):
        stop = min(start + _BLOCK, count)
        out[start:stop] = _series_tail(np.arange(start, stop, dtype=np.float64), p, coefs)
    return out


def _embedding_half_size(n: int) -> int:
    # 2 * (5-smooth m) keeps the FFT on the fast path for awkward n
    return sp_fft.next_fast_len(max(n - 1, 1), real=True)


def circulant_eigenvalues(n: int, hurst: float) -> np.ndarray:
    """Eigenvalues ``lambda_0 .. lambda_m`` of the symmetric circulant embedding.

    The first row ``gamma(0), ..., gamma(m), gamma(m-1), ..., gamma(1)`` is even,
    so its DFT is the type-I DCT of ``gamma(0..m)``.
    """
    m = _embedding_half_size(n)
    gamma = _autocovariance_lags(m + 1, hurst)
    if m == 1:
        return np.array([gamma[0] + gamma[1], gamma[0] - gamma[1]])
    return _dct1(gamma)


# below this length the library type-I DCT is used directly
_DCT_SPLIT_FROM = 1 << 16


def _dct1(x: np.ndarray) -> np.ndarray:
    """Unnormalised type-I DCT of ``x`` (may be overwritten).

    For ``x`` of length ``2h + 1`` the even outputs are the type-I DCT of
    ``x[j] + x[2h - j]`` (length ``h + 1``) and the odd outputs the type-III
    DCT of ``x[j] - x[2h - j]`` (length ``h``). Recursing on the even half
    replaces one real FFT of length ``4h`` by FFTs of total length about
    ``2h``.
    """
    n = x.size - 1
    if n % 2 or n < _DCT_SPLIT_FROM:
        return sp_fft.dct(x, type=1, overwrite_x=True, workers=1)
    half = n // 2
    out = np.empty(n + 1)
    out[1::2] = sp_fft.dct(x[:half] - x[n:half:-1], type=3, overwrite_x=True, workers=1)
    out[0::2] = _dct1(x[: half + 1] + x[n : half - 1 : -1])
    return out


def _synthesize(lam: np.ndarray, normals: np.ndarray, n: int) -> np.ndarray:
    """First ``n`` values of the circulant process driven by ``2 * (m + 1)`` iid normals.

    ``lam`` (the eigenvalues, consumed in place) must be non-negative. The map is
    linear in ``normals``, which is what the exactness tests rely on.
    """
    m = lam.size - 1
    # consecutive pairs of normals form the complex coefficients
    spec = np.asarray(normals, dtype=np.float64).view(np.complex128)
    re0, re_m = spec[0].real, spec[m].real
    lam *= 0.5
    amp = np.sqrt(lam, out=lam)
    spec *= amp
    # the two self-conjugate bins carry a real Gaussian of full variance
    spec[0] = amp[0] * np.sqrt(2.0) * re0
    spec[m] = amp[m] * np.sqrt(2.0) * re_m
    # the orthonormal inverse carries the 1 / sqrt(2m) the embedding needs
    return sp_fft.irfft(spec, n=2 * m, norm="ortho", overwrite_x=True, workers=1)[:n]


def generate_fgn(cfg: FgnConfig, *, normalize: bool = True) -> np.ndarray:
    """Draw one FGN realisation of length ``cfg.n`` with Hurst exponent ``cfg.alpha0``.

    Output is a pure function of ``cfg``. With ``normalize`` (the default) it is
    shifted and scaled to sample mean 0 and sample variance 1.
    """
    n = int(cfg.n)
    lam = circulant_eigenvalues(n, cfg.alpha0)
    if lam.min() < 0:
        worst = float(lam.min() / lam.max())
        warnings.warn(
            f"circulant embedding not non-negative definite (min/max eigenvalue {worst:.3g}); "
            "clipping to zero, output is approximate",
            FgnApproximationWarning,
            stacklevel=2,
        )
        lam = np.clip(lam, 0.0, None)
    z = _synthesize(lam, make_rng(cfg.seed).standard_normal(2 * lam.size), n)
    if normalize:
        z -= z.mean()
        sd = z.std()
        if sd > 0:
            z /= sd
    return z
