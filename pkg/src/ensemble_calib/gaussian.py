"""Gaussian kernels: Cholesky factorization, multivariate sampling, normal cdf/quantile.

Random streams are derived from ``numpy.random.SeedSequence`` spawn keys, so a
(seed, key...) tuple always maps to the same independent generator no matter
which task or thread consumes it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack
from scipy.special import ndtr, ndtri

from .errors import DomainError, NotPositiveDefinite, ShapeError


def _zigzag(k: int) -> int:
    # spawn keys must be non-negative
    k = int(k)
    return 2 * k if k >= 0 else -2 * k - 1


@dataclass(frozen=True)
class RngStream:
    """Deterministic, splittable random stream.

    Parameters
    ----------
    seed : int
        Root seed.
    key : int or tuple of int
        Path of sub-stream identifiers below the root. Negative entries are
        allowed (prior means run from -10 to 10).

    Examples
    --------
    >>> s = RngStream(3).spawn(0, -4)
    >>> a = s.generator().standard_normal(2)
    >>> b = RngStream(3, (0, -4)).generator().standard_normal(2)
    >>> bool((a == b).all())
    True
    """

    seed: int
    key: tuple[int, ...] = field(default=())

    def __post_init__(self):
        key = (self.key,) if np.ndim(self.key) == 0 else self.key
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "key", tuple(int(k) for k in key))

    def spawn(self, *keys: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=_zigzag(self.seed), spawn_key=tuple(_zigzag(k) for k in self.key)
        )
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept an ``RngStream``, a ``Generator`` or an int seed."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def cholesky(a) -> np.ndarray:
    """Lower Cholesky factor ``L`` with ``L @ L.T == a``.

    The input is symmetrized as ``(a + a.T) / 2`` first; no pivoting.

    Raises
    ------
    NotPositiveDefinite
        With ``pivot`` set to the zero-based index of the first non-positive pivot.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ShapeError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    sym = 0.5 * (a + a.T)
    c, info = lapack.dpotrf(sym, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefinite(info - 1)
    if info < 0:  # pragma: no cover - lapack argument error
        raise DomainError(f"dpotrf rejected argument {-info}")
    return c


def mvn_sample(mean, cov, n: int, rng) -> np.ndarray:
    """Draw ``n`` samples of N(mean, cov) as rows of an ``(n, d)`` array."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
        raise ShapeError(f"mean has shape {mean.shape}, cov has shape {cov.shape}")
    chol = cholesky(cov)
    z = as_generator(rng).standard_normal((int(n), mean.size))
    return mean + z @ chol.T


def normal_cdf(x):
    """Standard normal cdf, accurate into the far tails."""
    out = ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` on the open interval (0, 1)."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(~(p_arr > 0.0) | ~(p_arr < 1.0)):
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    out = ndtri(p_arr)
    return float(out) if np.ndim(out) == 0 else out
