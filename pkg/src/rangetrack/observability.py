"""Persistent-excitation and observability checks.

``pe_gram`` sums outer products of the world-frame sensor baseline over a
window; ``obs_gramian`` builds the windowed observability Gramian of the
pair (A, C(k)); ``chernoff_pe_bound`` evaluates the tail bound on the
smallest eigenvalue of the baseline sum under uniformly random attitudes.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .dynamics import DynamicsParams

RTOL = 1e-9


@dataclass(frozen=True)
class PEReport:
    lambda_min: float
    lambda_max: float
    N: int
    a_hat: float
    a_check: float
    satisfied: bool


@dataclass(frozen=True)
class GramianReport:
    gram: np.ndarray
    M: int
    lambda_min: float
    lambda_max: float
    satisfied: bool


def _extremes(mat, rtol):
    eig = np.linalg.eigvalsh(mat)
    lmax = max(float(eig[-1]), 0.0)
    lmin = float(eig[0])
    # eigenvalues lost in roundoff relative to the largest count as zero
    if lmin <= rtol * lmax:
        lmin = 0.0
    return lmin, lmax


def pe_gram(qs, baseline=None, rtol=RTOL):
    """Excitation report for a window of world-frame baselines ``qs`` (N, 3).

    ``a_hat`` is the measured smallest eigenvalue; ``a_check`` is the
    worst-case upper bound ``N * |bq|^2`` (``baseline`` defaults to the
    largest norm in the window).
    """
    qs = np.asarray(qs, dtype=float).reshape(-1, 3)
    n = len(qs)
    if n < 1:
        raise ValueError("window must contain at least one vector")
    gram = qs.T @ qs
    lmin, lmax = _extremes(gram, rtol)
    if baseline is None:
        baseline = float(np.max(np.linalg.norm(qs, axis=1)))
    return PEReport(lmin, lmax, n, lmin, n * baseline**2, lmin > 0.0)


@lru_cache(maxsize=32)
def _powers(t, M):
    """``A^0 .. A^(M-1)`` for the constant-velocity transition matrix."""
    out = np.empty((M, 6, 6))
    out[0] = np.eye(6)
    a = DynamicsParams(t).A
    for j in range(1, M):
        out[j] = out[j - 1] @ a
    out.flags.writeable = False
    return out


def obs_gramian(dp, cs, rtol=RTOL):
    """Observability Gramian over the window of measurement rows ``cs`` (M, 6).

    Row ``m`` is weighted by ``A^(M-1-m)`` so the last row enters unpropagated.
    """
    cs = np.asarray(cs, dtype=float).reshape(-1, 6)
    M = len(cs)
    if M < 1:
        raise ValueError("window must contain at least one row")
    weighted = np.einsum("mi,mij->mj", cs, _powers(dp.t, M)[::-1])
    gram = weighted.T @ weighted
    gram = 0.5 * (gram + gram.T)
    lmin, lmax = _extremes(gram, rtol)
    return GramianReport(gram, M, lmin, lmax, lmin > 0.0)


def log_chernoff_bound(N, c):
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"c must lie in [0, 1], got {c}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    one_minus = 1.0 - c
    # (1-c) log(1-c) -> 0 as c -> 1
    xlogx = one_minus * math.log(one_minus) if one_minus > 0 else 0.0
    return math.log(3.0) + (N / 3.0) * (-c - xlogx)


def chernoff_pe_bound(N, c, xi):
    """Return ``(a_hat, p_bound)``: P(lambda_min <= a_hat) <= p_bound."""
    a_hat = (1.0 - c) * (N / 3.0) * xi * xi
    return a_hat, math.exp(log_chernoff_bound(N, c))


def sliding_pe(qs, window, baseline=None, rtol=RTOL):
    """PE reports for every full sliding window of ``qs``."""
    qs = np.asarray(qs, dtype=float)
    return [pe_gram(qs[k:k + window], baseline, rtol)
            for k in range(len(qs) - window + 1)]


def sliding_gramian(dp, cs, window, rtol=RTOL):
    cs = np.asarray(cs, dtype=float)
    return [obs_gramian(dp, cs[k:k + window], rtol)
            for k in range(len(cs) - window + 1)]
