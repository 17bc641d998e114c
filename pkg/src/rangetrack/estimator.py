"""Kalman filter on the 6D relative state driven by the known vehicle
acceleration and the scalar squared-range-difference measurement."""

from dataclasses import dataclass

import numpy as np

from .dynamics import RelativeState

INNOVATION_VAR_MIN = 1e-12


@dataclass(frozen=True)
class FilterState:
    est: RelativeState
    cov: np.ndarray


@dataclass(frozen=True)
class Prediction:
    est_pred: RelativeState
    cov_pred: np.ndarray


def _sym(m):
    return 0.5 * (m + m.T)


def initial_state(est=None, scale=10.0):
    """Filter start: zero estimate unless given, covariance ``scale * I``."""
    if est is None:
        est = RelativeState(np.zeros(3), np.zeros(3))
    return FilterState(est, scale * np.eye(6))


def predict(fs, r, u1, tn, dp):
    A, B = dp.A, dp.B
    x = A @ fs.est.as_vector() + B @ (r @ np.asarray(u1, dtype=float))
    cov = A @ fs.cov @ A.T + B @ tn.W @ B.T
    return Prediction(RelativeState.from_vector(x), _sym(cov))


def gain(cov_pred, C, Gamma):
    pc = cov_pred @ C
    s = max(float(C @ pc) + Gamma, INNOVATION_VAR_MIN)
    return pc / s, s


def update(pred, meas, joseph=True):
    """Measurement update.

    ``joseph=False`` gives the short form ``(I - KC) P`` and exists for
    cross-checking only.
    """
    C = meas.C
    x = pred.est_pred.as_vector()
    innovation = meas.Y - (C @ x + meas.m)
    if not np.isfinite(innovation):
        raise FloatingPointError(f"non-finite innovation {innovation!r}")
    K, _ = gain(pred.cov_pred, C, meas.Gamma)
    x = x + K * innovation
    ikc = np.eye(6) - np.outer(K, C)
    if joseph:
        cov = ikc @ pred.cov_pred @ ikc.T + meas.Gamma * np.outer(K, K)
    else:
        cov = ikc @ pred.cov_pred
    return FilterState(RelativeState.from_vector(x), _sym(cov))


def nees(truth, fs):
    err = truth.as_vector() - fs.est.as_vector()
    return float(err @ np.linalg.solve(fs.cov, err))
