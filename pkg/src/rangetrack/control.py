"""Attitude commands that keep the sensor baseline exciting, and the
relative-position tracking law with its stability gate."""

from dataclasses import dataclass, field
import math
from typing import Callable

import numpy as np

from .so3 import exp_so3, log_so3, random_rotation

ALPHA_LO = 1.0 - 1.0 / math.sqrt(2.0)
ALPHA_HI = 1.0 + 1.0 / math.sqrt(2.0)


def cosine_h(amplitude=0.5, frequency=1.0 / 6.0):
    """Vertical motion ``h(k) = amplitude * cos(frequency * k * pi)``."""
    def h(k):
        return amplitude * math.cos(frequency * k * math.pi)
    return h


def zero_h(k):
    return 0.0


@dataclass(frozen=True)
class TrajectoryParams:
    """Reference direction ``zeta(k)`` for the world-frame baseline.

    ``rho`` is the horizontal rotation rate as a multiple of pi per step.
    """
    rho: float = 1.0 / 24.0
    h: Callable[[int], float] = field(default_factory=cosine_h)
    bq_norm: float = 1.0

    def __post_init__(self):
        if self.rho == 0:
            raise ValueError("rho must be nonzero")


@dataclass(frozen=True)
class TrackingParams:
    alpha: float
    bq_star: np.ndarray
    t: float
    override: bool = False

    def __post_init__(self):
        object.__setattr__(self, "bq_star", np.asarray(self.bq_star, dtype=float))
        if not self.override and not lyapunov_drift(self.alpha)[1]:
            raise ValueError(gate_message(self.alpha))


@dataclass(frozen=True)
class TrackingDiagnostics:
    e: np.ndarray
    V: float
    drift_coeff: float


def gate_message(alpha):
    return (f"tracking gain alpha={alpha!r} outside the admissible open interval "
            f"({ALPHA_LO!r}, {ALPHA_HI!r})")


def lyapunov_drift(alpha):
    """Return ``(2(1-alpha)^2 - 1, stable)``.

    Stability is decided by membership in the open interval where the
    coefficient is negative; at the endpoints the coefficient is only zero
    up to roundoff.
    """
    coeff = 2.0 * (1.0 - alpha) ** 2 - 1.0
    return coeff, bool(ALPHA_LO < alpha < ALPHA_HI)


def attitude_random_step(r, t, rng):
    """Command a jump to a Haar-random attitude in one sample."""
    r_target = random_rotation(rng)
    return log_so3(r_target @ r.T) / t, r_target


def zeta(k, tp):
    a = tp.rho * k * math.pi
    return tp.bq_norm * np.array([math.sin(a), math.cos(a), tp.h(k)])


def _orthogonal_unit(v):
    n = np.linalg.norm(v)
    for i in range(3):
        c = np.cross(v, np.eye(3)[i])
        cn = np.linalg.norm(c)
        if cn > 1e-6 * n:
            return c / cn
    raise ValueError("zero vector has no orthogonal complement")


def align_rotation(a, b, tol=1e-12):
    """Minimal rotation taking direction ``a`` onto direction ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("cannot align a zero vector")
    cross = np.cross(a, b)
    s = np.linalg.norm(cross)
    dot = float(a @ b)
    angle = math.atan2(s, dot)
    if s <= tol * na * nb:
        if dot > 0:
            return np.eye(3)
        return exp_so3(math.pi * _orthogonal_unit(a))
    return exp_so3(cross / s * angle)


def attitude_trajectory_step(r, k, bq, tp, t):
    """Command the attitude whose baseline image is parallel to ``zeta(k)``."""
    r_target = align_rotation(bq, zeta(k, tp))
    return log_so3(r_target @ r.T) / t, r_target


def tracking_accel(r, est, tp):
    """Body-frame acceleration driving ``q`` toward ``R bq_star``."""
    t = tp.t
    rt = r.T
    return (-(2.0 * tp.alpha / (t * t)) * (rt @ est.q - tp.bq_star)
            - (2.0 / t) * (rt @ est.vel))


def tracking_error(q, r, bq_star, alpha=None):
    e = np.asarray(q, dtype=float) - r @ np.asarray(bq_star, dtype=float)
    coeff = lyapunov_drift(alpha)[0] if alpha is not None else math.nan
    return TrackingDiagnostics(e, float(e @ e), coeff)
