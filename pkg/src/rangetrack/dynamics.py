"""Double-integrator kinematics for the vehicle, the target and their
relative state.

States are stored as ``(p, v)`` pairs of 3-vectors.  The block update
``p' = p + t v + t^2/2 a``, ``v' = v + t a`` is used everywhere; the 6x6
matrices are kept for the filter and for cross-checks.
"""

from dataclasses import dataclass

import numpy as np

from .so3 import exp_so3


@dataclass(frozen=True)
class BodyState:
    p: np.ndarray
    v: np.ndarray

    def as_vector(self):
        return np.concatenate([self.p, self.v])


# The target uses the same (position, velocity) layout.
TargetState = BodyState


@dataclass(frozen=True)
class RelativeState:
    """Relative position ``q = p - p_target`` and velocity ``vel = v - v_target``."""
    q: np.ndarray
    vel: np.ndarray

    def as_vector(self):
        return np.concatenate([self.q, self.vel])

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(x[:3].copy(), x[3:6].copy())

    @classmethod
    def between(cls, body, target):
        return cls(body.p - target.p, body.v - target.v)


@dataclass(frozen=True)
class DynamicsParams:
    t: float

    def __post_init__(self):
        if not (self.t > 0 and np.isfinite(self.t)):
            raise ValueError(f"sampling period must be positive, got {self.t}")
        # det(A) == 1 for every t
        assert abs(np.linalg.det(self.A) - 1.0) < 1e-9

    @property
    def A(self):
        t = self.t
        a = np.eye(6)
        a[:3, 3:] = t * np.eye(3)
        return a

    @property
    def B(self):
        t = self.t
        return np.vstack([0.5 * t * t * np.eye(3), t * np.eye(3)])


@dataclass(frozen=True)
class TargetNoise:
    """Gaussian target acceleration with covariance ``W``.

    ``sigma_lo``/``sigma_hi`` are the extreme eigenvalues of ``W``.
    """
    W: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        if W.shape != (3, 3):
            raise ValueError(f"W must be 3x3, got shape {W.shape}")
        if np.max(np.abs(W - W.T)) > 1e-12:
            raise ValueError("W must be symmetric")
        try:
            chol = np.linalg.cholesky(W)
        except np.linalg.LinAlgError as exc:
            raise ValueError("W must be positive definite") from exc
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "_chol", chol)

    @property
    def chol(self):
        return self._chol

    @property
    def sigma_lo(self):
        return float(np.linalg.eigvalsh(self.W)[0])

    @property
    def sigma_hi(self):
        return float(np.linalg.eigvalsh(self.W)[-1])


def _propagate(p, v, accel, t):
    return p + t * v + (0.5 * t * t) * accel, v + t * accel


def step_uuv(x, r, u1, u2, dp):
    """Advance vehicle state and attitude one sample.

    ``u1`` is body-frame acceleration, ``u2`` body angular velocity.
    """
    p, v = _propagate(x.p, x.v, r @ u1, dp.t)
    return BodyState(p, v), exp_so3(np.asarray(u2, dtype=float) * dp.t) @ r


def sample_target_accel(tn, rng):
    return tn.chol @ rng.standard_normal(3)


def step_target(x, u_target, dp):
    p, v = _propagate(x.p, x.v, np.asarray(u_target, dtype=float), dp.t)
    return TargetState(p, v)


def step_relative(rel, r, u1, u_target, dp):
    q, vel = _propagate(rel.q, rel.vel, r @ u1 - u_target, dp.t)
    return RelativeState(q, vel)
