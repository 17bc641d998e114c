"""Two-sonar range simulation and the squared-range-difference measurement.

Half the difference of the squared ranges from two sensors straddling the
vehicle is linear in the relative position::

    Y = 0.5 (d1^2 - d2^2) = (R bq)^T q + noise

which lets an ordinary Kalman filter run on range-only data.
"""

from dataclasses import dataclass
import math

import numpy as np

GAMMA_MIN = 1e-12


@dataclass(frozen=True)
class SensorRig:
    """Sensor baseline ``bq`` (s2 -> s1, body frame), pings per sample and
    range-noise variances of each sensor."""
    bq: np.ndarray
    f: int = 1
    eta1: float = 0.0
    eta2: float = 0.0

    def __post_init__(self):
        bq = np.asarray(self.bq, dtype=float)
        if bq.shape != (3,) or not np.linalg.norm(bq) > 0:
            raise ValueError("baseline bq must be a nonzero 3-vector")
        if int(self.f) < 1:
            raise ValueError(f"pings per sample must be >= 1, got {self.f}")
        if self.eta1 < 0 or self.eta2 < 0:
            raise ValueError("range-noise variances must be >= 0")
        object.__setattr__(self, "bq", bq)
        object.__setattr__(self, "f", int(self.f))

    @property
    def baseline(self):
        return float(np.linalg.norm(self.bq))


@dataclass(frozen=True)
class LinearizedMeasurement:
    Y: float
    C: np.ndarray  # (6,) row, velocity block zero
    m: float
    Gamma: float


def sensor_positions(p, r, rig):
    half = 0.5 * (r @ rig.bq)
    return p + half, p - half


def measure_ranges(p_s, p_target, eta, f, rng):
    """``f`` noisy range pings; negative values are clamped to zero."""
    diff = np.asarray(p_s, dtype=float) - p_target
    d = math.sqrt(diff @ diff)
    pings = d + math.sqrt(eta) * rng.standard_normal(int(f))
    return np.maximum(pings, 0.0, out=pings)


def noise_variance(pings1, pings2, eta1, eta2):
    """Variance of the linearised measurement noise.

    The mean-square minus eta factor estimates the true squared range and is
    floored at zero; the total is floored at ``GAMMA_MIN``.
    """
    ms1 = max(float(pings1 @ pings1) / len(pings1) - eta1, 0.0)
    ms2 = max(float(pings2 @ pings2) / len(pings2) - eta2, 0.0)
    return 2 * eta1**2 + 2 * eta2**2 + 4 * ms1 * eta1 + 4 * ms2 * eta2


def linearize(pings1, pings2, r, rig):
    if len(pings1) == 0 or len(pings2) == 0:
        raise ValueError("ping sets must be nonempty")
    d1 = float(pings1[0])
    d2 = float(pings2[0])
    C = np.zeros(6)
    C[:3] = r @ rig.bq
    gamma = noise_variance(pings1, pings2, rig.eta1, rig.eta2)
    return LinearizedMeasurement(
        Y=0.5 * (d1 * d1 - d2 * d2),
        C=C,
        m=rig.eta1 + rig.eta2,
        Gamma=max(gamma, GAMMA_MIN),
    )


def sense(p, r, p_target, rig, rng):
    """Ping both sensors from the current geometry and linearise."""
    s1, s2 = sensor_positions(p, r, rig)
    pings1 = measure_ranges(s1, p_target, rig.eta1, rig.f, rng)
    pings2 = measure_ranges(s2, p_target, rig.eta2, rig.f, rng)
    return linearize(pings1, pings2, r, rig)
