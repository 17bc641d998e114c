import numpy as np
import pytest

from rangetrack.dynamics import (BodyState, DynamicsParams, RelativeState,
                                 TargetNoise, TargetState, sample_target_accel,
                                 step_relative, step_target, step_uuv)
from rangetrack.so3 import random_rotation

DP = DynamicsParams(0.5)
ZERO = np.zeros(3)


def test_matrices_shape_and_blocks():
    A, B = DP.A, DP.B
    assert A.shape == (6, 6) and B.shape == (6, 3)
    assert np.array_equal(A[:3, 3:], 0.5 * np.eye(3))
    assert np.array_equal(B[:3], 0.125 * np.eye(3))
    assert np.array_equal(B[3:], 0.5 * np.eye(3))
    assert np.isclose(np.linalg.det(A), 1.0)


@pytest.mark.parametrize("t", [0.0, -1.0, np.inf])
def test_bad_period_rejected(t):
    with pytest.raises(ValueError):
        DynamicsParams(t)


def test_uuv_fixed_point():
    x = BodyState(np.array([1.0, 2.0, 3.0]), ZERO)
    r = np.eye(3)
    x2, r2 = step_uuv(x, r, ZERO, ZERO, DP)
    assert np.array_equal(x2.p, x.p) and np.array_equal(x2.v, x.v)
    assert np.array_equal(r2, r)


def test_uuv_constant_velocity():
    x2, _ = step_uuv(BodyState(ZERO, np.array([1.0, 0, 0])), np.eye(3), ZERO, ZERO, DP)
    assert np.allclose(x2.p, [0.5, 0, 0]) and np.allclose(x2.v, [1, 0, 0])


def test_uuv_unit_accel():
    x2, _ = step_uuv(BodyState(ZERO, ZERO), np.eye(3), np.array([1.0, 0, 0]), ZERO, DP)
    assert np.allclose(x2.p, [0.125, 0, 0], atol=1e-15)
    assert np.allclose(x2.v, [0.5, 0, 0], atol=1e-15)


def test_uuv_rotates_body_accel(rng):
    r = random_rotation(rng)
    u1 = np.array([0.3, -1.0, 2.0])
    x2, _ = step_uuv(BodyState(ZERO, ZERO), r, u1, ZERO, DP)
    assert np.allclose(x2.v, 0.5 * r @ u1, atol=1e-15)


def test_block_form_matches_matrix_form(rng):
    for _ in range(1000):
        r = random_rotation(rng)
        x = BodyState(rng.normal(size=3) * 10, rng.normal(size=3))
        u1 = rng.normal(size=3)
        x2, _ = step_uuv(x, r, u1, ZERO, DP)
        ref = DP.A @ x.as_vector() + DP.B @ (r @ u1)
        assert np.max(np.abs(x2.as_vector() - ref)) <= 1e-15 * max(1.0, np.max(np.abs(ref)))


def test_target_paper_initial_step():
    xt = step_target(TargetState(np.array([1.0, 2, 2]), np.array([0.02, 0.1, 0.1])), ZERO, DP)
    assert np.allclose(xt.p, [1.01, 2.05, 2.05], atol=1e-15)
    assert np.array_equal(xt.v, [0.02, 0.1, 0.1])


def test_target_accel_step():
    xt = step_target(TargetState(ZERO, ZERO), np.array([0.0, 0, 2]), DP)
    assert np.allclose(xt.p, [0, 0, 0.25]) and np.allclose(xt.v, [0, 0, 1])


def test_relative_fixed_and_constant_velocity():
    rel = RelativeState(np.array([1.0, 0, 0]), ZERO)
    assert np.array_equal(step_relative(rel, np.eye(3), ZERO, ZERO, DP).q, rel.q)
    rel = RelativeState(np.array([1.0, 0, 0]), np.array([0.0, 1, 0]))
    assert np.allclose(step_relative(rel, np.eye(3), ZERO, ZERO, DP).q, [1, 0.5, 0])


def test_relative_speed_conserved_without_inputs(rng):
    rel = RelativeState(rng.normal(size=3), rng.normal(size=3))
    speed = np.linalg.norm(rel.vel)
    for _ in range(1000):
        rel = step_relative(rel, np.eye(3), ZERO, ZERO, DP)
    assert np.linalg.norm(rel.vel) == speed


def test_relative_is_difference_of_absolute(rng):
    for _ in range(2000):
        r = random_rotation(rng)
        x = BodyState(rng.normal(size=3) * 5, rng.normal(size=3))
        xt = TargetState(rng.normal(size=3) * 5, rng.normal(size=3))
        u1, ub = rng.normal(size=3), rng.normal(size=3)
        x2, _ = step_uuv(x, r, u1, rng.normal(size=3), DP)
        xt2 = step_target(xt, ub, DP)
        rel2 = step_relative(RelativeState.between(x, xt), r, u1, ub, DP)
        assert np.max(np.abs(rel2.as_vector() - RelativeState.between(x2, xt2).as_vector())) <= 1e-12


def test_target_noise_validation():
    with pytest.raises(ValueError):
        TargetNoise(np.diag([1.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        TargetNoise(np.array([[1.0, 0.5, 0], [0, 1, 0], [0, 0, 1]]))
    tn = TargetNoise(np.diag([0.004, 0.001, 0.001]))
    assert tn.sigma_lo == pytest.approx(0.001) and tn.sigma_hi == pytest.approx(0.004)


@pytest.mark.parametrize("W", [0.002 * np.eye(3), np.diag([0.004, 0.001, 0.001]),
                               np.array([[2.0, 0.5, 0], [0.5, 1.0, 0.2], [0, 0.2, 0.5]])])
def test_target_accel_sample_covariance(W):
    tn = TargetNoise(W)
    rng = np.random.default_rng(99)
    draws = np.array([sample_target_accel(tn, rng) for _ in range(100_000)])
    cov = np.cov(draws.T)
    assert np.all(np.abs(np.diag(cov) - np.diag(W)) <= 0.05 * np.diag(W))
    scale = np.sqrt(np.outer(np.diag(W), np.diag(W)))
    assert np.all(np.abs(cov - W) <= 0.05 * scale)


def test_target_accel_deterministic():
    tn = TargetNoise(np.eye(3))
    a = np.random.default_rng(5)
    b = np.random.default_rng(5)
    for _ in range(50):
        assert np.array_equal(sample_target_accel(tn, a), sample_target_accel(tn, b))
