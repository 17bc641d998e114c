"""Rotation arithmetic on SO(3).

Rotations are plain ``(3, 3)`` float arrays mapping body-frame vectors into
the world frame.  Rotation vectors (axis * angle) are ``(3,)`` arrays.
"""

import numpy as np

SMALL_ANGLE = 1e-8
# below this norm of the antisymmetric part the rotation is treated as an
# exact half turn and the axis sign is fixed by convention
HALF_TURN_ANTISYM = 1e-10


def hat(w):
    """Skew-symmetric matrix such that ``hat(w) @ x == np.cross(w, x)``."""
    return np.array([[0.0, -w[2], w[1]],
                     [w[2], 0.0, -w[0]],
                     [-w[1], w[0], 0.0]])


def vee(m):
    """Inverse of :func:`hat` applied to the antisymmetric part of ``m``."""
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def exp_so3(w):
    """Rodrigues exponential of the rotation vector ``w``."""
    w = np.asarray(w, dtype=float)
    theta2 = float(w @ w)
    theta = np.sqrt(theta2)
    if theta < SMALL_ANGLE:
        a = 1.0 - theta2 / 6.0
        b = 0.5 - theta2 / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta2
    k = hat(w)
    return np.eye(3) + a * k + b * (k @ k)


def _canonical_sign(axis):
    for c in axis:
        if abs(c) > 1e-12:
            return axis if c > 0 else -axis
    return axis


def log_so3(r):
    """Principal logarithm of a rotation matrix; the angle lies in [0, pi].

    For exact half turns the axis is recovered from the symmetric part and
    its sign is chosen so that the first nonzero component is positive.
    """
    r = np.asarray(r, dtype=float)
    s_vec = vee(r)  # sin(theta) * axis
    s = float(np.linalg.norm(s_vec))
    c = 0.5 * (np.trace(r) - 1.0)
    theta = np.arctan2(s, c)
    if theta < SMALL_ANGLE:
        # first-order series: vee(R) ~ w (1 - theta^2/6)
        return s_vec * (1.0 + theta * theta / 6.0)
    if c > -0.5:
        return s_vec * (theta / s)
    # large angles: axis from the symmetric part, better conditioned near pi
    sym = 0.5 * (r + r.T) - c * np.eye(3)
    outer = sym / (1.0 - c)
    i = int(np.argmax(np.diag(outer)))
    axis = outer[:, i] / np.sqrt(outer[i, i])
    axis /= np.linalg.norm(axis)
    if s > HALF_TURN_ANTISYM:
        if axis @ s_vec < 0.0:
            axis = -axis
    else:
        axis = _canonical_sign(axis)
    return theta * axis


def quat_to_rotation(q):
    """Rotation matrix of a unit quaternion ``(w, x, y, z)``."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def random_rotation(rng):
    """Haar-uniform rotation from a normalised 4D Gaussian quaternion."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    return quat_to_rotation(q)


def orthonormalize(r):
    """Nearest rotation matrix in the Frobenius sense (polar factor)."""
    u, _, vt = np.linalg.svd(r)
    m = u @ vt
    if np.linalg.det(m) < 0:
        u[:, -1] = -u[:, -1]
        m = u @ vt
    return m


def is_rotation(r, tol=1e-9):
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or not np.all(np.isfinite(r)):
        return False
    return (np.linalg.norm(r.T @ r - np.eye(3)) <= tol
            and abs(np.linalg.det(r) - 1.0) <= tol)
