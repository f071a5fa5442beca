"""Rotation, quaternion, and plane primitives.

Conventions used across the package: positions are in meters, angles in
radians. Quaternions are ``(w, x, y, z)`` with unit norm. Rotation
matrices are 3x3 with columns ``[v_x | v_y | v_z]`` and determinant +1.
All functions here are pure; nothing mutates its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, InvalidRotation

# Orthonormality tolerance for trajectory-level validation.
ROTATION_TOL = 1e-6
# Looser gate used by the quaternion conversion, which renormalizes anyway.
CONVERSION_TOL = 1e-4


def as_point(p) -> np.ndarray:
    """Coerce to a finite float64 3-vector."""
    a = np.asarray(p, dtype=float).reshape(3)
    if not np.all(np.isfinite(a)):
        raise DegenerateInput(f"point has non-finite components: {a}")
    return a


def rotation_defect(R: np.ndarray) -> float:
    """How far ``R`` is from SO(3): max of ||R^T R - I||_F and |det R - 1|."""
    R = np.asarray(R, dtype=float)
    ortho = float(np.linalg.norm(R.T @ R - np.eye(3)))
    det = abs(float(np.linalg.det(R)) - 1.0)
    return max(ortho, det)


def is_rotation(R, tol: float = ROTATION_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    return R.shape == (3, 3) and np.all(np.isfinite(R)) and rotation_defect(R) <= tol


def require_rotation(R, tol: float = CONVERSION_TOL) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise InvalidRotation(f"expected 3x3 matrix, got shape {R.shape}")
    defect = rotation_defect(R)
    if not np.isfinite(defect) or defect > tol:
        raise InvalidRotation(f"matrix is not a rotation (defect {defect:.3e} > {tol:.0e})")
    return R


def rotation_to_quat(R) -> np.ndarray:
    """Convert a rotation matrix to a unit quaternion (w, x, y, z).

    Uses the numerically stable branch on the largest diagonal term.
    Raises InvalidRotation when the matrix deviates from SO(3) by more
    than 1e-4.
    """
    R = require_rotation(R)
    t = np.trace(R)
    if t > 0.0:
        s = 2.0 * np.sqrt(1.0 + t)
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = np.array([(R[2, 1] - R[1, 2]) / s,
                      0.25 * s,
                      (R[0, 1] + R[1, 0]) / s,
                      (R[0, 2] + R[2, 0]) / s])
    elif R[1, 1] >= R[2, 2]:
        s = 2.0 * np.sqrt(1.0 - R[0, 0] + R[1, 1] - R[2, 2])
        q = np.array([(R[0, 2] - R[2, 0]) / s,
                      (R[0, 1] + R[1, 0]) / s,
                      0.25 * s,
                      (R[1, 2] + R[2, 1]) / s])
    else:
        s = 2.0 * np.sqrt(1.0 - R[0, 0] - R[1, 1] + R[2, 2])
        q = np.array([(R[1, 0] - R[0, 1]) / s,
                      (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s,
                      0.25 * s])
    return q / np.linalg.norm(q)


def quat_to_rotation(q) -> np.ndarray:
    """Convert a unit quaternion (w, x, y, z) to a rotation matrix."""
    q = np.asarray(q, dtype=float).reshape(4)
    n = np.linalg.norm(q)
    if not np.isfinite(n) or n == 0.0:
        raise InvalidRotation("quaternion has zero or non-finite norm")
    w, x, y, z = q / n
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def slerp(qi, qj, alpha: float) -> np.ndarray:
    """Spherical linear interpolation between unit quaternions.

    Follows the shorter geodesic: ``qj`` is negated first when
    dot(qi, qj) < 0. When the two inputs represent (nearly) the same
    rotation (|dot| > 1 - 1e-10) the arc is degenerate and ``qi`` is
    returned. alpha=0 gives qi, alpha=1 gives +-qj (same rotation).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    qi = np.asarray(qi, dtype=float).reshape(4)
    qj = np.asarray(qj, dtype=float).reshape(4)
    qi = qi / np.linalg.norm(qi)
    qj = qj / np.linalg.norm(qj)
    dot = float(qi @ qj)
    if dot < 0.0:
        qj = -qj
        dot = -dot
    if dot > 1.0 - 1e-10:
        return qi.copy()
    if alpha == 0.0:
        return qi.copy()
    if alpha == 1.0:
        return qj.copy()
    theta = np.arccos(np.clip(dot, -1.0, 1.0))
    s = np.sin(theta)
    out = (np.sin((1.0 - alpha) * theta) * qi + np.sin(alpha * theta) * qj) / s
    return out / np.linalg.norm(out)


@dataclass(frozen=True)
class Plane:
    """Plane n.p + b = 0 with unit normal ``normal`` and offset ``offset``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(3)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError(f"plane normal must be unit length, got |n|={np.linalg.norm(n)!r}")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    def signed_distance(self, points) -> np.ndarray:
        """n.p + b for one point (scalar) or an (N, 3) array."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.normal + self.offset


def fit_plane(points) -> Plane:
    """Least-squares plane through a point set.

    Minimizes sum (n.p + b)^2 subject to ||n|| = 1 via the
    eigendecomposition of the 3x3 covariance of the centered points; the
    normal is the eigenvector of the smallest eigenvalue. The normal sign
    is canonicalized so its largest-magnitude component is positive.

    Raises DegenerateInput for fewer than 3 points or a collinear set
    (rank < 2 after centering).
    """
    P = np.asarray(points, dtype=float).reshape(-1, 3)
    if P.shape[0] < 3:
        raise DegenerateInput(f"plane fit needs >= 3 points, got {P.shape[0]}")
    if not np.all(np.isfinite(P)):
        raise DegenerateInput("plane fit input contains non-finite points")
    centroid = P.mean(axis=0)
    Q = P - centroid
    if np.linalg.matrix_rank(Q) < 2:
        raise DegenerateInput("points are collinear; plane is not unique")
    cov = Q.T @ Q
    _, vecs = np.linalg.eigh(cov)  # eigenvalues ascending
    n = vecs[:, 0]
    k = int(np.argmax(np.abs(n)))
    if n[k] < 0:
        n = -n
    n = n / np.linalg.norm(n)
    return Plane(normal=n, offset=-float(n @ centroid))


def plane_residual(points, plane: Plane) -> float:
    """sqrt(sum (n.p + b)^2): equals the smallest singular value of the
    centered point matrix when ``plane`` is the least-squares fit."""
    d = plane.signed_distance(np.asarray(points, dtype=float).reshape(-1, 3))
    return float(np.sqrt(np.sum(d * d)))


def project_to_plane(p, plane: Plane) -> np.ndarray:
    """Orthogonal projection onto the plane; accepts (3,) or (N, 3)."""
    pts = np.asarray(p, dtype=float)
    d = plane.signed_distance(pts)
    return pts - np.multiply.outer(d, plane.normal)


def in_plane_basis(plane: Plane, points=None) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal chart (e1, e2) spanning the plane.

    When ``points`` is given, e1 follows the dominant in-plane spread of
    the point set (largest covariance eigenvector, sign-canonicalized);
    otherwise e1 derives from the coordinate axis least aligned with the
    normal. e2 = n x e1 completes the right-handed frame.
    """
    n = plane.normal
    if points is not None:
        P = np.asarray(points, dtype=float).reshape(-1, 3)
        Q = P - P.mean(axis=0)
        cov = Q.T @ Q
        _, vecs = np.linalg.eigh(cov)
        e1 = vecs[:, 2]
        e1 = e1 - (e1 @ n) * n  # guard against noisy near-degenerate spectra
        if np.linalg.norm(e1) < 1e-12:
            return in_plane_basis(plane)
    else:
        axis = np.zeros(3)
        axis[int(np.argmin(np.abs(n)))] = 1.0
        e1 = axis - (axis @ n) * n
    e1 = e1 / np.linalg.norm(e1)
    k = int(np.argmax(np.abs(e1)))
    if e1[k] < 0:
        e1 = -e1
    e2 = np.cross(n, e1)
    return e1, e2


def rotation_about_axis(axis, angle: float) -> np.ndarray:
    """Rotation matrix for a right-handed rotation about a unit axis."""
    a = np.asarray(axis, dtype=float).reshape(3)
    a = a / np.linalg.norm(a)
    c, s = np.cos(angle), np.sin(angle)
    K = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) * c + (1 - c) * np.outer(a, a) + s * K
