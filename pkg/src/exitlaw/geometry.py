"""Domain descriptors: balls and axis-aligned boxes.

Both families are open, bounded, and regular by construction, which is
exactly what the exit samplers require. Two kinds of API live here:

* scalar operations (``contains``, ``distance_to_boundary``,
  ``project_to_boundary``, ``intersect_segment_with_boundary``) that
  validate their inputs at every call boundary — silent broadcasting is
  the classic failure mode of dimension-generic geometry, so dimension
  mismatches raise immediately;
* ``*_many`` batch variants operating on (m, d) arrays, used by the
  vectorized sampling kernels. They validate the array shape once and
  are bit-identical to mapping the scalar operation over rows.

All operations are dimension-generic; nothing in this module special
cases d.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np


def as_point(p, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float64 vector, optionally of dimension dim."""
    q = np.asarray(p, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] < 1:
        raise ValueError(f"point must be a 1-D vector, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError(f"point has non-finite coordinates: {q}")
    if dim is not None and q.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {q.shape[0]}")
    return q


class Domain(abc.ABC):
    """A bounded open regular domain in R^d."""

    dimension: int

    @abc.abstractmethod
    def contains(self, p) -> bool:
        """True iff p lies strictly inside the open domain."""

    @abc.abstractmethod
    def distance_to_boundary(self, p) -> float:
        """Euclidean distance from an interior point to the boundary."""

    @abc.abstractmethod
    def project_to_boundary(self, p) -> np.ndarray:
        """Nearest boundary point to an interior point (deterministic ties)."""

    @abc.abstractmethod
    def diameter(self) -> float:
        """Diameter of the domain (supremum of pairwise distances)."""

    # -- batch variants ------------------------------------------------

    @abc.abstractmethod
    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask: rows strictly inside the open domain."""

    @abc.abstractmethod
    def exited_many(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask: rows strictly outside the closed domain."""

    @abc.abstractmethod
    def distance_to_boundary_many(self, pts: np.ndarray) -> np.ndarray:
        ...

    @abc.abstractmethod
    def project_to_boundary_many(self, pts: np.ndarray) -> np.ndarray:
        ...

    @abc.abstractmethod
    def crossing_many(self, inside: np.ndarray, outside: np.ndarray):
        """Boundary crossings of segments inside->outside.

        Returns (points, t) where points[i] lies on the boundary and
        t[i] in (0, 1] is the segment parameter of the crossing.
        """

    @abc.abstractmethod
    def project_outside_many(self, pts: np.ndarray) -> np.ndarray:
        """Nearest boundary point for each row lying outside the closed domain."""

    # -- scalar wrappers built on the batch kernels ---------------------

    def intersect_segment_with_boundary(self, inside, outside) -> np.ndarray:
        """The unique boundary crossing of the segment (inside, outside).

        ``inside`` must lie strictly inside the open domain and
        ``outside`` strictly outside it (a point exactly on the boundary
        counts as outside the open domain and yields t = 1).
        """
        a = as_point(inside, self.dimension)
        b = as_point(outside, self.dimension)
        if not self.contains(a):
            raise ValueError(f"segment start {a} is not strictly inside the domain")
        if self.contains(b):
            raise ValueError(f"segment end {b} is inside the domain; no crossing")
        pts, _ = self.crossing_many(a[None, :], b[None, :])
        return pts[0]

    def _check_batch(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.dimension:
            raise ValueError(
                f"expected (m, {self.dimension}) array, got shape {pts.shape}")
        return pts


@dataclass(frozen=True)
class Ball(Domain):
    """Open ball: all points within ``radius`` of ``center``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_point(self.center)
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        if not np.isfinite(self.radius) or self.radius <= 0:
            raise ValueError(f"radius must be positive and finite, got {self.radius}")

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    # Scalar ops delegate to the batch ops on a one-row array so that the
    # two agree bit-for-bit (dot and einsum reductions may round apart).

    def contains(self, p) -> bool:
        q = as_point(p, self.dimension)
        return bool(self.contains_many(q[None, :])[0])

    def distance_to_boundary(self, p) -> float:
        q = as_point(p, self.dimension)
        dist = float(self.distance_to_boundary_many(q[None, :])[0])
        if dist <= 0:
            raise ValueError(f"point {p} is not strictly inside the ball")
        return dist

    def project_to_boundary(self, p) -> np.ndarray:
        q = as_point(p, self.dimension)
        if not self.contains(q):
            # On the boundary (or outside by rounding): nothing to project.
            v = q - self.center
            rho = float(np.sqrt(np.einsum("ij,ij->i", v[None, :], v[None, :])[0]))
            if rho <= (1.0 + 1e-12) * self.radius:
                return q.copy()
            raise ValueError(f"point {p} is outside the ball")
        return self.project_to_boundary_many(q[None, :])[0]

    def _land_on_boundary(self, v, rho):
        """Map interior offsets v (rows, with norms rho > 0) radially onto
        the sphere, guaranteeing the result is NOT strictly inside.

        The rounded ``c + (r/rho) v`` can fall a last-bit inside the open
        ball, which would make ``contains`` accept a "boundary" point;
        nudge the scale up by ulps until the open-set test rejects it.
        """
        s = self.radius / rho
        q = self.center + v * s[:, None]
        while True:
            w = q - self.center
            bad = np.einsum("ij,ij->i", w, w) < self.radius * self.radius
            if not bad.any():
                return q
            s = np.where(bad, np.nextafter(s, np.inf), s)
            q = self.center + v * s[:, None]

    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains_many(self, pts):
        pts = self._check_batch(pts)
        v = pts - self.center
        return np.einsum("ij,ij->i", v, v) < self.radius * self.radius

    def exited_many(self, pts):
        pts = self._check_batch(pts)
        v = pts - self.center
        return np.einsum("ij,ij->i", v, v) > self.radius * self.radius

    def distance_to_boundary_many(self, pts):
        pts = self._check_batch(pts)
        v = pts - self.center
        return self.radius - np.sqrt(np.einsum("ij,ij->i", v, v))

    def project_to_boundary_many(self, pts):
        pts = self._check_batch(pts)
        v = pts - self.center
        rho = np.sqrt(np.einsum("ij,ij->i", v, v))
        tie = rho == 0.0
        if tie.any():
            v = v.copy()
            v[tie, 0] = 1.0
            rho = np.where(tie, 1.0, rho)
        return self._land_on_boundary(v, rho)

    def project_outside_many(self, pts):
        # Radial projection is the nearest-point map from either side.
        return self.project_to_boundary_many(pts)

    def crossing_many(self, inside, outside):
        a = self._check_batch(inside) - self.center
        b = self._check_batch(outside) - self.center
        v = b - a
        # ||a + t v||^2 = r^2: the positive root, in the cancellation-free form.
        A = np.einsum("ij,ij->i", v, v)
        B = 2.0 * np.einsum("ij,ij->i", a, v)
        C = np.einsum("ij,ij->i", a, a) - self.radius * self.radius
        disc = np.sqrt(B * B - 4.0 * A * C)
        t = np.where(B > 0, -2.0 * C / (disc + B), (disc - B) / (2.0 * A))
        pts = self.center + a + t[:, None] * v
        return pts, t


@dataclass(frozen=True)
class BoxDomain(Domain):
    """Open axis-aligned box: lower[i] < p[i] < upper[i] for all i."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_point(self.lower)
        hi = as_point(self.upper, lo.shape[0])
        if not np.all(lo < hi):
            raise ValueError(f"box requires lower < upper componentwise: {lo} vs {hi}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    def contains(self, p) -> bool:
        q = as_point(p, self.dimension)
        return bool(np.all(q > self.lower) and np.all(q < self.upper))

    def distance_to_boundary(self, p) -> float:
        q = as_point(p, self.dimension)
        dist = float(min(np.min(q - self.lower), np.min(self.upper - q)))
        if dist <= 0:
            raise ValueError(f"point {p} is not strictly inside the box")
        return dist

    def project_to_boundary(self, p) -> np.ndarray:
        q = as_point(p, self.dimension)
        face_dists = self._face_distances(q[None, :])[0]
        if np.min(face_dists) < 0:
            raise ValueError(f"point {p} is outside the box")
        j = int(np.argmin(face_dists))  # first minimum: lowest coord, lower face first
        out = q.copy()
        out[j >> 1] = self.upper[j >> 1] if j & 1 else self.lower[j >> 1]
        return out

    def diameter(self) -> float:
        v = self.upper - self.lower
        return float(np.sqrt(v @ v))

    def _face_distances(self, pts):
        # Faces ordered (coord 0 lower, coord 0 upper, coord 1 lower, ...):
        # argmin over this layout implements the documented tie-breaking.
        m, d = pts.shape
        out = np.empty((m, 2 * d))
        out[:, 0::2] = pts - self.lower
        out[:, 1::2] = self.upper - pts
        return out

    def contains_many(self, pts):
        pts = self._check_batch(pts)
        return np.all((pts > self.lower) & (pts < self.upper), axis=1)

    def exited_many(self, pts):
        pts = self._check_batch(pts)
        return np.any((pts < self.lower) | (pts > self.upper), axis=1)

    def distance_to_boundary_many(self, pts):
        pts = self._check_batch(pts)
        return self._face_distances(pts).min(axis=1)

    def project_to_boundary_many(self, pts):
        pts = self._check_batch(pts)
        j = np.argmin(self._face_distances(pts), axis=1)
        out = pts.copy()
        coord = j >> 1
        rows = np.arange(pts.shape[0])
        out[rows, coord] = np.where(j & 1, self.upper[coord], self.lower[coord])
        return out

    def project_outside_many(self, pts):
        # Clamping an exterior point into the closed box lands on its surface.
        pts = self._check_batch(pts)
        return np.clip(pts, self.lower, self.upper)

    def crossing_many(self, inside, outside):
        a = self._check_batch(inside)
        b = self._check_batch(outside)
        v = b - a
        with np.errstate(divide="ignore", invalid="ignore"):
            t_exit = np.where(
                v > 0, (self.upper - a) / v,
                np.where(v < 0, (self.lower - a) / v, np.inf))
        t = t_exit.min(axis=1)
        axis = np.argmin(t_exit, axis=1)
        pts = a + t[:, None] * v
        rows = np.arange(a.shape[0])
        # Snap the crossing coordinate onto the face it crossed.
        pts[rows, axis] = np.where(v[rows, axis] > 0, self.upper[axis], self.lower[axis])
        return pts, t
