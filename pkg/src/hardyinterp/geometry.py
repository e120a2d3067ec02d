"""Points of the unit ball of C^n and of its boundary sphere.

Conventions
-----------
The Hermitian pairing conjugates its *first* argument:
``hermitian_inner(w, z) = sum(conj(w_j) * z_j)``, so the Cauchy kernel of a
pole ``a`` reads ``(1 - hermitian_inner(a, z)) ** -n``.

A ball point stores its unit direction and its gap ``1 - |a|`` separately.
Every quantity that degenerates near the sphere (``1 - conj(a).z``,
``1 - |a|**2``, pseudo-hyperbolic distances) is assembled from the gap, which
keeps relative accuracy for points far closer to the sphere than the 1e-16
spacing of floats near 1.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, InvalidArgumentError, InvalidPointError

#: Smallest gap accepted when a ball point is built from raw coordinates.
COORD_GAP_FLOOR = 1e-12

#: Quasi-triangle constant used for the admissibility region of the
#: smoothness estimate. Forced by sqrt(delta) being a metric.
QUASI_TRIANGLE_D = 2.0

_BOUNDARY_TOL = 1e-12


def _unit(n):
    e = np.zeros(n, dtype=complex)
    e[0] = 1.0
    return e


class Point:
    """A point of the open unit ball.

    Parameters
    ----------
    coords : array_like of complex
        Coordinates; ``|coords|`` must be below ``1 - 1e-12``. Use
        :meth:`from_gap` for points closer to the sphere.
    """

    __slots__ = ("direction", "gap")

    def __init__(self, coords):
        z = np.atleast_1d(np.asarray(coords, dtype=complex))
        if z.ndim != 1 or z.size == 0:
            raise InvalidPointError("a point needs a non-empty 1-d coordinate vector")
        r = float(np.linalg.norm(z))
        if not np.isfinite(r) or r >= 1.0 - COORD_GAP_FLOOR:
            raise InvalidPointError(f"|a| = {r!r} is not below 1 - {COORD_GAP_FLOOR:g}")
        self.direction = z / r if r > 0 else _unit(z.size)
        self.gap = 1.0 - r

    @classmethod
    def from_gap(cls, direction, gap):
        """Build ``(1 - gap) * direction / |direction|`` without rounding the gap.

        ``gap`` may be arbitrarily small but must be positive and at most 1.
        """
        u = np.atleast_1d(np.asarray(direction, dtype=complex))
        nu = float(np.linalg.norm(u))
        if u.ndim != 1 or nu == 0 or not np.isfinite(nu):
            raise InvalidPointError("direction must be a non-zero finite vector")
        gap = float(gap)
        if not (0.0 < gap <= 1.0):
            raise InvalidPointError(f"gap must lie in (0, 1], got {gap!r}")
        self = cls.__new__(cls)
        self.direction = u / nu
        self.gap = gap
        return self

    @property
    def n(self):
        return self.direction.size

    @property
    def radius(self):
        return 1.0 - self.gap

    @property
    def coords(self):
        return self.radius * self.direction

    @property
    def one_minus_sq(self):
        """``1 - |a|**2`` computed from the gap."""
        return self.gap * (2.0 - self.gap)

    def key(self):
        return (self.direction.tobytes(), self.gap)

    def __repr__(self):
        return f"Point(coords={self.coords!r}, gap={self.gap:.3e})"


class BoundaryPoint:
    """A point of the unit sphere; input is renormalized to unit length."""

    __slots__ = ("direction",)

    def __init__(self, coords):
        z = np.atleast_1d(np.asarray(coords, dtype=complex))
        r = float(np.linalg.norm(z))
        if z.ndim != 1 or r == 0 or not np.isfinite(r):
            raise InvalidPointError("a boundary point needs a non-zero finite vector")
        self.direction = z / r

    gap = 0.0
    radius = 1.0
    one_minus_sq = 0.0

    @property
    def n(self):
        return self.direction.size

    @property
    def coords(self):
        return self.direction

    def __repr__(self):
        return f"BoundaryPoint({self.direction!r})"


def as_point_arrays(x):
    """Return ``(directions, gaps)`` of shape ``(m, n)`` and ``(m,)``.

    Accepts a Point, a BoundaryPoint, a sequence of them, or a raw complex
    array whose rows are treated as boundary coordinates (renormalized).
    """
    if isinstance(x, (Point, BoundaryPoint)):
        return x.direction[None, :], np.array([x.gap])
    if isinstance(x, (list, tuple)) and x and isinstance(x[0], (Point, BoundaryPoint)):
        n = x[0].n
        if any(p.n != n for p in x):
            raise DimensionMismatchError("points of different dimensions")
        return (np.array([p.direction for p in x]), np.array([p.gap for p in x], dtype=float))
    z = np.asarray(x, dtype=complex)
    if z.ndim == 1:
        z = z[None, :]
    r = np.linalg.norm(z, axis=1)
    if np.any(r == 0):
        raise InvalidPointError("zero vector cannot be a boundary point")
    return z / r[:, None], np.zeros(z.shape[0])


def _check_dims(u, v):
    if u.shape[-1] != v.shape[-1]:
        raise DimensionMismatchError(
            f"incompatible ambient dimensions {u.shape[-1]} and {v.shape[-1]}")


def one_minus_omega(u, v):
    """``1 - conj(u_i).v_j`` for unit vectors, accurate when ``u_i ~ v_j``.

    Uses ``Re(1 - conj(u).v) = |u - v|**2 / 2``; the direct difference is only
    recomputed on entries where cancellation would bite.
    """
    _check_dims(u, v)
    omega = np.conj(u) @ v.T
    re = 1.0 - omega.real
    close = re < 1e-3
    if np.any(close):
        i, j = np.nonzero(close)
        diff = u[i] - v[j]
        re[i, j] = 0.5 * np.sum(diff.real ** 2 + diff.imag ** 2, axis=1)
    return re - 1j * omega.imag, omega


def one_minus_inner(x, y):
    """Matrix of ``1 - conj(x_i).y_j`` for two point sets (see :func:`as_point_arrays`)."""
    ux, gx = as_point_arrays(x)
    uy, gy = as_point_arrays(y)
    om, omega = one_minus_omega(ux, uy)
    one_minus_rr = gx[:, None] + gy[None, :] - gx[:, None] * gy[None, :]
    out = one_minus_rr * omega + om
    out[one_minus_rr == 1.0] = 1.0     # one of the two is the origin
    return out


def hermitian_inner(w, z):
    """``sum_j conj(w_j) z_j`` for two points or raw vectors."""
    wc = w.coords if isinstance(w, (Point, BoundaryPoint)) else np.atleast_1d(np.asarray(w, complex))
    zc = z.coords if isinstance(z, (Point, BoundaryPoint)) else np.atleast_1d(np.asarray(z, complex))
    if wc.shape != zc.shape:
        raise DimensionMismatchError(f"incompatible ambient dimensions {wc.size} and {zc.size}")
    return complex(np.vdot(wc, zc))


def pseudo_distance(zeta, z):
    """``|1 - conj(zeta).z|``; accepts points or raw vectors."""
    if isinstance(zeta, (Point, BoundaryPoint)) and isinstance(z, (Point, BoundaryPoint)):
        return float(abs(one_minus_inner(zeta, z)[0, 0]))
    return float(abs(1.0 - hermitian_inner(zeta, z)))


def metric_d(zeta, z):
    return float(np.sqrt(pseudo_distance(zeta, z)))


def pseudo_distance_matrix(x, y):
    return np.abs(one_minus_inner(x, y))


def quasi_triangle_ratio(samples, return_skipped=False):
    """Largest ``delta(a, b) / (delta(a, c) + delta(c, b))`` over boundary triples.

    ``samples`` is an array of shape ``(T, 3, n)`` (rows a, b, c) or a list of
    triples. Triples with a zero denominator are skipped and counted.
    """
    arr = np.asarray([[np.asarray(getattr(p, "coords", p), complex) for p in t] for t in samples]
                     if not isinstance(samples, np.ndarray) else samples, dtype=complex)
    if arr.size == 0:
        raise InvalidArgumentError("quasi_triangle_ratio needs at least one triple")
    arr = arr / np.linalg.norm(arr, axis=2, keepdims=True)
    a, b, c = arr[:, 0], arr[:, 1], arr[:, 2]

    def delta(x, y):
        d = x - y
        re = 0.5 * np.sum(d.real ** 2 + d.imag ** 2, axis=1)
        im = np.sum(np.conj(x) * y, axis=1).imag
        return np.hypot(re, im)

    num = delta(a, b)
    den = delta(a, c) + delta(c, b)
    ok = den > 0
    skipped = int(np.count_nonzero(~ok))
    ratio = float(np.max(num[ok] / den[ok])) if np.any(ok) else 0.0
    return (ratio, skipped) if return_skipped else ratio


def pseudo_hyperbolic(a, b):
    """Pseudo-hyperbolic distance ``sqrt(1 - (1-|a|^2)(1-|b|^2)/|1-conj(a).b|^2)``.

    The numerator ``|1-conj(a).b|^2 - (1-|a|^2)(1-|b|^2)`` is expanded as
    ``|a-b|^2 - |a|^2|b|^2 (1 - |<u_a,u_b>|^2)`` so nearby points keep precision.
    """
    om = one_minus_inner(a, b)[0, 0]
    ra, rb = 1.0 - a.gap, 1.0 - b.gap
    du = a.direction - b.direction
    diff2 = (a.gap - b.gap) ** 2 + ra * rb * float(np.sum(np.abs(du) ** 2))
    ua, ub = a.direction, b.direction
    outer = np.outer(ua, ub)
    wedge2 = float(np.sum(np.abs(outer - outer.T) ** 2)) / 2.0
    num = max(diff2 - (ra * rb) ** 2 * wedge2, 0.0)
    return float(np.sqrt(num) / abs(om))


def random_sphere(n, count, rng):
    """``count`` points uniform on the sphere of C^n, shape ``(count, n)``."""
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def random_unitary(n, rng):
    """A Haar-distributed unitary matrix of size n."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def rotate(U, point):
    """Apply a unitary matrix to a point, preserving its gap exactly."""
    if isinstance(point, Point):
        return Point.from_gap(U @ point.direction, point.gap)
    return BoundaryPoint(U @ point.direction)


def frame_from(v):
    """A unitary matrix whose first column is the unit vector ``v``."""
    v = np.asarray(v, dtype=complex)
    n = v.size
    m = np.column_stack([v, np.eye(n, dtype=complex)])
    q, r = np.linalg.qr(m)
    q = q[:, :n]
    # fix the phase so that the first column is exactly v
    ph = np.vdot(q[:, 0], v)
    q[:, 0] = q[:, 0] * ph / abs(ph)
    return q
