"""Finite point sequences in the ball and the standard test families."""

from __future__ import annotations

import logging

import numpy as np

from .errors import DegenerateSequenceError, InfeasibleSeparationError, InvalidArgumentError
from .geometry import Point, as_point_arrays, one_minus_omega

logger = logging.getLogger(__name__)

#: Pairs closer than this pseudo-hyperbolic distance are treated as duplicates.
DUPLICATE_FLOOR = 1e-6


def pseudo_hyperbolic_matrix(points):
    """Pairwise pseudo-hyperbolic distances, computed without cancellation."""
    u, g = as_point_arrays(list(points))
    om_dir, omega = one_minus_omega(u, u)
    r = 1.0 - g
    rr = r[:, None] * r[None, :]
    one_minus_rr = g[:, None] + g[None, :] - g[:, None] * g[None, :]
    om = one_minus_rr * omega + om_dir
    du2 = 2.0 * om_dir.real                      # |u_a - u_b|^2
    wedge2 = np.clip(2.0 * om_dir.real - np.abs(om_dir) ** 2, 0.0, None)  # 1 - |omega|^2
    num = (g[:, None] - g[None, :]) ** 2 + rr * du2 - rr ** 2 * wedge2
    rho = np.sqrt(np.clip(num, 0.0, None)) / np.abs(om)
    np.fill_diagonal(rho, 0.0)
    return np.minimum(rho, 1.0)


class PointSequence:
    """An ordered finite sequence of distinct ball points.

    Parameters
    ----------
    points : list of Point
    metadata : dict, optional
        Generator tag and parameters, carried into reports.
    separation_floor : float
        Sequences whose separation (see :attr:`separation`) is below this value
        are accepted but flagged.
    """

    def __init__(self, points, metadata=None, separation_floor=1.0 + 1e-3):
        points = list(points)
        if not points:
            raise InvalidArgumentError("a sequence needs at least one point")
        n = points[0].n
        if any(p.n != n for p in points):
            raise InvalidArgumentError("all points must share the ambient dimension")
        self.points = points
        self.n = n
        self.metadata = dict(metadata or {})
        if len(points) > 1:
            rho = pseudo_hyperbolic_matrix(points)
            iu = np.triu_indices(len(points), 1)
            k = int(np.argmin(rho[iu]))
            self.closest_pair = (int(iu[0][k]), int(iu[1][k]))
            self.min_distance = float(rho[iu][k])
        else:
            self.closest_pair = None
            self.min_distance = 1.0
        if self.min_distance == 0.0:
            raise DegenerateSequenceError(
                f"points {self.closest_pair} coincide", pair=self.closest_pair,
                distance=0.0, near_duplicate=True)
        # |1 - conj(a).b| / sqrt((1-|a|^2)(1-|b|^2)) = 1/sqrt(1 - rho^2)
        self.separation = float(1.0 / np.sqrt(1.0 - min(self.min_distance, 1 - 1e-16) ** 2))
        self.flagged = self.separation < separation_floor

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def weights(self):
        """``(1 - |a|^2)^n`` for each point."""
        return np.array([p.one_minus_sq ** self.n for p in self.points])

    def prefix(self, count):
        return PointSequence(self.points[:count], {**self.metadata, "N": count})

    def rotated(self, U):
        from .geometry import rotate
        return PointSequence([rotate(U, p) for p in self.points], self.metadata)

    def __repr__(self):
        return f"PointSequence(n={self.n}, N={len(self)}, metadata={self.metadata})"


def _axis(n, phase=0.0):
    e = np.zeros(n, dtype=complex)
    e[0] = np.exp(1j * phase) if phase else 1.0
    return e


def radial(c, N, n=1):
    """``a_k = (1 - c^k) e_1`` for k = 1..N."""
    if not (0 < c < 1):
        raise InvalidArgumentError("c must lie in (0, 1)")
    pts = [Point.from_gap(_axis(n), c ** k) for k in range(1, N + 1)]
    return PointSequence(pts, {"generator": "radial", "c": c, "N": N, "n": n})


def spiral(c, turns, N, n=1):
    """Radii of :func:`radial`, angle ``2 pi turns k / N`` in the first coordinate."""
    if not (0 < c < 1):
        raise InvalidArgumentError("c must lie in (0, 1)")
    pts = [Point.from_gap(_axis(n, 2 * np.pi * turns * k / N), c ** k) for k in range(1, N + 1)]
    return PointSequence(pts, {"generator": "spiral", "c": c, "turns": turns, "N": N, "n": n})


def accumulating(exponent, N, n=1):
    """``a_k = (1 - k^-exponent) e_1``; not separated, accumulates at e_1."""
    if exponent <= 0:
        raise InvalidArgumentError("exponent must be positive")
    pts = [Point.from_gap(_axis(n), float(k) ** -exponent) for k in range(1, N + 1)]
    return PointSequence(pts, {"generator": "accumulating", "exponent": exponent, "N": N, "n": n})


def random_separated(sep, N, seed, n=1, max_attempts=10 ** 6):
    """Rejection sampling with ``|1-conj(a).b| / sqrt((1-|a|^2)(1-|b|^2)) >= 1 + sep``.

    Gaps are log-uniform on [1e-3, 1], directions uniform on the sphere.
    """
    if sep <= 0:
        raise InvalidArgumentError("sep must be positive")
    rng = np.random.default_rng(seed)
    rho_min = np.sqrt(1.0 - 1.0 / (1.0 + sep) ** 2)
    pts = []
    for _ in range(max_attempts):
        if len(pts) == N:
            break
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        cand = Point.from_gap(z, 10.0 ** rng.uniform(-3.0, 0.0))
        if pts:
            rho = pseudo_hyperbolic_matrix(pts + [cand])[-1, :-1]
            if np.min(rho) < rho_min:
                continue
        pts.append(cand)
    if len(pts) < N:
        raise InfeasibleSeparationError(
            f"placed {len(pts)} of {N} points with separation {1 + sep} "
            f"after {max_attempts} attempts")
    return PointSequence(pts, {"generator": "random_separated", "sep": sep, "N": N,
                               "seed": seed, "n": n})


def explicit(points):
    pts = [p if isinstance(p, Point) else Point(p) for p in points]
    return PointSequence(pts, {"generator": "explicit", "N": len(pts), "n": pts[0].n})


GENERATORS = {
    "radial": radial,
    "spiral": spiral,
    "accumulating": accumulating,
    "random_separated": random_separated,
}
