"""Quadrature on the unit sphere of C^n against the normalized surface measure.

The sphere is parametrized recursively as
``z = (sqrt(u) e^{i theta}, sqrt(1 - u) w)`` with ``w`` on the sphere of
``C^{n-1}``; under the normalized measure ``u = |z_1|^2`` has density
``(n - 1) (1 - u)^(n - 2)`` and ``theta`` is uniform.

Uniform rules use Gauss-Legendre nodes in ``u`` and equispaced angles. Rules
with *hints* (ball points whose kernels peak near the sphere) use composite
Gauss-Legendre panels graded dyadically toward each peak, down to a scale
below the hint's gap ``1 - |a|``; this resolves all peak widths of a
multiscale sequence at once.

Binary cache layout (little-endian): header of three int64 ``n, level,
count`` followed by ``count`` records of ``2n + 1`` float64 values
``re z_1, im z_1, ..., re z_n, im z_n, weight``. Uniform rules are cached in
the directory named by ``HARDYINTERP_RULE_CACHE`` when that variable is set.
"""

from __future__ import annotations

import logging
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CapacityError, InvalidArgumentError, QuadratureError
from .geometry import Point, frame_from

logger = logging.getLogger(__name__)

MAX_NODES = 10_000_000
QMC_LOG2_POINTS = 20
CACHE_ENV = "HARDYINTERP_RULE_CACHE"
_HEADER = struct.Struct("<qqq")


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    n: int
    level: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "uniform"
    hints: tuple = field(default=(), repr=False)

    @property
    def count(self):
        return self.weights.size

    def integrate(self, values):
        return np.sum(self.weights * np.asarray(values))

    def refined(self):
        """The same construction one level up."""
        return build_rule(self.n, self.level + 1, hints=list(self.hints) or None,
                          qmc=self.kind == "qmc")


def _gauss_panels(breaks, m):
    """Composite Gauss-Legendre nodes/weights on consecutive break intervals."""
    x, w = np.polynomial.legendre.leggauss(m)
    lo, hi = breaks[:-1], breaks[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _uniform_circle(count):
    theta = 2.0 * np.pi * np.arange(count) / count
    return np.exp(1j * theta), np.full(count, 1.0 / count)


def _uniform_count(n, level):
    if n == 1:
        return 64 * 2 ** level
    return (16 * 2 ** level) ** (2 * n - 1)


def _product(n, z1_nodes, z1_weights, inner_nodes, inner_weights, t_nodes):
    """Combine first-coordinate nodes with an inner sphere rule.

    ``t_nodes`` holds ``1 - |z_1|^2`` for each first-coordinate node so the
    tail coordinates get ``sqrt(t)`` without cancellation.
    """
    k, m = z1_nodes.size, inner_weights.size
    nodes = np.empty((k * m, n), dtype=complex)
    nodes[:, 0] = np.repeat(z1_nodes, m)
    nodes[:, 1:] = (np.sqrt(t_nodes)[:, None, None] * inner_nodes[None, :, :]).reshape(k * m, n - 1)
    weights = np.outer(z1_weights, inner_weights).ravel()
    return nodes, weights


def _uniform_sphere(n, per_axis):
    if n == 1:
        z, w = _uniform_circle(per_axis)
        return z[:, None], w
    x, wx = np.polynomial.legendre.leggauss(per_axis)
    t = 0.5 * (x + 1.0)                  # t = 1 - |z_1|^2
    wt = 0.5 * wx * (n - 1) * t ** (n - 2)
    ang, wang = _uniform_circle(per_axis)
    z1 = (np.sqrt(1.0 - t)[:, None] * ang[None, :]).ravel()
    w1 = np.outer(wt, wang).ravel()
    tt = np.repeat(t, per_axis)
    inner, winner = _uniform_sphere(n - 1, per_axis)
    return _product(n, z1, w1, inner, winner, tt)


def _graded_breaks(centers, depths, lo, hi, base_panels):
    """Breakpoints on ``[lo, hi]``: a uniform base plus dyadic grading.

    Around each center the offsets ``(hi-lo)/2 * 2^-k`` are added until the
    innermost panel is shorter than a quarter of the corresponding depth.
    """
    span = hi - lo
    pts = [lo + span * np.arange(base_panels + 1) / base_panels]
    for c, depth in zip(centers, depths):
        k_max = int(np.ceil(np.log2(2.0 * span / max(depth, 1e-300)))) + 2
        offs = 0.5 * span * 2.0 ** -np.arange(1, k_max + 1)
        pts.append(np.array([c]))
        pts.append(c + offs)
        pts.append(c - offs)
    b = np.concatenate(pts)
    b = b[(b >= lo) & (b <= hi)]
    b = np.unique(b)
    return b


def _wrap(angles, lo):
    return lo + np.mod(angles - lo, 2.0 * np.pi)


def _graded_circle(phases, depths, base_panels, m):
    """Graded rule on the circle as (angles, weights), weights summing to 1."""
    lo = float(phases[0]) - np.pi
    centers = _wrap(np.asarray(phases, float), lo)
    centers[0] = phases[0]
    extra_c, extra_d = [], []
    for c, d in zip(centers, depths):
        # images so that grading toward a center also covers the wrap seam
        extra_c += [c - 2 * np.pi, c + 2 * np.pi]
        extra_d += [d, d]
    b = _graded_breaks(list(centers) + extra_c, list(depths) + extra_d,
                       lo, lo + 2.0 * np.pi, base_panels)
    theta, w = _gauss_panels(b, m)
    return theta, w / (2.0 * np.pi)


def _hint_points(hints):
    pts = [h for h in hints if isinstance(h, Point) and h.radius > 0]
    return pts


def _graded_rule(n, level, pts):
    m = 6 + level
    gaps = [p.gap for p in pts]
    if n == 1:
        phases = [float(np.angle(p.direction[0])) for p in pts]
        theta, w = _graded_circle(phases, gaps, 2 ** (level + 1), m)
        nodes = np.exp(1j * theta)[:, None]
        if phases[0] == 0.0:
            nodes = (np.cos(theta) + 1j * np.sin(theta))[:, None]
        return nodes, w
    v = pts[0].direction
    phases = [float(np.angle(np.vdot(v, p.direction))) for p in pts]
    base = max(2, 2 ** (level - 2))
    m2 = 4 + level
    tb = _graded_breaks([0.0], [min(gaps)], 0.0, 1.0, base)
    t, wt = _gauss_panels(tb, m2)
    wt = wt * (n - 1) * t ** (n - 2)
    theta, wth = _graded_circle(phases, gaps, base, m2)
    z1 = (np.sqrt(1.0 - t)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    w1 = np.outer(wt, wth).ravel()
    tt = np.repeat(t, theta.size)
    if n == 2:
        inner, winner = _uniform_sphere(1, 2 ** level)
    else:
        inner, winner = _uniform_sphere(n - 1, 8)
    count = z1.size * winner.size
    if count > MAX_NODES:
        raise CapacityError(f"graded rule would need {count} nodes (> {MAX_NODES})")
    nodes, w = _product(n, z1, w1, inner, winner, tt)
    if not np.allclose(v, np.eye(n)[0], rtol=0, atol=0):
        nodes = nodes @ frame_from(v).T
    return nodes, w


def _common_line(pts):
    v = pts[0].direction
    return all(abs(np.vdot(v, p.direction)) > 1.0 - 1e-12 for p in pts)


def _qmc_rule(n, seed=0):
    from scipy.stats import norm, qmc

    sob = qmc.Sobol(d=2 * n, scramble=True, seed=seed)
    u = sob.random_base2(QMC_LOG2_POINTS)
    u = np.clip(u, 1e-15, 1 - 1e-15)
    g = norm.ppf(u)
    z = g[:, :n] + 1j * g[:, n:]
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z, np.full(z.shape[0], 1.0 / z.shape[0])


def build_rule(n, level, hints=None, qmc=False):
    """Quadrature rule on the sphere of C^n at refinement ``level``.

    Parameters
    ----------
    n, level : int
        Ambient dimension and refinement level, both >= 1.
    hints : sequence of Point, optional
        Ball points near whose boundary projections the integrand peaks.
        For ``n >= 2`` the hints must share one complex line; otherwise the
        uniform rule is used.
    qmc : bool
        Allow a randomized quasi-Monte Carlo rule (2**20 scrambled Sobol'
        points) when the uniform product rule exceeds ``MAX_NODES``.

    Returns
    -------
    QuadratureRule
    """
    if int(n) != n or n < 1 or int(level) != level or level < 1:
        raise InvalidArgumentError(f"n and level must be positive integers, got {n}, {level}")
    n, level = int(n), int(level)
    pts = _hint_points(hints or [])
    if pts:
        if any(p.n != n for p in pts):
            raise InvalidArgumentError("hint dimension does not match the rule")
        if n == 1 or _common_line(pts):
            nodes, w = _graded_rule(n, level, pts)
            return QuadratureRule(n, level, nodes, w / np.sum(w), "graded", tuple(pts))
        logger.warning("hints span several complex lines; using the uniform rule")
    count = _uniform_count(n, level)
    if count > MAX_NODES:
        if not qmc:
            raise CapacityError(
                f"uniform rule for n={n}, level={level} needs {count} nodes (> {MAX_NODES}); "
                "pass qmc=True for the quasi-Monte Carlo fallback")
        nodes, w = _qmc_rule(n)
        return QuadratureRule(n, level, nodes, w, "qmc")
    cached = _cache_load(n, level)
    if cached is not None:
        return cached
    per_axis = 64 * 2 ** level if n == 1 else 16 * 2 ** level
    nodes, w = _uniform_sphere(n, per_axis)
    rule = QuadratureRule(n, level, nodes, w / np.sum(w), "uniform")
    _cache_store(rule)
    return rule


def for_points(n, level, points):
    """Rule graded toward every point of ``points`` (uniform if none qualify)."""
    return build_rule(n, level, hints=list(points))


# -- evaluation ---------------------------------------------------------------

def _values(f, rule):
    vals = f(rule.nodes) if callable(f) else np.asarray(f)
    vals = np.asarray(vals)
    if vals.shape[0] != rule.count:
        raise InvalidArgumentError("function values do not match the rule's node count")
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise QuadratureError(f"non-finite function value at node {idx}", node_index=idx)
    return vals


def lp_norm(f, p, rule):
    """Discrete ``(sum_i w_i |f(zeta_i)|^p)^(1/p)``.

    ``f`` is a callable on the ``(count, n)`` node array or an array of node
    values.
    """
    if not (p >= 1) or not np.isfinite(p):
        raise InvalidArgumentError(f"p must be finite and >= 1, got {p}")
    a = np.abs(_values(f, rule))
    scale = np.max(a) if a.size else 0.0
    if scale == 0:
        return 0.0
    return float(scale * np.sum(rule.weights * (a / scale) ** p) ** (1.0 / p))


def pairing(f, g, rule):
    """``sum_i w_i f(zeta_i) conj(g(zeta_i))``; conjugates the second argument."""
    return complex(np.sum(rule.weights * _values(f, rule) * np.conj(_values(g, rule))))


# -- disk cache -----------------------------------------------------------------

def _cache_path(n, level):
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    return Path(root) / f"rule_n{n}_L{level}.bin"


def save_rule(rule, path):
    n, count = rule.n, rule.count
    rec = np.empty((count, 2 * n + 1), dtype="<f8")
    rec[:, 0:2 * n:2] = rule.nodes.real
    rec[:, 1:2 * n:2] = rule.nodes.imag
    rec[:, 2 * n] = rule.weights
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(n, rule.level, count))
        fh.write(rec.tobytes())


def load_rule(path):
    with open(path, "rb") as fh:
        n, level, count = _HEADER.unpack(fh.read(_HEADER.size))
        rec = np.frombuffer(fh.read(), dtype="<f8")
    if rec.size != count * (2 * n + 1):
        raise QuadratureError(f"truncated rule file {path}")
    rec = rec.reshape(count, 2 * n + 1)
    nodes = rec[:, 0:2 * n:2] + 1j * rec[:, 1:2 * n:2]
    return QuadratureRule(int(n), int(level), nodes, rec[:, 2 * n].copy(), "uniform")


def _cache_load(n, level):
    path = _cache_path(n, level)
    if path is None or not path.exists():
        return None
    return load_rule(path)


def _cache_store(rule):
    path = _cache_path(rule.n, rule.level)
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    save_rule(rule, tmp)
    tmp.replace(path)
