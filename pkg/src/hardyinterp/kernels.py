"""Cauchy kernels of the ball, their H^p norms, and the smoothing kernel K_t.

``k_a(z) = (1 - conj(a).z)^-n`` and ``||k_a||_p = c(a, p) (1 - |a|^2)^(-n/p')``.
Norms are computed by quadrature on a rule graded toward ``a``; the
dimensionless constant ``c(a, p)`` is validated against a configurable band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyRegionError, InvalidArgumentError, InvalidPointError, QuadratureError
from .geometry import QUASI_TRIANGLE_D, BoundaryPoint, Point, one_minus_inner
from .quadrature import build_rule, lp_norm

#: Validation band for c(a, p); values outside signal an under-resolved rule.
C_BAND = (1e-3, 1e3)


def conjugate(p):
    """Conjugate exponent p' with 1/p + 1/p' = 1."""
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _check_pole(a):
    if not isinstance(a, Point):
        raise InvalidPointError("kernel pole must be a Point strictly inside the ball")


def kernel_matrix(poles, z):
    """Raw kernel values ``k_a(z)`` with shape ``(len(poles), len(z))``."""
    d = one_minus_inner(poles, z)
    n = poles[0].n if isinstance(poles, (list, tuple)) else poles.n
    return d ** (-n)


def cauchy_kernel(a, z):
    """``(1 - conj(a).z)^-n`` at a single point or at the rows of a node array."""
    _check_pole(a)
    vals = (one_minus_inner(a, z) ** (-a.n))[0]
    if isinstance(z, (Point, BoundaryPoint)):
        return complex(vals[0])
    return vals


@dataclass(frozen=True)
class NormConstant:
    a: Point
    p: float
    c: float
    norm: float


_norm_cache = {}


def kernel_norm(a, p, rule):
    """H^p norm of ``k_a`` and the constant ``c(a, p)``.

    Only ``rule.n`` and ``rule.level`` are used: the integral is evaluated on
    a rule of that level graded toward ``a``. Results are memoized so every
    caller sees the same value for the same ``(a, p, level)``.

    Raises
    ------
    QuadratureError
        If ``c(a, p)`` falls outside :data:`C_BAND`.
    """
    _check_pole(a)
    if rule.n != a.n:
        raise InvalidArgumentError("rule dimension does not match the pole")
    if not p >= 1:
        raise InvalidArgumentError(f"p must be >= 1, got {p}")
    key = (a.key(), float(p), rule.n, rule.level)
    hit = _norm_cache.get(key)
    if hit is not None:
        return hit
    n = a.n
    pc = conjugate(p)
    if a.radius == 0:
        norm = 1.0
    elif np.isinf(p):
        norm = a.gap ** (-n)
    elif p == 2:
        norm = a.one_minus_sq ** (-n / 2.0)
    else:
        hinted = build_rule(n, rule.level, hints=[a])
        # scale out the peak height so |k|^p stays finite for tiny gaps
        vals = (one_minus_inner(a, hinted.nodes)[0] * (1.0 / a.gap)) ** (-n)
        norm = lp_norm(vals, p, hinted) * a.gap ** (-n)
    c = norm * (1.0 if np.isinf(pc) else a.one_minus_sq ** (n / pc))
    if not (C_BAND[0] <= c <= C_BAND[1]) or not np.isfinite(c):
        raise QuadratureError(f"c(a, p) = {c!r} outside {C_BAND}; quadrature under-resolved")
    out = NormConstant(a, float(p), float(c), float(norm))
    _norm_cache[key] = out
    return out


@dataclass(frozen=True)
class KernelHandle:
    """``scale * k_a``; ``profile`` is ``"raw"`` or ``("normalized", p)``."""

    pole: Point
    profile: object
    scale: float = 1.0

    @property
    def n(self):
        return self.pole.n

    def __call__(self, z):
        v = cauchy_kernel(self.pole, z)
        return v * self.scale


def normalized_kernel(a, p, rule):
    nc = kernel_norm(a, p, rule)
    return KernelHandle(a, ("normalized", float(p)), 1.0 / nc.norm)


# -- smoothing kernel K_t ---------------------------------------------------

def kt_from_gap(om, t, n, p):
    """K_t from ``om = 1 - conj(zeta).z``; ``1 - (1-t) w = t + (1-t) om``."""
    return t ** (n * (p - 1.0)) / np.abs(t + (1.0 - t) * om) ** (n * p)


def approx_kernel_Kt(zeta, z, t, p):
    """``t^(n(p-1)) / |1 - (1-t) conj(zeta).z|^(np)`` for boundary points."""
    if not (0 < t <= 1):
        raise InvalidArgumentError(f"t must lie in (0, 1], got {t}")
    if not p > 1:
        raise InvalidArgumentError(f"p must exceed 1, got {p}")
    om = one_minus_inner(zeta, z)[0, 0]
    return float(kt_from_gap(om, t, zeta.n, p))


def _one_minus_phase(phi):
    """``1 - e^{i phi}`` without cancellation."""
    return 2.0 * np.sin(0.5 * phi) ** 2 - 1j * np.sin(phi)


def _angle_grid(count, lo_exp=-7.0, top=np.pi):
    lin = np.linspace(0.0, top, count // 2 + 1)
    log = np.logspace(lo_exp, np.log10(top), count - count // 2)
    return np.unique(np.concatenate([lin, log]))


@dataclass
class Certificate:
    """A fitted constant with its maximizing sample and per-t profile."""

    estimate: str
    n: int
    p: float
    grid_level: int
    constant: float
    witness_t: float
    witness_delta: float
    witness: dict
    t_profile: np.ndarray
    t_grid: np.ndarray
    samples: int


def certify_H2(n, p, grid_level=0, t_min=1e-4):
    """Fit the constant of ``K_t <= C t^alpha (delta + t)^(-alpha - n)``.

    With ``alpha = n(p-1)`` the ratio reduces to
    ``((delta + t) / |t + (1-t)(1 - omega)|)^(np)``, ``omega = conj(zeta).z``.
    Pairs at controlled pseudo-distance are generated with ``zeta = e_1`` and,
    for n = 1, ``z = e^{i theta}``; for n >= 2,
    ``z = (cos(theta) e^{i psi}, sin(theta), 0, ...)``.
    """
    if not p > 1:
        raise InvalidArgumentError("p must exceed 1")
    k = 2 ** grid_level
    t = np.logspace(np.log10(t_min), 0.0, 16 * k)
    if n == 1:
        theta = _angle_grid(32 * k)
        om = _one_minus_phase(theta)
        params = {"theta": theta}
    else:
        theta = _angle_grid(32 * k, top=np.pi / 2)
        psi = _angle_grid(16 * k)
        th, ps = np.meshgrid(theta, psi, indexing="ij")
        th, ps = th.ravel(), ps.ravel()
        om = 2.0 * np.sin(0.5 * th) ** 2 * np.exp(1j * ps) + _one_minus_phase(ps)
        params = {"theta": th, "psi": ps}
    if t.size == 0 or om.size == 0:
        raise EmptyRegionError("empty H2 sample grid")
    delta = np.abs(om)
    T = t[:, None]
    ratio = ((delta[None, :] + T) / np.abs(T + (1.0 - T) * om[None, :])) ** (n * p)
    i, j = np.unravel_index(np.argmax(ratio), ratio.shape)
    witness = {"t": float(t[i]), "delta": float(delta[j])}
    witness.update({key: float(v[j]) for key, v in params.items()})
    return Certificate("H2", n, float(p), grid_level, float(ratio[i, j]), float(t[i]),
                       float(delta[j]), witness, ratio.max(axis=1), t, ratio.size)


def _h3_samples(n, grid_level, t):
    """Admissible-by-construction quadruples for one value of ``t``."""
    k = 2 ** grid_level
    frac = np.logspace(-3, 0, 8 * k)
    if n == 1:
        theta0 = _angle_grid(32 * k)
        TH, F, S = np.meshgrid(theta0, frac, [-1.0, 1.0], indexing="ij")
        TH, F, S = (x.ravel() for x in (TH, F, S))
        om0 = _one_minus_phase(TH)
        d0 = np.abs(om0)
        bound = (t + d0) / (2.0 * QUASI_TRIANGLE_D)
        eta = S * F * 2.0 * np.arcsin(np.minimum(1.0, 0.5 * bound))
        om = _one_minus_phase(TH + eta)
        d_move = np.abs(_one_minus_phase(eta))
        return om0, om, d_move, {"theta0": TH, "eta": eta}
    theta0 = _angle_grid(32 * k, top=np.pi / 2)
    psi0 = _angle_grid(12 * k)
    TH, PS, F, S, W = np.meshgrid(theta0, psi0, frac, [-1.0, 1.0], [0, 1, 2], indexing="ij")
    TH, PS, F, S, W = (x.ravel() for x in (TH, PS, F, S, W))
    s0 = np.sin(TH)
    one_minus_c0 = 2.0 * np.sin(0.5 * TH) ** 2
    om0 = one_minus_c0 * np.exp(1j * PS) + _one_minus_phase(PS)
    d0 = np.abs(om0)
    bound = (t + d0) / (2.0 * QUASI_TRIANGLE_D)
    # phase move z = e^{i eta} z0 has delta(z0, z) = |1 - e^{i eta}|;
    # moves along a Hermitian-orthogonal w have delta(z0, z) = 1 - cos(eta)
    eta_phase = 2.0 * np.arcsin(np.minimum(1.0, 0.5 * bound))
    eta_orth = np.arccos(np.clip(1.0 - bound, -1.0, 1.0))
    eta = S * F * np.where(W == 0, eta_phase, eta_orth)
    one_minus_ce = 2.0 * np.sin(0.5 * eta) ** 2
    # 1 - cos(eta) cos(theta0) e^{i psi0}
    base = (one_minus_ce + np.cos(eta) * one_minus_c0) * np.exp(1j * PS) + _one_minus_phase(PS)
    om_phase = one_minus_c0 * np.exp(1j * (PS + eta)) + _one_minus_phase(PS + eta)
    om = np.select([W == 0, W == 1], [om_phase, base + np.sin(eta) * s0],
                   base + 1j * np.sin(eta) * s0)
    d_move = np.where(W == 0, np.abs(_one_minus_phase(eta)), one_minus_ce)
    return om0, om, d_move, {"theta0": TH, "psi0": PS, "eta": eta, "direction": W}


def certify_H3(n, p, grid_level=0, t_min=1e-3):
    """Fit the constant of the smoothness estimate for K_t.

    Over quadruples ``(zeta, z0, z, t)`` with
    ``delta(z0, z) <= (t + delta(zeta, z0)) / (2D)``, ``D = 2``, returns the
    largest ``|K_t(zeta,z) - K_t(zeta,z0)| delta(z0,z)^(-1/2)
    (delta(zeta,z0) + t)^(n + 1/2)``. Samples with ``delta(z0, z) = 0`` count 0.
    ``zeta = e_1`` throughout (the estimate is unitarily invariant).
    """
    if not p > 1:
        raise InvalidArgumentError("p must exceed 1")
    t_grid = np.logspace(np.log10(t_min), 0.0, 16 * 2 ** grid_level)
    best, witness, profile, total = -1.0, None, [], 0
    for t in t_grid:
        om0, om, d_move, params = _h3_samples(n, grid_level, t)
        d0 = np.abs(om0)
        ok = d_move <= (t + d0) / (2.0 * QUASI_TRIANGLE_D) * (1 + 1e-12)
        if not np.any(ok):
            profile.append(0.0)
            continue
        om0, om, d_move, d0 = om0[ok], om[ok], d_move[ok], d0[ok]
        diff = np.abs(kt_from_gap(om, t, n, p) - kt_from_gap(om0, t, n, p))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d_move > 0, diff / np.sqrt(d_move) * (d0 + t) ** (n + 0.5), 0.0)
        total += ratio.size
        j = int(np.argmax(ratio))
        profile.append(float(ratio[j]))
        if ratio[j] > best:
            best = float(ratio[j])
            witness = {"t": float(t), "delta_zeta_z0": float(d0[j]),
                       "delta_z0_z": float(d_move[j])}
            witness.update({key: float(v[ok][j]) for key, v in params.items()})
    if total == 0:
        raise EmptyRegionError("no admissible (H3) samples after filtering")
    return Certificate("H3", n, float(p), grid_level, best, witness["t"],
                       witness["delta_zeta_z0"], witness, np.array(profile), t_grid, total)
