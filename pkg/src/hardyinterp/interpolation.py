"""Exponent splitting, the linear extension operator and its bound pipeline.

Given a dual system ``{rho_a}`` at exponent p and ``s < p`` with
``1/s = 1/p + 1/q``, the operator

    E nu = h = sum_a nu_a gamma_a rho_a k_{a,q},
    gamma_a = c(a,q) c(a,s') / (c(a,p') c(a,2)^2),

satisfies ``h(b) = nu_b ||k_b||_{s'}`` on the sequence. ``h`` is evaluated in
closed form; quadrature only enters through norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, ExponentError, InvalidArgumentError
from .geometry import one_minus_inner
from .kernels import conjugate, kernel_norm
from .quadrature import build_rule

#: Relative residual above which an extension is rejected.
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ExponentSystem:
    s: float
    p: float
    q: float

    @property
    def s_conj(self):
        return conjugate(self.s)

    @property
    def p_conj(self):
        return conjugate(self.p)

    @property
    def q_conj(self):
        return conjugate(self.q)

    @property
    def ratio(self):
        """``q / p'``; exceeds 1 exactly when ``s > 1``."""
        return self.q / self.p_conj


def exponent_split(s, p):
    """Build ``(s, p, q)`` with ``1/s = 1/p + 1/q``.

    Raises
    ------
    ExponentError
        If not ``1 <= s < p < inf``, or if ``q/p' <= 1``. The error carries
        the computed ``q`` and ``q/p'``.
    """
    s, p = float(s), float(p)
    if not (1.0 <= s < p < math.inf):
        raise ExponentError(f"need 1 <= s < p < inf, got s={s}, p={p}")
    q = 1.0 / (1.0 / s - 1.0 / p)
    es = ExponentSystem(s, p, q)
    # q/p' = s (p - 1) / (p - s), computed without the rounding of q
    ratio = s * (p - 1.0) / (p - s)
    if not ratio > 1.0:
        raise ExponentError(
            f"q/p' must exceed 1: s={s}, p={p} give q={q:.12g}, q/p'={ratio:.12g}",
            q=q, ratio=ratio)
    return es


@dataclass
class Factorization:
    lam: np.ndarray
    mu: np.ndarray


def factor_target(nu, es):
    """``lambda = phase(nu)|nu|^(s/p)``, ``mu = |nu|^(s/q)``; both 0 where nu is 0."""
    nu = np.asarray(nu, dtype=complex)
    mag = np.abs(nu)
    phase = np.where(mag > 0, nu / np.where(mag > 0, mag, 1.0), 0.0)
    lam = phase * mag ** (es.s / es.p)
    mu = mag ** (es.s / es.q)
    return Factorization(lam, mu)


def lnorm(x, r):
    x = np.abs(np.asarray(x))
    if x.size == 0 or x.max() == 0:
        return 0.0
    if np.isinf(r):
        return float(x.max())
    m = x.max()
    return float(m * np.sum((x / m) ** r) ** (1.0 / r))


def gamma_constant(a, es, rule):
    """``c(a,q) c(a,s') / (c(a,p') c(a,2)^2)`` from memoized kernel norms."""
    c = lambda r: kernel_norm(a, r, rule).c  # noqa: E731
    return c(es.q) * c(es.s_conj) / (c(es.p_conj) * c(2.0) ** 2)


class ExtensionOperator:
    """The linear map ``nu -> h`` for a fixed sequence, dual system and exponents.

    Parameters
    ----------
    ds : DualSystem
        Built at ``es.p`` for the sequence.
    es : ExponentSystem
    rule : QuadratureRule
        Only its level is used; norms are taken on a rule of that level graded
        toward the dual-system basis.
    """

    def __init__(self, ds, es, rule):
        if abs(ds.p - es.p) > 1e-12:
            raise InvalidArgumentError(f"dual system is for p={ds.p}, exponents need p={es.p}")
        if rule.n != ds.n:
            raise InvalidArgumentError("rule dimension does not match the sequence")
        self.ds, self.es, self.rule = ds, es, rule
        self.points = list(ds.sequence)
        self.n = ds.n
        self.gamma = np.array([gamma_constant(a, es, rule) for a in self.points])
        self.kq = np.array([kernel_norm(a, es.q, rule).norm for a in self.points])
        self.ks = np.array([kernel_norm(a, es.s_conj, rule).norm for a in self.points])
        self.quad = build_rule(self.n, rule.level, hints=ds.basis)
        self._atoms = None

    def __len__(self):
        return len(self.points)

    def atoms(self, z):
        """``gamma_a rho_a(z) k_{a,q}(z)`` per point, shape ``(N, len(z))``."""
        kq = one_minus_inner(self.points, z) ** (-self.n) / self.kq[:, None]
        return self.gamma[:, None] * self.ds.evaluate(z) * kq

    @property
    def node_atoms(self):
        if self._atoms is None:
            self._atoms = self.atoms(self.quad.nodes)
        return self._atoms

    def targets(self, nu):
        return np.asarray(nu, complex) * self.ks

    def apply(self, nu, z):
        return np.asarray(nu, complex) @ self.atoms(z)

    def norm_s(self, nu):
        vals = np.asarray(nu, complex) @ self.node_atoms
        return _node_norm(vals, self.es.s, self.quad.weights)


def _node_norm(vals, r, w):
    a = np.abs(vals)
    m = a.max() if a.size else 0.0
    if m == 0:
        return 0.0
    return float(m * np.sum(w * (a / m) ** r) ** (1.0 / r))


@dataclass
class ExtensionResult:
    h: object
    nu: np.ndarray
    achieved: np.ndarray
    targets: np.ndarray
    residual: float
    worst_index: int
    norm_s: float
    ratio: float

    def to_json(self):
        cpair = lambda v: [[float(x.real), float(x.imag)] for x in v]  # noqa: E731
        return {"nu": cpair(self.nu), "achieved": cpair(self.achieved),
                "targets": cpair(self.targets), "residual": self.residual,
                "worst_index": self.worst_index, "norm_s": self.norm_s, "ratio": self.ratio}


def extension_residual(achieved, targets, nu, ks):
    """Per-point error relative to ``||nu||_inf ||k_b||_{s'}``.

    Off-target entries are rounding-level multiples of the whole target
    vector, so zero targets are measured on that scale (with a 1e-30 guard).
    """
    scale = np.max(np.abs(nu)) * ks + 1e-30
    err = np.abs(achieved - targets) / scale
    k = int(np.argmax(err))
    return float(err[k]), k


def build_extension(S, ds, nu, es, rule, op=None):
    """Evaluate ``h = E nu`` on the sequence and take its H^s norm.

    Raises
    ------
    ConstructionError
        If the relative residual exceeds :data:`RESIDUAL_TOL`.
    """
    nu = np.asarray(nu, dtype=complex)
    if nu.shape != (len(S),):
        raise InvalidArgumentError(f"target has length {nu.size}, sequence has {len(S)}")
    if op is None:
        if ds.sequence is not S and [a.key() for a in ds.sequence] != [a.key() for a in S]:
            raise InvalidArgumentError("dual system belongs to a different sequence")
        op = ExtensionOperator(ds, es, rule)
    achieved = op.apply(nu, op.points)
    targets = op.targets(nu)
    res, k = extension_residual(achieved, targets, nu, op.ks)
    if res > RESIDUAL_TOL:
        raise ConstructionError(f"extension misses its target at point {k} (residual {res:.3e})",
                                worst_index=k, residual=res)
    hs = op.norm_s(nu)
    nrm = lnorm(nu, es.s)
    return ExtensionResult(lambda z: op.apply(nu, z), nu, achieved, targets, res, k, hs,
                           hs / nrm if nrm > 0 else 0.0)


def interpolation_constant(S, ds, es, rule, trials=64, seed=0, return_details=False):
    """Largest ``||h||_s / ||nu||_s`` over every spike and ``trials`` random targets.

    A lower bound for the norm of the extension operator. Trial ``i`` draws
    its complex Gaussian target from ``default_rng([seed, i])``.
    """
    op = ExtensionOperator(ds, es, rule)
    N = len(S)
    spikes = [op.norm_s(np.eye(N)[a]) for a in range(N)]
    rand = []
    for i in range(trials):
        g = np.random.default_rng([seed, i])
        nu = g.standard_normal(N) + 1j * g.standard_normal(N)
        rand.append(op.norm_s(nu) / lnorm(nu, es.s))
    best = float(max(spikes + rand))
    if return_details:
        return best, np.array(spikes), np.array(rand)
    return best


def spike_predictions(ds, es, rule):
    """``gamma_a ||rho_a||_p``: the Hoelder bound for a unit spike at ``a``."""
    return np.array([gamma_constant(a, es, rule) for a in ds.sequence]) * ds.norms


@dataclass
class HolderReport:
    g_norm_p: float              # ||g||_p^p
    g_identity_rhs: float        # sum |lambda_a|^p ||rho_a||_p^p
    g_identity_error: float
    domination_slack: float      # max over nodes of (|h| - B) / B, B = gamma_max g f^(1/p')
    f_norm: float                # ||f||_{q/p'}
    f_ratio: float               # ||f||_{q/p'} / ||mu||_q^{p'}
    gamma_max: float

    @property
    def identity_ok(self):
        return self.g_identity_error <= 1e-10

    @property
    def domination_ok(self):
        return self.domination_slack <= 1e-12

    @property
    def passed(self):
        return self.identity_ok and self.domination_ok and np.isfinite(self.f_norm)


def holder_pipeline_check(S, ds, es, nu, rule, op=None):
    """Check the g/f factorization of ``h`` at the quadrature nodes."""
    op = op or ExtensionOperator(ds, es, rule)
    fac = factor_target(nu, es)
    p, pc = es.p, es.p_conj
    w = op.quad.weights
    z = op.quad.nodes
    rho = ds.evaluate(z)
    kq = np.abs(one_minus_inner(op.points, z) ** (-op.n)) / op.kq[:, None]
    lam_p = np.abs(fac.lam) ** p
    g_p = lam_p @ (np.abs(rho) ** p)                 # g^p at nodes
    gnorm = float(np.sum(w * g_p))
    rnorm = np.array([np.sum(w * np.abs(r) ** p) for r in rho])
    rhs = float(np.sum(lam_p * rnorm))
    ident = abs(gnorm - rhs) / rhs if rhs > 0 else abs(gnorm)
    f = (np.abs(fac.mu) ** pc) @ (kq ** pc)
    h = np.abs(np.asarray(nu, complex) @ op.node_atoms)
    gmax = float(np.max(op.gamma))
    bound = gmax * g_p ** (1.0 / p) * f ** (1.0 / pc)
    # node values span many decades near the sphere; compare on each node's own scale
    slack = float(np.max((h - bound) / np.maximum(bound, 1e-300))) if h.size else 0.0
    fn = float(np.sum(w * f ** es.ratio) ** (1.0 / es.ratio))
    mun = lnorm(fac.mu, es.q) ** pc
    return HolderReport(gnorm, rhs, ident, slack, fn, fn / mun if mun > 0 else 0.0, gmax)


@dataclass
class BalayageReport:
    lhs: float
    rhs: float
    error: float
    c_band: tuple                # range of c(a,q)^(-p'), the balayage-vs-f factor

    @property
    def passed(self):
        return self.error <= 1e-12


def balayage_identity_check(S, mu, es, rule=None):
    """``int |alpha|^(q/p') d chi = sum |mu_a|^q`` for the atomic measure.

    ``alpha_a = |mu_a|^{p'} (1-|a|^2)^(-n p'/q)`` is the per-atom density.
    When ``rule`` is given, also records the range of ``c(a,q)^(-p')``, the
    factor by which ``f`` near ``a`` differs from that density.
    """
    mu = np.asarray(mu)
    if mu.shape != (len(S),):
        raise InvalidArgumentError(f"mu has length {mu.size}, sequence has {len(S)}")
    n, pc = S.n, es.p_conj
    w = np.array([a.one_minus_sq for a in S])
    alpha = np.abs(mu) ** pc * w ** (-n * pc / es.q)
    lhs = float(np.sum(alpha ** es.ratio * w ** n))
    rhs = float(np.sum(np.abs(mu) ** es.q))
    err = abs(lhs - rhs) / rhs if rhs > 0 else abs(lhs)
    band = (float("nan"), float("nan"))
    if rule is not None:
        f = np.array([kernel_norm(a, es.q, rule).c ** (-pc) for a in S])
        band = (float(f.min()), float(f.max()))
    return BalayageReport(lhs, rhs, err, band)
