"""Dual systems for the normalized kernels of a finite sequence.

A dual system at exponent p is a family ``rho_a`` with
``rho_a(b) = delta_ab ||k_b||_{p'}`` for ``a, b`` in the sequence, i.e.
``<rho_a, k_{b,p'}> = delta_ab``. Every ``rho_a`` is stored on the basis of
H^2-normalized kernels ``k_{b,2} = (1-|b|^2)^(n/2) k_b``:
``rho_a = sum_b coef[a, b] k_{b,2}``.

The kernel span of the sequence alone has dimension N and carries N
independent constraints, so it contains exactly one dual system. Passing
``helpers`` enlarges the search space with extra poles; the L^p minimization
then has a non-trivial feasible set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateSequenceError, InvalidArgumentError
from .geometry import Point, one_minus_inner
from .kernels import conjugate, kernel_norm
from .quadrature import build_rule
from .sequences import DUPLICATE_FLOOR, PointSequence

logger = logging.getLogger(__name__)

#: Gram matrices above this condition number are rejected as degenerate.
MAX_CONDITION = 1e12


def _norm2(points):
    """``(1 - |b|^2)^(n/2)`` per point, i.e. ``1 / ||k_b||_2``."""
    n = points[0].n
    return np.array([p.one_minus_sq ** (n / 2.0) for p in points])


def normalized_gram(rows, cols):
    """``G[i, j] = k_{c_j,2}(r_i) / ||k_{r_i}||_2`` for point lists ``rows``, ``cols``.

    For ``rows == cols`` this is the Gram matrix
    ``<k_{c_j,2}, k_{r_i,2}> = (1-|r_i|^2)^(n/2) (1-|c_j|^2)^(n/2) (1 - conj(c_j).r_i)^(-n)``.
    """
    n = rows[0].n
    om = one_minus_inner(cols, rows).T          # 1 - conj(c_j).r_i
    return _norm2(rows)[:, None] * _norm2(cols)[None, :] * om ** (-n)


def gram_matrix(S, check=True):
    """Hermitian Gram matrix of the H^2-normalized kernels of ``S``.

    Raises
    ------
    DegenerateSequenceError
        If ``check`` and the condition number exceeds :data:`MAX_CONDITION`, or
        two points are within the duplicate floor. The error carries the
        closest pair.
    """
    pts = list(S)
    G = normalized_gram(pts, pts)
    G = 0.5 * (G + G.conj().T)
    np.fill_diagonal(G, 1.0)
    if check:
        _check_gram(S, G)
    return G


def gram_condition(G):
    s = np.linalg.svd(G, compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else float("inf")


def _check_gram(S, G):
    if len(S) == 1:
        return
    cond = gram_condition(G)
    pair = getattr(S, "closest_pair", None)
    dist = getattr(S, "min_distance", float("nan"))
    dup = dist <= DUPLICATE_FLOOR
    if dup or cond > MAX_CONDITION or not np.isfinite(cond):
        raise DegenerateSequenceError(
            f"kernel Gram matrix is numerically singular (condition {cond:.3e}); "
            f"closest pair {pair} at pseudo-hyperbolic distance {dist:.3e}",
            pair=pair, distance=dist, condition=cond, near_duplicate=dup)


@dataclass
class DualSystem:
    """Dual system ``rho_a = sum_b coef[a, b] k_{b,2}`` over ``basis``.

    ``norms`` are the achieved ``||rho_a||_p``; for the kernel-span
    construction these are upper bounds on the minimal dual norms.
    """

    sequence: PointSequence
    p: float
    basis: list
    coef: np.ndarray
    targets: np.ndarray
    norms: np.ndarray
    residual: float
    converged: np.ndarray
    iterations: np.ndarray
    level: int = 0
    kind: str = "h2"
    history: list = field(default_factory=list, repr=False)

    @property
    def n(self):
        return self.sequence.n

    @property
    def coefficients(self):
        """Coefficients on the raw kernels: ``rho_a = sum_b C[a, b] k_b``."""
        return self.coef * _norm2(self.basis)[None, :]

    def evaluate(self, z):
        """``rho_a(z)`` for every ``a``; shape ``(N, len(z))``."""
        n = self.n
        kb = _norm2(self.basis)[:, None] * one_minus_inner(self.basis, z) ** (-n)
        return self.coef @ kb

    def values_on_sequence(self):
        return self.evaluate(list(self.sequence))


def _duality_residual(ds):
    vals = ds.values_on_sequence()
    want = np.diag(ds.targets)
    return float(np.max(np.abs(vals - want) / ds.targets[None, :]))


def _solve_span(S, G, targets):
    """Unique dual system inside span{k_b : b in S}."""
    rhs = np.diag(_norm2(list(S)) * targets)      # column a: N_a d_a e_a
    return _gram_solve(G, rhs).T.copy()


def _gram_solve(G, rhs):
    try:
        return sla.cho_solve(sla.cho_factor(G), rhs)
    except np.linalg.LinAlgError:
        return np.linalg.solve(G, rhs)


def dual_system_h2(S):
    """Exact p = 2 dual system; ``||rho_a||_2 = sqrt((G^-1)[a, a])``."""
    G = gram_matrix(S)
    targets = 1.0 / _norm2(list(S))
    coef = _solve_span(S, G, targets)
    ginv_diag = np.real(np.diag(_gram_solve(G, np.eye(len(S)))))
    norms = np.sqrt(ginv_diag)
    N = len(S)
    ds = DualSystem(S, 2.0, list(S), coef, targets, norms, 0.0, np.ones(N, bool),
                    np.zeros(N, int), 0, "h2")
    ds.residual = _duality_residual(ds)
    return ds


def tangential_helpers(S):
    """Poles ``e^{+-i gap} a``: one hyperbolic unit beside each nonzero ``a``."""
    out = []
    for a in S:
        if a.radius == 0:
            continue
        for s in (1.0, -1.0):
            out.append(Point.from_gap(a.direction * np.exp(1j * s * a.gap), a.gap))
    return out


def _objective(vals, w, p):
    a = np.abs(vals)
    scale = np.max(a) if a.size else 0.0
    if scale == 0:
        return 0.0
    return float(scale ** p * np.sum(w * (a / scale) ** p))


def _irls(A, w, p, c0, Z, max_iter, tol):
    """Minimize ``sum_i w_i |(A c)_i|^p`` over ``c = c0 + Z y``.

    Iteratively reweighted least squares with damping ``1/(p-1)`` for
    p > 2 and a backtracking guard; returns the best iterate seen.
    """
    c = c0.copy()
    best_c, best_f = c, _objective(A @ c, w, p)
    hist = [best_f]
    AZ = A @ Z
    theta0 = 1.0 if p <= 2 else 1.0 / (p - 1.0)
    eps = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        r = A @ c
        mag = np.abs(r)
        if p < 2:
            eps = 1e-3 * mag.max() if eps is None else max(eps * 0.3, 1e-12 * mag.max())
            om = w * (mag ** 2 + eps ** 2) ** ((p - 2.0) / 2.0)
        else:
            om = w * mag ** (p - 2.0)
        M = AZ.conj().T @ (om[:, None] * AZ)
        rhs = -AZ.conj().T @ (om * (A @ c0))
        M = 0.5 * (M + M.conj().T) + 1e-14 * np.trace(M).real / M.shape[0] * np.eye(M.shape[0])
        y = np.linalg.solve(M, rhs)
        target = c0 + Z @ y
        theta, f_new, c_new = theta0, None, None
        for _ in range(30):
            trial = c + theta * (target - c)
            f_trial = _objective(A @ trial, w, p)
            if f_trial <= hist[-1]:
                f_new, c_new = f_trial, trial
                break
            theta *= 0.5
        if c_new is None:
            converged = True
            break
        c = c_new
        hist.append(f_new)
        if f_new < best_f:
            best_c, best_f = c, f_new
        if hist[-2] - f_new <= tol * hist[-2] and (p >= 2 or eps <= 1e-11 * mag.max()):
            converged = True
            break
    return best_c, best_f, converged, it, hist


def dual_system_hp(S, p, rule, helpers=None, max_iter=200, tol=1e-8):
    """Dual system at exponent ``p`` minimizing the discrete L^p norms.

    Parameters
    ----------
    S : PointSequence
    p : float
        Exponent, ``p >= 1``.
    rule : QuadratureRule
        Supplies dimension and level; norms use a rule of that level graded
        toward the sequence (and helper poles).
    helpers : None, "tangential", or list of Point
        Extra poles enlarging the search space. With ``None`` the feasible set
        is a single point and no iteration takes place.

    Returns
    -------
    DualSystem
        ``converged`` flags are False for minimizations stopped by
        ``max_iter``; the best feasible iterate is returned either way.
    """
    if not p >= 1 or np.isinf(p):
        raise InvalidArgumentError(f"p must be finite and >= 1, got {p}")
    if rule.n != S.n:
        raise InvalidArgumentError("rule dimension does not match the sequence")
    pts = list(S)
    N = len(pts)
    if helpers == "tangential":
        helpers = tangential_helpers(pts)
    helpers = list(helpers or [])
    basis = pts + helpers
    G = gram_matrix(S)
    pc = conjugate(p)
    targets = np.array([kernel_norm(b, pc, rule).norm for b in pts])
    coef0 = _solve_span(S, G, targets)
    quad = build_rule(S.n, rule.level, hints=basis)
    A = (_norm2(basis)[:, None] * one_minus_inner(basis, quad.nodes) ** (-S.n)).T
    coef = np.zeros((N, len(basis)), dtype=complex)
    coef[:, :N] = coef0
    norms = np.empty(N)
    converged = np.ones(N, bool)
    iterations = np.zeros(N, int)
    history = []
    Z = None
    if helpers:
        K = normalized_gram(pts, basis)
        Z = sla.null_space(K)
    for a in range(N):
        if Z is not None and Z.shape[1]:
            c, f, ok, it, hist = _irls(A, quad.weights, p, coef[a], Z, max_iter, tol)
            coef[a], converged[a], iterations[a] = c, ok, it
            history.append(hist)
            if not ok:
                logger.warning("IRLS for point %d stopped at the iteration cap", a)
        else:
            f = _objective(A @ coef[a], quad.weights, p)
        norms[a] = f ** (1.0 / p)
    ds = DualSystem(S, float(p), basis, coef, targets, norms, 0.0, converged, iterations,
                    rule.level, "hp", history)
    ds.residual = _duality_residual(ds)
    return ds


def dual_bound_constant(ds):
    """``max_a ||rho_a||_p``."""
    return float(np.max(ds.norms))


@dataclass
class Lemma23Report:
    l1_over_p: np.ndarray          # ||rho_{a,1}||_1 / ||rho_a||_p
    holder_factor: np.ndarray      # discrete ||k_{a,p'}||_{p'}
    value_error: float
    norm_ok: bool
    values_ok: bool

    @property
    def passed(self):
        return self.norm_ok and self.values_ok


def lemma23_check(ds, rule, norm_slack=1e-6, value_tol=1e-8):
    """Check that ``rho_{a,1} = rho_a k_{a,p'}`` is a bounded H^1 dual system.

    Verifies ``||rho_{a,1}||_1 <= ||rho_a||_p (1 + norm_slack)`` by quadrature
    and ``rho_{a,1}(b) = delta_ab (1-|a|^2)^-n`` to ``value_tol``. Off-diagonal
    errors are measured against ``(1-|a|^2)^(-n/2) (1-|b|^2)^(-n/2)``.
    """
    S = ds.sequence
    pts = list(S)
    n, p = S.n, ds.p
    pc = conjugate(p)
    quad = build_rule(n, rule.level, hints=ds.basis)
    rho_nodes = ds.evaluate(quad.nodes)
    knorm = np.array([kernel_norm(a, pc, rule).norm for a in pts])
    kvals = one_minus_inner(pts, quad.nodes) ** (-n) / knorm[:, None]
    prod = rho_nodes * kvals
    l1 = np.array([_objective(row, quad.weights, 1.0) for row in prod])
    lp = np.array([_objective(row, quad.weights, p) ** (1.0 / p) for row in rho_nodes])
    if np.isinf(pc):
        hold = np.array([np.max(np.abs(row)) for row in kvals])
    else:
        hold = np.array([_objective(row, quad.weights, pc) ** (1.0 / pc) for row in kvals])
    ratio = l1 / lp
    rho_seq = ds.values_on_sequence()
    k_seq = one_minus_inner(pts, pts) ** (-n) / knorm[:, None]     # k_{a,p'}(b)
    got = rho_seq * k_seq
    w = np.array([a.one_minus_sq ** (-n) for a in pts])
    want = np.diag(w)
    scale = np.maximum(np.sqrt(w[:, None] * w[None, :]), np.abs(want))
    err = float(np.max(np.abs(got - want) / scale))
    return Lemma23Report(ratio, hold, err, bool(np.all(ratio <= 1 + norm_slack)), err <= value_tol)


def to_json(ds):
    from .io import point_to_json
    return {
        "n": ds.n,
        "p": ds.p,
        "points": [point_to_json(a) for a in ds.sequence],
        "basis": [point_to_json(b) for b in ds.basis],
        "coefficients": [[[float(v.real), float(v.imag)] for v in row] for row in ds.coefficients],
        "norms": [float(v) for v in ds.norms],
        "residual": ds.residual,
        "converged": [bool(v) for v in ds.converged],
        "kind": ds.kind,
        "level": ds.level,
    }
