"""The atomic measure of a sequence, tent testing and kernel embedding constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dual_systems import gram_condition, gram_matrix
from .errors import InsufficientDataError, InvalidArgumentError
from .geometry import BoundaryPoint, one_minus_inner, random_sphere
from .kernels import conjugate, kernel_norm
from .quadrature import build_rule

#: Random sphere centers added to the tent scan.
SPHERE_CENTERS = 64


@dataclass
class AtomicMeasure:
    """``chi = sum_a (1-|a|^2)^n delta_a``."""

    points: list
    masses: np.ndarray

    def __post_init__(self):
        n = self.points[0].n
        want = np.array([a.one_minus_sq ** n for a in self.points])
        if not np.allclose(self.masses, want, rtol=1e-12, atol=0):
            raise InvalidArgumentError("atom masses must equal (1-|a|^2)^n")

    @property
    def total_mass(self):
        return float(np.sum(self.masses))

    @property
    def atoms(self):
        return list(zip(self.points, self.masses))


def carleson_measure(S):
    pts = list(S)
    return AtomicMeasure(pts, np.asarray(S.weights, dtype=float))


def tent_heights(S):
    """Dyadic heights ``2^-k`` for ``k = -1 .. K``; h = 2 catches the origin."""
    K = math.ceil(math.log2(1.0 / min(a.gap for a in S))) + 2
    return 2.0 ** -np.arange(-1, K + 1)


def tent_centers(S, sphere=SPHERE_CENTERS, seed=0):
    dirs = [a.direction for a in S if a.radius > 0]
    rand = random_sphere(S.n, sphere, np.random.default_rng(seed)) if sphere else np.empty((0, S.n))
    return np.vstack([np.array(dirs).reshape(-1, S.n), rand])


def tent_scan(S, centers=None, heights=None):
    """Matrix of ``chi(T(zeta, h)) / h^n`` over centers (rows) and heights (columns)."""
    centers = tent_centers(S) if centers is None else np.asarray(centers, complex)
    heights = tent_heights(S) if heights is None else np.asarray(heights, float)
    dist = np.abs(one_minus_inner([BoundaryPoint(c) for c in centers], list(S)))
    w = S.weights
    inside = dist[:, :, None] < heights[None, None, :]
    return np.einsum("a,cah->ch", w, inside) / heights[None, :] ** S.n


def tent_constant(S, sphere=SPHERE_CENTERS, seed=0):
    """Largest tent ratio over sequence directions, sampled centers and dyadic heights."""
    return float(np.max(tent_scan(S, tent_centers(S, sphere, seed))))


def embedding_norm(S, mu, q, rule):
    """``||sum_a mu_a k_{a,q}||_q`` on a rule graded toward ``S``."""
    pts = list(S)
    quad = build_rule(S.n, rule.level, hints=pts)
    norms = np.array([kernel_norm(a, q, rule).norm for a in pts])
    vals = (np.asarray(mu) / norms) @ (one_minus_inner(pts, quad.nodes) ** (-S.n))
    a = np.abs(vals)
    m = a.max()
    if m == 0:
        return 0.0
    if np.isinf(q):
        return float(m)
    return float(m * np.sum(quad.weights * (a / m) ** q) ** (1.0 / q))


def kernel_sup_sum(S, rule):
    """``sup_z sum_a (1-|a|^2)^n |k_a(z)|``, sampled on the sphere near ``S``."""
    pts = list(S)
    quad = build_rule(S.n, rule.level, hints=pts)
    z = [BoundaryPoint(a.direction) for a in pts]
    vals = np.abs(one_minus_inner(pts, z)) ** (-S.n)
    grid = np.abs(one_minus_inner(pts, quad.nodes)) ** (-S.n)
    w = S.weights
    return float(max(np.max(w @ vals), np.max(w @ grid)))


def riesz_thorin_ceiling(S, q, rule, d2=None):
    """Upper bound for D_q by interpolation between q = 2 and q = 1 or infinity.

    The family ``mu -> sum mu_a (1-|a|^2)^(n(1-s)) k_a`` is bounded by D_2 at
    s = 1/2, by ``max_a c(a,1)`` at s = 1 and by :func:`kernel_sup_sum` at
    s = 0; normalizing by ``||k_a||_q`` costs ``1 / min_a c(a,q)``.
    """
    if d2 is None:
        d2 = math.sqrt(max(np.linalg.eigvalsh(gram_matrix(S, check=False)).max(), 0.0))
    cmin = min(kernel_norm(a, q, rule).c for a in S)
    if q >= 2:
        end = kernel_sup_sum(S, rule)
        theta = 2.0 / q if np.isfinite(q) else 0.0
    else:
        end = max(kernel_norm(a, 1.0, rule).c for a in S)
        theta = 2.0 / conjugate(q)
    return float(d2 ** theta * end ** (1.0 - theta) / cmin)


def _structured(N):
    out = [np.eye(N)[i] for i in range(N)]
    out.append(np.ones(N))
    out.append((-1.0) ** np.arange(N))
    return out


def embedding_constant(S, q, rule, trials=64, seed=0):
    """Estimate of the embedding constant D_q.

    Returns
    -------
    value : float
        ``sqrt(lambda_max(G))`` for q = 2; otherwise the best ratio
        ``||sum mu_a k_{a,q}||_q / ||mu||_q`` over spikes, all-ones, alternating
        signs and ``trials`` complex Gaussian vectors.
    exact : bool
        True only for q = 2; other values are lower bounds.
    """
    if not q >= 1:
        raise InvalidArgumentError(f"q must be >= 1, got {q}")
    N = len(S)
    if q == 2:
        G = gram_matrix(S, check=False)
        return math.sqrt(max(float(np.linalg.eigvalsh(G).max()), 0.0)), True
    rng = np.random.default_rng(seed)
    cands = _structured(N)
    for _ in range(trials):
        cands.append(rng.standard_normal(N) + 1j * rng.standard_normal(N))
    best = 0.0
    for mu in cands:
        mu = np.asarray(mu, complex)
        mu = mu / (np.max(np.abs(mu)) if np.isinf(q) else np.sum(np.abs(mu) ** q) ** (1.0 / q))
        best = max(best, embedding_norm(S, mu, q, rule))
    return best, False


def top_singular_vector(S):
    G = gram_matrix(S, check=False)
    w, v = np.linalg.eigh(G)
    return float(w[-1]), v[:, -1]


@dataclass
class CarlesonReport:
    tent: float
    embedding: dict                 # q -> (value, exact)
    gram_cond: float
    metadata: dict
    ceilings: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def d2(self):
        return self.embedding[2.0][0]


def carleson_report(S, rule, qs=(2.0,), trials=64, seed=0):
    G = gram_matrix(S, check=False)
    emb, ceil = {}, {}
    for q in qs:
        emb[float(q)] = embedding_constant(S, q, rule, trials, seed)
    if 2.0 not in emb:
        emb[2.0] = embedding_constant(S, 2.0, rule)
    for q in qs:
        if q != 2:
            ceil[float(q)] = riesz_thorin_ceiling(S, q, rule, emb[2.0][0])
    return CarlesonReport(tent_constant(S, seed=seed), emb, gram_condition(G),
                          dict(S.metadata), ceil, seed)


@dataclass
class HormanderReport:
    tents: np.ndarray
    d2_squared: np.ndarray
    sizes: list
    slope: float
    corridor: tuple = (0.5, 2.0)

    @property
    def finite(self):
        return bool(np.all(np.isfinite(self.tents)) and np.all(np.isfinite(self.d2_squared)))

    @property
    def passed(self):
        lo, hi = self.corridor
        return self.finite and lo <= self.slope <= hi


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``; NaN if x is constant."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if np.ptp(lx) == 0:
        return float("nan")
    return float(np.polyfit(lx, ly, 1)[0])


def hormander_crosscheck(family, rule=None):
    """Tent constants against D_2^2 along a family of sequences.

    Parameters
    ----------
    family : list of PointSequence
        Members of one generator with growing size, at least three.
    """
    family = list(family)
    if len(family) < 3:
        raise InsufficientDataError(f"need at least 3 family members, got {len(family)}")
    tents = np.array([tent_constant(S) for S in family])
    d2sq = np.array([embedding_constant(S, 2.0, rule)[0] ** 2 for S in family])
    return HormanderReport(tents, d2sq, [len(S) for S in family], loglog_slope(tents, d2sq))
