import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardyinterp.errors import DegenerateSequenceError, InfeasibleSeparationError, \
    InvalidArgumentError
from hardyinterp.geometry import Point, pseudo_hyperbolic, random_unitary
from hardyinterp.sequences import (PointSequence, accumulating, explicit,
                                   pseudo_hyperbolic_matrix, radial, random_separated, spiral)


def test_radial_example():
    S = radial(0.5, 3)
    assert [a.radius for a in S] == [0.5, 0.75, 0.875]
    assert S.metadata == {"generator": "radial", "c": 0.5, "N": 3, "n": 1}


def test_accumulating_example():
    S = accumulating(2, 4)
    assert [a.radius for a in S] == pytest.approx([0, 0.75, 8 / 9, 15 / 16], abs=1e-15)


def test_spiral_angles():
    S = spiral(0.5, 1, 4)
    ang = [np.angle(a.direction[0]) for a in S]
    assert ang == pytest.approx([np.pi / 2, np.pi, -np.pi / 2, 0.0], abs=1e-12)


def test_random_separated_floor():
    S = random_separated(0.5, 25, seed=3, n=2)
    rho = pseudo_hyperbolic_matrix(list(S))
    sep = 1 / np.sqrt(1 - rho[np.triu_indices(25, 1)] ** 2)
    assert np.all(sep >= 1.5 - 1e-12)
    again = random_separated(0.5, 25, seed=3, n=2)
    assert all(np.array_equal(a.direction, b.direction) for a, b in zip(S, again))


def test_random_separated_infeasible():
    with pytest.raises(InfeasibleSeparationError):
        random_separated(100.0, 50, seed=0, max_attempts=2000)


def test_duplicates_rejected_and_flagging():
    with pytest.raises(DegenerateSequenceError):
        explicit([Point([0.5]), Point([0.5])])
    S = explicit([Point([0.5]), Point([0.5000001])])
    assert S.flagged and S.closest_pair == (0, 1)
    assert not radial(0.3, 5).flagged


def test_bad_parameters():
    with pytest.raises(InvalidArgumentError):
        radial(1.0, 3)
    with pytest.raises(InvalidArgumentError):
        PointSequence([])
    with pytest.raises(InvalidArgumentError):
        PointSequence([Point([0.1]), Point([0.1, 0.2])])


def test_matrix_matches_pairwise_near_sphere():
    # gaps 2^-30 and 2^-31: pseudo-hyperbolic distance (1-c)/(1+c-...) ~ 1/3, needs gaps
    S = radial(0.5, 31)
    rho = pseudo_hyperbolic_matrix(list(S))
    g1, g2 = 2.0 ** -30, 2.0 ** -31
    want = (g1 - g2) / (g1 + g2 - g1 * g2)
    assert rho[29, 30] == pytest.approx(want, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_matrix_matches_scalar_formula(seed):
    g = np.random.default_rng(seed)
    pts = [Point.from_gap(g.standard_normal(2) + 1j * g.standard_normal(2),
                          10 ** g.uniform(-6, 0)) for _ in range(4)]
    rho = pseudo_hyperbolic_matrix(pts)
    for i in range(4):
        for j in range(i + 1, 4):
            assert rho[i, j] == pytest.approx(pseudo_hyperbolic(pts[i], pts[j]), rel=1e-9, abs=1e-12)
    U = random_unitary(2, g)
    S = PointSequence(pts).rotated(U)
    assert pseudo_hyperbolic_matrix(list(S)) == pytest.approx(rho, rel=1e-9, abs=1e-12)
