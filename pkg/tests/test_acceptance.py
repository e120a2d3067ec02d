"""Acceptance criteria, each at its stated tolerance; one summary line per criterion."""

import json
import time

import numpy as np
import pytest
from click.testing import CliRunner

from conftest import record
from hardyinterp.carleson import hormander_crosscheck
from hardyinterp.cli import main
from hardyinterp.dual_systems import dual_system_hp, gram_matrix, lemma23_check
from hardyinterp.errors import DegenerateSequenceError
from hardyinterp.geometry import Point, pseudo_hyperbolic, random_sphere
from hardyinterp.interpolation import (ExtensionOperator, balayage_identity_check,
                                       build_extension, exponent_split, factor_target,
                                       holder_pipeline_check, interpolation_constant, lnorm)
from hardyinterp.kernels import certify_H2, certify_H3, kernel_norm
from hardyinterp.quadrature import build_rule
from hardyinterp.sequences import PointSequence, accumulating, radial


@pytest.fixture(scope="module")
def radial20():
    t0 = time.perf_counter()
    rule = build_rule(1, 5)
    es = exponent_split(2, 4)
    S = radial(0.5, 20)
    ds = dual_system_hp(S, es.p, rule)
    op = ExtensionOperator(ds, es, rule)
    return rule, es, S, ds, op, time.perf_counter() - t0


def test_1_interpolation_exactness(radial20):
    rule, es, S, ds, op, setup_time = radial20
    t0 = time.perf_counter()
    g = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        nu = g.standard_normal(20) + 1j * g.standard_normal(20)
        worst = max(worst, build_extension(S, ds, nu, es, rule, op).residual)
    elapsed = setup_time + time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed <= 30
    record(1, ok, f"max residual {worst:.2e} (<= 1e-8), runtime {elapsed:.2f}s (<= 30s)")
    assert ok


def test_2_linearity(radial20):
    rule, es, S, ds, op, _ = radial20
    g = np.random.default_rng(2)
    z = random_sphere(1, 200, g)
    worst = 0.0
    for _ in range(20):
        nu, w = (g.standard_normal(20) + 1j * g.standard_normal(20) for _ in range(2))
        al, be = complex(*g.standard_normal(2)), complex(*g.standard_normal(2))
        lhs = op.apply(al * nu + be * w, z)
        rhs = al * op.apply(nu, z) + be * op.apply(w, z)
        scale = abs(al) * np.linalg.norm(op.apply(nu, z)) + abs(be) * np.linalg.norm(op.apply(w, z))
        worst = max(worst, np.linalg.norm(lhs - rhs) / scale)
    record(2, worst <= 1e-10, f"superposition residual {worst:.2e} (<= 1e-10)")
    assert worst <= 1e-10


def test_3_norm_constants():
    radii = [0.0, 0.3, 0.6, 0.9, 0.99]
    dev = 0.0
    for n in (1, 2):
        rule = build_rule(n, 3)
        for r in radii:
            a = Point(np.r_[r, np.zeros(n - 1)])
            dev = max(dev, abs(kernel_norm(a, 2.0, rule).c - 1))
            # the quadrature value, not only the closed form
            q = build_rule(n, 4 if n == 1 else 3, hints=[a] if r else None)
            vals = np.abs(1 - np.conj(a.coords) @ q.nodes.T) ** (-n)
            dev = max(dev, abs(np.sqrt(np.sum(q.weights * vals ** 2)) * a.one_minus_sq ** (n / 2) - 1))
    drift = 0.0
    bands = {}
    for n in (1, 2):
        for p in (1.0, 1.5, 3.0, 4.0):
            w = []
            for L in (5, 6):
                lv = type("Level", (), {"n": n, "level": L})()
                cs = [kernel_norm(Point(np.r_[r, np.zeros(n - 1)]), p, lv).c for r in radii + [0.995]]
                w.append(max(cs) - min(cs))
                bands[(n, p, L)] = (min(cs), max(cs))
            drift = max(drift, abs(w[1] - w[0]) / w[0])
    ok = dev <= 1e-6 and drift <= 0.1
    record(3, ok, f"max |c(a,2)-1| {dev:.1e} (<= 1e-6); band width drift L5->L6 {drift:.1e} (<= 0.1)")
    assert ok


def test_4_lemma23():
    details, ok = [], True
    for p in (2.0, 3.0):
        rule = build_rule(1, 5)
        rep = lemma23_check(dual_system_hp(radial(0.5, 10), p, rule), rule)
        ok &= rep.passed
        details.append(f"p={p:g}: max ||rho1||_1/||rho||_p {rep.l1_over_p.max():.6f}, "
                       f"value err {rep.value_error:.1e}")
    record(4, ok, "; ".join(details))
    assert ok


def test_5_kernel_estimates():
    worst, lines = 0.0, []
    ok = True
    for n in (1, 2):
        for p in (1.5, 2.0, 3.0):
            for cert_fn in (certify_H2, certify_H3):
                c0, c1 = cert_fn(n, p, 0), cert_fn(n, p, 1)
                drift = abs(c1.constant - c0.constant) / c0.constant
                worst = max(worst, drift)
                ok &= np.isfinite(c0.constant) and np.isfinite(c1.constant) and drift <= 0.1
                if cert_fn is certify_H3:
                    w = c1.witness
                    ok &= w["delta_z0_z"] <= (w["t"] + w["delta_zeta_z0"]) / 4 * (1 + 1e-9)
                lines.append(f"{c1.estimate} n={n} p={p:g}: {c0.constant:.4g}->{c1.constant:.4g} "
                             f"witness t={c1.witness_t:.3g} delta={c1.witness_delta:.3g}")
    print("\n".join(lines))
    record(5, ok, f"max drift under grid doubling {worst:.3f} (<= 0.1); all constants finite")
    assert ok


def test_6_holder_pipeline(radial20):
    rule, es, S, ds, op, _ = radial20
    g = np.random.default_rng(6)
    gi, slack, fac = 0.0, -np.inf, 0.0
    for _ in range(20):
        nu = g.standard_normal(20) + 1j * g.standard_normal(20)
        rep = holder_pipeline_check(S, ds, es, nu, rule, op)
        gi, slack = max(gi, rep.g_identity_error), max(slack, rep.domination_slack)
        f = factor_target(nu, es)
        fac = max(fac, abs(lnorm(nu, es.s) - lnorm(f.lam, es.p) * lnorm(f.mu, es.q)) / lnorm(nu, es.s))
    ok = gi <= 1e-10 and slack <= 1e-12 and fac <= 1e-12
    record(6, ok, f"g identity {gi:.1e} (<= 1e-10); domination slack {slack:.2e} (<= 1e-12); "
                  f"factorization {fac:.1e} (<= 1e-12)")
    assert ok


def test_7_balayage():
    es = exponent_split(2, 4)
    S = radial(0.5, 20)
    g = np.random.default_rng(7)
    worst = max(balayage_identity_check(S, g.standard_normal(20) + 1j * g.standard_normal(20),
                                        es).error for _ in range(50))
    record(7, worst <= 1e-12, f"max relative error {worst:.1e} (<= 1e-12) over 50 targets")
    assert worst <= 1e-12


def test_8_carleson_corridor():
    sizes = (5, 10, 20, 40)
    rad = hormander_crosscheck([radial(0.5, N) for N in sizes])
    acc = hormander_crosscheck([accumulating(2, N) for N in sizes])
    tent_drift = abs(rad.tents[-1] - rad.tents[-2]) / rad.tents[-2]
    d2_drift = abs(rad.d2_squared[-1] - rad.d2_squared[-2]) / rad.d2_squared[-2]
    plateau = tent_drift <= 0.25 and d2_drift <= 0.25
    slope_ok = 0.5 <= rad.slope <= 2.0
    acc_grow = bool(np.all(np.diff(acc.tents) > 0) and np.all(np.diff(acc.d2_squared) > 0))
    acc_no_plateau = (acc.tents[-1] / acc.tents[-2] > 1.25 and
                      acc.d2_squared[-1] / acc.d2_squared[-2] > 1.25)
    ok = plateau and slope_ok and acc_grow and acc_no_plateau
    record(8, ok, f"radial drift tent {tent_drift:.3f} D2^2 {d2_drift:.3f} (<= 0.25); "
                  f"radial slope {rad.slope:.3f} (in [0.5, 2]: {slope_ok}); "
                  f"accumulating grows {acc_grow}, no plateau {acc_no_plateau}, "
                  f"slope {acc.slope:.3f}")
    assert ok


def test_9_interpolation_constant_stability():
    rule = build_rule(1, 5)
    es = exponent_split(2, 4)
    C = {}
    for c in (0.3, 0.5, 0.7):
        for N in (20, 40):
            S = radial(c, N)
            C[c, N] = interpolation_constant(S, dual_system_hp(S, es.p, rule), es, rule, trials=64)
    drift = {c: abs(C[c, 40] - C[c, 20]) / C[c, 20] for c in (0.3, 0.5, 0.7)}
    plateau = all(d <= 0.2 for d in drift.values())
    mono = all(C[0.3, N] <= C[0.5, N] <= C[0.7, N] for N in (20, 40))
    ok = plateau and mono
    record(9, ok, "drift 20->40 " + ", ".join(f"c={c}: {d:.3f}" for c, d in drift.items())
           + f" (<= 0.2); monotone in c: {mono}")
    assert ok


def test_10_degeneracy(tmp_path):
    base = Point.from_gap([1.0], 0.3)
    near = Point.from_gap(np.exp(1j * 1e-7) * np.array([1.0]), 0.3)
    rho = pseudo_hyperbolic(base, near)
    S = PointSequence([Point([0.0]), base, near])
    lib_ok = False
    try:
        dual_system_hp(S, 3.0, build_rule(1, 3))
    except DegenerateSequenceError as exc:
        lib_ok = exc.near_duplicate and exc.pair == (1, 2)
    try:
        gram_matrix(S)
        lib_ok = False
    except DegenerateSequenceError:
        pass
    seq = tmp_path / "dup.json"
    seq.write_text(json.dumps({"points": [[[0.0, 0.0]], [[0.7, 0.0]], [[0.7, 1e-7]]],
                               "gaps": [1.0, 0.3, 0.3]}))
    out = CliRunner().invoke(main, ["pipeline", "--generator", "explicit", "--file", str(seq),
                                    "--N", "3", "--out-dir", str(tmp_path)])
    rec = json.loads(out.stderr.strip().splitlines()[-1])
    cli_ok = out.exit_code == 1 and rec["error"] == "DegenerateSequenceError"
    ok = rho <= 1e-6 and lib_ok and cli_ok
    record(10, ok, f"pair at distance {rho:.1e}: library error {lib_ok}, "
                   f"CLI exit {out.exit_code} with error record {cli_ok}")
    assert ok
