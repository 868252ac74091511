import math

import numpy as np
import pytest

from lognls.potential import (
    PotentialSpec,
    check_V1,
    check_V2,
    check_V4,
    constant_potential,
    expression_potential,
    model_saddle,
    v3_diagnostic,
)

SADDLE = model_saddle(1.0, 1.25, 2, (0,), 0.5)


def test_model_saddle_values():
    assert SADDLE.evaluate(np.zeros((1, 2)))[0] == pytest.approx(1.25)
    # constant on Y
    ys = np.column_stack([np.zeros(5), np.linspace(-8, 8, 5)])
    assert np.allclose(SADDLE.evaluate(ys), 1.25)
    # strictly decreasing toward c0 along X
    xs = np.column_stack([np.linspace(0, 30, 50), np.zeros(50)])
    vals = SADDLE.evaluate(xs)
    assert np.all(np.diff(vals) < 0)
    assert vals[-1] == pytest.approx(1.0, abs=3e-4)


def test_model_saddle_cone_lower_bound():
    rng = np.random.default_rng(7)
    pts = rng.uniform(-30, 30, size=(2000, 2))
    mask = SADDLE.in_cone(pts)
    vals = SADDLE.evaluate(pts[mask])
    assert np.all(vals > 1.0 + 0.25 * 0.25 - 1e-12)  # c0 + (c1-c0) lambda^2


def test_model_saddle_rejects_bad_constants():
    with pytest.raises(ValueError):
        model_saddle(1.0, 1.0, 2, (0,), 0.5)
    with pytest.raises(ValueError):
        model_saddle(-1.5, 1.0, 2, (0,), 0.5)


def test_potential_spec_validation():
    assert SADDLE.c2 == 1.0
    low = model_saddle(0.5, 0.6, 2, (0,), 0.5)
    assert low.c2 == 0.5
    with pytest.raises(ValueError):
        PotentialSpec(2, (0,), (0, 1), 0.5, lambda p: np.zeros(len(p)))
    with pytest.raises(ValueError):
        PotentialSpec(2, (0,), (1,), 1.5, lambda p: np.zeros(len(p)))


def test_cone_membership_equivalence(rng):
    # |P_Y z| > lambda |z| must match the definitional form with y = P_Y z
    pts = rng.uniform(-10, 10, size=(1000, 2))
    direct = SADDLE.in_cone(pts)
    py = SADDLE.project_y(pts)
    inner = np.abs(np.sum(pts * py, axis=1))
    norms = np.linalg.norm(pts, axis=1) * np.linalg.norm(py, axis=1)
    witness = inner > SADDLE.lam * norms
    assert np.array_equal(direct, witness)


def test_check_v1_model_passes():
    report = check_V1(SADDLE, radii=(1, 2, 4, 8, 16))
    assert report.passed and not report.inconclusive
    expected_sups = [1 + 0.25 / (1 + r * r) for r in (1, 2, 4, 8, 16)]
    assert np.allclose(report.sup_on_x_spheres, expected_sups, rtol=1e-12)
    assert report.cone_inf >= 1.0 + 0.25 * 0.25 - 1e-12
    assert all(a > b for a, b in zip(report.sup_on_x_spheres, report.sup_on_x_spheres[1:]))


def test_check_v1_constant_fails():
    report = check_V1(constant_potential(1.0, 2, (0,), 0.5))
    assert not report.passed and not report.inconclusive


def test_check_v1_cone_inf_monotone_in_lambda():
    infs = []
    for lam in (0.3, 0.5, 0.7, 0.9):
        spec = model_saddle(1.0, 1.25, 2, (0,), lam)
        infs.append(check_V1(spec).cone_inf)
    assert all(a <= b + 1e-15 for a, b in zip(infs, infs[1:]))


def test_check_v1_no_y_axes_inconclusive():
    spec = constant_potential(1.0, 1, (0,), 0.5)  # Y is empty in 1D with X = {0}
    report = check_V1(spec)
    assert report.inconclusive


def test_check_v2_model_bounded():
    report = check_V2(SADDLE)
    cap = max(abs(SADDLE.c0), abs(SADDLE.c1)) + abs(SADDLE.c1 - SADDLE.c0)
    assert report.max_value <= cap
    assert report.max_gradient <= 2 * abs(SADDLE.c1 - SADDLE.c0) + 1e-6
    assert report.value_bounded and report.gradient_bounded and report.second_bounded


def test_check_v2_kink_blows_up():
    kinked = expression_potential("1 + abs(z0)", 2, (0,), 0.5)
    fine = check_V2(kinked, fd_step=1e-5, n_per_axis=21)
    coarse = check_V2(kinked, fd_step=1e-3, n_per_axis=21)
    # second difference at the kink grows like 1/step
    assert fine.max_second > 50 * coarse.max_second


def test_check_v4_model_configuration():
    report = check_V4(SADDLE, N=2)
    assert report.ineq2  # 1.25 <= 1 + 0.3 * 1
    assert not report.ineq1_m_based  # 1.25 < 1 + log 2
    assert not report.ineq1_log2_based
    assert not report.joint_feasible
    assert report.conflict_under_gausson_level


def test_check_v4_second_inequality_boundary():
    passing = model_saddle(1.0, 1.3, 2, (0,), 0.5)
    assert check_V4(passing, N=2).ineq2
    failing = model_saddle(1.0, 1.31, 2, (0,), 0.5)
    assert not check_V4(failing, N=2).ineq2


def test_check_v4_first_inequality_at_v0():
    # V(0) = c0 forces m(V(0)) = m(c0) < 2 m(c0)
    report = check_V4(SADDLE, N=2, v_at_origin=SADDLE.c0)
    assert not report.ineq1_m_based
    # and V(0) above c0 + log 2 passes
    report = check_V4(SADDLE, N=2, v_at_origin=SADDLE.c0 + math.log(2.0) + 0.01)
    assert report.ineq1_m_based and report.ineq1_log2_based


def test_check_v4_paths_agree_on_random_pairs(rng):
    for _ in range(100):
        c0 = rng.uniform(-0.9, 3.0)
        v0 = rng.uniform(-0.9, 4.0)
        spec = constant_potential(c0, 2, (0,), 0.5)
        report = check_V4(spec, N=2, v_at_origin=v0)
        assert report.ineq1_m_based == report.ineq1_log2_based


def test_v3_diagnostic_model_flags_x():
    report = v3_diagnostic(SADDLE)
    dirs = np.array([s["direction"] for s in report.suspects])
    assert len(dirs) > 0
    # the +x escape ray must be flagged: V -> c0 with vanishing gradient
    along_x = dirs[np.abs(dirs[:, 0]) > 0.99]
    assert len(along_x) > 0


def test_v3_diagnostic_coercive_direction_clean():
    coercive = expression_potential("1 + (z0*z0 + z1*z1)/(1+np.sqrt(z0*z0+z1*z1))", 2, (0,), 0.5)
    report = v3_diagnostic(coercive)
    assert report.suspects == []


def test_v3_diagnostic_constant_flags_everything():
    report = v3_diagnostic(constant_potential(2.0, 2, (0,), 0.5), n_directions=8)
    assert len(report.suspects) == 8


def test_expression_potential_estimates_constants():
    spec = expression_potential("2 + 1/(1+z0*z0+z1*z1)", 2, (0,), 0.5)
    assert spec.c0 == pytest.approx(2.0, abs=1e-2)
    assert spec.c1 == pytest.approx(3.0, abs=1e-2)


def test_sample_on_grid():
    from lognls.grid import build_grid

    g = build_grid(2, 7.0, 33)
    f = SADDLE.sample_on_grid(g, 0.5)
    assert f.values.shape == (33 * 33,)
    center = (g.num_nodes - 1) // 2
    assert f.values[center] == pytest.approx(1.25)


def test_c2_recomputed_on_replace():
    import dataclasses

    spec = model_saddle(2.0, 2.5, 2, (0,), 0.5)
    assert spec.c2 == 1.0
    lowered = dataclasses.replace(spec, c0=0.25)
    assert lowered.c2 == 0.25
