import math

import numpy as np
import pytest

from jacobicomp.applications import (QuadInstance, VolumeModel, corollary_c_lengths,
                                     corollary_c_speed, corollary_e_solve_rtilde,
                                     corollary_e_verify, leg_threshold, quad_compare, quad_sweep,
                                     sphere_area)
from jacobicomp.curvature import WarpingFunction, build_cap_extension

RIGHT = math.pi / 2


def law_of_cosines_rs(pq, pr, qs, a1, a2):
    """|rs| on the unit sphere by chaining spherical triangles prq and rqs."""
    qr = math.acos(math.cos(pr) * math.cos(pq) + math.sin(pr) * math.sin(pq) * math.cos(a1))
    cos_pqr = (math.cos(pr) - math.cos(pq) * math.cos(qr)) / (math.sin(pq) * math.sin(qr))
    rqs = a2 - math.acos(max(-1.0, min(1.0, cos_pqr)))
    return math.acos(math.cos(qr) * math.cos(qs) + math.sin(qr) * math.sin(qs) * math.cos(rqs))


def test_quad_degenerate_legs():
    res = quad_compare(QuadInstance(1.3, 0.0, 0.0, RIGHT, RIGHT))
    assert res.rs_flat == pytest.approx(1.3, abs=1e-15)
    assert res.rs_sphere == pytest.approx(1.3, abs=1e-15)
    assert res.margin == pytest.approx(0.0, abs=1e-15)


def test_quad_worked_instance():
    res = quad_compare(QuadInstance(1.0, 0.3, 0.3, RIGHT, RIGHT))
    assert res.rs_flat == pytest.approx(1.0, abs=1e-15)
    closed = math.acos(math.cos(0.3) ** 2 * math.cos(1) + math.sin(0.3) ** 2)
    assert res.rs_sphere == pytest.approx(closed, abs=1e-9)
    assert res.rs_sphere == pytest.approx(law_of_cosines_rs(1.0, 0.3, 0.3, RIGHT, RIGHT), abs=1e-9)
    assert res.rs_sphere == pytest.approx(0.9516, abs=1e-4)
    assert res.margin == pytest.approx(0.0484, abs=1e-4)


def test_quad_general_angles_match_oracle():
    for pq, pr, qs, a1, a2 in [(1.0, 0.2, 0.4, 1.2, 1.9), (0.7, 0.5, 0.1, 0.8, 0.6),
                               (2.0, 0.3, 0.3, 2.2, 1.4)]:
        res = quad_compare(QuadInstance(pq, pr, qs, a1, a2))
        assert res.rs_sphere == pytest.approx(law_of_cosines_rs(pq, pr, qs, a1, a2), abs=1e-9)


def test_quad_swap_symmetry():
    a = quad_compare(QuadInstance(1.1, 0.2, 0.45, 1.0, 1.7))
    b = quad_compare(QuadInstance(1.1, 0.45, 0.2, 1.7, 1.0))
    assert abs(a.margin - b.margin) <= 1e-12


def test_quad_sweep_and_threshold():
    legs = np.linspace(0, 1.2, 61)
    margins = quad_sweep(1.0, RIGHT, RIGHT, legs, legs)
    assert margins.shape == (61, 61)
    small = legs <= 0.5
    assert np.min(margins[np.ix_(small, small)]) >= -1e-10
    # for right angles the plane always wins: legs meet the normals at distance 1
    assert leg_threshold(1.0, RIGHT, RIGHT, legs) is None
    thr = leg_threshold(1.0, 1.3, 1.3, np.linspace(0, 3.0, 301))
    assert thr is not None and thr > 0.5


def test_quad_validation():
    with pytest.raises(ValueError):
        QuadInstance(1.0, -0.1, 0.2, 1.0, 1.0)
    with pytest.raises(ValueError):
        QuadInstance(1.0, 0.1, 0.2, 0.0, 1.0)
    with pytest.raises(ValueError):
        QuadInstance(1.0, 0.1, 0.2, 1.0, 1.0, same_side=False)
    with pytest.raises(ValueError):
        quad_compare(QuadInstance(3.5, 0.1, 0.2, 1.0, 1.0))


def test_cor_c_equidistant():
    s, s0 = corollary_c_speed(0.0, 1.0, 0.3, 0.0, 0.0, 1.0, 0.0)
    assert s == pytest.approx(1.0, abs=1e-15)
    assert s0 == pytest.approx(math.cos(0.3), abs=1e-10)


def test_cor_c_zero_transversal():
    s, s0 = corollary_c_speed(-1.0, 2.0, 0.0, 0.0, 0.4, 1.3, 0.5)
    assert s == pytest.approx(1.0, abs=1e-15) and s0 == pytest.approx(1.0, abs=1e-15)


def test_cor_c_symmetric_instance():
    s, s0 = corollary_c_speed(0.5, 0.5, 0.4, 0.2, -0.3, 1.2, 0.4)
    assert abs(s - s0) <= 1e-10


def test_cor_c_tangential_only():
    # E parallel-ish: speed reduces to |a L + b| plus the perpendicular part
    s, s0 = corollary_c_speed(0.0, 0.0, 0.5, 0.4, 0.0, 1.0, 0.6)
    b, aL = 0.6, 0.4
    perp = math.sqrt(1 - b * b)
    assert s == pytest.approx(math.hypot(perp, aL + b), abs=1e-15)


def test_cor_c_preconditions():
    with pytest.raises(ValueError):
        corollary_c_speed(0.0, 1.0, 0.3, 0.0, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        corollary_c_speed(0.0, 1.0, 0.3, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        # model transversal of length 2 passes the focal point of 0 * id at pi/2
        corollary_c_speed(0.0, 1.0, 2.0, 0.0, 0.0, 1.0, 0.0)


def test_cor_c_lengths_equidistant():
    t = np.linspace(0, 2, 9)
    ones = np.ones_like(t)
    L, L0 = corollary_c_lengths(0.0, 1.0, t, 0.3 * ones, 0 * ones, 0 * ones, ones, 0 * ones)
    assert L == pytest.approx(2.0, abs=1e-14)
    assert L0 == pytest.approx(2 * math.cos(0.3), abs=1e-10)


def test_sphere_area():
    assert sphere_area(0) == 2.0
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(2) == pytest.approx(4 * math.pi)
    assert sphere_area(3) == pytest.approx(2 * math.pi**2)
    assert sphere_area(4) == pytest.approx(8 * math.pi**2 / 3)


def test_rtilde_examples():
    res = corollary_e_solve_rtilde(1.0, 0.5, 0.0)
    assert res.r_tilde == pytest.approx(math.sin(0.5), abs=1e-12)
    assert res.r_tilde == pytest.approx(0.4794255, abs=1e-7)
    assert res.r_ge_r_tilde
    assert corollary_e_solve_rtilde(0.7, 0.9, 0.7, n=3).r_tilde == pytest.approx(0.9, abs=1e-12)
    res = corollary_e_solve_rtilde(1.0, 0.8, 0.25)
    assert res.r_tilde == pytest.approx(2 * math.asin(math.sin(0.8) / 2), abs=1e-12)


def test_rtilde_no_solution():
    with pytest.raises(ValueError):
        # sn_0(3) = 3 exceeds the maximum 1 of sn_1
        corollary_e_solve_rtilde(0.0, 3.0, 1.0)


def test_cor_e_worked_example():
    f = WarpingFunction.space_form(1.0, 3.0, cap_radius=0.5)
    model = VolumeModel.build(2, f, 0.0)
    rep = corollary_e_verify(model, [0.7])
    assert rep.hypothesis.passed and rep.holds
    assert rep.area_M[0] == pytest.approx(2 * math.pi * math.sin(1.2), abs=1e-12)
    assert rep.area_model[0] == pytest.approx(2 * math.pi * (math.sin(0.5) + 0.7), abs=1e-10)
    assert rep.area_M[0] == pytest.approx(5.8561, abs=1e-4)
    assert rep.area_model[0] == pytest.approx(7.4106, abs=1e-4)
    ann = 2 * math.pi * (math.cos(0.5) - math.cos(1.2))
    assert rep.annulus_M[0] == pytest.approx(ann, abs=1e-12)


def test_cor_e_equal_curvature_equality():
    for k, n in [(1.0, 2), (0.0, 3), (-0.5, 4)]:
        f = WarpingFunction.space_form(k, 2.0, cap_radius=0.4)
        rep = corollary_e_verify(VolumeModel.build(n, f, k), [0.2, 0.6, 1.1])
        assert rep.hypothesis.passed
        assert np.max(np.abs(rep.area_margin)) <= 1e-10
        assert np.max(np.abs(rep.annulus_margin)) <= 1e-10


def test_cor_e_cap_extension():
    f = build_cap_extension(1.0, 0.5, 0.25, 3.0)
    rep = corollary_e_verify(VolumeModel.build(2, f, 0.25), [0.2, 0.5, 1.0])
    assert rep.hypothesis.passed and rep.holds
    assert np.all(rep.area_margin > 0) and np.all(rep.annulus_margin > 0)


def test_cor_e_hypothesis_failure():
    f = build_cap_extension(1.0, 0.5, 0.1, 3.0)
    rep = corollary_e_verify(VolumeModel.build(2, f, 0.25), [0.5])
    assert "radial_curvature_lower_bound" in rep.hypothesis.failed()
    assert rep.holds is None


def test_cor_e_relaxed_mode():
    f = build_cap_extension(1.0, 0.5, 0.3, 3.0)
    rt = corollary_e_solve_rtilde(1.0, 0.5, 0.0).r_tilde
    model = VolumeModel.build(3, f, 0.0, r_tilde=rt + 0.5 * (0.5 - rt))
    strict = corollary_e_verify(model, [0.3, 0.9])
    assert "boundary_area_match" in strict.hypothesis.failed()
    relaxed = corollary_e_verify(model, [0.3, 0.9], relaxed=True)
    assert relaxed.hypothesis.passed and relaxed.holds


def test_cor_e_domain_truncation_warnings():
    f = WarpingFunction.space_form(1.0, 2.0, cap_radius=0.5)
    rep = corollary_e_verify(VolumeModel.build(2, f, 1.0), [0.5, 1.2, 2.0])
    assert list(rep.R) == [0.5, 1.2]
    assert rep.warnings
    rep = corollary_e_verify(VolumeModel.build(2, WarpingFunction.space_form(1.0, 6.0, cap_radius=0.5), 1.0),
                             [1.0, 2.8])
    assert list(rep.R) == [1.0]


def test_volume_model_needs_cap():
    with pytest.raises(ValueError):
        VolumeModel.build(2, WarpingFunction(np.sin, np.cos, rho_max=2.0), 0.0, r_tilde=0.5)


def test_annulus_simpson_consistency():
    f = WarpingFunction.space_form(1.0, 3.0, cap_radius=0.5)
    model = VolumeModel.build(2, f, 0.0)
    coarse = corollary_e_verify(model, [1.0], steps=8)
    fine = corollary_e_verify(model, [1.0], steps=16)
    exact = 2 * math.pi * (math.cos(0.5) - math.cos(1.5))
    e1, e2 = abs(coarse.annulus_M[0] - exact), abs(fine.annulus_M[0] - exact)
    assert e1 / e2 > 14
