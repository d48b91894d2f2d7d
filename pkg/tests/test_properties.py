import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobicomp.applications import QuadInstance, corollary_c_speed, quad_compare
from jacobicomp.curvature import CurvatureProfile, space_form_functions
from jacobicomp.indexform import PiecewiseField, index_form
from jacobicomp.jacobi import (InitialOperator, closed_form_space_form_jacobi, first_focal_point,
                               integrate_jacobi, space_form_focal_time)
from jacobicomp.sampling import cor_c_data, make_rng

curv = st.floats(-2.0, 2.0)
lam = st.floats(-1.5, 1.5)
angle = st.floats(0.05, math.pi - 0.05)
leg = st.floats(0.0, 0.5)
FAST = settings(max_examples=60, deadline=None)


@FAST
@given(curv, st.floats(0.0, 1.5))
def test_sn_cs_pythagoras(k, t):
    sn, cs = space_form_functions(k, t)
    assert abs(cs * cs + k * sn * sn - 1.0) <= 1e-12 * max(1.0, cs * cs)


@FAST
@given(curv, lam, st.floats(0.0, 1.5))
def test_closed_form_solves_ode(k, lm, t):
    h = 1e-4
    j, jp = closed_form_space_form_jacobi(k, lm, t)
    jm, _ = closed_form_space_form_jacobi(k, lm, t - h)
    jpl, _ = closed_form_space_form_jacobi(k, lm, t + h)
    assert abs((jpl - 2 * j + jm) / h**2 + k * j) <= 1e-5 * max(1.0, abs(j))
    assert abs(closed_form_space_form_jacobi(k, lm, 0.0)[1] - lm) <= 1e-15


@FAST
@given(curv, lam)
def test_constant_profile_matches_closed_form(k, lm):
    l = 1.0
    tr = integrate_jacobi(CurvatureProfile.constant(k, 2, l), InitialOperator.from_scalar(lm, 1), 512)
    j, _ = closed_form_space_form_jacobi(k, lm, tr.t)
    assert np.max(np.abs(tr.A[:, 0, 0] - j)) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(curv, lam)
def test_focal_time_matches_closed_form(k, lm):
    l = 3.0
    res = first_focal_point(CurvatureProfile.constant(k, 2, l), InitialOperator.from_scalar(lm, 1))
    t = space_form_focal_time(k, lm)
    if t is None or t > l - 1e-6:
        assert not res.found or res.t_star > l - 1e-6
    else:
        assert abs(res.t_star - t) <= 1e-8


@FAST
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.integers(0, 2**32 - 1))
def test_index_form_polarization(a, b, seed):
    rng = np.random.default_rng(seed)
    p = CurvatureProfile.diagonal([0.7, lambda t: 0.2 * np.cos(t)], 1.0)
    B = InitialOperator([[0.3, 0.1], [0.1, -0.2]])
    t = np.linspace(0, 1, 17)
    X, Y = rng.standard_normal((17, 2)), rng.standard_normal((17, 2))

    def q(V):
        return index_form(p, B, PiecewiseField(t, V)).total

    lhs = q(a * X + b * Y)
    rhs = a * a * q(X) + b * b * q(Y) + a * b * (q(X + Y) - q(X) - q(Y))
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


@FAST
@given(st.floats(0.1, 2.5), leg, leg, angle, angle)
def test_quad_swap_symmetry(pq, pr, qs, a1, a2):
    a = quad_compare(QuadInstance(pq, pr, qs, a1, a2))
    b = quad_compare(QuadInstance(pq, qs, pr, a2, a1))
    assert abs(a.margin - b.margin) <= 1e-12


@FAST
@given(st.floats(0.1, 2.0), leg, leg)
def test_quad_right_angles_plane_wins(pq, pr, qs):
    assert quad_compare(QuadInstance(pq, pr, qs, math.pi / 2, math.pi / 2)).margin >= -1e-12


@FAST
@given(st.integers(0, 2**32 - 1), st.floats(-1.0, 2.0), st.floats(0.0, 2.0))
def test_cor_c_inequality(seed, kM0, drop):
    data = cor_c_data(make_rng(seed), kM0)
    s, s0 = corollary_c_speed(kM0 - drop, kM0, *data)
    assert s >= s0 - 1e-9
