import math

import numpy as np
import pytest
from scipy.optimize import brentq

from jacobicomp.curvature import CurvatureProfile
from jacobicomp.jacobi import (DivergenceError, FocalPointError, InitialOperator,
                               closed_form_space_form_jacobi, first_focal_point,
                               integrate_jacobi, logdet_derivative, space_form_focal_time)


def scalar(k, lam, l, n=2):
    return CurvatureProfile.constant(k, n, l), InitialOperator.from_scalar(lam, n - 1)


def test_initial_operator_basics():
    B = InitialOperator([[2.0, 1.0], [1.0, 2.0]])
    assert B.dim == 2
    assert B.min_eigenvalue == pytest.approx(1.0)
    assert B.max_eigenvalue == pytest.approx(3.0)
    assert list(B.eigenvalues) == sorted(B.eigenvalues)
    with pytest.raises(AttributeError):
        B.M = np.eye(2)
    with pytest.raises(ValueError):
        B.M[0, 0] = 5.0
    with pytest.raises(ValueError):
        InitialOperator([[1.0, 0.5], [0.0, 1.0]])
    s = InitialOperator.from_scalar(0.4, 3)
    assert s.scalar == 0.4
    assert np.array_equal(s.M, 0.4 * np.eye(3))


def test_flat_parallel():
    p, B = scalar(0, 0, 1, n=4)
    tr = integrate_jacobi(p, B, 64)
    assert np.array_equal(tr.A, np.broadcast_to(np.eye(3), tr.A.shape))


def test_initial_conditions_exact():
    p = CurvatureProfile.diagonal([0.3, lambda t: np.cos(t)], 1.0)
    B = InitialOperator([[0.1, 0.2], [0.2, -0.4]])
    tr = integrate_jacobi(p, B, 16)
    assert np.array_equal(tr.A[0], np.eye(2))
    assert np.array_equal(tr.Aprime[0], B.M)


def test_sphere_cosine():
    p, B = scalar(1, 0, 1)
    tr = integrate_jacobi(p, B, 4096)
    assert np.max(np.abs(tr.A[:, 0, 0] - np.cos(tr.t))) < 1e-10


def test_closed_form_with_lambda():
    p, B = scalar(1, 1, math.pi / 4)
    tr = integrate_jacobi(p, B, 4096)
    assert tr.A[-1, 0, 0] == pytest.approx(1.4142136, abs=1e-7)
    assert tr.A[-1, 0, 0] == pytest.approx(math.sqrt(2), abs=1e-10)


def test_closed_form_examples():
    j, jp = closed_form_space_form_jacobi(1, 0, math.pi / 2)
    assert j == pytest.approx(0.0, abs=1e-15) and jp == pytest.approx(-1.0)
    assert closed_form_space_form_jacobi(0, -0.5, 2) == (0.0, -0.5)
    t = math.atanh(0.5)
    j, jp = closed_form_space_form_jacobi(-1, -2, t)
    assert j == pytest.approx(0.0, abs=1e-15)
    assert jp == pytest.approx(math.sinh(t) - 2 * math.cosh(t), abs=1e-15)
    assert jp == pytest.approx(-1.7320508, abs=1e-7)


def test_rk4_fourth_order():
    k, lam, l = 1.0, 0.3, 4.0
    errs = []
    for steps in (256, 512, 1024):
        p, B = scalar(k, lam, l)
        tr = integrate_jacobi(p, B, steps)
        j, jp = closed_form_space_form_jacobi(k, lam, tr.t)
        errs.append(max(np.max(np.abs(tr.A[:, 0, 0] - j)), np.max(np.abs(tr.Aprime[:, 0, 0] - jp))))
    assert errs[0] / errs[1] >= 14
    assert errs[1] / errs[2] >= 14


def test_wronskian_invariant():
    p = CurvatureProfile.custom(lambda t: np.array([[1 + t, 0.3 * t], [0.3 * t, -0.5]]), 3, 2.0)
    B = InitialOperator([[0.2, -0.1], [-0.1, 0.7]])
    assert integrate_jacobi(p, B, 2048).wronskian_defect() <= 1e-8


def test_bad_inputs():
    p, B = scalar(1, 0, 1)
    with pytest.raises(ValueError):
        integrate_jacobi(p, B, 7)
    with pytest.raises(ValueError):
        integrate_jacobi(p, InitialOperator.from_scalar(0, 2), 8)


def test_divergence_error():
    p = CurvatureProfile.constant(-1e300, 2, 1.0)
    with pytest.raises(DivergenceError) as info:
        integrate_jacobi(p, InitialOperator.from_scalar(0, 1), 8)
    assert 0 < info.value.t_bad <= 1.0


def test_focal_examples():
    res = first_focal_point(*scalar(1, 0, 2))
    assert abs(res.t_star - math.pi / 2) <= 1e-8
    assert res.bracket[1] - res.bracket[0] <= 1e-10
    assert res.warning is None
    res = first_focal_point(*scalar(0, -0.5, 3))
    assert abs(res.t_star - 2.0) <= 1e-8
    assert not first_focal_point(*scalar(-1, -0.5, 10)).found


def test_focal_none_matches_dense_oracle():
    # cosh t - 0.5 sinh t stays positive
    t = np.linspace(0, 10, 100001)
    assert np.min(np.cosh(t) - 0.5 * np.sinh(t)) > 0


def test_focal_even_multiplicity():
    # det = cos(t)^2 touches zero without changing sign
    res = first_focal_point(*scalar(1, 0, 2, n=3))
    assert abs(res.t_star - math.pi / 2) <= 1e-8
    res = first_focal_point(*scalar(1, 0.3, 3, n=5))
    assert abs(res.t_star - (math.pi / 2 + math.atan(0.3))) <= 1e-8


def test_focal_mixed_directions():
    p = CurvatureProfile.diagonal([4.0, 1.0], 3.0)
    res = first_focal_point(p, InitialOperator.from_scalar(0, 2))
    assert abs(res.t_star - math.pi / 4) <= 1e-8


def test_focal_matches_brentq_oracle():
    for k, lam in [(1.7, -0.4), (-1.3, -1.9), (0.0, -0.8), (0.4, 1.5)]:
        l = 3.0
        g = lambda t: closed_form_space_form_jacobi(k, lam, t)[0]  # noqa: E731
        ts = np.linspace(1e-9, l, 3001)
        vals = np.array([g(t) for t in ts])
        idx = np.flatnonzero(vals <= 0)
        res = first_focal_point(*scalar(k, lam, l))
        if idx.size == 0:
            assert not res.found
            continue
        root = brentq(g, ts[idx[0] - 1], ts[idx[0]], xtol=1e-15)
        assert abs(res.t_star - root) <= 1e-8


def test_det_positive_before_focal_on_refined_grid():
    p = CurvatureProfile.diagonal([lambda t: 1.5 + 0.5 * np.sin(3 * t), 0.8], 3.0)
    B = InitialOperator([[0.1, 0.3], [0.3, -0.2]])
    res = first_focal_point(p, B, 1024)
    assert res.found
    tr = integrate_jacobi(p, B, 2048)
    before = tr.t < res.t_star - 1e-9
    assert np.all(tr.det()[before] > 0)


def test_space_form_focal_time():
    assert space_form_focal_time(1, 0) == pytest.approx(math.pi / 2)
    assert space_form_focal_time(0, -0.5) == 2.0
    assert space_form_focal_time(0, 0.5) is None
    assert space_form_focal_time(-1, -0.5) is None
    assert space_form_focal_time(-1, -2) == pytest.approx(math.atanh(0.5))


def test_logdet_derivative_examples():
    tr = integrate_jacobi(*scalar(0, 0, 1, n=3), steps=16)
    assert logdet_derivative(tr, 5) == 0.0
    p, B = scalar(1, 0, 1, n=3)
    tr = integrate_jacobi(p, B, 4096)
    i = int(round(0.5 / tr.h))
    assert logdet_derivative(tr, i) == pytest.approx(-2 * math.tan(0.5), abs=1e-10)
    assert logdet_derivative(tr, i) == pytest.approx(-1.0926050, abs=1e-7)
    B = InitialOperator([[0.3, 0.1], [0.1, -0.6]])
    tr = integrate_jacobi(CurvatureProfile.diagonal([1.0, 2.0], 1.0), B, 16)
    assert logdet_derivative(tr, 0) == pytest.approx(np.trace(B.M))


def test_logdet_derivative_singular():
    p, B = scalar(1, 0, math.pi / 2, n=3)
    tr = integrate_jacobi(p, B, 4096)
    with pytest.raises(FocalPointError):
        logdet_derivative(tr, 4096)


def test_field_linearity():
    p = CurvatureProfile.diagonal([0.4, 1.3], 1.0)
    tr = integrate_jacobi(p, InitialOperator([[0.2, 0.1], [0.1, 0.0]]), 64)
    v = np.array([0.3, -1.1])
    V, Vp = tr.field(v)
    V2, Vp2 = tr.field(2.5 * v)
    assert np.max(np.abs(V2 - 2.5 * V)) < 1e-12
    assert np.max(np.abs(Vp2 - 2.5 * Vp)) < 1e-12
