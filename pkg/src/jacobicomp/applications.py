"""Worked geometric scenarios built on the comparison machinery.

* A geodesic quadrilateral in the plane versus the unit sphere.
* Speeds and lengths of curves ``c(t) = exp_{gamma(t)}(f(t) E(t))`` on two
  constant-curvature surfaces.
* Areas of geodesic spheres and volumes of annuli about the pole of a
  rotationally symmetric metric whose inner ball is a round cap, compared with
  a space form.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .curvature import (HypothesisCheck, HypothesisReport, WarpingFunction,
                        space_form_functions)
from .indexform import simpson_weights
from .jacobi import space_form_focal_time

__all__ = [
    "QuadInstance",
    "QuadResult",
    "quad_compare",
    "quad_sweep",
    "leg_threshold",
    "corollary_c_speed",
    "corollary_c_lengths",
    "sphere_area",
    "RTilde",
    "corollary_e_solve_rtilde",
    "VolumeModel",
    "VolumeReport",
    "corollary_e_verify",
]


# -- quadrilateral ----------------------------------------------------------


@dataclass(frozen=True)
class QuadInstance:
    """Base ``[pq]`` with legs ``[pr]`` at ``p`` and ``[qs]`` at ``q`` on one side."""

    pq: float
    pr: float
    qs: float
    angle_rpq: float
    angle_pqs: float
    same_side: bool = True

    def __post_init__(self):
        if min(self.pq, self.pr, self.qs) < 0:
            raise ValueError("lengths must be nonnegative")
        for a in (self.angle_rpq, self.angle_pqs):
            if not 0 < a < math.pi:
                raise ValueError("angles must lie in (0, pi)")
        if not self.same_side:
            raise ValueError("only configurations with r, s on one side are supported")


class QuadResult(NamedTuple):
    rs_flat: float
    rs_sphere: float
    margin: float


def _flat_rs(q):
    r = np.array([q.pr * math.cos(q.angle_rpq), q.pr * math.sin(q.angle_rpq)])
    s = np.array([q.pq - q.qs * math.cos(q.angle_pqs), q.qs * math.sin(q.angle_pqs)])
    return float(np.hypot(*(r - s)))


def _sphere_rs(q):
    # p on the x-axis, [pq] along the equator, the chosen side is +z
    p = np.array([1.0, 0.0, 0.0])
    qq = np.array([math.cos(q.pq), math.sin(q.pq), 0.0])
    up = np.array([0.0, 0.0, 1.0])
    tp = np.array([0.0, 1.0, 0.0])  # unit tangent at p towards q
    tq = np.array([math.sin(q.pq), -math.cos(q.pq), 0.0])  # unit tangent at q towards p
    dr = math.cos(q.angle_rpq) * tp + math.sin(q.angle_rpq) * up
    ds = math.cos(q.angle_pqs) * tq + math.sin(q.angle_pqs) * up
    r = math.cos(q.pr) * p + math.sin(q.pr) * dr
    s = math.cos(q.qs) * qq + math.sin(q.qs) * ds
    if float(r @ s) < -1.0 + 1e-12:
        raise ValueError("degenerate configuration: r and s are antipodal")
    return float(math.atan2(np.linalg.norm(np.cross(r, s)), float(r @ s)))


def quad_compare(q: QuadInstance) -> QuadResult:
    """``|rs|`` in the plane and on the unit sphere; ``margin = flat - sphere``."""
    if q.pq >= math.pi or q.pr >= math.pi or q.qs >= math.pi:
        raise ValueError("sphere-side arcs must be shorter than pi")
    flat, sph = _flat_rs(q), _sphere_rs(q)
    return QuadResult(flat, sph, flat - sph)


def quad_sweep(pq, angle_rpq, angle_pqs, legs_pr, legs_qs):
    """Margins on the grid ``legs_pr x legs_qs``; shape ``(len(legs_pr), len(legs_qs))``."""
    out = np.empty((len(legs_pr), len(legs_qs)))
    for i, a in enumerate(legs_pr):
        for j, b in enumerate(legs_qs):
            out[i, j] = quad_compare(QuadInstance(pq, a, b, angle_rpq, angle_pqs)).margin
    return out


def leg_threshold(pq, angle_rpq, angle_pqs, legs, tol=1e-12):
    """First equal leg length in ``legs`` where the flat distance drops below the spherical one."""
    for x in legs:
        if quad_compare(QuadInstance(pq, x, x, angle_rpq, angle_pqs)).margin < -tol:
            return float(x)
    return None


# -- curves at distance f(t) along E(t) -------------------------------------


def corollary_c_speed(kM, kM0, f, fprime, lam, E_norm, E_dot_gamma):
    """Speeds ``||c'(t0)||`` on the surfaces of curvature ``kM`` and ``kM0``.

    ``c'(t0)`` is the Jacobi field ``V`` along the transversal geodesic of
    length ``L = f E_norm`` with ``V(0) = gamma'`` and
    ``V'(0) = (f'/f) E/|E| + (lam/|E|) gamma'``. Its tangential part is
    ``a s + b`` with ``b = <E, gamma'>/|E|`` and ``a = f'/f + lam b/|E|``; its
    perpendicular part has norm ``sqrt(1 - b^2) (cs_k(s) + (lam/|E|) sn_k(s))``.
    """
    f, fprime, lam = float(f), float(fprime), float(lam)
    E_norm, E_dot_gamma = float(E_norm), float(E_dot_gamma)
    if E_norm <= 0:
        raise ValueError("E must not vanish")
    if not abs(E_dot_gamma) < E_norm:
        raise ValueError("<E, gamma'> must differ from +-|E|")
    if f < 0:
        raise ValueError("f must be nonnegative")
    if f == 0 and fprime != 0:
        raise ValueError("a nonnegative smooth f has f' = 0 where f = 0")
    L = f * E_norm
    mu = lam / E_norm
    t_focal = space_form_focal_time(kM0, mu)
    if t_focal is not None and t_focal <= L:
        raise ValueError(f"focal point of {mu:g} id on the model transversal at s = {t_focal:.10g}")
    b = E_dot_gamma / E_norm
    aL = fprime * E_norm + lam * b * f  # a * L without dividing by f
    perp0 = 1.0 - b * b

    def speed(k):
        sn, cs = space_form_functions(k, L)
        return math.sqrt(perp0 * (cs + mu * sn) ** 2 + (aL + b) ** 2)

    return speed(kM), speed(kM0)


def corollary_c_lengths(kM, kM0, t, f, fprime, lam, E_norm, E_dot_gamma):
    """Lengths of ``c`` and ``c0`` by Simpson's rule over the uniform grid ``t``.

    ``f, fprime, lam, E_norm, E_dot_gamma`` are arrays sampled on ``t``.
    """
    t = np.asarray(t, dtype=float)
    speeds = np.array([
        corollary_c_speed(kM, kM0, *vals)
        for vals in zip(f, fprime, lam, E_norm, E_dot_gamma)
    ])
    w = simpson_weights(len(t) - 1, t[1] - t[0])
    return float(w @ speeds[:, 0]), float(w @ speeds[:, 1])


# -- volumes about a pole ---------------------------------------------------


def sphere_area(m):
    """Area of the unit ``m``-sphere: ``w_0 = 2``, ``w_1 = 2 pi``, ``w_m = 2 pi w_{m-2} / (m - 1)``."""
    m = int(m)
    if m < 0:
        raise ValueError("dimension must be nonnegative")
    w = 2.0 if m % 2 == 0 else 2.0 * math.pi
    for j in range(2 + m % 2, m + 1, 2):
        w = 2.0 * math.pi * w / (j - 1)
    return w


class RTilde(NamedTuple):
    r_tilde: float
    r_ge_r_tilde: bool


def corollary_e_solve_rtilde(k_prime, r, k, n=2, tol=1e-12) -> RTilde:
    """Radius ``r~`` with ``sn_k(r~)^(n-1) = sn_{k'}(r)^(n-1)`` on the increasing branch of ``sn_k``.

    For ``k > 0`` the branch is ``[0, pi / (2 sqrt k)]``.
    """
    k_prime, r, k = float(k_prime), float(r), float(k)
    if int(n) < 2:
        raise ValueError("dimension must be at least 2")
    target = space_form_functions(k_prime, r)[0]
    if target <= 0:
        raise ValueError("sn_{k'}(r) must be positive")
    lo = 0.0
    if k > 0:
        hi = 0.5 * math.pi / math.sqrt(k)
        if space_form_functions(k, hi)[0] < target:
            raise ValueError("no r~ <= pi/(2 sqrt k) matches the boundary area")
    else:
        hi = max(1.0, target)
        while space_form_functions(k, hi)[0] < target:
            hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if space_form_functions(k, mid)[0] < target:
            lo = mid
        else:
            hi = mid
    rt = 0.5 * (lo + hi)
    return RTilde(rt, r >= rt - tol)


@dataclass(eq=False)
class VolumeModel:
    """Rotationally symmetric ``M^n`` with a round cap, and its comparison space form."""

    n: int
    f: WarpingFunction
    k: float
    r_tilde: float
    omega: float = field(init=False)

    def __post_init__(self):
        if self.f.cap is None:
            raise ValueError("warping function must carry its cap (k', r)")
        self.omega = sphere_area(self.n - 1)

    @classmethod
    def build(cls, n, f: WarpingFunction, k, r_tilde=None):
        """Solve for ``r~`` from equal boundary areas unless it is given."""
        if r_tilde is None:
            k_prime, r = f.cap
            r_tilde = corollary_e_solve_rtilde(k_prime, r, k, n).r_tilde
        return cls(int(n), f, float(k), float(r_tilde))

    @property
    def k_prime(self):
        return self.f.cap[0]

    @property
    def r(self):
        return self.f.cap[1]

    def area(self, rho):
        return self.omega * np.asarray(self.f(rho)) ** (self.n - 1)

    def model_area(self, rho):
        return self.omega * np.asarray(space_form_functions(self.k, rho)[0]) ** (self.n - 1)


@dataclass(eq=False)
class VolumeReport:
    R: np.ndarray
    area_M: np.ndarray
    area_model: np.ndarray
    annulus_M: np.ndarray
    annulus_model: np.ndarray
    hypothesis: HypothesisReport
    tol: float
    warnings: list = field(default_factory=list)

    @property
    def area_margin(self):
        return self.area_model - self.area_M

    @property
    def annulus_margin(self):
        return self.annulus_model - self.annulus_M

    @property
    def min_margin(self):
        if len(self.R) == 0:
            return math.inf
        return float(min(np.min(self.area_margin), np.min(self.annulus_margin)))

    @property
    def asserted(self):
        return self.hypothesis.passed

    @property
    def holds(self):
        if not self.asserted:
            return None
        return self.min_margin >= -self.tol

    def summary(self):
        return {
            "hypothesis": self.hypothesis.to_dict(),
            "asserted": self.asserted,
            "holds": self.holds,
            "min_margin": self.min_margin,
            "tol": self.tol,
            "warnings": list(self.warnings),
        }


def _annulus(fn, a, b, steps):
    if b <= a:
        return 0.0
    x = np.linspace(a, b, steps + 1)
    return float(simpson_weights(steps, (b - a) / steps) @ fn(x))


def corollary_e_verify(model: VolumeModel, R_grid, steps=4096, relaxed=False,
                       tol=1e-8, grid_points=2001) -> VolumeReport:
    """Compare sphere areas and annulus volumes about the pole with the space form.

    ``relaxed=False`` requires equal boundary areas at ``r`` and ``r~``;
    ``relaxed=True`` accepts ``area(r) <= model_area(r~)`` with ``r >= r~``.
    Radii that leave the warping domain or pass the model focal radius are
    dropped with a warning.
    """
    R_grid = np.atleast_1d(np.asarray(R_grid, dtype=float))
    k, r, rt = model.k, model.r, model.r_tilde
    warnings = []
    keep = R_grid > 0
    if not np.all(keep):
        warnings.append("nonpositive R values dropped")
    too_far = r + R_grid > model.f.rho_max
    if np.any(too_far & keep):
        warnings.append(f"R beyond the warping domain (rho_max = {model.f.rho_max:.10g}) dropped")
    keep &= ~too_far
    if k > 0:
        past = rt + R_grid >= math.pi / math.sqrt(k)
        if np.any(past & keep):
            warnings.append("R past the model focal radius dropped")
        keep &= ~past
    R = R_grid[keep]

    checks = []
    rho_top = r + (float(R.max()) if R.size else 0.0)
    rho = np.linspace(0.0, rho_top, int(grid_points))
    K = np.asarray(model.f.gauss_curvature(rho))
    i = int(np.argmin(K - k))
    checks.append(HypothesisCheck("radial_curvature_lower_bound", bool(K[i] - k >= -1e-10),
                                  float(K[i] - k), float(rho[i])))
    checks.append(HypothesisCheck("cap_curvature_order", model.k_prime >= k,
                                  float(model.k_prime - k)))
    if k > 0:
        lim = 0.5 * math.pi / math.sqrt(k)
        checks.append(HypothesisCheck("r_tilde_branch", rt <= lim + 1e-12, float(lim - rt)))
    a_r, a_rt = float(model.area(r)), float(model.model_area(rt))
    if relaxed:
        checks.append(HypothesisCheck("boundary_area_order", a_r <= a_rt * (1 + 1e-12),
                                      float(a_rt - a_r)))
        checks.append(HypothesisCheck("radius_order", r >= rt - 1e-12, float(r - rt)))
    else:
        gap = abs(a_r - a_rt)
        checks.append(HypothesisCheck("boundary_area_match", gap <= 1e-10 * max(1.0, a_r), -gap))
    hyp = HypothesisReport(checks)

    area_M = model.area(r + R)
    area_model = model.model_area(rt + R)
    ann_M = np.array([_annulus(model.area, r, r + x, steps) for x in R])
    ann_model = np.array([_annulus(model.model_area, rt, rt + x, steps) for x in R])
    return VolumeReport(R, np.asarray(area_M, dtype=float), np.asarray(area_model, dtype=float),
                        ann_M, ann_model, hyp, tol, warnings)
