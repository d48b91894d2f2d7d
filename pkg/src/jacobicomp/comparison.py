"""Rauch-type comparisons of Jacobi fields on two geodesics.

Two comparisons are covered:

* norms of Jacobi fields whose perpendicular parts satisfy ``V'(0) = B V(0)``
  under an upper/lower sectional-curvature split and an eigenvalue split of
  the initial operators (:func:`rauch3_verify`);
* the wedge of ``n - 1`` perpendicular Jacobi fields with ``V_i'(0) = lam V_i(0)``
  under a lower Ricci bound, compared with the constant-curvature model
  (:func:`thm_d_verify`).

Tangential parts of Jacobi fields are exactly ``(a t + b) gamma'(t)`` and are
added analytically; only perpendicular parts are integrated.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .curvature import CurvatureProfile, HypothesisCheck, HypothesisReport, validate_hypotheses
from .indexform import SampledField, index_form
from .jacobi import (DEFAULT_STEPS, FocalPointError, InitialOperator,
                     closed_form_space_form_jacobi, first_focal_point, integrate_jacobi)

__all__ = [
    "ComparisonReport",
    "RigidityDiagnostics",
    "ChainResult",
    "rauch3_verify",
    "monotonicity_check",
    "rigidity_diagnostics",
    "inequality_chain",
    "thm_d_verify",
    "ratio_monotonicity",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-7
RIGIDITY_TOL = 1e-6


@dataclass(eq=False)
class _Side:
    profile: CurvatureProfile
    B: InitialOperator
    values: np.ndarray
    derivs: np.ndarray


@dataclass(eq=False)
class RigidityDiagnostics:
    norm_gap: float
    parallelism_residual: Optional[float]
    curvature_gap: Optional[float]
    eigen_residual: Optional[float]
    eigen_residual_model: Optional[float]
    mu: Optional[float] = None

    def within(self, tol=RIGIDITY_TOL):
        vals = [self.norm_gap, self.parallelism_residual, self.curvature_gap,
                self.eigen_residual, self.eigen_residual_model]
        return all(v is not None and v <= tol for v in vals)

    def to_dict(self):
        return {
            "norm_gap": self.norm_gap,
            "parallelism_residual": self.parallelism_residual,
            "curvature_gap": self.curvature_gap,
            "eigen_residual": self.eigen_residual,
            "eigen_residual_model": self.eigen_residual_model,
            "mu": self.mu,
        }


@dataclass(eq=False)
class ComparisonReport:
    """Sampled sides of a comparison.

    ``margin`` is oriented so that nonnegative values mean the comparison
    inequality holds: ``lhs - rhs`` for norm comparisons, ``rhs - lhs`` for the
    determinant comparison where the model side dominates.
    """

    kind: str
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    margin: np.ndarray
    ratio: np.ndarray
    hypothesis: HypothesisReport
    tol: float = DEFAULT_TOL
    warnings: list = field(default_factory=list)
    rigidity: Optional[RigidityDiagnostics] = None
    equality: Optional[dict] = None
    sides: tuple = field(default=(), repr=False)
    tangential: tuple = (0.0, 0.0)

    @property
    def min_margin(self):
        return float(np.min(self.margin))

    @property
    def asserted(self):
        """The inequality is only claimed when every hypothesis holds."""
        return self.hypothesis.passed

    @property
    def holds(self):
        if not self.asserted:
            return None
        return self.min_margin >= -self.tol

    def summary(self):
        return {
            "kind": self.kind,
            "hypothesis": self.hypothesis.to_dict(),
            "asserted": self.asserted,
            "holds": self.holds,
            "min_margin": self.min_margin,
            "tol": self.tol,
            "warnings": list(self.warnings),
            "rigidity": None if self.rigidity is None else self.rigidity.to_dict(),
            "equality": self.equality,
        }


def _as_vector(v, dim):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.size == 1 and dim > 1:
        # a bare norm: put it on the first frame vector
        out = np.zeros(dim)
        out[0] = float(v[0])
        return out
    if v.shape != (dim,):
        raise ValueError(f"initial vector must have dimension {dim}")
    return v


def rauch3_verify(pM: CurvatureProfile, pM0: CurvatureProfile, B: InitialOperator,
                  B0: InitialOperator, vhat0, vhat0_model, a=0.0, b=0.0,
                  steps=DEFAULT_STEPS, tol=DEFAULT_TOL) -> ComparisonReport:
    """Compare ``||V(t)||`` on ``pM`` with ``||V0(t)||`` on ``pM0``.

    ``vhat0`` and ``vhat0_model`` are the perpendicular initial values on each
    side (a float is read as a multiple of the first frame vector); their
    derivatives are ``B vhat0`` and ``B0 vhat0_model``. ``a, b`` give the
    shared tangential part ``(a t + b) gamma'``.

    Raises :class:`FocalPointError` if ``B0`` has a focal point on ``pM0``.
    """
    v = _as_vector(vhat0, B.dim)
    v0 = _as_vector(vhat0_model, B0.dim)
    hyp = validate_hypotheses(pM, pM0, B, B0, mode="sectional")
    n_v, n_v0 = float(np.linalg.norm(v)), float(np.linalg.norm(v0))
    hyp.checks.append(HypothesisCheck("initial_norm", n_v >= n_v0 - 1e-12, n_v - n_v0))
    focal = first_focal_point(pM0, B0, steps)
    if focal.found:
        raise FocalPointError(f"B0 has a focal point on the model side at t* = {focal.t_star!r}",
                              focal.t_star)
    tr = integrate_jacobi(pM, B, steps)
    tr0 = integrate_jacobi(pM0, B0, steps)
    V, Vp = tr.field(v)
    V0, V0p = tr0.field(v0)
    t = tr.t
    tang = (a * t + b) ** 2
    lhs = np.sqrt(np.einsum("ni,ni->n", V, V) + tang)
    rhs = np.sqrt(np.einsum("ni,ni->n", V0, V0) + tang)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.nan)
    warnings = []
    if n_v0 == 0.0:
        warnings.append("degenerate branch: model perpendicular part vanishes identically")
    return ComparisonReport(
        "rauch3", t, lhs, rhs, lhs - rhs, ratio, hyp, tol, warnings,
        sides=(_Side(pM, B, V, Vp), _Side(pM0, B0, V0, V0p)), tangential=(float(a), float(b)),
    )


def monotonicity_check(report: ComparisonReport) -> float:
    """Most negative forward-difference slope of ``||V_hat||^2 / ||V0_hat||^2``.

    Uses the perpendicular parts stored in the report. Returns ``0.0`` in the
    degenerate branch where the model perpendicular part vanishes.
    """
    side, side0 = report.sides
    num = np.einsum("ni,ni->n", side.values, side.values)
    den = np.einsum("ni,ni->n", side0.values, side0.values)
    if np.all(den == 0):
        return 0.0
    q = num / den
    h = report.t[1] - report.t[0]
    return float(np.min(np.diff(q) / h))


def rigidity_diagnostics(report: ComparisonReport, t0: float) -> RigidityDiagnostics:
    """Residuals that vanish when the norm comparison is an equality on ``[0, t0]``."""
    if not 0 < t0 <= report.t[-1] + 1e-12:
        raise ValueError("t0 must lie in (0, l]")
    idx = report.t <= t0 + 1e-12
    t = report.t[idx]
    norm_gap = float(np.max(np.abs(report.lhs[idx] - report.rhs[idx])))
    side, side0 = report.sides
    V, V0 = side.values[idx], side0.values[idx]
    nV, nV0 = np.linalg.norm(V, axis=1), np.linalg.norm(V0, axis=1)
    if np.any(nV[1:] == 0) or np.any(nV0[1:] == 0) or nV[0] == 0 or nV0[0] == 0:
        return RigidityDiagnostics(norm_gap, None, None, None, None)
    u, u0 = V / nV[:, None], V0 / nV0[:, None]
    h = t[1] - t[0]
    du = np.gradient(u, h, axis=0, edge_order=2)
    du0 = np.gradient(u0, h, axis=0, edge_order=2)
    parallel = float(max(np.max(np.linalg.norm(du, axis=1)), np.max(np.linalg.norm(du0, axis=1))))
    R = side.profile.sample(t)
    R0 = side0.profile.sample(t)
    kM = np.einsum("ni,nij,nj->n", u, R, u)
    kM0 = np.einsum("ni,nij,nj->n", u0, R0, u0)
    curvature_gap = float(np.max(np.abs(kM - kM0)))
    mu = float(side.derivs[0] @ side.values[0]) / float(side.values[0] @ side.values[0])
    eig = float(np.linalg.norm(side.B.M @ u[0] - mu * u[0]))
    eig0 = float(np.linalg.norm(side0.B.M @ u0[0] - mu * u0[0]))
    diag = RigidityDiagnostics(norm_gap, parallel, curvature_gap, eig, eig0, mu)
    report.rigidity = diag
    return diag


@dataclass
class ChainResult:
    """The three index-form values of the comparison chain on ``[0, t1]``."""

    t1: float
    index_M: float
    index_transplanted: float
    index_M0: float
    tol: float = DEFAULT_TOL

    @property
    def holds(self):
        return (self.index_M >= self.index_transplanted - self.tol
                and self.index_transplanted >= self.index_M0 - self.tol)


def inequality_chain(pM, pM0, B, B0, vhat0, vhat0_model, t1, steps=DEFAULT_STEPS,
                     tol=DEFAULT_TOL) -> ChainResult:
    """Check ``I_B(W) >= I_B0(W_bar) >= I_B0(W0)`` on ``[0, t1]``.

    ``W = V_hat / ||V_hat(t1)||`` and ``W0`` likewise on the model side.
    ``W_bar(t) = ||W(t)|| e0`` where ``e0`` is the parallel unit field with
    ``e0(t1) = W0(t1)``; in a parallel frame that is a constant vector.
    """
    v = _as_vector(vhat0, B.dim)
    v0 = _as_vector(vhat0_model, B0.dim)
    qM, qM0 = pM.restrict(t1), pM0.restrict(t1)
    V, Vp = integrate_jacobi(qM, B, steps).field(v)
    tr0 = integrate_jacobi(qM0, B0, steps)
    V0, V0p = tr0.field(v0)
    c, c0 = np.linalg.norm(V[-1]), np.linalg.norm(V0[-1])
    W = SampledField(tr0.t, V / c, Vp / c)
    W0 = SampledField(tr0.t, V0 / c0, V0p / c0)
    nW = np.linalg.norm(W.values, axis=1)
    dnW = np.einsum("ni,ni->n", W.derivs, W.values) / nW
    e0 = W0.values[-1]
    W_bar = SampledField(tr0.t, nW[:, None] * e0[None, :], dnW[:, None] * e0[None, :])
    return ChainResult(
        float(t1),
        index_form(qM, B, W).total,
        index_form(qM0, B0, W_bar).total,
        index_form(qM0, B0, W0).total,
        tol,
    )


def thm_d_verify(p: CurvatureProfile, k, lam, lam_tilde, init_wedge=1.0, init_wedge_tilde=1.0,
                 steps=DEFAULT_STEPS, tol=DEFAULT_TOL) -> ComparisonReport:
    """Compare the wedge of ``n - 1`` Jacobi fields on ``p`` with the space form ``S^n_k``.

    ``lhs = init_wedge * det A(t)`` with ``A'(0) = lam I`` on ``p``;
    ``rhs = init_wedge_tilde * (cs_k + lam_tilde sn_k)^(n-1)`` in closed form.
    The comparison domain is cut before a model focal point.

    Raises :class:`FocalPointError` if ``lam * id`` has a focal point on ``p``.
    """
    n = p.n
    hyp = validate_hypotheses(p, mode="ricci", k=k)
    hyp.checks.append(HypothesisCheck("lambda_order", lam <= lam_tilde, float(lam_tilde - lam)))
    hyp.checks.append(HypothesisCheck("initial_wedge", 0 < init_wedge <= init_wedge_tilde,
                                      float(init_wedge_tilde - init_wedge)))
    B = InitialOperator.from_scalar(lam, n - 1)
    focal = first_focal_point(p, B, steps)
    if focal.found:
        raise FocalPointError(f"lam * id has a focal point at t* = {focal.t_star!r}", focal.t_star)
    tr = integrate_jacobi(p, B, steps)
    t = tr.t
    j, _ = closed_form_space_form_jacobi(k, lam_tilde, t)
    warnings = []
    bad = np.flatnonzero(j <= 0)
    keep = len(t) if bad.size == 0 else int(bad[0])
    if keep < len(t):
        warnings.append(f"model focal point before t = {t[keep]:.10g}; comparison truncated")
    t = t[:keep]
    lhs = init_wedge * tr.det()[:keep]
    rhs = init_wedge_tilde * j[:keep] ** (n - 1)
    ratio = lhs / rhs
    margin = rhs - lhs

    # equality signature: per-direction parallelism, sectional gap, lambda gap
    A = tr.A[:keep]
    cols = np.swapaxes(A, 1, 2)  # cols[i, j] = J_j(t_i)
    norms = np.linalg.norm(cols, axis=2)
    u = cols / norms[:, :, None]
    h = tr.h
    du = np.gradient(u, h, axis=0, edge_order=2) if keep > 2 else np.zeros_like(u)
    R = p.sample(t)
    sec = np.einsum("nja,nab,njb->nj", u, R, u)
    equality = {
        "parallelism_residual": float(np.max(np.linalg.norm(du, axis=2))),
        "sectional_gap": float(np.max(np.abs(sec - k))),
        "lambda_gap": float(abs(lam - lam_tilde)),
        "norm_gap": float(np.max(np.abs(norms - j[:keep, None]))),
        "equality_detected": bool(np.min(np.abs(margin[1:])) <= RIGIDITY_TOL) if keep > 1 else False,
    }
    report = ComparisonReport("thm_d", t, lhs, rhs, margin, ratio, hyp, tol, warnings,
                              equality=equality)
    return report


def ratio_monotonicity(p: CurvatureProfile, k, lam, lam_tilde, steps=DEFAULT_STEPS) -> float:
    """Most positive forward-difference slope of ``det A / (cs_k + lam_tilde sn_k)^(n-1)``."""
    rep = thm_d_verify(p, k, lam, lam_tilde, 1.0, 1.0, steps)
    h = rep.t[1] - rep.t[0]
    return float(np.max(np.diff(rep.ratio) / h))
