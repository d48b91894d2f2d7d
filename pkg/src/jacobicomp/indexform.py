"""Index form ``I_B``, Jacobi fields with prescribed endpoint, and discrete minimization.

The index form of a perpendicular field ``Z`` on ``[0, l]`` is::

    I_B(Z, Z) = <B Z(0), Z(0)> + int_0^l ( |Z'|^2 - <R Z, Z> ) dt

For piecewise-linear fields the derivative term is integrated exactly and the
curvature term by Simpson's rule on each element (nodes and midpoint). The
stiffness matrix assembled in :func:`assemble_index_form` uses exactly the same
rule, so evaluating a discrete field and evaluating the quadratic form agree to
round-off.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, solveh_banded

from .curvature import CurvatureProfile, half_grid
from .jacobi import (DEFAULT_STEPS, FocalPointError, InitialOperator, first_focal_point,
                     integrate_jacobi)

__all__ = [
    "GridError",
    "PiecewiseField",
    "SampledField",
    "IndexFormReport",
    "index_form",
    "simpson_weights",
    "assemble_index_form",
    "jacobi_through_endpoint",
    "minimize_index",
    "boundary_identity_residual",
]


class GridError(ValueError):
    pass


def simpson_weights(N, h):
    """Composite Simpson weights for ``N`` (even) intervals of width ``h``."""
    if N < 2 or N % 2:
        raise GridError("Simpson's rule needs an even number of intervals")
    w = np.ones(N + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _check_grid(p, t):
    t = np.asarray(t, dtype=float)
    N = len(t) - 1
    if N < 2 or N % 2:
        raise GridError("field grid must have an even number of intervals")
    expected = np.linspace(0.0, p.l, N + 1)
    if np.max(np.abs(t - expected)) > 1e-12 * max(1.0, p.l):
        raise GridError("field grid is not the uniform partition of [0, l]")
    return N, p.l / N


@dataclass(eq=False)
class PiecewiseField:
    """Piecewise-linear perpendicular field given by its node values.

    ``tangential = (a, b)`` records the coefficients of an ``(a t + b) gamma'``
    component; it does not enter :func:`index_form`.
    """

    t: np.ndarray
    values: np.ndarray
    tangential: tuple = (0.0, 0.0)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float).T).T
        if self.values.shape[0] != len(self.t):
            raise GridError("one value per node required")
        if (len(self.t) - 1) % 2:
            raise GridError("number of intervals must be even")

    @property
    def endpoint_fixed(self):
        return self.values[-1]

    @classmethod
    def from_function(cls, fn, l, N):
        t = np.linspace(0.0, l, N + 1)
        return cls(t, np.array([np.atleast_1d(fn(ti)) for ti in t]))


@dataclass(eq=False)
class SampledField:
    """Smooth field known through samples of its values and derivatives on a uniform grid."""

    t: np.ndarray
    values: np.ndarray
    derivs: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float).T).T
        self.derivs = np.atleast_2d(np.asarray(self.derivs, dtype=float).T).T

    def scaled(self, c):
        return SampledField(self.t, c * self.values, c * self.derivs)


@dataclass
class IndexFormReport:
    total: float
    boundary_term: float
    integral_term: float
    grid_steps: int


def index_form(p: CurvatureProfile, B: InitialOperator, Z) -> IndexFormReport:
    """Evaluate ``I_B(Z, Z)`` for a :class:`PiecewiseField` or :class:`SampledField`."""
    if not isinstance(Z, (PiecewiseField, SampledField)):
        raise TypeError("Z must be a PiecewiseField or a SampledField")
    N, h = _check_grid(p, Z.t)
    V = Z.values
    if V.shape[1] != B.dim:
        raise GridError("field dimension does not match the operator")
    boundary = float(V[0] @ B.M @ V[0])
    if isinstance(Z, PiecewiseField):
        R = half_grid(p, N)[0]
        dV = np.diff(V, axis=0)
        energy = float(np.sum(dV * dV)) / h
        mid = 0.5 * (V[:-1] + V[1:])
        g_node = np.einsum("ni,nij,nj->n", V, R[0::2], V)
        g_mid = np.einsum("ni,nij,nj->n", mid, R[1::2], mid)
        curv = (h / 6.0) * (g_node[:-1].sum() + g_node[1:].sum() + 4.0 * g_mid.sum())
        integral = energy - float(curv)
    else:
        R = p.sample(Z.t)
        g = np.einsum("ni,ni->n", Z.derivs, Z.derivs) - np.einsum("ni,nij,nj->n", V, R, V)
        integral = float(simpson_weights(N, h) @ g)
    return IndexFormReport(boundary + integral, boundary, integral, N)


def jacobi_through_endpoint(p: CurvatureProfile, B: InitialOperator, w, steps=DEFAULT_STEPS,
                            check_focal=True) -> SampledField:
    """The unique Jacobi field ``V`` with ``V(l) = w`` and ``V'(0) = B V(0)``.

    ``V(t) = A(t) A(l)^{-1} w``. Requires that ``B`` has no focal point on ``[0, l]``.
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if check_focal:
        focal = first_focal_point(p, B, steps)
        if focal.found:
            raise FocalPointError(f"focal point of B at t* = {focal.t_star!r}", focal.t_star)
    traj = integrate_jacobi(p, B, steps)
    try:
        c = np.linalg.solve(traj.A[-1], w)
    except LinAlgError as exc:
        raise FocalPointError("A(l) is singular", p.l) from exc
    V, Vp = traj.field(c)
    return SampledField(traj.t, V, Vp)


def assemble_index_form(p: CurvatureProfile, B: InitialOperator, N):
    """Sparse symmetric matrix ``K`` with ``I_B(Z, Z) = x^T K x`` for node values ``x``."""
    if N < 2 or N % 2:
        raise GridError("number of intervals must be even")
    m = B.dim
    h = p.l / N
    R = half_grid(p, N)[0]
    eye = np.eye(m)
    R0, Rh, R1 = R[0:-1:2], R[1::2], R[2::2]
    diag_left = eye / h - (h / 6.0) * (R0 + Rh)
    diag_right = eye / h - (h / 6.0) * (Rh + R1)
    off = -eye / h - (h / 6.0) * Rh

    rows, cols, vals = [], [], []
    ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")

    def add(blocks, r_nodes, c_nodes):
        rows.append((r_nodes[:, None, None] * m + ii).ravel())
        cols.append((c_nodes[:, None, None] * m + jj).ravel())
        vals.append(blocks.ravel())

    e = np.arange(N)
    add(diag_left, e, e)
    add(diag_right, e + 1, e + 1)
    add(off, e, e + 1)
    add(np.swapaxes(off, 1, 2), e + 1, e)
    add(np.asarray(B.M)[None], np.array([0]), np.array([0]))
    size = (N + 1) * m
    K = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(size, size)).tocsr()
    K.sum_duplicates()
    return K


def _upper_banded(K, u):
    K = K.tocoo()
    mask = K.row <= K.col
    ab = np.zeros((u + 1, K.shape[0]))
    ab[u + K.row[mask] - K.col[mask], K.col[mask]] = K.data[mask]
    return ab


def minimize_index(p: CurvatureProfile, B: InitialOperator, w, n_nodes):
    """Minimize ``I_B`` over piecewise-linear fields with the last node pinned to ``w``.

    The stationarity system on the free nodes is solved by banded Cholesky.
    If the system matrix is not positive definite the discrete problem has
    focal-point behaviour and :class:`FocalPointError` is raised.

    Returns ``(minimizer, value)``.
    """
    n_nodes = int(n_nodes)
    if n_nodes < 3 or (n_nodes - 1) % 2:
        raise GridError("n_nodes must be odd and at least 3")
    N = n_nodes - 1
    m = B.dim
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.shape != (m,):
        raise ValueError("endpoint has the wrong dimension")
    K = assemble_index_form(p, B, N).tocsc()
    nf = N * m
    K_ff = K[:nf, :nf]
    K_fN = K[:nf, nf:]
    K_NN = K[nf:, nf:].toarray()
    rhs = -(K_fN @ w)
    try:
        x = solveh_banded(_upper_banded(K_ff, 2 * m - 1), rhs, lower=False)
    except LinAlgError as exc:
        raise FocalPointError("index form is not positive definite on fields vanishing at l "
                              "(numerical focal point)") from exc
    value = float(w @ K_NN @ w - rhs @ x)
    values = np.vstack([x.reshape(N, m), w[None, :]])
    field = PiecewiseField(np.linspace(0.0, p.l, N + 1), values)
    return field, value


def boundary_identity_residual(p: CurvatureProfile, B: InitialOperator, w, steps=DEFAULT_STEPS,
                               check_focal=True) -> float:
    """``|I_B(V, V) - <V'(l), V(l)>|`` for the Jacobi field through ``w``."""
    V = jacobi_through_endpoint(p, B, w, steps, check_focal=check_focal)
    total = index_form(p, B, V).total
    return abs(total - float(V.derivs[-1] @ V.values[-1]))
