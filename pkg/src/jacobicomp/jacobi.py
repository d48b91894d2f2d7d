"""Matrix Jacobi equation ``A'' + R(t) A = 0`` with ``A(0) = I``, ``A'(0) = B``.

Column ``i`` of ``A`` is the Jacobi field starting at the frame vector ``e_i``
with initial derivative ``B e_i``, so every Jacobi field ``X`` with
``X'(0) = B X(0)`` is ``A(t) X(0)``. A focal point of ``B`` is a zero of
``det A``.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .curvature import CurvatureProfile, half_grid, space_form_functions

__all__ = [
    "DivergenceError",
    "FocalPointError",
    "InitialOperator",
    "JacobiTrajectory",
    "FocalPointResult",
    "integrate_jacobi",
    "closed_form_space_form_jacobi",
    "first_focal_point",
    "logdet_derivative",
    "space_form_focal_time",
    "DEFAULT_STEPS",
]

DEFAULT_STEPS = 4096
DET_ZERO = 1e-12
BRACKET_TOL = 1e-10


class DivergenceError(ArithmeticError):
    def __init__(self, t_bad):
        super().__init__(f"non-finite Jacobi solution at t = {t_bad!r}")
        self.t_bad = t_bad


class FocalPointError(ValueError):
    """A focal point (or its discrete signature) makes the requested operation undefined."""

    def __init__(self, message, t_star=None):
        super().__init__(message)
        self.t_star = t_star


class InitialOperator:
    """Symmetric operator ``B`` on the perpendicular space at ``t = 0``."""

    __slots__ = ("M", "eigenvalues", "scalar")

    def __init__(self, M, scalar=None):
        M = np.atleast_2d(np.array(M, dtype=float))
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("initial operator must be a square matrix")
        if np.max(np.abs(M - M.T), initial=0.0) > 1e-12:
            raise ValueError("initial operator must be symmetric")
        M = 0.5 * (M + M.T)
        M.setflags(write=False)
        ev = np.linalg.eigvalsh(M)
        ev.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "scalar", None if scalar is None else float(scalar))

    def __setattr__(self, name, value):
        raise AttributeError("InitialOperator is immutable")

    @classmethod
    def from_scalar(cls, lam, dim):
        """``B = lam * id``."""
        return cls(float(lam) * np.eye(int(dim)), scalar=lam)

    @property
    def dim(self):
        return self.M.shape[0]

    @property
    def min_eigenvalue(self):
        return float(self.eigenvalues[0])

    @property
    def max_eigenvalue(self):
        return float(self.eigenvalues[-1])

    def __call__(self, v):
        return self.M @ np.asarray(v, dtype=float)

    def __repr__(self):
        if self.scalar is not None:
            return f"InitialOperator.from_scalar({self.scalar}, {self.dim})"
        return f"InitialOperator({self.M.tolist()})"


@dataclass(eq=False)
class JacobiTrajectory:
    t: np.ndarray
    A: np.ndarray
    Aprime: np.ndarray
    B: InitialOperator
    profile: CurvatureProfile = field(repr=False)

    @property
    def steps(self):
        return len(self.t) - 1

    @property
    def h(self):
        return float(self.t[1] - self.t[0])

    def det(self):
        sign, logabs = np.linalg.slogdet(self.A)
        return sign * np.exp(logabs)

    def field(self, v):
        """Values and derivatives of the Jacobi field ``A(t) v``; each shape ``(N+1, m)``."""
        v = np.asarray(v, dtype=float)
        return self.A @ v, self.Aprime @ v

    def wronskian_defect(self):
        """``max_i ||A'^T A - A^T A'||_inf``, zero for exact solutions."""
        At = np.swapaxes(self.A, 1, 2)
        Apt = np.swapaxes(self.Aprime, 1, 2)
        W = Apt @ self.A - At @ self.Aprime
        return float(np.max(np.abs(W)))


def _check_inputs(p, B, steps):
    steps = int(steps)
    if steps < 2 or steps % 2:
        raise ValueError("steps must be an even integer >= 2")
    if B.dim != p.n - 1:
        raise ValueError(f"operator dimension {B.dim} does not match profile (n - 1 = {p.n - 1})")
    return steps


def integrate_jacobi(p: CurvatureProfile, B: InitialOperator, steps=DEFAULT_STEPS,
                     backend=None) -> JacobiTrajectory:
    """Fixed-step RK4 solution of the matrix Jacobi equation on ``[0, p.l]``."""
    steps = _check_inputs(p, B, steps)
    R, h = half_grid(p, steps)
    m = B.dim
    A, Ap = kernels.rk4_trajectory(R, h, np.eye(m), B.M, backend=backend)
    finite = np.isfinite(A).all(axis=(1, 2)) & np.isfinite(Ap).all(axis=(1, 2))
    if not finite.all():
        i = int(np.argmin(finite))
        raise DivergenceError(float(i * h))
    t = np.linspace(0.0, p.l, steps + 1)
    return JacobiTrajectory(t, A, Ap, B, p)


def _state_from(traj, t, backend=None):
    """``A(t), A'(t)`` continuing the scan trajectory from the last node before ``t``.

    Identical to re-integrating from 0 on the scan grid and finishing with one
    partial RK4 step, without recomputing the prefix.
    """
    h = traj.h
    j = min(max(int(math.floor(t / h)), 0), traj.steps)
    delta = t - traj.t[j]
    if delta <= 0:
        return traj.A[j], traj.Aprime[j]
    R = traj.profile.sample([traj.t[j], traj.t[j] + 0.5 * delta, t])
    return kernels.rk4_endpoint(R, delta, traj.A[j], traj.Aprime[j], backend=backend)


def closed_form_space_form_jacobi(k, lam, t):
    """Scalar Jacobi solution on a space form: ``j = cs_k + lam sn_k``, ``j' = -k sn_k + lam cs_k``."""
    sn, cs = space_form_functions(k, t)
    return cs + lam * sn, -k * sn + lam * cs


def space_form_focal_time(k, lam):
    """First positive zero of ``cs_k + lam sn_k``, or ``None`` if it never vanishes."""
    k, lam = float(k), float(lam)
    if abs(k) < 1e-12:
        return -1.0 / lam if lam < 0 else None
    if k > 0:
        s = math.sqrt(k)
        return (0.5 * math.pi + math.atan(lam / s)) / s
    s = math.sqrt(-k)
    if lam >= -s:
        return None
    return math.atanh(-s / lam) / s


@dataclass
class FocalPointResult:
    t_star: Optional[float]
    warning: Optional[str] = None
    bracket: Optional[tuple] = None

    @property
    def found(self):
        return self.t_star is not None


def _det_sign(A):
    sign, logabs = np.linalg.slogdet(A)
    d = sign * math.exp(logabs) if sign != 0 else 0.0
    return d


def _bisect_det(traj, lo, hi, backend):
    d_lo = _det_sign(_state_from(traj, lo, backend)[0])
    while hi - lo > BRACKET_TOL:
        mid = 0.5 * (lo + hi)
        d_mid = _det_sign(_state_from(traj, mid, backend)[0])
        if d_mid == 0.0:
            return mid, (mid, mid)
        if (d_mid > 0) == (d_lo > 0):
            lo, d_lo = mid, d_mid
        else:
            hi = mid
    return 0.5 * (lo + hi), (lo, hi)


def _golden_min(fn, lo, hi, tol):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _refine_singular(traj, lo, hi, backend):
    """Minimize the smallest singular value of ``A`` on ``[lo, hi]``; return (t, sigma_min, sigma_max)."""

    def sigma_min(t):
        return np.linalg.svd(_state_from(traj, t, backend)[0], compute_uv=False)[-1]

    ts = _golden_min(sigma_min, lo, hi, 1e-11)
    sv = np.linalg.svd(_state_from(traj, ts, backend)[0], compute_uv=False)
    return float(ts), float(sv[-1]), float(sv[0])


def first_focal_point(p: CurvatureProfile, B: InitialOperator, steps=DEFAULT_STEPS,
                      backend=None) -> FocalPointResult:
    """Smallest ``t* in (0, l]`` with ``det A(t*) = 0``, or ``t_star=None``.

    The grid is scanned for a sign change of ``det A`` (odd multiplicity) or
    ``|det A| < 1e-12``; the bracket is then bisected to width ``1e-10``,
    evaluating each midpoint by continuing the scan trajectory from the node
    below it. In dimension ``n >= 3``
    a focal point of even multiplicity leaves the sign of ``det A`` unchanged,
    so local minima of the smallest singular value of ``A`` are refined too.
    """
    steps = _check_inputs(p, B, steps)
    traj = integrate_jacobi(p, B, steps, backend=backend)
    t = traj.t
    det = traj.det()
    N = steps

    sign_change = None
    for i in range(1, N + 1):
        if det[i] == 0.0 or abs(det[i]) < DET_ZERO or (det[i] > 0) != (det[i - 1] > 0):
            sign_change = i
            break

    warning = None
    if B.dim > 1:
        sv = np.linalg.svd(traj.A, compute_uv=False)[:, -1]
        last = N if sign_change is None else sign_change
        for i in range(1, last + 1):
            left = sv[i - 1]
            right = sv[i + 1] if i < N else math.inf
            if not (sv[i] <= left and sv[i] <= right):
                continue
            # a crossing inside a cell leaves the nearest node well below one neighbour
            if i < N and sv[i] > 0.6 * max(left, right):
                continue
            lo, hi = t[i - 1], t[min(i + 1, N)]
            ts, smin, smax = _refine_singular(traj, lo, hi, backend)
            if smin <= 1e-9 * max(1.0, smax):
                return FocalPointResult(ts, None, (float(lo), float(hi)))

    if sign_change is None:
        return FocalPointResult(None)

    i = sign_change
    if abs(det[i]) < DET_ZERO and i < N and (det[i + 1] > 0) == (det[i - 1] > 0):
        # touched zero without a sign change at the neighbours
        lo, hi = t[i - 1], t[i + 1]
        ts, smin, smax = _refine_singular(traj, lo, hi, backend)
        if smin <= 1e-9 * max(1.0, smax):
            return FocalPointResult(ts, None, (float(lo), float(hi)))
        warning = (f"|det A| < {DET_ZERO:g} near t = {t[i]:.10g} without a sign change; "
                   "grid too coarse to bracket the zero")
        return FocalPointResult(float(t[i]), warning, (float(lo), float(hi)))
    if abs(det[i]) < DET_ZERO:
        return FocalPointResult(float(t[i]), None, (float(t[i]), float(t[i])))
    ts, bracket = _bisect_det(traj, float(t[i - 1]), float(t[i]), backend)
    return FocalPointResult(ts, warning, bracket)


def logdet_derivative(traj: JacobiTrajectory, t_index: int) -> float:
    """``trace(A'(t) A(t)^{-1})`` = ``(det A)'/det A`` at grid point ``t_index``."""
    A = traj.A[t_index]
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        raise FocalPointError(f"A(t) is singular at t = {traj.t[t_index]!r}", float(traj.t[t_index]))
    return float(np.trace(np.linalg.solve(A, traj.Aprime[t_index])))
