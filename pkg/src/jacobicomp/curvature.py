"""Curvature data along a normal geodesic in a parallel orthonormal frame.

A geodesic is never represented as a curve in a chart. Everything downstream
only needs the symmetric matrix field ``R(t)`` acting on the orthogonal
complement of the velocity, so a :class:`CurvatureProfile` *is* the geodesic
as far as this package is concerned. Its eigenvalues are the sectional
curvatures of planes containing the velocity and its trace is the Ricci
curvature in the velocity direction.

Sign convention: the Jacobi equation reads ``J'' + R J = 0``.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import kernels

__all__ = [
    "DomainError",
    "CurvatureProfile",
    "WarpingFunction",
    "HypothesisCheck",
    "HypothesisReport",
    "space_form_functions",
    "eval_profile",
    "validate_hypotheses",
    "build_cap_extension",
    "half_grid",
]

NEAR_FLAT = 1e-12


class DomainError(ValueError):
    """Raised when a profile or warping function is evaluated outside its domain."""


def space_form_functions(k, t):
    """Generalized sine and cosine ``(sn_k(t), cs_k(t))``.

    ``sn_k`` solves ``y'' + k y = 0`` with ``y(0) = 0, y'(0) = 1`` and
    ``cs_k = sn_k'``. Works elementwise on arrays. For ``|k| < 1e-12`` a
    four-term Taylor series is used so the result is continuous in ``k``.
    """
    k = float(k)
    t = np.asarray(t, dtype=float)
    if abs(k) < NEAR_FLAT:
        t2 = t * t
        sn = t * (1.0 - k * t2 / 6.0 + k * k * t2 * t2 / 120.0 - k**3 * t2**3 / 5040.0)
        cs = 1.0 - k * t2 / 2.0 + k * k * t2 * t2 / 24.0 - k**3 * t2**3 / 720.0
    elif k > 0:
        s = np.sqrt(k)
        sn = np.sin(s * t) / s
        cs = np.cos(s * t)
    else:
        s = np.sqrt(-k)
        sn = np.sinh(s * t) / s
        cs = np.cosh(s * t)
    if sn.ndim == 0:
        return float(sn), float(cs)
    return sn, cs


def _as_vectorized(fn):
    """Wrap a scalar or callable so it can be evaluated on an array of points."""
    if not callable(fn):
        value = float(fn)
        return lambda x: np.full(np.shape(x), value, dtype=float)

    def wrapped(x):
        x = np.asarray(x, dtype=float)
        try:
            out = np.asarray(fn(x), dtype=float)
        except Exception:
            out = None
        if out is None or out.shape != x.shape:
            out = np.array([float(fn(float(xi))) for xi in x.ravel()]).reshape(x.shape)
        return out

    return wrapped


class WarpingFunction:
    """Warping function ``f`` of a rotationally symmetric metric ``d rho^2 + f(rho)^2 g_S``.

    Parameters
    ----------
    f, fprime, fsecond
        Callables of ``rho``. Missing derivatives fall back to centered
        differences with step ``h_fd = 1e-5 * rho_max``.
    rho_max
        Right end of the domain.
    cap
        Optional ``(k_prime, r)``: ``f`` coincides with ``sn_{k_prime}`` on ``[0, r]``.
    truncated_at
        Set when ``f`` reached zero before the requested ``rho_max``.
    """

    def __init__(self, f, fprime=None, fsecond=None, *, rho_max, cap=None,
                 truncated_at=None, samples=None):
        self.rho_max = float(rho_max)
        self.h_fd = 1e-5 * self.rho_max
        self._f = _as_vectorized(f)
        self._fp = _as_vectorized(fprime) if fprime is not None else None
        self._fpp = _as_vectorized(fsecond) if fsecond is not None else None
        self.cap = None if cap is None else (float(cap[0]), float(cap[1]))
        self.truncated_at = truncated_at
        self.samples = samples

    @classmethod
    def space_form(cls, k, rho_max, cap_radius=None):
        """``f = sn_k``: the constant-curvature model, recorded as a cap of radius ``cap_radius``."""
        k = float(k)
        cap_radius = rho_max if cap_radius is None else cap_radius
        return cls(
            lambda x: space_form_functions(k, x)[0],
            lambda x: space_form_functions(k, x)[1],
            lambda x: -k * np.asarray(space_form_functions(k, x)[0]),
            rho_max=rho_max,
            cap=(k, cap_radius),
        )

    def _check(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < -1e-12) or np.any(rho > self.rho_max * (1 + 1e-12)):
            raise DomainError(f"rho outside [0, {self.rho_max}]")
        return rho

    def __call__(self, rho):
        return self._f(self._check(rho))

    def derivative(self, rho):
        rho = self._check(rho)
        if self._fp is not None:
            return self._fp(rho)
        h = self.h_fd
        return (self._f(rho + h) - self._f(rho - h)) / (2 * h)

    def second_derivative(self, rho):
        rho = self._check(rho)
        if self._fpp is not None:
            return self._fpp(rho)
        h = self.h_fd
        return (self._f(rho + h) - 2 * self._f(rho) + self._f(rho - h)) / (h * h)

    def gauss_curvature(self, rho):
        """Radial sectional curvature ``-f''/f``; exact ``k'`` inside the cap."""
        rho = self._check(rho)
        out = np.empty_like(rho, dtype=float)
        inside = np.zeros(rho.shape, dtype=bool)
        if self.cap is not None:
            inside = rho <= self.cap[1]
            out[inside] = self.cap[0]
        rest = ~inside
        if np.any(rest):
            fr = self._f(rho[rest])
            if np.any(fr == 0):
                raise DomainError("curvature undefined where f vanishes")
            out[rest] = -self.second_derivative(rho[rest]) / fr
        return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    """Curvature operator ``t -> R(t)`` along a normal geodesic of length ``l``.

    Build instances with :meth:`constant`, :meth:`diagonal`, :meth:`warped`
    or :meth:`custom` rather than the constructor.
    """

    n: int
    l: float
    kind: str
    params: dict = field(default_factory=dict, repr=False)
    _sampler: Callable = field(default=None, repr=False)

    @property
    def dim(self):
        """Size ``n - 1`` of the perpendicular space."""
        return self.n - 1

    @classmethod
    def constant(cls, k, n, l):
        k = float(k)
        m = n - 1

        def sampler(ts):
            return np.broadcast_to(k * np.eye(m), (len(ts), m, m)).copy()

        return cls._make(n, l, "constant", {"k": k}, sampler)

    @classmethod
    def diagonal(cls, entries: Sequence, l):
        """Diagonal profile; each entry is a number or a scalar function of ``t``."""
        fns = [_as_vectorized(e) for e in entries]
        m = len(fns)

        def sampler(ts):
            out = np.zeros((len(ts), m, m))
            for i, fn in enumerate(fns):
                out[:, i, i] = fn(ts)
            return out

        return cls._make(m + 1, l, "diagonal", {"entries": list(entries)}, sampler)

    @classmethod
    def warped(cls, f: WarpingFunction, n, l, offset=0.0):
        """Radial geodesic ``rho = offset + t`` in ``d rho^2 + f^2 g_S``: ``R = (-f''/f) I``."""
        m = n - 1
        offset = float(offset)
        if offset + l > f.rho_max * (1 + 1e-12):
            raise DomainError("geodesic leaves the warping-function domain")

        def sampler(ts):
            K = np.asarray(f.gauss_curvature(offset + np.asarray(ts)), dtype=float)
            return K[:, None, None] * np.eye(m)[None, :, :]

        return cls._make(n, l, "warped", {"f": f, "offset": offset}, sampler)

    @classmethod
    def custom(cls, fn: Callable, n, l, vectorized=False):
        """Arbitrary matrix-valued ``fn(t)`` of shape ``(n-1, n-1)``.

        With ``vectorized=True``, ``fn`` takes an array of times and returns
        shape ``(len(ts), n-1, n-1)``.
        """
        m = n - 1
        if vectorized:
            return cls._make(n, l, "custom", {"fn": fn},
                             lambda ts: np.asarray(fn(np.asarray(ts)), dtype=float))

        def sampler(ts):
            out = np.empty((len(ts), m, m))
            for i, t in enumerate(ts):
                out[i] = np.asarray(fn(float(t)), dtype=float).reshape(m, m)
            return out

        return cls._make(n, l, "custom", {"fn": fn}, sampler)

    @classmethod
    def _make(cls, n, l, kind, params, sampler):
        if int(n) < 2:
            raise ValueError("dimension must be at least 2")
        if not l > 0:
            raise ValueError("geodesic length must be positive")
        return cls(int(n), float(l), kind, params, sampler)

    def restrict(self, l):
        """Same curvature data on the shorter geodesic ``[0, l]``."""
        if not 0 < l <= self.l * (1 + 1e-12):
            raise DomainError(f"cannot restrict to length {l}")
        return CurvatureProfile(self.n, float(min(l, self.l)), self.kind, self.params, self._sampler)

    def sample(self, ts):
        """Symmetrized ``R`` at each point of ``ts``; shape ``(len(ts), m, m)``."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        tol = 1e-12 * max(1.0, self.l)
        if np.any(ts < -tol) or np.any(ts > self.l + tol):
            raise DomainError(f"t outside [0, {self.l}]")
        R = np.asarray(self._sampler(np.clip(ts, 0.0, self.l)), dtype=float)
        return 0.5 * (R + np.swapaxes(R, 1, 2))

    def __call__(self, t):
        return eval_profile(self, t)


def eval_profile(p: CurvatureProfile, t):
    """Return ``R(t)`` as a symmetric ``(n-1, n-1)`` matrix."""
    return p.sample([t])[0]


def half_grid(p: CurvatureProfile, steps, t_end=None):
    """Curvature samples at ``0, h/2, h, ..., t_end`` for the RK4 kernels, and ``h``."""
    t_end = p.l if t_end is None else float(t_end)
    ts = np.linspace(0.0, t_end, 2 * int(steps) + 1)
    return p.sample(ts), t_end / steps


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    worst_margin: float
    worst_t: Optional[float] = None


@dataclass
class HypothesisReport:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "worst_margin": c.worst_margin,
                 "worst_t": c.worst_t}
                for c in self.checks
            ],
        }


def validate_hypotheses(pM, pM0=None, B=None, B0=None, mode="sectional", k=None,
                        grid_points=257, tol=1e-12):
    """Check the curvature and initial-operator hypotheses of a comparison.

    ``mode="sectional"``: every sectional curvature of ``pM`` is at most every
    sectional curvature of ``pM0`` (``max eig R_M(t) <= min eig R_M0(t)``), and
    ``min eig B >= max eig B0``.

    ``mode="ricci"``: ``trace R_M(t) >= (n - 1) k``.

    Violations are reported, never raised.
    """
    ts = np.linspace(0.0, pM.l, int(grid_points))
    checks = []
    if mode == "sectional":
        if pM0 is None:
            raise ValueError("sectional mode needs both profiles")
        if abs(pM.l - pM0.l) > 1e-12 * max(1.0, pM.l):
            raise ValueError("profiles must share the geodesic length")
        top = np.linalg.eigvalsh(pM.sample(ts))[:, -1]
        bottom = np.linalg.eigvalsh(pM0.sample(ts))[:, 0]
        margin = bottom - top
        i = int(np.argmin(margin))
        checks.append(HypothesisCheck("sectional_curvature", bool(margin[i] >= -tol),
                                      float(margin[i]), float(ts[i])))
        if B is not None and B0 is not None:
            m = float(B.eigenvalues[0] - B0.eigenvalues[-1])
            checks.append(HypothesisCheck("initial_operator_eigenvalues", m >= -tol, m))
    elif mode == "ricci":
        if k is None:
            raise ValueError("ricci mode needs the comparison curvature k")
        ric = np.trace(pM.sample(ts), axis1=1, axis2=2)
        margin = ric - (pM.n - 1) * float(k)
        i = int(np.argmin(margin))
        checks.append(HypothesisCheck("ricci_lower_bound", bool(margin[i] >= -tol),
                                      float(margin[i]), float(ts[i])))
    else:
        raise ValueError(f"unknown hypothesis mode {mode!r}")
    return HypothesisReport(checks)


def build_cap_extension(k_prime, r, kappa_tail, rho_max, steps=4096):
    """Warping function equal to ``sn_{k'}`` on ``[0, r]`` and curvature ``kappa_tail`` beyond.

    On ``[r, rho_max]`` the tail solves ``f'' = -kappa_tail(rho) f`` with ``f``
    and ``f'`` continuous at ``r``, so ``-f''/f`` equals ``kappa_tail`` by
    construction. If ``f`` reaches zero the domain is cut just before the zero
    and ``truncated_at`` records where.
    """
    k_prime, r, rho_max = float(k_prime), float(r), float(rho_max)
    if r <= 0 or rho_max <= r:
        raise ValueError("need 0 < r < rho_max")
    if k_prime > 0 and r >= np.pi / np.sqrt(k_prime):
        raise ValueError("cap radius must stay below the focal radius of sn_{k'}")
    kappa = _as_vectorized(kappa_tail)

    rho = np.linspace(r, rho_max, int(steps) + 1)
    rho_half = np.linspace(r, rho_max, 2 * int(steps) + 1)
    R = kappa(rho_half)[:, None, None]
    sn_r, cs_r = space_form_functions(k_prime, r)
    F, Fp = kernels.rk4_trajectory(R, (rho_max - r) / steps, [[sn_r]], [[cs_r]])
    F, Fp = F[:, 0, 0], Fp[:, 0, 0]

    truncated_at = None
    bad = np.flatnonzero(F <= 0)
    if bad.size:
        j = int(bad[0])
        # linear estimate of the zero, keep only the strictly positive part
        truncated_at = float(rho[j - 1] - F[j - 1] * (rho[j] - rho[j - 1]) / (F[j] - F[j - 1]))
        rho, F, Fp = rho[:j], F[:j], Fp[:j]
        rho_max = float(rho[-1])
    Fpp = -kappa(rho) * F

    f_tail = CubicHermiteSpline(rho, F, Fp)
    fp_tail = CubicHermiteSpline(rho, Fp, Fpp)

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= r, space_form_functions(k_prime, np.minimum(x, r))[0],
                        f_tail(np.maximum(x, r)))

    def fp(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= r, space_form_functions(k_prime, np.minimum(x, r))[1],
                        fp_tail(np.maximum(x, r)))

    def fpp(x):
        x = np.asarray(x, dtype=float)
        cap_part = -k_prime * space_form_functions(k_prime, np.minimum(x, r))[0]
        return np.where(x <= r, cap_part, -kappa(np.maximum(x, r)) * f_tail(np.maximum(x, r)))

    return WarpingFunction(f, fp, fpp, rho_max=rho_max, cap=(k_prime, r),
                           truncated_at=truncated_at, samples=(rho, F, Fp))
