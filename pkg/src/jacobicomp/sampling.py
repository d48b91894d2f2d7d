"""Seeded random instances for sweeps and property tests.

Every draw comes from a Philox counter-based generator keyed by a 64-bit seed
and a stream index, so instance ``i`` of a sweep is reproducible on its own
and independent of the order in which instances are generated.

Instances whose hypotheses would fail (a focal point where the statement needs
none) are rejected and redrawn from the same stream.
"""

import math
from typing import NamedTuple

import numpy as np

from .curvature import CurvatureProfile, build_cap_extension
from .jacobi import InitialOperator, first_focal_point, space_form_focal_time

__all__ = [
    "make_rng",
    "random_unit",
    "random_operator",
    "random_diagonal_profile",
    "random_rotating_profile",
    "random_profile",
    "random_admissible_field",
    "IdentityInstance",
    "RauchInstance",
    "ThmDInstance",
    "CapInstance",
    "CorCInstance",
    "identity_instance",
    "rauch_instance",
    "thm_d_instance",
    "cap_instance",
    "build_cap_instance",
    "cor_c_data",
    "cor_c_instance",
]

MASK64 = (1 << 64) - 1
MAX_TRIES = 200
SCAN_STEPS = 1024


def make_rng(seed, stream=0):
    """Philox generator keyed by ``(seed, stream)``."""
    key = ((int(stream) & MASK64) << 64) | (int(seed) & MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def random_unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_orthogonal(rng, dim):
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    return Q * np.sign(np.diag(R))


def random_operator(rng, dim, lo, hi):
    """Symmetric operator with eigenvalues drawn uniformly from ``[lo, hi]``."""
    ev = rng.uniform(lo, hi, dim)
    Q = random_orthogonal(rng, dim)
    M = (Q * ev) @ Q.T
    return InitialOperator(0.5 * (M + M.T))


def _sinusoids(rng, m, lo, hi):
    """``m`` functions ``c + a sin(w t + phi)`` with values inside ``[lo, hi]``."""
    span = hi - lo
    amp = rng.uniform(0.0, 0.25 * span, m)
    c = rng.uniform(lo + amp, hi - amp)
    w = rng.uniform(0.5, 3.0, m)
    phi = rng.uniform(0.0, 2 * math.pi, m)
    return c, amp, w, phi


def _sinusoid_fn(c, a, w, phi):
    c, a, w, phi = float(c), float(a), float(w), float(phi)
    return lambda t: c + a * np.sin(w * np.asarray(t) + phi)


def random_diagonal_profile(rng, n, l, lo, hi):
    """Diagonal profile whose entries oscillate inside ``[lo, hi]``."""
    c, a, w, phi = _sinusoids(rng, n - 1, lo, hi)
    return CurvatureProfile.diagonal([_sinusoid_fn(*p) for p in zip(c, a, w, phi)], l)


def random_rotating_profile(rng, n, l, lo, hi):
    """``R(t) = Q(t) D(t) Q(t)^T`` with ``Q(t) = exp(t S)`` for a random skew ``S``.

    The eigenvalues of ``R(t)`` are the diagonal entries of ``D(t)``, all in ``[lo, hi]``.
    """
    m = n - 1
    c, a, w, phi = _sinusoids(rng, m, lo, hi)
    G = rng.standard_normal((m, m))
    S = 0.5 * (G - G.T)
    # S = U diag(i theta) U^H, so exp(t S) = U diag(exp(i theta t)) U^H
    theta, U = np.linalg.eigh(-1j * S)

    def fn(ts):
        ts = np.asarray(ts, dtype=float)
        phase = np.exp(1j * np.outer(ts, theta))
        Q = np.real(np.einsum("ij,nj,kj->nik", U, phase, U.conj()))
        D = c + a * np.sin(np.outer(ts, w) + phi)
        return np.einsum("nij,nj,nkj->nik", Q, D, Q)

    return CurvatureProfile.custom(fn, n, l, vectorized=True)


def random_profile(rng, n, l, lo, hi):
    """Diagonal or rotating-frame profile with sectional curvatures in ``[lo, hi]``."""
    if n > 2 and rng.random() < 0.5:
        return random_rotating_profile(rng, n, l, lo, hi)
    return random_diagonal_profile(rng, n, l, lo, hi)


def random_admissible_field(rng, t, w, scale=1.0):
    """Node values of a random field on the grid ``t`` with last value ``w``.

    A random start point joined linearly to ``w`` plus a few sine modes that
    vanish at ``t[-1]``.
    """
    t = np.asarray(t, dtype=float)
    w = np.atleast_1d(np.asarray(w, dtype=float))
    l = t[-1]
    s = (t / l)[:, None]
    start = w + scale * rng.standard_normal(w.shape)
    vals = (1 - s) * start[None, :] + s * w[None, :]
    for j in range(1, 4):
        coef = scale * rng.standard_normal(w.shape) / j
        vals = vals + np.sin(j * math.pi * s) * coef[None, :]
    vals[-1] = w
    return vals


def _has_focal(p, B):
    return first_focal_point(p, B, SCAN_STEPS).found


class IdentityInstance(NamedTuple):
    profile: CurvatureProfile
    B: InitialOperator
    w: np.ndarray


def identity_instance(seed, index, dims=(2, 3, 4), l_range=(0.5, 2.0)) -> IdentityInstance:
    """Profile, operator and endpoint with no focal point of ``B`` on ``[0, l]``."""
    rng = make_rng(seed, index)
    for _ in range(MAX_TRIES):
        n = int(rng.choice(dims))
        l = float(rng.uniform(*l_range))
        p = random_profile(rng, n, l, -1.0, 2.0)
        B = random_operator(rng, n - 1, -1.0, 1.0)
        w = rng.standard_normal(n - 1)
        if not _has_focal(p, B):
            return IdentityInstance(p, B, w)
    raise RuntimeError("rejection sampling did not find a focal-free instance")


class RauchInstance(NamedTuple):
    pM: CurvatureProfile
    pM0: CurvatureProfile
    B: InitialOperator
    B0: InitialOperator
    vhat0: np.ndarray
    vhat0_model: np.ndarray
    a: float
    b: float


def rauch_instance(seed, index, dims=(2, 3, 4), l_range=(0.5, 2.0)) -> RauchInstance:
    """Valid norm-comparison data: curvature of ``M`` below that of ``M0``, ``B >= B0``,
    ``||vhat0|| >= ||vhat0_model||``, and no focal point of ``B0`` on ``M0``."""
    rng = make_rng(seed, index)
    for _ in range(MAX_TRIES):
        n = int(rng.choice(dims))
        l = float(rng.uniform(*l_range))
        split = float(rng.uniform(-1.0, 1.0))
        pM = random_profile(rng, n, l, split - 1.5, split)
        pM0 = random_profile(rng, n, l, split, split + 1.5)
        beta = float(rng.uniform(-0.5, 0.5))
        B = random_operator(rng, n - 1, beta, beta + 1.0)
        B0 = random_operator(rng, n - 1, beta - 1.0, beta)
        v0 = rng.standard_normal(n - 1)
        v = random_unit(rng, n - 1) * np.linalg.norm(v0) * rng.uniform(1.0, 1.5)
        a, b = (float(x) for x in rng.uniform(-1.0, 1.0, 2))
        if not _has_focal(pM0, B0):
            return RauchInstance(pM, pM0, B, B0, v, v0, a, b)
    raise RuntimeError("rejection sampling did not find a valid Rauch instance")


class ThmDInstance(NamedTuple):
    profile: CurvatureProfile
    k: float
    lam: float
    lam_tilde: float
    init_wedge: float
    init_wedge_tilde: float


def thm_d_instance(seed, index, dims=(3, 4), l_range=(0.5, 1.5)) -> ThmDInstance:
    """Diagonal profile with ``trace R >= (n - 1) k`` and ``lam <= lam_tilde``.

    The entries ``k + c_i + a_i sin(w_i t + phi_i)`` may individually dip below
    ``k``; only their sum is bounded. Instances with a focal point of ``lam id``
    or a model focal point on ``[0, l]`` are rejected.
    """
    rng = make_rng(seed, index)
    for _ in range(MAX_TRIES):
        n = int(rng.choice(dims))
        m = n - 1
        l = float(rng.uniform(*l_range))
        k = float(rng.uniform(-1.0, 1.0))
        amp = rng.uniform(0.0, 0.5, m)
        c = rng.uniform(-0.8, 0.8, m)
        c = c - c.mean() + amp.sum() / m + rng.uniform(0.0, 0.3)
        w = rng.uniform(0.5, 3.0, m)
        phi = rng.uniform(0.0, 2 * math.pi, m)
        entries = [_sinusoid_fn(k + ci, ai, wi, pi) for ci, ai, wi, pi in zip(c, amp, w, phi)]
        p = CurvatureProfile.diagonal(entries, l)
        lam = float(rng.uniform(-0.8, 0.8))
        lam_tilde = lam + float(rng.uniform(0.0, 0.5))
        wedge = float(rng.uniform(0.5, 1.0))
        wedge_tilde = wedge * float(rng.uniform(1.0, 1.3))
        t_model = space_form_focal_time(k, lam_tilde)
        if t_model is not None and t_model <= l * 1.05:
            continue
        if not _has_focal(p, InitialOperator.from_scalar(lam, m)):
            return ThmDInstance(p, k, lam, lam_tilde, wedge, wedge_tilde)
    raise RuntimeError("rejection sampling did not find a valid determinant-comparison instance")


class CapInstance(NamedTuple):
    n: int
    k_prime: float
    r: float
    k: float
    tail: tuple
    rho_max: float
    R_grid: np.ndarray


def cap_instance(seed, index, dims=(2, 3)) -> CapInstance:
    """Cap of curvature ``k' >= k`` and radius ``r``, with a tail curvature ``>= k``.

    ``tail = (c, a, w, phi)`` describes ``kappa(rho) = c + a sin(w rho + phi)``.
    """
    rng = make_rng(seed, index)
    n = int(rng.choice(dims))
    k = float(rng.uniform(-1.0, 1.0))
    k_prime = k + float(rng.uniform(0.0, 1.0))
    lim = math.pi / (2 * math.sqrt(k_prime)) if k_prime > 0 else 1.5
    r = float(rng.uniform(0.2, 0.9)) * min(lim, 1.5)
    a = float(rng.uniform(0.0, 0.5))
    c = k + a + float(rng.uniform(0.0, 0.8))
    w = float(rng.uniform(0.5, 3.0))
    phi = float(rng.uniform(0.0, 2 * math.pi))
    rho_max = r + float(rng.uniform(0.5, 1.5))
    R_grid = np.sort(rng.uniform(0.05, rho_max - r, 4))
    return CapInstance(n, k_prime, r, k, (c, a, w, phi), rho_max, R_grid)


def build_cap_instance(inst: CapInstance, steps=4096):
    """Warping function of a :class:`CapInstance`."""
    return build_cap_extension(inst.k_prime, inst.r, _sinusoid_fn(*inst.tail), inst.rho_max,
                               steps=steps)


class CorCInstance(NamedTuple):
    kM: float
    kM0: float
    f: float
    fprime: float
    lam: float
    E_norm: float
    E_dot_gamma: float


def cor_c_data(rng, kM0):
    """Draw ``(f, fprime, lam, E_norm, E_dot_gamma)`` valid against the model curvature ``kM0``."""
    for _ in range(MAX_TRIES):
        f = float(rng.uniform(0.0, 1.0))
        fprime = float(rng.uniform(-1.0, 1.0))
        lam = float(rng.uniform(-1.0, 1.0))
        E_norm = float(rng.uniform(0.5, 2.0))
        E_dot_gamma = E_norm * float(rng.uniform(-0.95, 0.95))
        t_focal = space_form_focal_time(kM0, lam / E_norm)
        if t_focal is None or t_focal > f * E_norm:
            return f, fprime, lam, E_norm, E_dot_gamma
    raise RuntimeError("rejection sampling did not find valid variation data")


def cor_c_instance(seed, index) -> CorCInstance:
    """Pointwise data with ``kM <= kM0``, ``|<E, gamma'>| < |E|`` and no model focal point."""
    rng = make_rng(seed, index)
    kM0 = float(rng.uniform(-1.0, 2.0))
    kM = kM0 - float(rng.uniform(0.0, 2.0))
    return CorCInstance(kM, kM0, *cor_c_data(rng, kM0))
