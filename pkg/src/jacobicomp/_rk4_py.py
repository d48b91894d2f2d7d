"""Pure-Python RK4 stepping, same contract as the compiled ``_rk4_ext`` module."""

import numpy as np


def _step(R0, Rh, R1, Y, P, h):
    k1y = P
    k1p = -R0 @ Y
    k2y = P + 0.5 * h * k1p
    k2p = -Rh @ (Y + 0.5 * h * k1y)
    k3y = P + 0.5 * h * k2p
    k3p = -Rh @ (Y + 0.5 * h * k2y)
    k4y = P + h * k3p
    k4p = -R1 @ (Y + h * k3y)
    Y = Y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    P = P + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return Y, P


def rk4_trajectory(R, h, Y0, P0):
    R = np.asarray(R, dtype=np.float64)
    N = (R.shape[0] - 1) // 2
    Y = np.array(Y0, dtype=np.float64)
    P = np.array(P0, dtype=np.float64)
    Ys = np.empty((N + 1,) + Y.shape)
    Ps = np.empty((N + 1,) + P.shape)
    Ys[0] = Y
    Ps[0] = P
    for s in range(N):
        Y, P = _step(R[2 * s], R[2 * s + 1], R[2 * s + 2], Y, P, h)
        Ys[s + 1] = Y
        Ps[s + 1] = P
    return Ys, Ps


def rk4_endpoint(R, h, Y0, P0):
    R = np.asarray(R, dtype=np.float64)
    N = (R.shape[0] - 1) // 2
    Y = np.array(Y0, dtype=np.float64)
    P = np.array(P0, dtype=np.float64)
    for s in range(N):
        Y, P = _step(R[2 * s], R[2 * s + 1], R[2 * s + 2], Y, P, h)
    return Y, P
