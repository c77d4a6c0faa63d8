"""Pure-numpy twins of the compiled butterfly kernels."""

import numpy as np

_A = 0.5 - 0.5j
_B = 0.5 + 0.5j


def fwht_inplace(x):
    n = x.shape[0]
    h = 1
    while h < n:
        y = x.reshape(-1, 2, h)
        a = y[:, 0, :].copy()
        b = y[:, 1, :]
        np.add(a, b, out=y[:, 0, :])
        np.subtract(a, b, out=y[:, 1, :])
        h *= 2


def noiselet_inplace(z):
    n = z.shape[0]
    h = 1
    while h < n:
        y = z.reshape(-1, 2, h)
        u = y[:, 0, :].copy()
        v = y[:, 1, :].copy()
        y[:, 0, :] = _A * u + _B * v
        y[:, 1, :] = _B * u + _A * v
        h *= 2


def noiselet_adjoint_inplace(z):
    n = z.shape[0]
    h = 1
    while h < n:
        y = z.reshape(-1, 2, h)
        u = y[:, 0, :].copy()
        v = y[:, 1, :].copy()
        y[:, 0, :] = _B * u + _A * v
        y[:, 1, :] = _A * u + _B * v
        h *= 2
