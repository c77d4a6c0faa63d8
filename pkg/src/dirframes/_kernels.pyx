# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled butterfly kernels (in-place, power-of-two length).

Same API as ``_kernels_py``; ``dirframes.backend`` picks whichever imports.
"""


def fwht_inplace(double[::1] x):
    # unnormalized Walsh-Hadamard butterflies
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t h = 1, i, j
    cdef double a, b
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                a = x[j]
                b = x[j + h]
                x[j] = a + b
                x[j + h] = a - b
        h *= 2


def noiselet_inplace(double complex[::1] z):
    # forward Coifman butterflies: per-pair mix by [[a, b], [b, a]],
    # a = (1-1j)/2, b = (1+1j)/2; unitary, no trailing normalization needed
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t h = 1, i, j
    cdef double complex a = 0.5 - 0.5j
    cdef double complex b = 0.5 + 0.5j
    cdef double complex u, v
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                u = z[j]
                v = z[j + h]
                z[j] = a * u + b * v
                z[j + h] = b * u + a * v
        h *= 2


def noiselet_adjoint_inplace(double complex[::1] z):
    # conjugate-transpose butterflies: coefficients swap because conj(a) = b
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t h = 1, i, j
    cdef double complex a = 0.5 - 0.5j
    cdef double complex b = 0.5 + 0.5j
    cdef double complex u, v
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                u = z[j]
                v = z[j + h]
                z[j] = b * u + a * v
                z[j + h] = a * u + b * v
        h *= 2
