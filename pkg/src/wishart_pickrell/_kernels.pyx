# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels; see ``_kernels_py`` for the reference version."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, cos, sin, M_PI
from libc.stdint cimport uint32_t, uint64_t

cnp.import_array()

cdef uint64_t M0 = 0xD2511F53
cdef uint64_t M1 = 0xCD9E8D57
cdef uint32_t W0 = 0x9E3779B9
cdef uint32_t W1 = 0xBB67AE85
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline void _philox(uint32_t* c, uint32_t k0, uint32_t k1) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t x0, x1, x2, x3
    cdef int r
    for r in range(10):
        if r:
            k0 = k0 + W0
            k1 = k1 + W1
        p0 = M0 * <uint64_t>c[0]
        p1 = M1 * <uint64_t>c[2]
        x0 = <uint32_t>(p1 >> 32) ^ c[1] ^ k0
        x1 = <uint32_t>p1
        x2 = <uint32_t>(p0 >> 32) ^ c[3] ^ k1
        x3 = <uint32_t>p0
        c[0] = x0; c[1] = x1; c[2] = x2; c[3] = x3


cdef inline void _cnormal(uint32_t k0, uint32_t k1, uint32_t stream, uint64_t idx,
                          uint32_t draw, double* re, double* im) noexcept nogil:
    cdef uint32_t c[4]
    cdef uint64_t a, b
    cdef double u1, u2, r, ang
    c[0] = draw
    c[1] = stream
    c[2] = <uint32_t>idx
    c[3] = <uint32_t>(idx >> 32)
    _philox(c, k0, k1)
    a = ((<uint64_t>c[0] << 32) | c[1]) >> 11
    b = ((<uint64_t>c[2] << 32) | c[3]) >> 11
    u1 = (<double>a + 1.0) * INV_2_53
    u2 = <double>b * INV_2_53
    r = sqrt(-log(u1))
    ang = 2.0 * M_PI * u2
    re[0] = r * cos(ang)
    im[0] = r * sin(ang)


def philox4x32(ctr, key):
    cdef cnp.ndarray[cnp.uint32_t, ndim=2] src = np.ascontiguousarray(ctr, dtype=np.uint32).reshape(4, -1)
    cdef Py_ssize_t n = src.shape[1], j
    cdef cnp.ndarray[cnp.uint32_t, ndim=2] out = np.empty((4, n), dtype=np.uint32)
    cdef uint32_t c[4]
    cdef uint32_t k0 = <uint32_t>(int(key[0]) & 0xFFFFFFFF)
    cdef uint32_t k1 = <uint32_t>(int(key[1]) & 0xFFFFFFFF)
    for j in range(n):
        c[0] = src[0, j]; c[1] = src[1, j]; c[2] = src[2, j]; c[3] = src[3, j]
        _philox(c, k0, k1)
        out[0, j] = c[0]; out[1, j] = c[1]; out[2, j] = c[2]; out[3, j] = c[3]
    return out


def complex_normals(seed, stream, first, count, ndraw):
    cdef uint64_t s = <uint64_t>int(seed)
    cdef uint32_t k0 = <uint32_t>s, k1 = <uint32_t>(s >> 32)
    cdef uint32_t st = <uint32_t>stream
    cdef uint64_t f = <uint64_t>first
    cdef Py_ssize_t N = count, D = ndraw, i, d
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((N, D), dtype=np.complex128)
    cdef double re, im
    with nogil:
        for i in range(N):
            for d in range(D):
                _cnormal(k0, k1, st, f + i, <uint32_t>d, &re, &im)
                out[i, d].real = re
                out[i, d].imag = im
    return out


def assemble_samples(seed, double gamma1, double gamma2, lambdas, Py_ssize_t n, first, Py_ssize_t count):
    cdef uint64_t s = <uint64_t>int(seed)
    cdef uint32_t k0 = <uint32_t>s, k1 = <uint32_t>(s >> 32)
    cdef uint64_t f = <uint64_t>first
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lam = np.ascontiguousarray(lambdas, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t K = lam.shape[0], k, idx, i, j, t
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] X = np.zeros((count, n, n), dtype=np.complex128)
    cdef double[::1] ure = np.empty(n), uim = np.empty(n)
    cdef double shift = gamma2, re, im, sd = sqrt(gamma1), sdd = sqrt(2.0 * gamma1), lk
    for k in range(K):
        shift -= lam[k]
    with nogil:
        for idx in range(count):
            if gamma1 > 0:
                t = 0
                for j in range(n):
                    for i in range(j + 1):
                        _cnormal(k0, k1, 0, f + idx, <uint32_t>t, &re, &im)
                        if i == j:
                            X[idx, i, i].real = sdd * re
                        else:
                            X[idx, i, j].real = sd * re
                            X[idx, i, j].imag = sd * im
                            X[idx, j, i].real = sd * re
                            X[idx, j, i].imag = -sd * im
                        t += 1
            for i in range(n):
                X[idx, i, i].real = X[idx, i, i].real + shift
            for k in range(K):
                lk = lam[k]
                for i in range(n):
                    _cnormal(k0, k1, <uint32_t>(k + 1), f + idx, <uint32_t>i, &ure[i], &uim[i])
                for i in range(n):
                    for j in range(n):
                        # conj(u_i) u_j
                        X[idx, i, j].real = X[idx, i, j].real + lk * (ure[i] * ure[j] + uim[i] * uim[j])
                        X[idx, i, j].imag = X[idx, i, j].imag + lk * (ure[i] * uim[j] - uim[i] * ure[j])
    return X


def trace_phases(A, seed, double gamma1, double gamma2, lambdas, Py_ssize_t n, first, Py_ssize_t count):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Am = np.ascontiguousarray(A, dtype=np.complex128)
    cdef uint64_t s = <uint64_t>int(seed)
    cdef uint32_t k0 = <uint32_t>s, k1 = <uint32_t>(s >> 32)
    cdef uint64_t f = <uint64_t>first
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lam = np.ascontiguousarray(lambdas, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t K = lam.shape[0], k, idx, i, j, t
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count, dtype=np.float64)
    cdef double[::1] ure = np.empty(n), uim = np.empty(n)
    cdef double[:, ::1] are = np.ascontiguousarray(Am.real), aim = np.ascontiguousarray(Am.imag)
    cdef double trA = 0.0, base, th, re, im, q, wr, wi
    cdef double sd = sqrt(gamma1), sdd = sqrt(2.0 * gamma1)
    for i in range(n):
        trA += are[i, i]
    base = gamma2 * trA
    for k in range(K):
        base -= lam[k] * trA
    with nogil:
        for idx in range(count):
            th = base
            if gamma1 > 0:
                t = 0
                for j in range(n):
                    for i in range(j + 1):
                        _cnormal(k0, k1, 0, f + idx, <uint32_t>t, &re, &im)
                        if i == j:
                            th += are[i, i] * sdd * re
                        else:
                            # 2 Re(A_ji G_ij)
                            th += 2.0 * sd * (are[j, i] * re - aim[j, i] * im)
                        t += 1
            for k in range(K):
                for i in range(n):
                    _cnormal(k0, k1, <uint32_t>(k + 1), f + idx, <uint32_t>i, &ure[i], &uim[i])
                # Re sum_ij u_i A_ij conj(u_j)
                q = 0.0
                for i in range(n):
                    wr = 0.0
                    wi = 0.0
                    for j in range(n):
                        # A_ij conj(u_j)
                        wr = wr + are[i, j] * ure[j] + aim[i, j] * uim[j]
                        wi = wi + aim[i, j] * ure[j] - are[i, j] * uim[j]
                    q = q + ure[i] * wr - uim[i] * wi
                th += lam[k] * q
            out[idx] = th
    return out
