"""Pure numpy implementation of the sampling kernels.

Mirrors ``_kernels.pyx`` function for function.  Random numbers come from
Philox4x32-10 keyed by the 64-bit seed; the 128-bit counter is
``(draw, stream, sample_lo, sample_hi)`` so every (sample, stream, draw)
triple has its own block and chunked or parallel generation reproduces
the same values.
"""

import numpy as np

PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
PHILOX_W0 = 0x9E3779B9
PHILOX_W1 = 0xBB67AE85
MASK32 = np.uint64(0xFFFFFFFF)
SHIFT32 = np.uint64(32)
TWO_PI = 2.0 * np.pi
INV_2_53 = 2.0 ** -53

CHUNK = 8192


def philox4x32(ctr, key):
    """Philox4x32-10 on a (4, N) uint32 counter array with a 2-word key."""
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) for c in ctr)
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for r in range(10):
        if r:
            k0 = (k0 + PHILOX_W0) & 0xFFFFFFFF
            k1 = (k1 + PHILOX_W1) & 0xFFFFFFFF
        p0 = PHILOX_M0 * c0
        p1 = PHILOX_M1 * c2
        hi0, lo0 = p0 >> SHIFT32, p0 & MASK32
        hi1, lo1 = p1 >> SHIFT32, p1 & MASK32
        c0, c1, c2, c3 = hi1 ^ c1 ^ np.uint64(k0), lo1, hi0 ^ c3 ^ np.uint64(k1), lo0
    return np.stack([c0, c1, c2, c3]).astype(np.uint32)


def complex_normals(seed, stream, first, count, ndraw):
    """Standard complex Gaussians (E|z|^2 = 1), shape ``(count, ndraw)``."""
    seed = int(seed)
    key = (seed & 0xFFFFFFFF, (seed >> 32) & 0xFFFFFFFF)
    idx = np.arange(first, first + count, dtype=np.uint64)
    d = np.arange(ndraw, dtype=np.uint64)
    c0 = np.broadcast_to(d[None, :], (count, ndraw)).ravel()
    c1 = np.full(count * ndraw, stream, dtype=np.uint64)
    c2 = np.repeat(idx & MASK32, ndraw)
    c3 = np.repeat(idx >> SHIFT32, ndraw)
    x = philox4x32((c0, c1, c2, c3), key).astype(np.uint64)
    a = ((x[0] << SHIFT32) | x[1]) >> np.uint64(11)
    b = ((x[2] << SHIFT32) | x[3]) >> np.uint64(11)
    u1 = (a.astype(np.float64) + 1.0) * INV_2_53
    u2 = b.astype(np.float64) * INV_2_53
    r = np.sqrt(-np.log(u1))
    ang = TWO_PI * u2
    z = r * np.cos(ang) + 1j * (r * np.sin(ang))
    return z.reshape(count, ndraw)


def _triangle_index(n):
    # upper-triangle entry (i, j), i <= j, uses draw j*(j+1)/2 + i
    rows, cols = [], []
    for j in range(n):
        for i in range(j + 1):
            rows.append(i)
            cols.append(j)
    return np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp)


def rank_one(u):
    """Batched ``u^* u`` for rows ``u``: entry ``(i, j)`` is ``conj(u_i) u_j``.

    Built from real and imaginary parts so the result is exactly Hermitian.
    """
    re, im = u.real, u.imag
    out = np.empty(u.shape + u.shape[-1:], dtype=np.complex128)
    out.real = re[:, :, None] * re[:, None, :] + im[:, :, None] * im[:, None, :]
    out.imag = re[:, :, None] * im[:, None, :] - im[:, :, None] * re[:, None, :]
    return out


def assemble_samples(seed, gamma1, gamma2, lambdas, n, first, count):
    """Samples ``X = G + gamma2*I + sum_k lambda_k (u_k^* u_k - I)``."""
    X = np.zeros((count, n, n), dtype=np.complex128)
    if gamma1 > 0:
        Z = complex_normals(seed, 0, first, count, n * (n + 1) // 2)
        rows, cols = _triangle_index(n)
        diag = rows == cols
        off = ~diag
        X[:, rows[diag], cols[diag]] = np.sqrt(2.0 * gamma1) * Z[:, diag].real
        X[:, rows[off], cols[off]] = np.sqrt(gamma1) * Z[:, off]
        X[:, cols[off], rows[off]] = np.sqrt(gamma1) * Z[:, off].conj()
    shift = gamma2 - float(np.sum(lambdas))
    X[:, np.arange(n), np.arange(n)] += shift
    for k, lam in enumerate(lambdas):
        u = complex_normals(seed, k + 1, first, count, n)
        X += lam * rank_one(u)
    return X


def trace_phases(A, seed, gamma1, gamma2, lambdas, n, first, count):
    """``tr(A X_j)`` for the samples ``first .. first+count-1`` without
    materializing ``X_j``.  ``A`` must be ``n x n`` Hermitian."""
    A = np.asarray(A, dtype=np.complex128)
    trA = float(np.trace(A).real)
    out = np.empty(count, dtype=np.float64)
    if gamma1 > 0:
        rows, cols = _triangle_index(n)
        diag = rows == cols
        coef = np.where(diag, np.sqrt(2.0 * gamma1), 2.0 * np.sqrt(gamma1)) * A[cols, rows]
    for s in range(0, count, CHUNK):
        c = min(CHUNK, count - s)
        th = np.full(c, (gamma2 - float(np.sum(lambdas))) * trA)
        if gamma1 > 0:
            Z = complex_normals(seed, 0, first + s, c, n * (n + 1) // 2)
            th += (Z @ coef).real
        for k, lam in enumerate(lambdas):
            u = complex_normals(seed, k + 1, first + s, c, n)
            th += lam * np.einsum("si,ij,sj->s", u, A, u.conj()).real
        out[s:s + c] = th
    return out
