"""Numba-compiled rotation kernels.

Both factorizations below are built from plane rotations applied in a fixed
cyclic order, so repeated runs on the same input are bit-identical and need
no external solver library.
"""

import numpy as np
from numba import njit

_SWEEP_LIMIT = 64


@njit(cache=True)
def jacobi_eigh(A0, accumulate):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns (diag, V) with A0 @ V ~= V @ diag(w); V is accumulated only when
    `accumulate` is true (otherwise the identity is returned).
    """
    n = A0.shape[0]
    A = A0.copy()
    V = np.eye(n)
    for _sweep in range(_SWEEP_LIMIT):
        off = 0.0
        nrm = 0.0
        for i in range(n):
            for j in range(i, n):
                x = A[i, j] * A[i, j]
                nrm += 2.0 * x if i < j else x
                if i < j:
                    off += x
        if off <= nrm * 1.0e-30 + 1.0e-280:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    if k != p and k != q:
                        akp = A[k, p]
                        akq = A[k, q]
                        A[k, p] = c * akp - s * akq
                        A[p, k] = A[k, p]
                        A[k, q] = s * akp + c * akq
                        A[q, k] = A[k, q]
                if accumulate:
                    for k in range(n):
                        vkp = V[k, p]
                        vkq = V[k, q]
                        V[k, p] = c * vkp - s * vkq
                        V[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i]
    return w, V


@njit(cache=True)
def jacobi_svd(A0):
    """One-sided (Hestenes) Jacobi orthogonalization of the columns of A0.

    Returns (B, V, sigma) with B = A0 @ V, V orthogonal, the columns of B
    pairwise orthogonal and sigma their Euclidean norms.  Small singular
    values come out with high relative accuracy, which is what makes rank
    decisions at a 1e-9 relative threshold trustworthy.
    """
    m, n = A0.shape
    B = A0.copy()
    V = np.eye(n)
    for _sweep in range(_SWEEP_LIMIT):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                aii = 0.0
                ajj = 0.0
                aij = 0.0
                for k in range(m):
                    aii += B[k, i] * B[k, i]
                    ajj += B[k, j] * B[k, j]
                    aij += B[k, i] * B[k, j]
                if aij == 0.0 or aij * aij <= 1.0e-62 * aii * ajj:
                    continue
                rotated = True
                tau = (ajj - aii) / (2.0 * aij)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(m):
                    bki = B[k, i]
                    bkj = B[k, j]
                    B[k, i] = c * bki - s * bkj
                    B[k, j] = s * bki + c * bkj
                for k in range(n):
                    vki = V[k, i]
                    vkj = V[k, j]
                    V[k, i] = c * vki - s * vkj
                    V[k, j] = s * vki + c * vkj
        if not rotated:
            break
    sigma = np.empty(n)
    for j in range(n):
        acc = 0.0
        for k in range(m):
            acc += B[k, j] * B[k, j]
        sigma[j] = np.sqrt(acc)
    return B, V, sigma
