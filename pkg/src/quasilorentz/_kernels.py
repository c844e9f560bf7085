"""numba kernels for lattice reduction and short-vector enumeration.

Row convention throughout: lattice points are ``m @ B`` for integer rows m.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def gram_schmidt(B):
    n = B.shape[0]
    Bs = np.zeros_like(B)
    mu = np.eye(n)
    bn = np.zeros(n)
    for i in range(n):
        v = B[i].copy()
        for j in range(i):
            mu[i, j] = np.dot(B[i], Bs[j]) / bn[j]
            v -= mu[i, j] * Bs[j]
        Bs[i] = v
        bn[i] = np.dot(v, v)
    return Bs, mu, bn


@njit(cache=True)
def lll(B, delta):
    """Return (reduced basis, integer transform U) with reduced = U @ B."""
    n = B.shape[0]
    B = B.copy()
    U = np.eye(n)
    Bs, mu, bn = gram_schmidt(B)
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            break
        for j in range(k - 1, -1, -1):
            q = np.round(mu[k, j])
            if q != 0.0:
                B[k] -= q * B[j]
                U[k] -= q * U[j]
                for l in range(j):
                    mu[k, l] -= q * mu[j, l]
                mu[k, j] -= q
        if bn[k] >= (delta - mu[k, k - 1] ** 2) * bn[k - 1]:
            k += 1
        else:
            for c in range(B.shape[1]):
                tmp = B[k, c]
                B[k, c] = B[k - 1, c]
                B[k - 1, c] = tmp
            for c in range(n):
                tmp = U[k, c]
                U[k, c] = U[k - 1, c]
                U[k - 1, c] = tmp
            Bs, mu, bn = gram_schmidt(B)
            k = max(k - 1, 1)
    return B, U


@njit(cache=True)
def enumerate_ball(B, center, r2, cap, box):
    """All m with ||m @ B - center||^2 <= r2, depth-first over GS levels.

    If box > 0, only points with max|m @ B - center| <= box are kept.
    Returns (coeffs, count, overflow). Stops collecting once count hits cap.
    """
    n = B.shape[0]
    Bs, mu, bn = gram_schmidt(B)
    # centre in GS coordinates
    gam = np.zeros(n)
    for i in range(n):
        gam[i] = np.dot(center, Bs[i]) / bn[i]
    out = np.empty((64, n), dtype=np.int64)
    count = 0
    m = np.zeros(n, dtype=np.int64)
    hi = np.zeros(n, dtype=np.int64)
    rem = np.zeros(n + 1)
    ctr = np.zeros(n)
    rem[n] = r2
    level = n - 1
    # initialise top level
    c = gam[n - 1]
    ctr[n - 1] = c
    w = np.sqrt(max(rem[n], 0.0) / bn[n - 1])
    m[n - 1] = np.int64(np.ceil(c - w))
    hi[n - 1] = np.int64(np.floor(c + w))
    while True:
        if m[level] > hi[level]:
            level += 1
            if level >= n:
                break
            m[level] += 1
            continue
        y = m[level] - ctr[level]
        rem[level] = rem[level + 1] - y * y * bn[level]
        if rem[level] < 0.0:
            m[level] += 1
            continue
        if level == 0:
            if box > 0.0:
                inside = True
                for c2 in range(B.shape[1]):
                    x = -center[c2]
                    for i in range(n):
                        x += m[i] * B[i, c2]
                    if abs(x) > box:
                        inside = False
                        break
                if not inside:
                    m[0] += 1
                    continue
            if count >= out.shape[0]:
                if count >= cap:
                    return out[:count], count, True
                bigger = np.empty((2 * out.shape[0], n), dtype=np.int64)
                bigger[:count] = out[:count]
                out = bigger
            out[count] = m
            count += 1
            m[0] += 1
            continue
        level -= 1
        c = gam[level]
        for j in range(level + 1, n):
            c -= m[j] * mu[j, level]
        ctr[level] = c
        w = np.sqrt(max(rem[level + 1], 0.0) / bn[level])
        m[level] = np.int64(np.ceil(c - w))
        hi[level] = np.int64(np.floor(c + w))
    return out[:count], count, False


@njit(cache=True)
def points_from_coeffs(coeffs, B, shift):
    """m @ B + shift with a fixed summation order (bitwise reproducible)."""
    k = coeffs.shape[0]
    n, dim = B.shape
    out = np.empty((k, dim))
    for a in range(k):
        for c in range(dim):
            s = 0.0
            for i in range(n):
                s += coeffs[a, i] * B[i, c]
            out[a, c] = s + shift[c]
    return out
