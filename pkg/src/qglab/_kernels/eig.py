"""Dense real nonsymmetric eigenvalue solver.

Classic three-stage pipeline: diagonal balancing, orthogonal reduction to
upper Hessenberg form, then Francis double-shift QR iteration on the
Hessenberg matrix.  Eigenvalues only; the package never needs eigenvectors
of a general matrix.  Inner loops are expressed with numpy slice operations
so the same source compiles under numba and stays fast when interpreted.
"""

import math

import numpy as np

from . import maybe_njit


def _balance(a):
    """Similarity-scale ``a`` in place so row/column norms roughly match."""
    n = a.shape[0]
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.sum(np.abs(a[:, i])) - abs(a[i, i])
            r = np.sum(np.abs(a[i, :])) - abs(a[i, i])
            if c != 0.0 and r != 0.0:
                g = r / radix
                f = 1.0
                s = c + r
                while c < g:
                    f *= radix
                    c *= sqrdx
                g = r * radix
                while c > g:
                    f /= radix
                    c /= sqrdx
                if (c + r) / f < 0.95 * s:
                    done = False
                    a[i, :] *= 1.0 / f
                    a[:, i] *= f


def _hessenberg(a):
    """Householder reduction to upper Hessenberg form, in place."""
    n = a.shape[0]
    v = np.empty(n)
    for k in range(n - 2):
        xnorm2 = np.sum(a[k + 1:, k] * a[k + 1:, k])
        if xnorm2 == 0.0:
            continue
        xnorm = math.sqrt(xnorm2)
        alpha = -xnorm if a[k + 1, k] >= 0.0 else xnorm
        v[k + 1:] = a[k + 1:, k]
        v[k + 1] -= alpha
        vnorm2 = np.sum(v[k + 1:] * v[k + 1:])
        if vnorm2 == 0.0:
            continue
        beta = 2.0 / vnorm2
        # left: rows k+1.. of columns k..
        for j in range(k, n):
            s = beta * np.sum(v[k + 1:] * a[k + 1:, j])
            a[k + 1:, j] -= s * v[k + 1:]
        # right: columns k+1.. of every row
        for i in range(n):
            s = beta * np.sum(a[i, k + 1:] * v[k + 1:])
            a[i, k + 1:] -= s * v[k + 1:]
        a[k + 1, k] = alpha
        a[k + 2:, k] = 0.0


def _hqr(a, wr, wi):
    """Double-shift QR on an upper Hessenberg matrix; fills wr/wi.

    Returns 0 on success, -1 when an eigenvalue fails to deflate within the
    iteration budget.  ``a`` is destroyed.
    """
    n = a.shape[0]
    anorm = 0.0
    for i in range(n):
        lo = i - 1
        if lo < 0:
            lo = 0
        anorm += np.sum(np.abs(a[i, lo:]))
    if anorm == 0.0:
        anorm = 1.0
    nn = n - 1
    t = 0.0
    p = 0.0
    q = 0.0
    r = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = 0
            for ll in range(nn, 0, -1):
                s = abs(a[ll - 1, ll - 1]) + abs(a[ll, ll])
                if s == 0.0:
                    s = anorm
                if abs(a[ll, ll - 1]) + s == s:
                    a[ll, ll - 1] = 0.0
                    l = ll
                    break
            x = a[nn, nn]
            if l == nn:
                # single real eigenvalue
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                # 2x2 block: real pair or complex conjugate pair
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + (z if p >= 0.0 else -z)
                    wr[nn - 1] = x + z
                    wr[nn] = wr[nn - 1]
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = 0.0
                    wi[nn] = 0.0
                else:
                    wr[nn - 1] = x + p
                    wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if its == 40:
                return -1
            if its == 10 or its == 20 or its == 30:
                # exceptional shift
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                y = 0.75 * s
                x = y
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = a[k + 2, k - 1]
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.sqrt(p * p + q * q + r * r)
                if p < 0.0:
                    s = -s
                if s != 0.0:
                    if k == m:
                        if l != m:
                            a[k, k - 1] = -a[k, k - 1]
                    else:
                        a[k, k - 1] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    if k != nn - 1:
                        pv = a[k, k:nn + 1] + q * a[k + 1, k:nn + 1] + r * a[k + 2, k:nn + 1]
                        a[k + 2, k:nn + 1] -= pv * z
                    else:
                        pv = a[k, k:nn + 1] + q * a[k + 1, k:nn + 1]
                    a[k + 1, k:nn + 1] -= pv * y
                    a[k, k:nn + 1] -= pv * x
                    mmin = nn if nn < k + 3 else k + 3
                    if k != nn - 1:
                        cv = x * a[l:mmin + 1, k] + y * a[l:mmin + 1, k + 1] + z * a[l:mmin + 1, k + 2]
                        a[l:mmin + 1, k + 2] -= cv * r
                    else:
                        cv = x * a[l:mmin + 1, k] + y * a[l:mmin + 1, k + 1]
                    a[l:mmin + 1, k + 1] -= cv * q
                    a[l:mmin + 1, k] -= cv
    return 0


_balance_c = maybe_njit(_balance)
_hessenberg_c = maybe_njit(_hessenberg)
_hqr_c = maybe_njit(_hqr)


def eigvals(matrix) -> np.ndarray:
    """All eigenvalues of a real square matrix, as a complex array.

    Raises ``ValueError`` for non-square input and ``RuntimeError`` when the
    QR iteration fails to converge (exceedingly rare for balanced input).
    """
    a = np.array(matrix, dtype=np.float64, order="C", copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.complex128)
    if n == 1:
        return np.asarray([a[0, 0]], dtype=np.complex128)
    wr = np.empty(n)
    wi = np.empty(n)
    _balance_c(a)
    _hessenberg_c(a)
    status = _hqr_c(a, wr, wi)
    if status != 0:
        raise RuntimeError("QR iteration failed to converge")
    return wr + 1j * wi
