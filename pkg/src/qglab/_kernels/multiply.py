"""Exterior-algebra coefficient product kernel.

Elements of the algebra on ``g`` anticommuting generators are stored as
dense complex coefficient vectors indexed by generator bitmask.  The product
is a signed scatter over all disjoint mask pairs; the (i, j, i|j, sign)
table per generator count is built once and cached.
"""

from functools import lru_cache

import numpy as np

from . import NUMBA_ENABLED


@lru_cache(maxsize=None)
def product_table(n_gen: int):
    """Structure constants of the exterior algebra on ``n_gen`` generators.

    Returns int64 arrays (i, j, k) with k = i | j over all disjoint pairs,
    plus the float64 reordering sign of concatenating monomial i before j.
    """
    if n_gen < 0:
        raise ValueError("generator count must be >= 0")
    dim = 1 << n_gen
    ii = []
    jj = []
    kk = []
    ss = []
    for i in range(dim):
        comp = (dim - 1) ^ i
        j = comp
        while True:
            # swaps needed to sort the word (i-bits then j-bits)
            swaps = 0
            bits = j
            while bits:
                b = (bits & -bits).bit_length() - 1
                swaps += (i >> (b + 1)).bit_count()
                bits &= bits - 1
            ii.append(i)
            jj.append(j)
            kk.append(i | j)
            ss.append(-1.0 if swaps & 1 else 1.0)
            if j == 0:
                break
            j = (j - 1) & comp
    order = np.lexsort((np.array(jj), np.array(ii)))
    return (
        np.array(ii, dtype=np.int64)[order],
        np.array(jj, dtype=np.int64)[order],
        np.array(kk, dtype=np.int64)[order],
        np.array(ss, dtype=np.float64)[order],
    )


if NUMBA_ENABLED:
    from numba import njit

    @njit(cache=True)
    def _scatter(a, b, ii, jj, kk, ss, out):
        for t in range(ii.shape[0]):
            out[kk[t]] += ss[t] * a[ii[t]] * b[jj[t]]

    def multiply_coeffs(a, b, n_gen):
        ii, jj, kk, ss = product_table(n_gen)
        out = np.zeros_like(a)
        _scatter(a, b, ii, jj, kk, ss, out)
        return out

else:

    def multiply_coeffs(a, b, n_gen):
        ii, jj, kk, ss = product_table(n_gen)
        out = np.zeros_like(a)
        np.add.at(out, kk, ss * a[ii] * b[jj])
        return out


multiply_coeffs.__doc__ = """Coefficient vector of the product of two elements."""
