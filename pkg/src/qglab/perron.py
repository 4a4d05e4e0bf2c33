"""Perron-Frobenius operator, spectral gap, and deflated resolvent powers.

The classical transition matrix F is the entrywise squared modulus of the
propagation matrix: bistochastic, with a non-degenerate unit eigenvalue
whose left and right eigenvectors are both the uniform vector.  Everything
downstream quantifies the rest of the spectrum: the gap a = 1 - max|lambda|
over the non-Perron eigenvalues, and the matrices

    W^(n) = P (1 - F)^(-n) P,   P = 1 - |u><u|,  u uniform,

computed through the rank-one-shifted system (1 - F + |u><u|), which agrees
with (1 - F) on the deflated subspace and is invertible on all of it.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._kernels.eig import eigvals
from .errors import AssemblyError, ConvergenceError, IllConditionedResolvent

BISTOCHASTIC_TOL = 1e-12
GAP_FLOOR = 1e-6


def build_pf(bcal: np.ndarray) -> np.ndarray:
    """Classical transition matrix |bcal|^2; raises if not bistochastic."""
    f = np.abs(bcal) ** 2
    two_b = f.shape[0]
    row_dev = np.max(np.abs(f.sum(axis=1) - 1.0))
    col_dev = np.max(np.abs(f.sum(axis=0) - 1.0))
    if max(row_dev, col_dev) > BISTOCHASTIC_TOL:
        raise AssemblyError(
            f"transition matrix not bistochastic (row dev {row_dev:.3e}, "
            f"col dev {col_dev:.3e}); the assembly convention is broken"
        )
    if two_b != f.shape[1]:
        raise AssemblyError("transition matrix must be square")
    return f


@dataclass(frozen=True)
class GapReport:
    """Spectral summary of a bistochastic transition matrix."""

    leading: float
    leading_residual: float
    lambda_sub: float
    gap: float
    method: str
    eigenvalues: np.ndarray | None = field(default=None, repr=False)


def _uniform(two_b: int) -> np.ndarray:
    return np.full(two_b, 1.0 / np.sqrt(two_b))


def _perron_residual(f: np.ndarray) -> float:
    u = _uniform(f.shape[0])
    return float(np.max(np.abs(f @ u - u)))


def _lambda_sub_dense(f: np.ndarray):
    lam = eigvals(f)
    k1 = int(np.argmin(np.abs(lam - 1.0)))
    rest = np.delete(lam, k1)
    lam_sub = float(np.max(np.abs(rest))) if rest.size else 0.0
    return float(lam[k1].real), lam_sub, lam


def _recurrence_max_root(window, order):
    """Largest-|root| of the linear recurrence fitted to the iterate window.

    window holds order+1 consecutive unnormalized-relative iterates.  Returns
    (modulus, residual); the companion matrix is solved with the in-package
    eigensolver.
    """
    a = np.stack(window[:order], axis=1)
    b = window[order]
    coeffs, *_ = np.linalg.lstsq(a, b, rcond=None)
    resid = np.linalg.norm(a @ coeffs - b) / max(np.linalg.norm(b), 1e-300)
    companion = np.zeros((order, order))
    companion[0, :] = coeffs[::-1]
    if order > 1:
        companion[1:, :-1] = np.eye(order - 1)
    roots = eigvals(companion)
    return float(np.max(np.abs(roots))), float(resid)


def _lambda_sub_power(f: np.ndarray, tol=1e-10, max_iter=20000):
    """Subleading modulus by power iteration after rank-one deflation.

    A fitted linear recurrence over the latest iterates handles complex
    conjugate pairs and small clusters of equal-modulus eigenvalues.
    """
    two_b = f.shape[0]
    u = _uniform(two_b)
    fd = f - np.outer(u, u)
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(two_b)
    v -= u * (u @ v)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return 0.0
    v /= norm
    max_order = 10
    window = [v.copy()]
    scales = [1.0]
    best = None
    stable = 0
    for _ in range(max_iter):
        w = fd @ v
        s = np.linalg.norm(w)
        if s < 1e-280:
            return 0.0
        v = w / s
        scales.append(s)
        window.append(v.copy())
        if len(window) > max_order + 1:
            window.pop(0)
            scales.pop(0)
        if len(window) < 3:
            continue
        # rebuild relative (unnormalized) iterates within the window
        rel = [window[0]]
        acc = 1.0
        for j in range(1, len(window)):
            acc *= scales[j]
            rel.append(window[j] * acc)
        for order in (2, 4, 6, 8, 10):
            if order + 1 > len(rel):
                break
            est, resid = _recurrence_max_root(rel[-(order + 1):], order)
            if resid < 1e-12:
                if best is not None and abs(est - best) <= tol * max(1.0, est):
                    stable += 1
                    if stable >= 3:
                        return est
                else:
                    stable = 0
                best = est
                break
    raise ConvergenceError(
        f"deflated power iteration did not settle in {max_iter} steps",
        partial=best,
    )


def spectral_gap(f: np.ndarray, method: str = "dense") -> GapReport:
    """Gap report for a bistochastic matrix via the requested method.

    ``dense`` runs the in-package balanced Hessenberg/QR eigensolver and
    reports the full spectrum; ``deflated-power`` estimates only the
    subleading modulus.
    """
    residual = _perron_residual(f)
    if method == "dense":
        leading, lam_sub, lam = _lambda_sub_dense(f)
        return GapReport(
            leading=leading,
            leading_residual=residual,
            lambda_sub=lam_sub,
            gap=1.0 - lam_sub,
            method=method,
            eigenvalues=lam,
        )
    if method == "deflated-power":
        try:
            lam_sub = _lambda_sub_power(f)
        except ConvergenceError as exc:
            exc.partial = GapReport(
                leading=1.0,
                leading_residual=residual,
                lambda_sub=float("nan") if exc.partial is None else exc.partial,
                gap=float("nan"),
                method=method,
            )
            raise
        return GapReport(
            leading=1.0,
            leading_residual=residual,
            lambda_sub=lam_sub,
            gap=1.0 - lam_sub,
            method=method,
        )
    raise ValueError(f"unknown spectral method: {method!r}")


def nonperron_eigenvalues(report: GapReport) -> np.ndarray:
    """Dense spectrum with the Perron eigenvalue removed."""
    if report.eigenvalues is None:
        raise ValueError("dense spectrum required")
    lam = report.eigenvalues
    return np.delete(lam, int(np.argmin(np.abs(lam - 1.0))))


class DeflatedResolvent:
    """Cached solver for the deflated resolvent powers W^(n).

    Factorizes (1 - F + |u><u|) once; each order is obtained by one more
    solve against the previous one followed by projection.  Construction
    fails when the measured gap sits below ``gap_floor``.
    """

    def __init__(self, f: np.ndarray, gap: float | None = None,
                 gap_floor: float = GAP_FLOOR):
        self.f = np.asarray(f, dtype=float)
        self.two_b = self.f.shape[0]
        if gap is None:
            gap = spectral_gap(self.f, method="deflated-power").gap
        if gap < gap_floor:
            raise IllConditionedResolvent(
                f"spectral gap {gap:.3e} below floor {gap_floor:.1e}"
            )
        self.gap = float(gap)
        self.u = _uniform(self.two_b)
        shifted = np.eye(self.two_b) - self.f + np.outer(self.u, self.u)
        self._lu = scipy.linalg.lu_factor(shifted)
        self._w: dict[int, np.ndarray] = {}

    def project(self, m: np.ndarray) -> np.ndarray:
        """Apply P = 1 - |u><u| on both sides."""
        m = m - np.outer(self.u, self.u @ m)
        return m - np.outer(m @ self.u, self.u)

    def w(self, order: int) -> np.ndarray:
        """W^(order); cached."""
        if order < 1:
            raise ValueError("resolvent order must be >= 1")
        if order not in self._w:
            if order == 1:
                rhs = np.eye(self.two_b) - np.outer(self.u, self.u)
            else:
                rhs = self.w(order - 1)
            x = scipy.linalg.lu_solve(self._lu, rhs)
            self._w[order] = self.project(x)
        return self._w[order]


def w_matrix(resolvent: DeflatedResolvent, order: int = 1) -> np.ndarray:
    """Deflated resolvent power W^(order) of the given operator."""
    return resolvent.w(order)
