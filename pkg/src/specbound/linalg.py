"""Dense non-Hermitian eigendecomposition, Schatten norms and p->p' norms.

Eigen and singular value kernels are LAPACK-backed; the contract here is the
backward-error bound checked in the test suite, not a prescribed algorithm.
The p->p' operator norm on weighted grids is estimated by a multi-start
nonlinear power iteration through pointwise duality maps; the returned value
is an achieved ratio and hence a certified lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EigenSolverError",
    "OpNormResult",
    "SchattenReport",
    "eig",
    "opnorm_p_pprime",
    "schatten_norm",
]


class EigenSolverError(RuntimeError):
    """Dense eigensolver failed to converge; diagnostics in the message."""


def eig(A: np.ndarray, want_vectors: bool = False):
    """All eigenvalues (and optionally right eigenvectors) of a dense matrix.

    Never silent on failure: LAPACK non-convergence is re-raised with the
    matrix size and norm attached.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"need a square matrix, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError("matrix has non-finite entries")
    try:
        if want_vectors:
            w, v = np.linalg.eig(A)
            return w, v
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigenSolverError(
            f"eigensolver did not converge on {A.shape[0]}x{A.shape[1]} matrix "
            f"(frobenius={np.linalg.norm(A):.3e}): {exc}"
        ) from exc


@dataclass(frozen=True)
class SchattenReport:
    """Schatten p-norm together with the singular values used."""

    p: float
    value: float
    singulars: np.ndarray


def schatten_norm(A: np.ndarray, p: float) -> SchattenReport:
    """Schatten norm via a full singular value decomposition.

    p = inf returns the largest singular value.
    """
    if not (p >= 1):
        raise ValueError(f"p={p}: need p >= 1 or inf")
    A = np.asarray(A)
    s = np.linalg.svd(A, compute_uv=False)
    s = np.sort(s)[::-1]
    if math.isinf(p):
        value = float(s[0]) if len(s) else 0.0
    else:
        value = float((s**p).sum() ** (1.0 / p))
    return SchattenReport(p=float(p), value=value, singulars=s)


@dataclass
class OpNormResult:
    """Best achieved ratio (a lower bound) plus its iteration trace."""

    value: float
    trace: list
    starts: int
    iterations: int


def _pnorm(x: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.abs(x).max())
    return float((np.abs(x) ** p).sum() ** (1.0 / p))


def _sgn(x: np.ndarray) -> np.ndarray:
    a = np.abs(x)
    out = np.zeros_like(x)
    nz = a > 0
    out[nz] = x[nz] / a[nz]
    return out


def _dual_direction(y: np.ndarray, r: float) -> np.ndarray:
    """Unnormalized dual vector of y in the r-norm pairing."""
    if math.isinf(r):
        j = int(np.abs(y).argmax())
        out = np.zeros_like(y)
        out[j] = _sgn(y[j : j + 1])[0]
        return out
    return np.abs(y) ** (r - 1.0) * _sgn(y)


class _Op:
    """Uniform wrapper: dense matrix or duck-typed matvec/rmatvec operator."""

    def __init__(self, A):
        if hasattr(A, "matvec") and hasattr(A, "rmatvec"):
            self.n = A.shape[0]
            self._mv = A.matvec
            self._rmv = A.rmatvec
            self.dense = None
        else:
            A = np.asarray(A, dtype=complex)
            if A.ndim != 2 or A.shape[0] != A.shape[1]:
                raise ValueError(f"need a square operator, got shape {A.shape}")
            if not np.isfinite(A).all():
                raise ValueError("operator has non-finite entries")
            self.n = A.shape[0]
            self.dense = A
            self._mv = lambda x: A @ x
            self._rmv = lambda y: A.conj().T @ y

    def mv(self, x):
        return np.asarray(self._mv(x))

    def rmv(self, y):
        return np.asarray(self._rmv(y))


def opnorm_p_pprime(
    A,
    p: float,
    pprime: float,
    weights: np.ndarray,
    *,
    seed: int = 0,
    n_random_starts: int = 8,
    max_iter: int = 500,
    rtol: float = 1e-8,
) -> OpNormResult:
    """Lower-bound estimate of the weighted L^p -> L^p' operator norm.

    Weighted norms are ||x||_{p,w} = (sum w |x|^p)^{1/p}; the weighted
    problem is reduced to the plain one through the substitution
    A~ = diag(w^{1/p'}) A diag(w^{-1/p}) and then driven by the duality-map
    power iteration from 8 random and 2 structured starts.  The best achieved
    ratio over all iterates is returned; traces are kept per start.
    """
    if not (1.0 <= p <= 2.0 <= pprime):
        raise ValueError(f"(p, pprime)=({p}, {pprime}) outside 1 <= p <= 2 <= p'")
    op = _Op(A)
    w = np.asarray(weights, dtype=float)
    if w.shape != (op.n,) or (w <= 0).any():
        raise ValueError("weights must be positive and match the operator size")

    w_out = np.ones(op.n) if math.isinf(pprime) else w ** (1.0 / pprime)
    w_in = w ** (-1.0 / p)

    def amv(x):
        return w_out * op.mv(w_in * x)

    def armv(y):
        return np.conj(w_in) * op.rmv(np.conj(w_out) * y)

    rng = np.random.default_rng(seed)
    ones = np.ones(op.n, dtype=complex)
    g = armv(ones)
    spike = np.zeros(op.n, dtype=complex)
    spike[int(np.abs(g).argmax()) if np.abs(g).max() > 0 else 0] = 1.0
    starts = [ones, spike]
    for _ in range(n_random_starts):
        starts.append(rng.standard_normal(op.n) + 1j * rng.standard_normal(op.n))

    pstar = math.inf if p == 1.0 else p / (p - 1.0)
    best = 0.0
    best_trace: list = []
    total_iters = 0
    for x0 in starts:
        nx = _pnorm(x0, p)
        if nx == 0:
            continue
        x = x0 / nx
        trace = []
        prev = -1.0
        for _ in range(max_iter):
            total_iters += 1
            y = amv(x)
            ratio = _pnorm(y, pprime)
            trace.append(ratio)
            if ratio == 0.0:
                break
            if prev >= 0 and abs(ratio - prev) <= rtol * max(ratio, 1e-300):
                break
            prev = ratio
            u = _dual_direction(y, pprime)
            grad = armv(u)
            x_new = _dual_direction(grad, pstar)
            nx = _pnorm(x_new, p)
            if nx == 0:
                break
            x = x_new / nx
        if trace and trace[-1] >= best:
            best = trace[-1]
            best_trace = trace
        # ratio may have peaked earlier in a non-monotone tail
        if trace:
            m = max(trace)
            if m > best:
                best = m
                best_trace = trace
    return OpNormResult(value=best, trace=best_trace, starts=len(starts), iterations=total_iters)
