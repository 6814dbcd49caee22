"""Assembly of fractional Laplacians, potentials, resolvents and the
factorized spectral-equivalence operator on truncated models.

Potential matrices are computed by quadrature in the eigenbasis (exact for
band-limited potentials); on torus models this is done through one FFT and a
coefficient gather, which reproduces the quadrature sums bit-for-bit.  The
factorized operator |V|^{1/2} R(z) sgn(V) |V|^{1/2} is represented on the
quadrature grid, where multiplication operators are diagonal: with that
representation the nonzero spectrum matches the truncated Schrodinger
operator's eigenvalue condition exactly (a determinant identity), which is
what the cross-check tests rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import eig
from .manifolds import PotentialField, SpectralModel

__all__ = [
    "GalerkinOperator",
    "assemble_birman_schwinger",
    "assemble_fractional",
    "assemble_line_schrodinger",
    "assemble_potential",
    "assemble_schrodinger",
    "free_distance",
    "line_eigenvalues",
    "line_tridiagonal",
    "resolvent_apply",
    "resolvent_grid_operator",
    "schrodinger_spectrum",
    "write_matrix_csv",
]


@dataclass
class GalerkinOperator:
    """Dense matrix representation of a truncated operator with provenance."""

    matrix: np.ndarray
    model: SpectralModel
    tag: str
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _require_eigenbasis(model: SpectralModel, what: str) -> None:
    if model.kind == "line":
        raise ValueError(f"{what} needs an eigenbasis model, not the line grid")


def _require_same_model(model: SpectralModel, V: PotentialField) -> None:
    if V.model is not model:
        raise ValueError("potential was sampled on a different model")


def assemble_fractional(model: SpectralModel, alpha: float) -> GalerkinOperator:
    """Diagonal matrix of the mode frequencies raised to alpha."""
    if alpha <= 0:
        raise ValueError(f"alpha={alpha} must be positive")
    _require_eigenbasis(model, "fractional power")
    return GalerkinOperator(
        matrix=np.diag(model.freqs**alpha).astype(complex),
        model=model,
        tag="free",
        params={"alpha": alpha},
    )


def _torus_potential_matrix(model: SpectralModel, values: np.ndarray) -> np.ndarray:
    """Quadrature potential matrix via FFT coefficient gather (torus only)."""
    shape = model.meta["grid_shape"]
    if model.kind == "torus1":
        ms = shape[0]
        hat = np.fft.fft(values)
        ks = np.array(model.mode_labels)
        diff = np.mod(ks[:, None] - ks[None, :], ms)
        return hat[diff] / ms
    ms = shape[0]
    hat = np.fft.fft2(values.reshape(shape))
    ks = np.array(model.mode_labels)
    d1 = np.mod(ks[:, 0][:, None] - ks[:, 0][None, :], ms)
    d2 = np.mod(ks[:, 1][:, None] - ks[:, 1][None, :], ms)
    return hat[d1, d2] / (ms * ms)


def assemble_potential(model: SpectralModel, V: PotentialField) -> GalerkinOperator:
    """Multiplication operator in the retained basis, by exact quadrature.

    On the line grid the multiplication operator is simply diagonal.
    """
    _require_same_model(model, V)
    if model.kind == "line":
        mat = np.diag(V.values)
    elif model.kind in ("torus1", "torus2"):
        mat = _torus_potential_matrix(model, V.values)
    else:
        e = model.basis
        mat = (e.conj() * (model.weights * V.values)) @ e.T
    return GalerkinOperator(matrix=mat, model=model, tag="potential")


def assemble_schrodinger(
    model: SpectralModel, V: PotentialField, alpha: float
) -> GalerkinOperator:
    """Fractional free part plus the potential matrix.

    The line model is dispatched to the finite-difference assembly and only
    supports the classical alpha = 2.
    """
    if model.kind == "line":
        if alpha != 2:
            raise ValueError("line model supports only the classical alpha = 2")
        return assemble_line_schrodinger(model, V)
    free = assemble_fractional(model, alpha)
    pot = assemble_potential(model, V)
    return GalerkinOperator(
        matrix=free.matrix + pot.matrix,
        model=model,
        tag="schrodinger",
        params={"alpha": alpha},
    )


def line_tridiagonal(model: SpectralModel, V: PotentialField):
    """Main diagonal and off-diagonal of the finite-difference operator."""
    if model.kind != "line":
        raise ValueError("tridiagonal assembly is for line models")
    _require_same_model(model, V)
    h = model.meta["h"]
    diag = 2.0 / h**2 + V.values
    off = np.full(model.n_nodes - 1, -1.0 / h**2)
    return diag, off


def assemble_line_schrodinger(model: SpectralModel, V: PotentialField) -> GalerkinOperator:
    """Second-order central differences with Dirichlet endpoints plus diag(V)."""
    diag, off = line_tridiagonal(model, V)
    mat = np.diag(diag.astype(complex))
    idx = np.arange(model.n_nodes - 1)
    mat[idx, idx + 1] = off
    mat[idx + 1, idx] = off
    return GalerkinOperator(matrix=mat, model=model, tag="schrodinger", params={"alpha": 2.0})


def line_eigenvalues(model: SpectralModel, V: PotentialField) -> np.ndarray:
    """Spectrum of the finite-difference operator, fast path for real V.

    Real potentials use the symmetric tridiagonal solver; complex ones fall
    back to the dense nonsymmetric eigensolver.
    """
    diag, off = line_tridiagonal(model, V)
    if V.is_real:
        return scipy.linalg.eigvalsh_tridiagonal(diag.real, off).astype(complex)
    return eig(assemble_line_schrodinger(model, V).matrix)


def schrodinger_spectrum(model: SpectralModel, V: PotentialField, alpha: float) -> np.ndarray:
    """Eigenvalues of the truncated operator for any supported model kind."""
    if model.kind == "line":
        if alpha != 2:
            raise ValueError("line model supports only the classical alpha = 2")
        return line_eigenvalues(model, V)
    return eig(assemble_schrodinger(model, V, alpha).matrix)


def free_distance(model: SpectralModel, alpha: float, z: complex) -> float:
    """Distance from z to the truncated free spectrum."""
    _require_eigenbasis(model, "free spectrum distance")
    return float(np.abs(model.freqs**alpha - z).min())


def assemble_birman_schwinger(
    model: SpectralModel,
    V: PotentialField,
    z: complex,
    alpha: float,
    *,
    min_distance: float = 1e-12,
) -> GalerkinOperator:
    """|V|^{1/2} (H0 - z)^{-1} sgn(V) |V|^{1/2} on the quadrature grid.

    sgn(V) = V/|V| pointwise with sgn(0) = 0.  The truncated free resolvent
    is conjugated by synthesis/analysis so the two multiplication factors act
    diagonally; z must keep a positive distance from the free spectrum.
    """
    _require_eigenbasis(model, "factorized resolvent operator")
    _require_same_model(model, V)
    lam = model.freqs**alpha
    dist = float(np.abs(lam - z).min())
    if dist <= min_distance * (1.0 + abs(z)):
        raise ValueError(
            f"z={z} too close to the free spectrum: d(z)={dist:.3e}"
        )
    absv = np.abs(V.values)
    a = np.sqrt(absv)
    sgn = np.zeros_like(V.values)
    nz = absv > 0
    sgn[nz] = V.values[nz] / absv[nz]
    b = sgn * a
    e = model.basis
    inv = 1.0 / (lam - z)
    left = a[:, None] * e.T * inv[None, :]
    right = e.conj() * (model.weights * b)[None, :]
    return GalerkinOperator(
        matrix=left @ right,
        model=model,
        tag="birman_schwinger",
        params={"alpha": alpha, "z": z, "free_distance": dist},
    )


def resolvent_apply(
    model: SpectralModel, alpha: float, z: complex, f: np.ndarray
) -> np.ndarray:
    """Apply the diagonal free resolvent to a coefficient vector."""
    _require_eigenbasis(model, "resolvent")
    lam = model.freqs**alpha
    dist = float(np.abs(lam - z).min())
    if dist == 0.0:
        raise ValueError(f"z={z} lies on the free spectrum, d(z)=0")
    f = np.asarray(f, dtype=complex)
    if f.shape != lam.shape:
        raise ValueError(f"coefficient vector has shape {f.shape}, need {lam.shape}")
    return f / (lam - z)


class _TorusGridResolvent:
    """Grid-to-grid truncated free resolvent on a torus, applied by FFT.

    The operator is a convolution: analysis, diagonal resolvent over the
    retained modes, synthesis.  Shape is (nodes, nodes); the adjoint has the
    conjugate symbol.
    """

    def __init__(self, model: SpectralModel, alpha: float, z: complex):
        self.shape = (model.n_nodes, model.n_nodes)
        self.grid_shape = model.meta["grid_shape"]
        n_cut = model.meta["N"]
        if model.kind == "torus1":
            ms = self.grid_shape[0]
            k = np.fft.fftfreq(ms, d=1.0 / ms)
            lam = np.abs(k)
            mask = np.abs(k) <= n_cut // 2  # build retains |k| <= N/2
        else:
            ms = self.grid_shape[0]
            k = np.fft.fftfreq(ms, d=1.0 / ms)
            k1, k2 = np.meshgrid(k, k, indexing="ij")
            lam = np.hypot(k1, k2)
            mask = (np.abs(k1) <= n_cut) & (np.abs(k2) <= n_cut)
        sym = np.zeros(lam.shape, dtype=complex)
        sym[mask] = 1.0 / (lam[mask] ** alpha - z)
        self._symbol = sym

    def _apply(self, x: np.ndarray, symbol: np.ndarray) -> np.ndarray:
        grid = np.asarray(x, dtype=complex).reshape(self.grid_shape)
        if grid.ndim == 1:
            out = np.fft.ifft(symbol * np.fft.fft(grid))
        else:
            out = np.fft.ifft2(symbol * np.fft.fft2(grid))
        return out.ravel()

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self._apply(x, self._symbol)

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        return self._apply(y, self._symbol.conj())


def resolvent_grid_operator(model: SpectralModel, alpha: float, z: complex):
    """Truncated free resolvent acting on grid functions.

    Torus models return an FFT-backed operator object with matvec/rmatvec;
    other eigenbasis models return the dense (nodes x nodes) matrix.
    """
    _require_eigenbasis(model, "grid resolvent")
    dist = free_distance(model, alpha, z)
    if dist == 0.0:
        raise ValueError(f"z={z} lies on the free spectrum")
    if model.kind in ("torus1", "torus2"):
        return _TorusGridResolvent(model, alpha, z)
    e = model.basis
    inv = 1.0 / (model.freqs**alpha - z)
    return (e.T * inv[None, :]) @ (e.conj() * model.weights[None, :])


def write_matrix_csv(op: GalerkinOperator | np.ndarray, path) -> None:
    """Row-major CSV export with alternating re,im pairs per entry."""
    mat = op.matrix if isinstance(op, GalerkinOperator) else np.asarray(op)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row in np.atleast_2d(mat):
            parts = []
            for entry in row:
                c = complex(entry)
                parts.append(repr(c.real))
                parts.append(repr(c.imag))
            fh.write(",".join(parts) + "\n")
