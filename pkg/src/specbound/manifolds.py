"""Discrete spectral models: eigenfrequencies and basis values on grids.

Each builder returns a model whose retained eigenfunctions are discretely
orthonormal under the stored quadrature weights (exact for band-limited
products, by oversampling).  The interval model is the exception: it is a
finite-difference grid with implicit delta "modes" and carries no basis
matrix; operators on it are assembled by finite differences.

Models are immutable after build; builders are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PotentialField",
    "SpectralModel",
    "build_line",
    "build_sphere2",
    "build_torus1",
    "build_torus2",
    "lq_norm",
]


@dataclass
class SpectralModel:
    """Mode frequencies plus quadrature grid for one model geometry.

    ``freqs`` are sorted nondecreasing with multiplicities preserved; the
    square of a frequency is a Laplacian eigenvalue.  ``basis`` is the
    (modes x nodes) matrix of eigenfunction values, built lazily because
    large randomization-only models never need it (``None`` for the line
    model).  ``meta`` records the size parameters used by the build.
    """

    kind: str
    dim: int
    freqs: np.ndarray
    mode_labels: tuple
    nodes: np.ndarray
    weights: np.ndarray
    volume: float
    meta: dict
    _basis_builder: object = field(default=None, repr=False)
    _basis: np.ndarray = field(default=None, repr=False)

    @property
    def n_modes(self) -> int:
        return len(self.freqs)

    @property
    def n_nodes(self) -> int:
        return len(self.weights)

    @property
    def basis(self) -> np.ndarray:
        """Eigenfunction values e_j(x_m) as a (modes x nodes) array."""
        if self.kind == "line":
            raise ValueError("line model has no explicit eigenbasis")
        if self._basis is None:
            self._basis = self._basis_builder()
        return self._basis

    def gram(self) -> np.ndarray:
        """Discrete Gram matrix; identity up to quadrature exactness."""
        e = self.basis
        return (e.conj() * self.weights) @ e.T


def build_torus1(N: int) -> SpectralModel:
    """Circle model: modes exp(ikx)/sqrt(2 pi), |k| <= N/2, on 2N+2 nodes.

    N must be even and >= 4.  The node count oversamples by a factor of two
    so products of retained modes are integrated exactly by the trapezoid
    rule; volume is 2 pi.
    """
    if N < 4 or N % 2 != 0:
        raise ValueError(f"N={N}: need even N >= 4")
    half = N // 2
    ks = [0]
    for k in range(1, half + 1):
        ks.extend([-k, k])
    ks = np.array(ks)
    m = 2 * N + 2
    nodes = 2.0 * math.pi * np.arange(m) / m
    weights = np.full(m, 2.0 * math.pi / m)

    def make_basis(ks=ks, nodes=nodes):
        return np.exp(1j * np.outer(ks, nodes)) / math.sqrt(2.0 * math.pi)

    return SpectralModel(
        kind="torus1",
        dim=1,
        freqs=np.abs(ks).astype(float),
        mode_labels=tuple(int(k) for k in ks),
        nodes=nodes,
        weights=weights,
        volume=2.0 * math.pi,
        meta={"N": N, "period": 2.0 * math.pi, "grid_shape": (m,)},
        _basis_builder=make_basis,
    )


def build_torus2(N: int) -> SpectralModel:
    """Square torus model: modes exp(i k.x)/(2 pi), |k|_inf <= N.

    Grid is (2N+2)^2 uniform, volume (2 pi)^2.  Mode count (2N+1)^2.
    """
    if N < 1:
        raise ValueError(f"N={N}: need N >= 1")
    k1, k2 = np.meshgrid(np.arange(-N, N + 1), np.arange(-N, N + 1), indexing="ij")
    kpairs = np.column_stack([k1.ravel(), k2.ravel()])
    norms = np.hypot(kpairs[:, 0], kpairs[:, 1])
    order = np.lexsort((kpairs[:, 1], kpairs[:, 0], norms))
    kpairs = kpairs[order]
    ms = 2 * N + 2
    ax = 2.0 * math.pi * np.arange(ms) / ms
    gx, gy = np.meshgrid(ax, ax, indexing="ij")
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    weights = np.full(ms * ms, (2.0 * math.pi) ** 2 / (ms * ms))

    def make_basis(kpairs=kpairs, nodes=nodes):
        phase = np.outer(kpairs[:, 0], nodes[:, 0]) + np.outer(kpairs[:, 1], nodes[:, 1])
        return np.exp(1j * phase) / (2.0 * math.pi)

    return SpectralModel(
        kind="torus2",
        dim=2,
        freqs=np.hypot(kpairs[:, 0], kpairs[:, 1]).astype(float),
        mode_labels=tuple((int(a), int(b)) for a, b in kpairs),
        nodes=nodes,
        weights=weights,
        volume=(2.0 * math.pi) ** 2,
        meta={"N": N, "period": 2.0 * math.pi, "grid_shape": (ms, ms)},
        _basis_builder=make_basis,
    )


def _legendre_normalized(L: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal associated Legendre values n_lm(x), l,m <= L.

    Normalized so that the integral of n_lm^2 over [-1, 1] is one; computed
    by the stable normalized three-term recurrence (values stay O(sqrt(l)),
    which is the overflow guard).  Returns array of shape (L+1, L+1, len(x));
    entries with m > l are zero.
    """
    nx = len(x)
    out = np.zeros((L + 1, L + 1, nx))
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    out[0, 0] = 1.0 / math.sqrt(2.0)
    for m in range(1, L + 1):
        out[m, m] = math.sqrt((2 * m + 1) / (2.0 * m)) * s * out[m - 1, m - 1]
    for m in range(0, L):
        out[m + 1, m] = math.sqrt(2 * m + 3.0) * x * out[m, m]
    for m in range(0, L + 1):
        for l in range(m + 2, L + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(
                ((2.0 * l + 1.0) * ((l - 1.0) ** 2 - m * m))
                / ((2.0 * l - 3.0) * (l * l - m * m))
            )
            out[l, m] = a * x * out[l - 1, m] - b * out[l - 2, m]
    return out


def build_sphere2(L: int) -> SpectralModel:
    """Round-sphere model: real spherical harmonics up to degree L.

    Frequencies sqrt(l(l+1)) with multiplicity 2l+1; quadrature is
    Gauss-Legendre in cos(theta) times a uniform azimuthal rule, both with
    2L+2 points, exact for products of retained harmonics.  Volume 4 pi.
    Nodes are stored as (theta, phi) pairs.
    """
    if L < 2:
        raise ValueError(f"L={L}: need L >= 2")
    nq = 2 * L + 2
    xg, wg = np.polynomial.legendre.leggauss(nq)
    phis = 2.0 * math.pi * np.arange(nq) / nq
    theta = np.arccos(xg)
    tt, pp = np.meshgrid(theta, phis, indexing="ij")
    nodes = np.column_stack([tt.ravel(), pp.ravel()])
    weights = np.repeat(wg, nq) * (2.0 * math.pi / nq)

    labels = []
    for l in range(L + 1):
        for mm in range(-l, l + 1):
            labels.append((l, mm))
    freqs = np.array([math.sqrt(l * (l + 1.0)) for l, _ in labels])

    def make_basis(labels=labels, xg=xg, phis=phis, L=L, nq=nq):
        nlm = _legendre_normalized(L, xg)
        rows = np.zeros((len(labels), nq * nq), dtype=complex)
        for i, (l, mm) in enumerate(labels):
            theta_part = nlm[l, abs(mm)]
            if mm == 0:
                phi_part = np.full(nq, 1.0 / math.sqrt(2.0 * math.pi))
            elif mm > 0:
                phi_part = np.cos(mm * phis) / math.sqrt(math.pi)
            else:
                phi_part = np.sin(-mm * phis) / math.sqrt(math.pi)
            rows[i] = np.outer(theta_part, phi_part).ravel()
        return rows

    return SpectralModel(
        kind="sphere2",
        dim=2,
        freqs=freqs,
        mode_labels=tuple(labels),
        nodes=nodes,
        weights=weights,
        volume=4.0 * math.pi,
        meta={"L": L, "grid_shape": (nq, nq)},
        _basis_builder=make_basis,
    )


def build_line(halfwidth: float, N: int) -> SpectralModel:
    """Finite-interval grid with Dirichlet endpoints excluded.

    N interior nodes with spacing h = 2*halfwidth/(N+1); weights are h, so
    the weights sum to 2*halfwidth - h (the two boundary half-cells are
    dropped with the Dirichlet endpoints).  Bypasses the eigenbasis route:
    operators on this model are assembled by finite differences.
    """
    if halfwidth <= 0:
        raise ValueError(f"halfwidth={halfwidth} must be positive")
    if N < 16:
        raise ValueError(f"N={N}: need N >= 16")
    h = 2.0 * halfwidth / (N + 1)
    nodes = -halfwidth + h * np.arange(1, N + 1)
    weights = np.full(N, h)
    return SpectralModel(
        kind="line",
        dim=1,
        freqs=np.zeros(0),
        mode_labels=(),
        nodes=nodes,
        weights=weights,
        volume=float(weights.sum()),
        meta={"halfwidth": halfwidth, "N": N, "h": h},
    )


@dataclass
class PotentialField:
    """Complex potential samples on a model's grid with cached norms."""

    model: SpectralModel
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.model.n_nodes,):
            raise ValueError(
                f"potential has {vals.shape} values, model has {self.model.n_nodes} nodes"
            )
        self.values = vals
        self._norms: dict = {}

    def lq_norm(self, q: float) -> float:
        """Weighted discrete L^q norm; q = inf gives the max modulus."""
        if not (q >= 1):
            raise ValueError(f"q={q}: need q >= 1 or inf")
        key = float(q)
        if key not in self._norms:
            if math.isinf(q):
                val = float(np.abs(self.values).max()) if len(self.values) else 0.0
            else:
                val = float(
                    (self.model.weights @ np.abs(self.values) ** q) ** (1.0 / q)
                )
            self._norms[key] = val
        return self._norms[key]

    @property
    def is_real(self) -> bool:
        scale = float(np.abs(self.values).max()) if len(self.values) else 0.0
        return float(np.abs(self.values.imag).max()) <= 1e-13 * max(scale, 1.0)

    def positive_part(self) -> np.ndarray:
        """max(Re V, 0) pointwise (meaningful for real potentials)."""
        return np.maximum(self.values.real, 0.0)

    def negative_part(self) -> np.ndarray:
        """max(-Re V, 0) pointwise, so that Re V = V_+ - V_-."""
        return np.maximum(-self.values.real, 0.0)


def lq_norm(V: PotentialField, q: float) -> float:
    return V.lq_norm(q)
