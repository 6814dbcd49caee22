"""Potential families used by experiments and tests.

All randomness flows through explicit integer seeds so every family is
reproducible; scaling to a target L^q norm is exact on the discrete grid.
"""

from __future__ import annotations

import math

import numpy as np

from .manifolds import PotentialField, SpectralModel

__all__ = [
    "band_limited",
    "constant",
    "multiwell_random",
    "nonvanishing_random",
    "square_well",
]


def constant(model: SpectralModel, value: complex) -> PotentialField:
    return PotentialField(model, np.full(model.n_nodes, complex(value)))


def band_limited(
    model: SpectralModel,
    bandwidth: int,
    seed: int,
    *,
    q: float | None = None,
    target_norm: float | None = None,
    real: bool = False,
) -> PotentialField:
    """Random trigonometric polynomial with modes up to ``bandwidth``.

    Coefficients are standard complex Gaussians; ``real=True`` symmetrizes
    them so the sample is real-valued.  If ``target_norm`` is given the field
    is rescaled to that exact discrete L^q norm.
    """
    if model.kind not in ("torus1", "torus2"):
        raise ValueError(f"band-limited family needs a torus model, got {model.kind}")
    if bandwidth < 1:
        raise ValueError("bandwidth must be >= 1")
    rng = np.random.default_rng(seed)
    if model.kind == "torus1":
        ks = np.arange(-bandwidth, bandwidth + 1)
        coef = rng.standard_normal(len(ks)) + 1j * rng.standard_normal(len(ks))
        vals = (coef[:, None] * np.exp(1j * np.outer(ks, model.nodes))).sum(axis=0)
    else:
        k1, k2 = np.meshgrid(
            np.arange(-bandwidth, bandwidth + 1),
            np.arange(-bandwidth, bandwidth + 1),
            indexing="ij",
        )
        ks = np.column_stack([k1.ravel(), k2.ravel()])
        coef = rng.standard_normal(len(ks)) + 1j * rng.standard_normal(len(ks))
        phase = np.outer(ks[:, 0], model.nodes[:, 0]) + np.outer(ks[:, 1], model.nodes[:, 1])
        vals = (coef[:, None] * np.exp(1j * phase)).sum(axis=0)
    if real:
        vals = vals.real.astype(complex)
    V = PotentialField(model, vals)
    if target_norm is not None:
        if q is None:
            raise ValueError("target_norm needs the norm exponent q")
        cur = V.lq_norm(q)
        if cur == 0.0:
            raise ValueError("cannot rescale a zero potential")
        V = PotentialField(model, vals * (target_norm / cur))
    return V


def nonvanishing_random(model: SpectralModel, seed: int) -> PotentialField:
    """Complex potential bounded away from zero (random modulus and phase)."""
    rng = np.random.default_rng(seed)
    mag = np.exp(rng.uniform(-0.5, 0.7, model.n_nodes))
    phase = rng.uniform(0.0, 2.0 * math.pi, model.n_nodes)
    return PotentialField(model, mag * np.exp(1j * phase))


def square_well(
    model: SpectralModel, half_width: float, strength: float, *, complex_factor: complex = 1.0
) -> PotentialField:
    """Attractive square well on the interval grid with exact integral.

    Nodes with |x| < half_width form the well; the depth is snapped so the
    discrete integral of the well equals ``strength`` exactly, which is what
    the narrow-well limits are calibrated against.
    """
    if model.kind != "line":
        raise ValueError("square wells live on the line model")
    if half_width <= 0 or strength <= 0:
        raise ValueError("half_width and strength must be positive")
    h = model.meta["h"]
    inside = np.abs(model.nodes) < half_width
    n_sel = int(inside.sum())
    if n_sel == 0:
        raise ValueError(f"half_width={half_width} traps no grid node (h={h})")
    depth = strength / (n_sel * h)
    vals = np.where(inside, -depth * complex_factor, 0.0 + 0.0j)
    return PotentialField(model, vals)


def multiwell_random(
    model: SpectralModel, seed: int, *, max_wells: int = 4, max_depth: float = 6.0
) -> PotentialField:
    """Random union of disjoint attractive wells for moment-bound studies."""
    if model.kind != "line":
        raise ValueError("multiwell family lives on the line model")
    rng = np.random.default_rng(seed)
    hw = model.meta["halfwidth"]
    n_wells = int(rng.integers(1, max_wells + 1))
    vals = np.zeros(model.n_nodes, dtype=complex)
    for _ in range(n_wells):
        center = rng.uniform(-0.6 * hw, 0.6 * hw)
        width = rng.uniform(0.1, 1.2)
        depth = rng.uniform(0.3, max_depth)
        vals -= depth * (np.abs(model.nodes - center) < width)
    return PotentialField(model, vals)
