"""Cell-wise random modulation of potentials with reproducible sampling.

A deterministic potential is multiplied per cell by i.i.d. mean-zero weights
(standard Gaussian or symmetric sign flips).  Weights come from a
counter-based generator keyed by (seed, cell index), so samples are
bit-identical regardless of evaluation order and safe to generate in
parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .manifolds import PotentialField, SpectralModel
from .operators import schrodinger_spectrum

__all__ = ["AndersonConfig", "EnsembleResult", "anderson_sample", "mc_spectrum_ensemble"]

_DISTS = ("gaussian", "bernoulli")


@dataclass(frozen=True)
class AndersonConfig:
    """Cell scale, weight distribution and base seed.

    Cells are anchored at coordinate zero: cell j covers j*h + h*[0, 1)^d.
    """

    h: float
    dist: str = "bernoulli"
    seed: int = 0

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError(f"cell scale h={self.h} must be positive")
        if self.dist not in _DISTS:
            raise ValueError(f"dist must be one of {_DISTS}, got {self.dist!r}")


def _check_tiling(extent: float, h: float) -> int:
    n = round(extent / h)
    if n < 1 or abs(n * h - extent) > 1e-12 * extent:
        raise ValueError(
            f"cell scale h={h} does not divide the chart extent {extent} exactly"
        )
    return n


def _cell_keys(model: SpectralModel, h: float) -> np.ndarray:
    """Flat nonnegative cell key per node; every node is in exactly one cell."""
    if model.kind == "torus1":
        n = _check_tiling(model.meta["period"], h)
        idx = np.floor(model.nodes / h).astype(np.int64)
        return np.clip(idx, 0, n - 1)
    if model.kind == "torus2":
        n = _check_tiling(model.meta["period"], h)
        ix = np.clip(np.floor(model.nodes[:, 0] / h).astype(np.int64), 0, n - 1)
        iy = np.clip(np.floor(model.nodes[:, 1] / h).astype(np.int64), 0, n - 1)
        return ix * n + iy
    if model.kind == "line":
        hw = model.meta["halfwidth"]
        _check_tiling(2.0 * hw, h)
        idx = np.floor(model.nodes / h).astype(np.int64)
        return idx - idx.min()
    raise ValueError(
        f"no canonical cubic tiling on model kind {model.kind!r} (flat charts only)"
    )


def _weight(seed: int, cell: int, dist: str) -> float:
    gen = np.random.Generator(
        np.random.Philox(key=np.array([seed & 0xFFFFFFFFFFFFFFFF, cell], dtype=np.uint64))
    )
    if dist == "gaussian":
        return float(gen.standard_normal())
    return 1.0 if gen.random() < 0.5 else -1.0


def anderson_sample(V: PotentialField, cfg: AndersonConfig) -> PotentialField:
    """Multiply V by one random weight per cell.

    Identical (seed, cfg, model, V) reproduce the output bit for bit; sign
    flips preserve |V| pointwise and the support is always preserved.
    """
    keys = _cell_keys(V.model, cfg.h)
    unique = np.unique(keys)
    table = {int(c): _weight(cfg.seed, int(c), cfg.dist) for c in unique}
    omega = np.array([table[int(c)] for c in keys])
    return PotentialField(V.model, V.values * omega)


@dataclass
class EnsembleResult:
    """Spectra and potential norms for one randomized ensemble."""

    seeds: list
    spectra: list  # one complex array per sample
    vnorms: list  # dict q -> norm per sample
    config: AndersonConfig


def mc_spectrum_ensemble(
    model: SpectralModel,
    V: PotentialField,
    cfg: AndersonConfig,
    alpha: float,
    samples: int,
    *,
    norm_qs: tuple = (2.0,),
) -> EnsembleResult:
    """Spectra of the randomized operator for per-sample seeds seed + i."""
    if samples < 1:
        raise ValueError(f"samples={samples}: need at least one")
    seeds, spectra, vnorms = [], [], []
    for i in range(samples):
        sub = AndersonConfig(h=cfg.h, dist=cfg.dist, seed=cfg.seed + i)
        Vw = anderson_sample(V, sub)
        seeds.append(sub.seed)
        spectra.append(schrodinger_spectrum(model, Vw, alpha))
        vnorms.append({q: Vw.lq_norm(q) for q in norm_qs})
    return EnsembleResult(seeds=seeds, spectra=spectra, vnorms=vnorms, config=cfg)
