import math

import numpy as np
import pytest

from specbound.manifolds import PotentialField, build_line, build_sphere2, build_torus1, build_torus2
from specbound.operators import schrodinger_spectrum
from specbound.potentials import band_limited, constant
from specbound.randomization import AndersonConfig, anderson_sample, mc_spectrum_ensemble


def torus1_cfg(n_cells, dist="bernoulli", seed=0):
    return AndersonConfig(h=2 * math.pi / n_cells, dist=dist, seed=seed)


class TestAndersonSample:
    def test_bernoulli_preserves_modulus_exactly(self):
        m = build_torus1(16)
        V = band_limited(m, 3, seed=1)
        Vw = anderson_sample(V, torus1_cfg(8))
        assert np.array_equal(np.abs(Vw.values), np.abs(V.values))

    def test_zero_potential_stays_zero(self):
        m = build_torus1(8)
        V = constant(m, 0.0)
        Vw = anderson_sample(V, torus1_cfg(4, dist="gaussian"))
        assert np.all(Vw.values == 0)

    def test_support_preserved(self):
        m = build_line(8.0, 64)
        vals = np.where(np.abs(m.nodes) < 2.0, 1.5, 0.0) + 0j
        V = PotentialField(m, vals)
        Vw = anderson_sample(V, AndersonConfig(h=1.0, dist="gaussian", seed=3))
        assert np.all(Vw.values[vals == 0] == 0)

    def test_cell_constancy_of_ratio(self):
        m = build_torus1(16)
        V = constant(m, 2.0 - 1.0j)
        n_cells = 8
        Vw = anderson_sample(V, torus1_cfg(n_cells, dist="gaussian", seed=9))
        ratio = Vw.values / V.values
        cells = np.floor(m.nodes / (2 * math.pi / n_cells)).astype(int)
        for c in range(n_cells):
            vals = ratio[cells == c]
            assert np.abs(vals - vals[0]).max() < 1e-15

    def test_bit_identical_reproduction(self):
        m = build_torus2(2)
        V = band_limited(m, 2, seed=5)
        cfg = AndersonConfig(h=2 * math.pi / 4, dist="gaussian", seed=123)
        a = anderson_sample(V, cfg)
        b = anderson_sample(V, cfg)
        assert np.array_equal(a.values, b.values)

    def test_different_seeds_differ(self):
        m = build_torus1(8)
        V = constant(m, 1.0)
        a = anderson_sample(V, torus1_cfg(4, dist="gaussian", seed=1))
        b = anderson_sample(V, torus1_cfg(4, dist="gaussian", seed=2))
        assert not np.array_equal(a.values, b.values)

    def test_sphere_rejected(self):
        m = build_sphere2(3)
        V = constant(m, 1.0)
        with pytest.raises(ValueError, match="tiling"):
            anderson_sample(V, AndersonConfig(h=0.5))

    def test_non_dividing_h_rejected(self):
        m = build_torus1(8)
        V = constant(m, 1.0)
        with pytest.raises(ValueError, match="divide"):
            anderson_sample(V, AndersonConfig(h=1.0))

    def test_gaussian_mean_four_sigma(self):
        # 10^4 cells on a large lazy-basis circle model
        m = build_torus1(9998)
        V = constant(m, 1.0)
        n_cells = 10_000
        Vw = anderson_sample(V, torus1_cfg(n_cells, dist="gaussian", seed=2024))
        cells = np.floor(m.nodes / (2 * math.pi / n_cells)).astype(int)
        uniq, first = np.unique(cells, return_index=True)
        assert len(uniq) == n_cells  # every cell holds at least one node
        omegas = Vw.values[first].real
        assert abs(omegas.mean()) < 4.0 / math.sqrt(n_cells)
        assert abs(omegas.std() - 1.0) < 0.05


class TestEnsemble:
    def test_single_sample_matches_direct_assembly(self):
        m = build_torus1(8)
        V = band_limited(m, 2, seed=7)
        cfg = torus1_cfg(4, dist="bernoulli", seed=11)
        ens = mc_spectrum_ensemble(m, V, cfg, alpha=2.0, samples=1)
        direct = schrodinger_spectrum(m, anderson_sample(V, cfg), 2.0)
        assert np.array_equal(np.sort_complex(ens.spectra[0]), np.sort_complex(direct))

    def test_single_cell_degenerate_bernoulli_shift(self):
        # one cell spanning the whole period: V_omega = +/- c globally
        m = build_torus1(8)
        c = 0.7
        V = constant(m, c)
        free = np.sort(m.freqs**2)
        for seed in range(4):
            cfg = AndersonConfig(h=2 * math.pi, dist="bernoulli", seed=seed)
            ens = mc_spectrum_ensemble(m, V, cfg, 2.0, samples=1)
            w = np.sort(ens.spectra[0].real)
            shift = w - free
            assert np.allclose(shift, shift[0], atol=1e-10)
            assert abs(abs(shift[0]) - c) < 1e-10

    def test_fixed_seed_identical_ensembles(self):
        m = build_torus1(8)
        V = band_limited(m, 2, seed=3)
        cfg = torus1_cfg(8, dist="gaussian", seed=77)
        e1 = mc_spectrum_ensemble(m, V, cfg, 2.0, samples=3, norm_qs=(1.0, 2.0))
        e2 = mc_spectrum_ensemble(m, V, cfg, 2.0, samples=3, norm_qs=(1.0, 2.0))
        for a, b in zip(e1.spectra, e2.spectra):
            assert np.array_equal(a, b)
        assert e1.vnorms == e2.vnorms
        assert e1.seeds == [77, 78, 79]

    def test_rejects_zero_samples(self):
        m = build_torus1(8)
        V = constant(m, 1.0)
        with pytest.raises(ValueError):
            mc_spectrum_ensemble(m, V, torus1_cfg(4), 2.0, samples=0)
