import math

import numpy as np
import pytest

from specbound.manifolds import (
    PotentialField,
    build_line,
    build_sphere2,
    build_torus1,
    build_torus2,
    lq_norm,
)


def gram_residual(model):
    g = model.gram()
    return float(np.abs(g - np.eye(model.n_modes)).max())


class TestTorus1:
    def test_freq_multiplicities(self):
        m = build_torus1(8)
        assert list(m.freqs) == [0, 1, 1, 2, 2, 3, 3, 4, 4]

    def test_orthonormal(self):
        assert gram_residual(build_torus1(8)) < 1e-12

    def test_volume(self):
        m = build_torus1(8)
        assert m.volume == pytest.approx(2 * math.pi, rel=1e-14)
        assert m.weights.sum() == pytest.approx(2 * math.pi, rel=1e-14)

    def test_rejects_odd_or_small(self):
        with pytest.raises(ValueError):
            build_torus1(7)
        with pytest.raises(ValueError):
            build_torus1(2)


class TestTorus2:
    def test_small_freq_multiset(self):
        m = build_torus2(1)
        expected = sorted([0, 1, 1, 1, 1, math.sqrt(2)] + [math.sqrt(2)] * 3)
        assert np.allclose(np.sort(m.freqs), expected)

    def test_mode_count(self):
        for N in (1, 2, 4):
            assert build_torus2(N).n_modes == (2 * N + 1) ** 2

    def test_orthonormal(self):
        assert gram_residual(build_torus2(3)) < 1e-12

    def test_freqs_sorted(self):
        m = build_torus2(4)
        assert (np.diff(m.freqs) >= 0).all()


class TestSphere2:
    def test_mode_count(self):
        for L in (2, 4, 7):
            assert build_sphere2(L).n_modes == (L + 1) ** 2

    def test_constant_mode_value(self):
        m = build_sphere2(4)
        y00 = m.basis[0]
        assert np.allclose(y00, 1.0 / math.sqrt(4 * math.pi), atol=1e-14)

    def test_multiplicities(self):
        m = build_sphere2(5)
        freqs = m.freqs
        for l in range(6):
            lam = math.sqrt(l * (l + 1))
            count = int(np.sum(np.abs(freqs - lam) < 1e-12))
            assert count == 2 * l + 1

    def test_quadrature_exact_for_products(self):
        # Gram residual covers all products Y_l^m Y_l'^m' with l + l' <= 2L
        assert gram_residual(build_sphere2(6)) < 1e-10

    def test_volume(self):
        m = build_sphere2(3)
        assert m.volume == pytest.approx(4 * math.pi, rel=1e-12)

    def test_rejects_small(self):
        with pytest.raises(ValueError):
            build_sphere2(1)


class TestLine:
    def test_weight_sum_convention(self):
        hw, N = 20.0, 64
        m = build_line(hw, N)
        h = m.meta["h"]
        assert m.weights.sum() == pytest.approx(2 * hw - h, rel=1e-13)

    def test_grid_monotone(self):
        m = build_line(5.0, 16)
        assert (np.diff(m.nodes) > 0).all()
        assert m.kind == "line"

    def test_no_basis(self):
        m = build_line(5.0, 16)
        with pytest.raises(ValueError):
            _ = m.basis

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            build_line(-1.0, 32)
        with pytest.raises(ValueError):
            build_line(1.0, 8)


class TestLqNorm:
    def test_constant_on_torus1(self):
        m = build_torus1(8)
        V = PotentialField(m, np.full(m.n_nodes, 3.0 - 4.0j))
        for q in (1.0, 2.0, 3.5):
            assert V.lq_norm(q) == pytest.approx(5.0 * (2 * math.pi) ** (1 / q), rel=1e-13)

    def test_infinity_norm(self):
        m = build_torus1(8)
        vals = np.linspace(-2, 7, m.n_nodes).astype(complex)
        V = PotentialField(m, vals)
        assert V.lq_norm(math.inf) == pytest.approx(7.0)

    def test_hoelder_sanity(self):
        m = build_torus1(16)
        rng = np.random.default_rng(0)
        V = PotentialField(m, rng.standard_normal(m.n_nodes) + 0j)
        assert V.lq_norm(1) <= V.lq_norm(2) * math.sqrt(m.volume) * (1 + 1e-12)

    def test_rejects_q_below_one(self):
        m = build_torus1(8)
        V = PotentialField(m, np.ones(m.n_nodes, dtype=complex))
        with pytest.raises(ValueError):
            V.lq_norm(0.5)

    def test_cache_and_function_alias(self):
        m = build_torus1(8)
        V = PotentialField(m, np.ones(m.n_nodes, dtype=complex))
        assert lq_norm(V, 2) == V.lq_norm(2)

    def test_refinement_stability_smooth_potential(self):
        def smooth(x):
            return np.sin(x) + 0.5 * np.cos(3 * x) + 0.2j * np.sin(2 * x)

        m1 = build_torus1(64)
        m2 = build_torus1(128)
        v1 = PotentialField(m1, smooth(m1.nodes)).lq_norm(1.7)
        v2 = PotentialField(m2, smooth(m2.nodes)).lq_norm(1.7)
        assert abs(v1 - v2) / v2 < 1e-6


class TestPotentialParts:
    def test_positive_negative_split(self):
        m = build_line(5.0, 32)
        vals = np.where(np.abs(m.nodes) < 1.0, -2.0, 1.0).astype(complex)
        V = PotentialField(m, vals)
        assert V.is_real
        assert np.allclose(V.positive_part() - V.negative_part(), vals.real)
        assert (V.negative_part() >= 0).all()

    def test_length_mismatch_rejected(self):
        m = build_torus1(8)
        with pytest.raises(ValueError):
            PotentialField(m, np.ones(3, dtype=complex))


class TestOrthonormalityInvariant:
    @pytest.mark.parametrize(
        "builder,arg", [(build_torus1, 4), (build_torus1, 12), (build_torus2, 2), (build_sphere2, 5)]
    )
    def test_residual_below_1e10(self, builder, arg):
        assert gram_residual(builder(arg)) < 1e-10
