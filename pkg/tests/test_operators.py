import math

import numpy as np
import pytest
import scipy.linalg

from specbound.linalg import eig
from specbound.manifolds import (
    PotentialField,
    SpectralModel,
    build_line,
    build_sphere2,
    build_torus1,
    build_torus2,
)
from specbound.operators import (
    assemble_birman_schwinger,
    assemble_fractional,
    assemble_line_schrodinger,
    assemble_potential,
    assemble_schrodinger,
    free_distance,
    line_eigenvalues,
    resolvent_apply,
    resolvent_grid_operator,
    schrodinger_spectrum,
    write_matrix_csv,
)


def toy_grid_model(freqs, weights=None):
    """Tiny synthetic model whose basis is the identity on its own grid."""
    freqs = np.asarray(freqs, dtype=float)
    n = len(freqs)
    w = np.ones(n) if weights is None else np.asarray(weights, float)
    return SpectralModel(
        kind="toygrid",
        dim=1,
        freqs=freqs,
        mode_labels=tuple(range(n)),
        nodes=np.arange(n, dtype=float),
        weights=w,
        volume=float(w.sum()),
        meta={"N": n},
        _basis_builder=lambda n=n, w=w: (np.eye(n) / np.sqrt(w)[None, :]).astype(complex),
    )


def nonvanishing_potential(model, seed):
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0, 2 * math.pi, model.n_nodes)
    mag = np.exp(rng.uniform(-0.5, 0.7, model.n_nodes))
    return PotentialField(model, mag * np.exp(1j * phase))


class TestFractional:
    def test_torus1_alpha2(self):
        m = build_torus1(8)
        d = np.diag(assemble_fractional(m, 2.0).matrix).real
        assert np.allclose(d, [0, 1, 1, 4, 4, 9, 9, 16, 16])

    def test_torus1_alpha1(self):
        m = build_torus1(8)
        d = np.diag(assemble_fractional(m, 1.0).matrix).real
        assert np.allclose(d, [0, 1, 1, 2, 2, 3, 3, 4, 4])

    def test_sphere_l3_entry(self):
        m = build_sphere2(4)
        op = assemble_fractional(m, 2.0)
        idx = [i for i, (l, _) in enumerate(m.mode_labels) if l == 3]
        assert np.allclose(np.diag(op.matrix)[idx].real, 12.0)

    def test_line_rejected(self):
        with pytest.raises(ValueError):
            assemble_fractional(build_line(5.0, 32), 2.0)


class TestPotentialMatrix:
    def test_constant_is_identity_multiple(self):
        for m in (build_torus1(8), build_torus2(2), build_sphere2(4)):
            c = 2.0 - 1.5j
            V = PotentialField(m, np.full(m.n_nodes, c))
            mat = assemble_potential(m, V).matrix
            assert np.abs(mat - c * np.eye(m.n_modes)).max() < 1e-10

    def test_real_potential_hermitian(self):
        m = build_torus2(2)
        rng = np.random.default_rng(0)
        V = PotentialField(m, rng.standard_normal(m.n_nodes) + 0j)
        mat = assemble_potential(m, V).matrix
        assert np.abs(mat - mat.conj().T).max() < 1e-10

    def test_single_fourier_mode_gives_shift_structure(self):
        m = build_torus1(8)
        V = PotentialField(m, np.exp(1j * m.nodes))
        mat = assemble_potential(m, V).matrix
        ks = np.array(m.mode_labels)
        expected = (ks[:, None] - ks[None, :]) == 1
        assert np.abs(mat - expected.astype(complex)).max() < 1e-12

    def test_fft_path_matches_quadrature_definition(self):
        for m in (build_torus1(8), build_torus2(2)):
            rng = np.random.default_rng(5)
            V = PotentialField(
                m, rng.standard_normal(m.n_nodes) + 1j * rng.standard_normal(m.n_nodes)
            )
            fast = assemble_potential(m, V).matrix
            e = m.basis
            slow = (e.conj() * (m.weights * V.values)) @ e.T
            assert np.abs(fast - slow).max() < 1e-12

    def test_model_mismatch_rejected(self):
        m1, m2 = build_torus1(8), build_torus1(8)
        V = PotentialField(m2, np.ones(m2.n_nodes, dtype=complex))
        with pytest.raises(ValueError):
            assemble_potential(m1, V)


class TestSchrodinger:
    def test_constant_complex_shift_spectrum(self):
        m = build_torus1(8)
        V = PotentialField(m, np.full(m.n_nodes, 1.0 + 2.0j))
        w = eig(assemble_schrodinger(m, V, 2.0).matrix)
        expected = np.sort(m.freqs**2) + 1.0 + 2.0j
        w = w[np.argsort(w.real)]
        assert np.abs(w - expected).max() < 1e-10

    def test_zero_potential(self):
        m = build_torus2(1)
        V = PotentialField(m, np.zeros(m.n_nodes, dtype=complex))
        w = np.sort(eig(assemble_schrodinger(m, V, 1.5).matrix).real)
        assert np.allclose(w, np.sort(m.freqs**1.5), atol=1e-12)

    def test_real_potential_real_spectrum(self):
        m = build_torus1(8)
        rng = np.random.default_rng(1)
        V = PotentialField(m, rng.standard_normal(m.n_nodes) + 0j)
        w = eig(assemble_schrodinger(m, V, 2.0).matrix)
        assert np.abs(w.imag).max() < 1e-8

    def test_shift_identity_complex(self):
        m = build_torus2(1)
        rng = np.random.default_rng(2)
        base = PotentialField(
            m, rng.standard_normal(m.n_nodes) + 1j * rng.standard_normal(m.n_nodes)
        )
        c = 0.7 - 0.3j
        shifted = PotentialField(m, base.values + c)
        w0 = eig(assemble_schrodinger(m, base, 2.0).matrix)
        w1 = eig(assemble_schrodinger(m, shifted, 2.0).matrix)
        w0 = w0[np.lexsort((w0.imag, w0.real))]
        w1 = w1[np.lexsort((w1.imag, w1.real))]
        assert np.abs(w1 - (w0 + c)).max() < 1e-10


class TestLineOperator:
    def test_free_box_spectrum(self):
        hw, N = 10.0, 400
        m = build_line(hw, N)
        V = PotentialField(m, np.zeros(N, dtype=complex))
        w = np.sort(line_eigenvalues(m, V).real)
        for n in (1, 2, 3):
            exact = (n * math.pi / (2 * hw)) ** 2
            assert abs(w[n - 1] - exact) < 1e-2 * exact

    def test_constant_shift_exact(self):
        m = build_line(5.0, 64)
        V0 = PotentialField(m, np.zeros(64, dtype=complex))
        V1 = PotentialField(m, np.full(64, -1.0 + 0j))
        w0 = np.sort(line_eigenvalues(m, V0).real)
        w1 = np.sort(line_eigenvalues(m, V1).real)
        assert np.abs(w1 - (w0 - 1.0)).max() < 1e-10

    def test_parity_alternation_symmetric_well(self):
        # Sturm oscillation: n-th eigenvector has n sign changes
        m = build_line(8.0, 201)
        V = PotentialField(m, np.where(np.abs(m.nodes) < 1.0, -5.0, 0.0) + 0j)
        diag = 2.0 / m.meta["h"] ** 2 + V.values.real
        off = np.full(m.n_nodes - 1, -1.0 / m.meta["h"] ** 2)
        w, vecs = scipy.linalg.eigh_tridiagonal(diag, off)
        for n in range(4):
            v = vecs[:, n]
            v = v[np.abs(v) > 1e-8 * np.abs(v).max()]
            changes = int(np.sum(np.sign(v[:-1]) != np.sign(v[1:])))
            assert changes == n

    def test_dense_assembly_matches_fast_path(self):
        m = build_line(4.0, 40)
        rng = np.random.default_rng(3)
        V = PotentialField(m, rng.standard_normal(40) + 0j)
        dense = np.sort(eig(assemble_line_schrodinger(m, V).matrix).real)
        fast = np.sort(line_eigenvalues(m, V).real)
        assert np.abs(dense - fast).max() < 1e-8

    def test_complex_potential_path(self):
        m = build_line(4.0, 48)
        V = PotentialField(m, np.where(np.abs(m.nodes) < 0.5, -2.0 - 2.0j, 0.0))
        w = line_eigenvalues(m, V)
        assert w.shape == (48,)
        assert np.abs(w.imag).max() > 1e-3  # genuinely non-self-adjoint


class TestBirmanSchwinger:
    def test_two_by_two_hand_case(self):
        model = toy_grid_model([0.0, 1.0])
        v = 0.3
        V = PotentialField(model, np.array([v, 0.0], dtype=complex))
        for z in (0.1 + 0.2j, -0.5 + 0j, 0.77j):
            K = assemble_birman_schwinger(model, V, z, alpha=1.0).matrix
            w = np.sort_complex(eig(K))
            expected = np.sort_complex(np.array([-v / z, 0.0]))
            assert np.abs(w - expected).max() < 1e-12
        # -1 is an eigenvalue of K(z) exactly when z = v
        K = assemble_birman_schwinger(model, V, v, alpha=1.0).matrix
        assert np.abs(eig(K) + 1.0).min() < 1e-12

    def test_zero_potential_zero_operator(self):
        m = build_torus1(8)
        V = PotentialField(m, np.zeros(m.n_nodes, dtype=complex))
        K = assemble_birman_schwinger(m, V, 0.5 + 0.5j, 2.0).matrix
        assert np.abs(K).max() == 0.0

    def test_nonpositive_potential_real_eigenvalues_below_spectrum(self):
        m = build_torus1(8)
        rng = np.random.default_rng(4)
        V = PotentialField(m, -np.exp(rng.standard_normal(m.n_nodes)) + 0j)
        K = assemble_birman_schwinger(m, V, -2.0, 2.0).matrix
        w = eig(K)
        assert np.abs(w.imag).max() < 1e-10

    def test_too_close_to_free_spectrum_rejected(self):
        m = build_torus1(8)
        V = nonvanishing_potential(m, 0)
        with pytest.raises(ValueError, match="d\\(z\\)"):
            assemble_birman_schwinger(m, V, 1.0 + 1e-15j, 2.0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_forward_equivalence_on_truncated_model(self, seed):
        # every eigenvalue of H away from the free spectrum makes -1 an
        # eigenvalue of the factorized operator, exactly at finite truncation
        m = build_torus1(10)
        V = nonvanishing_potential(m, seed)
        spec = eig(assemble_schrodinger(m, V, 2.0).matrix)
        checked = 0
        for z in spec:
            if free_distance(m, 2.0, z) <= 1e-6:
                continue
            K = assemble_birman_schwinger(m, V, z, 2.0).matrix
            assert np.abs(eig(K) + 1.0).min() < 1e-6
            checked += 1
        assert checked >= m.n_modes - 2


class TestResolvent:
    def test_identity_action_at_shifted_origin(self):
        m = build_torus1(8)
        f = np.zeros(m.n_modes, dtype=complex)
        f[0] = 1.0
        out = resolvent_apply(m, 2.0, -1.0, f)
        assert np.allclose(out, f)

    def test_norm_is_inverse_distance(self):
        m = build_torus1(8)
        z = -2.0 + 1.5j
        lam = m.freqs**2
        gain = np.abs(1.0 / (lam - z))
        assert gain.max() == pytest.approx(1.0 / free_distance(m, 2.0, z), rel=1e-14)

    def test_linearity(self):
        m = build_torus1(8)
        rng = np.random.default_rng(6)
        f = rng.standard_normal(m.n_modes) + 1j * rng.standard_normal(m.n_modes)
        g = rng.standard_normal(m.n_modes) + 1j * rng.standard_normal(m.n_modes)
        a, b = 1.3 - 0.2j, -0.7j
        lhs = resolvent_apply(m, 2.0, 3.3j, a * f + b * g)
        rhs = a * resolvent_apply(m, 2.0, 3.3j, f) + b * resolvent_apply(m, 2.0, 3.3j, g)
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_on_spectrum_rejected(self):
        m = build_torus1(8)
        with pytest.raises(ValueError):
            resolvent_apply(m, 2.0, 1.0, np.ones(m.n_modes, dtype=complex))

    def test_grid_operator_fft_matches_dense(self):
        for m in (build_torus1(8), build_torus2(2)):
            z = -3.0 + 0.4j
            op = resolvent_grid_operator(m, 2.0, z)
            e = m.basis
            inv = 1.0 / (m.freqs**2 - z)
            dense = (e.T * inv[None, :]) @ (e.conj() * m.weights[None, :])
            rng = np.random.default_rng(7)
            x = rng.standard_normal(m.n_nodes) + 1j * rng.standard_normal(m.n_nodes)
            assert np.abs(op.matvec(x) - dense @ x).max() < 1e-10
            assert np.abs(op.rmatvec(x) - dense.conj().T @ x).max() < 1e-10

    def test_grid_operator_sphere_dense(self):
        m = build_sphere2(3)
        z = -1.0 + 0j
        R = resolvent_grid_operator(m, 2.0, z)
        coeffs = np.zeros(m.n_modes, dtype=complex)
        coeffs[5] = 1.0
        f_grid = m.basis.T @ coeffs
        expected = m.basis.T @ resolvent_apply(m, 2.0, z, coeffs)
        assert np.abs(R @ f_grid - expected).max() < 1e-10


class TestCsvExport:
    def test_round_trip_values(self, tmp_path):
        m = build_torus1(4)
        V = PotentialField(m, np.ones(m.n_nodes, dtype=complex))
        op = assemble_schrodinger(m, V, 2.0)
        path = tmp_path / "mat.csv"
        write_matrix_csv(op, path)
        rows = [line.split(",") for line in path.read_text().strip().split("\n")]
        assert len(rows) == op.n
        assert len(rows[0]) == 2 * op.n
        re0, im0 = float(rows[0][0]), float(rows[0][1])
        assert complex(re0, im0) == pytest.approx(op.matrix[0, 0])


class TestSchrodingerSpectrumDispatch:
    def test_line_dispatch(self):
        m = build_line(5.0, 32)
        V = PotentialField(m, np.zeros(32, dtype=complex))
        w = schrodinger_spectrum(m, V, 2.0)
        assert w.shape == (32,)
        with pytest.raises(ValueError):
            schrodinger_spectrum(m, V, 1.5)
