"""Tests for Hermitian bases, vectorization, and spectral operations."""

import numpy as np
import pytest

from gramscope.hermitian import clip_spectrum, herm_basis, sym_eig, vectorize


def random_hermitian(d, rng):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (a + a.conj().T)


class TestHermBasis:
    def test_d1_is_identity(self):
        basis = herm_basis(1)
        assert len(basis) == 1
        assert np.allclose(basis.elements[0], [[1.0]])

    def test_d2_is_normalized_paulis(self):
        basis = herm_basis(2)
        paulis = [
            np.eye(2),
            np.array([[0, 1], [1, 0]]),
            np.array([[0, -1j], [1j, 0]]),
            np.array([[1, 0], [0, -1]]),
        ]
        for element, pauli in zip(basis.elements, paulis):
            assert np.allclose(element, pauli / np.sqrt(2), atol=1e-12)

    @pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
    def test_orthonormal_and_spanning(self, d):
        basis = herm_basis(d)
        assert len(basis) == d * d
        flat = basis.elements.reshape(d * d, d * d)
        overlap = (flat.conj() @ flat.T).real
        assert np.max(np.abs(overlap - np.eye(d * d))) < 1e-12
        assert np.linalg.matrix_rank(flat) == d * d

    def test_d3_gram_is_identity(self):
        basis = herm_basis(3)
        overlaps = np.array(
            [
                [np.trace(a @ b).real for b in basis.elements]
                for a in basis.elements
            ]
        )
        assert np.max(np.abs(overlaps - np.eye(9))) < 1e-12

    def test_rejects_d0(self):
        with pytest.raises(ValueError):
            herm_basis(0)


class TestVectorize:
    def test_identity_d2(self):
        v = vectorize(np.eye(2), herm_basis(2))
        assert np.allclose(v, [np.sqrt(2), 0, 0, 0], atol=1e-12)

    def test_ground_state_projector(self):
        v = vectorize(np.diag([1.0, 0.0]), herm_basis(2))
        assert np.allclose(v, [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)], atol=1e-12)

    def test_preserves_trace_inner_product(self):
        rng = np.random.default_rng(7)
        basis = herm_basis(3)
        for _ in range(20):
            a = random_hermitian(3, rng)
            b = random_hermitian(3, rng)
            assert vectorize(a, basis) @ vectorize(b, basis) == pytest.approx(
                np.trace(a @ b).real, abs=1e-10
            )

    def test_is_isometry(self):
        rng = np.random.default_rng(8)
        basis = herm_basis(4)
        for _ in range(20):
            a = random_hermitian(4, rng)
            assert np.linalg.norm(vectorize(a, basis)) == pytest.approx(
                np.linalg.norm(a), abs=1e-10
            )

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            vectorize(np.array([[0, 1], [0, 0]], dtype=complex), herm_basis(2))

    def test_rejects_dim_mismatch(self):
        with pytest.raises(ValueError):
            vectorize(np.eye(3), herm_basis(2))


class TestSymEig:
    def test_diagonal(self):
        w, _ = sym_eig(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(w, [3.0, 2.0, 1.0])

    def test_identity(self):
        w, u = sym_eig(np.eye(5))
        assert np.allclose(w, 1.0)
        assert np.max(np.abs(u.T @ u - np.eye(5))) < 1e-9

    def test_reconstruction(self):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((10, 10))
        m = 0.5 * (m + m.T)
        w, u = sym_eig(m)
        assert np.max(np.abs((u * w) @ u.T - m)) < 1e-9 * np.linalg.norm(m)
        assert np.all(np.diff(w) <= 1e-12)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            sym_eig(np.zeros((2, 3)))


class TestClipSpectrum:
    def test_psd_in_box_unchanged(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((5, 5))
        m = a @ a.T
        m *= 0.9 / np.linalg.norm(m, 2)
        assert np.max(np.abs(clip_spectrum(m, 0.0, 1.0) - m)) < 1e-10

    def test_diagonal_clipping(self):
        out = clip_spectrum(np.diag([-1.0, 2.0]), 0.0, 1.0)
        assert np.allclose(out, np.diag([0.0, 1.0]), atol=1e-12)

    def test_eigenvalues_land_in_box(self):
        rng = np.random.default_rng(5)
        radius = 3.0
        for _ in range(20):
            m = rng.standard_normal((8, 8))
            out = clip_spectrum(0.5 * (m + m.T), 0.0, radius)
            lam = np.linalg.eigvalsh(out)
            assert lam.min() >= -1e-10
            assert lam.max() <= radius + 1e-10

    def test_idempotent(self):
        rng = np.random.default_rng(6)
        m = rng.standard_normal((7, 7))
        once = clip_spectrum(m, -0.5, 0.5)
        assert np.max(np.abs(clip_spectrum(once, -0.5, 0.5) - once)) < 1e-9

    def test_frobenius_nearest(self):
        # among random matrices in the box, none is closer than the projection
        rng = np.random.default_rng(9)
        m = rng.standard_normal((5, 5))
        m = 0.5 * (m + m.T) * 3.0
        proj = clip_spectrum(m, 0.0, 1.0)
        best = np.linalg.norm(proj - m)
        for _ in range(200):
            cand = rng.standard_normal((5, 5))
            cand = clip_spectrum(0.5 * (cand + cand.T), 0.0, 1.0)
            assert np.linalg.norm(cand - m) >= best - 1e-9

    def test_rejects_empty_box(self):
        with pytest.raises(ValueError):
            clip_spectrum(np.eye(2), 1.0, 0.0)
