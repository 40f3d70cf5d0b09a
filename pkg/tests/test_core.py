import numpy as np
import pytest
from hypothesis import given, strategies as st

from ihtlab.core import (
    ProblemInstance,
    RngSpec,
    SupportSet,
    hard_threshold,
    objective,
    pseudo_inverse_apply,
    restrict,
    sample_gaussian_matrix,
    sample_noise,
    sample_sparse_signal,
    top_support,
)
from ihtlab.errors import InvalidArgumentError, ShapeMismatchError, SingularMatrixError


class TestHardThreshold:
    def test_top_two_magnitudes(self):
        np.testing.assert_array_equal(hard_threshold(np.array([3.0, -5.0, 1.0, 0.0]), 2),
                                      np.array([3.0, -5.0, 0.0, 0.0]))

    def test_identity_on_feasible(self):
        x = np.array([0.0, 2.0, 0.0, -1.0, 0.0])
        np.testing.assert_array_equal(hard_threshold(x, 2), x)
        np.testing.assert_array_equal(hard_threshold(x, 4), x)

    def test_tie_breaks_to_lowest_index(self):
        np.testing.assert_array_equal(hard_threshold(np.array([2.0, -2.0, 1.0]), 1),
                                      np.array([2.0, 0.0, 0.0]))

    def test_k_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            hard_threshold(np.array([1.0, 2.0]), 0)
        with pytest.raises(InvalidArgumentError):
            hard_threshold(np.array([1.0, 2.0]), 3)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30), st.data())
    def test_idempotent(self, values, data):
        x = np.array(values)
        k = data.draw(st.integers(1, len(values)))
        once = hard_threshold(x, k)
        np.testing.assert_array_equal(hard_threshold(once, k), once)

    def test_projection_optimality(self):
        # H_k(x) is at least as close to x as 10^3 random k-sparse points.
        gen = RngSpec(11).generator()
        x = gen.standard_normal(20)
        k = 4
        best = np.linalg.norm(hard_threshold(x, k) - x)
        for _ in range(1000):
            z = np.zeros(20)
            idx = gen.choice(20, size=k, replace=False)
            z[idx] = gen.standard_normal(k)
            assert best <= np.linalg.norm(z - x) + 1e-12


class TestSupportSet:
    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            SupportSet((3, 1))
        with pytest.raises(InvalidArgumentError):
            SupportSet((1, 1))
        with pytest.raises(InvalidArgumentError):
            SupportSet((-1, 2))

    def test_set_operations(self):
        a = SupportSet((0, 2, 5))
        b = SupportSet((2, 3))
        assert a.difference(b) == SupportSet((0, 5))
        assert a.intersection(b) == SupportSet((2,))
        assert a.union(b) == SupportSet((0, 2, 3, 5))
        assert b.complement(5) == SupportSet((0, 1, 4))
        assert SupportSet((0, 2)).issubset(a)

    def test_support_of(self):
        assert SupportSet.support_of(np.array([0.0, 1.0, 0.0, -2.0])) == SupportSet((1, 3))


class TestRestrict:
    def test_identity_columns(self):
        eye = np.eye(3)
        np.testing.assert_array_equal(restrict(eye, SupportSet((0, 2))), eye[:, [0, 2]])

    def test_all_columns(self):
        A = RngSpec(0).generator().standard_normal((3, 4))
        np.testing.assert_array_equal(restrict(A, SupportSet((0, 1, 2, 3))), A)

    def test_entrywise_oracle(self):
        A = RngSpec(1).generator().standard_normal((4, 6))
        gamma = SupportSet((1, 4))
        sub = restrict(A, gamma)
        for row in range(4):
            for j, col in enumerate(gamma):
                assert sub[row, j] == A[row, col]

    def test_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            restrict(np.eye(3), SupportSet((0, 3)))


class TestPseudoInverseApply:
    def test_orthonormal_block(self):
        gen = RngSpec(2).generator()
        Q, _ = np.linalg.qr(gen.standard_normal((8, 3)))
        v = gen.standard_normal(8)
        np.testing.assert_allclose(pseudo_inverse_apply(Q, v), Q.T @ v, atol=1e-12)

    def test_consistent_system(self):
        gen = RngSpec(3).generator()
        A = gen.standard_normal((8, 3))
        y0 = gen.standard_normal(3)
        y = pseudo_inverse_apply(A, A @ y0)
        np.testing.assert_allclose(y, y0, atol=1e-10)

    def test_normal_equations_oracle_extended_precision(self):
        gen = RngSpec(4).generator()
        A = gen.standard_normal((8, 3))
        v = gen.standard_normal(8)
        y = pseudo_inverse_apply(A, v)
        Al = A.astype(np.longdouble)
        vl = v.astype(np.longdouble)
        oracle = np.linalg.solve((Al.T @ Al).astype(float), (Al.T @ vl).astype(float))
        np.testing.assert_allclose(y, oracle, rtol=1e-10)

    def test_normal_equation_residual(self):
        gen = RngSpec(5).generator()
        for _ in range(20):
            A = gen.standard_normal((10, 4))
            v = gen.standard_normal(10)
            y = pseudo_inverse_apply(A, v)
            assert np.linalg.norm(A.T @ (v - A @ y)) <= 1e-10 * np.linalg.norm(v)

    def test_rank_deficiency(self):
        A = np.ones((6, 2))
        with pytest.raises(SingularMatrixError) as excinfo:
            pseudo_inverse_apply(A, np.ones(6))
        assert excinfo.value.condition > 1e12


class TestObjective:
    def test_exact_solution_zero(self):
        A = np.eye(3)
        x = np.array([1.0, -2.0, 0.5])
        assert objective(x, A, A @ x) == 0.0

    def test_zero_point(self):
        b = np.array([3.0, 4.0])
        assert objective(np.zeros(2), np.eye(2), b) == pytest.approx(0.5 * 25.0)

    def test_summation_oracle(self):
        gen = RngSpec(6).generator()
        A = gen.standard_normal((5, 7))
        x = gen.standard_normal(7)
        b = gen.standard_normal(5)
        direct = 0.5 * sum((sum(A[i, j] * x[j] for j in range(7)) - b[i]) ** 2 for i in range(5))
        assert objective(x, A, b) == pytest.approx(direct, rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            objective(np.zeros(3), np.eye(2), np.zeros(2))


class TestGaussianMatrix:
    def test_moments(self):
        A = sample_gaussian_matrix(1000, 1000, RngSpec(7))
        assert abs(A.mean()) <= 5e-3
        assert abs(A.var() * 1000 - 1.0) <= 1e-2

    def test_determinism(self):
        spec = RngSpec(8, stream_id=2)
        np.testing.assert_array_equal(sample_gaussian_matrix(20, 30, spec),
                                      sample_gaussian_matrix(20, 30, spec))

    def test_streams_differ(self):
        a = sample_gaussian_matrix(4, 4, RngSpec(8, stream_id=0))
        b = sample_gaussian_matrix(4, 4, RngSpec(8, stream_id=1))
        assert not np.array_equal(a, b)


class TestSparseSignal:
    def test_unit_model_full_support(self):
        x = sample_sparse_signal(10, 10, "unit", RngSpec(9))
        np.testing.assert_allclose(np.abs(x), 1.0)

    def test_exact_nonzero_count(self):
        gen = RngSpec(10).generator()
        for _ in range(1000):
            x = sample_sparse_signal(25, 6, "gaussian", gen)
            assert np.count_nonzero(x) == 6

    def test_uniform_model_magnitudes(self):
        x = sample_sparse_signal(50, 20, "uniform", RngSpec(11))
        mags = np.abs(x[x != 0])
        assert np.all((mags >= 1.0) & (mags <= 2.0))

    def test_support_uniformity(self):
        # Per-index inclusion counts stay within 3-sigma binomial bands.
        N, k, draws = 20, 3, 100_000
        gen = RngSpec(12).generator()
        counts = np.zeros(N)
        for _ in range(draws):
            counts[np.flatnonzero(sample_sparse_signal(N, k, "unit", gen))] += 1
        p = k / N
        sigma = np.sqrt(draws * p * (1 - p))
        assert np.all(np.abs(counts - draws * p) <= 3 * sigma)

    def test_invalid_model(self):
        with pytest.raises(InvalidArgumentError):
            sample_sparse_signal(10, 2, "cauchy", RngSpec(0))


class TestNoise:
    def test_zero_sigma(self):
        np.testing.assert_array_equal(sample_noise(10, 0.0, RngSpec(0)), np.zeros(10))

    def test_energy_moment(self):
        gen = RngSpec(13).generator()
        sigma = 0.7
        energies = [np.sum(sample_noise(50, sigma, gen) ** 2) for _ in range(10_000)]
        assert np.mean(energies) == pytest.approx(sigma**2, rel=0.05)

    def test_determinism(self):
        spec = RngSpec(14, 3)
        np.testing.assert_array_equal(sample_noise(16, 1.0, spec), sample_noise(16, 1.0, spec))


class TestProblemInstance:
    def test_from_parts_consistency(self):
        gen = RngSpec(15).generator()
        A = sample_gaussian_matrix(20, 40, gen)
        x = sample_sparse_signal(40, 5, "gaussian", gen)
        e = sample_noise(20, 0.3, gen)
        inst = ProblemInstance.from_parts(A, x, e, k=5, sigma=0.3)
        assert inst.consistency_residual() <= 1e-12 * inst.n
        assert inst.true_support == SupportSet.support_of(x)

    def test_dimension_bounds(self):
        A = np.zeros((4, 3))
        with pytest.raises(InvalidArgumentError):
            ProblemInstance.from_parts(np.zeros((4, 6)), np.array([1.0, 1, 1, 0, 0, 0]), np.zeros(4), k=3)
        with pytest.raises(ShapeMismatchError):
            ProblemInstance(A=np.eye(4), b=np.zeros(3), x_star=np.array([1.0, 0, 0, 0]),
                            e=np.zeros(4), k=1)

    def test_nonzero_count_enforced(self):
        with pytest.raises(InvalidArgumentError):
            ProblemInstance.from_parts(np.eye(4), np.array([1.0, 0, 0, 0]), np.zeros(4), k=2)


def test_top_support_matches_threshold():
    gen = RngSpec(16).generator()
    x = gen.standard_normal(15)
    supp = top_support(x, 4)
    assert SupportSet.support_of(hard_threshold(x, 4)) == supp
