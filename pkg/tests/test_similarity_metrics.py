"""
Tests for linear CKA and RSA, including the hand-derived oracle pair and
brute-force comparisons against independent formulas.
"""
import numpy as np
import pytest
from scipy.spatial.distance import pdist
from scipy.stats import ortho_group, pearsonr

from guidance_lab.domain.exceptions import (
    ContractViolationError,
    DegenerateBatchError,
    DegenerateRepresentationError,
    ShapeError,
)
from guidance_lab.infrastructure.metrics import (
    ActivationMatrix,
    CkaMetric,
    GramMatrix,
    RsaMetric,
    center_gram,
    cka_dissimilarity,
    get_metric,
    gram,
    hsic,
    linear_cka,
    rdm_cosine,
    rsa_dissimilarity,
    rsa_similarity,
)
from guidance_lab.infrastructure.metrics.rsa import _pearson
from guidance_lab.shared.core import Tensor

ORACLE_R = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]
ORACLE_R_PRIME = [[1.0], [2.0], [3.0]]
ORACLE_CKA = 3.0 / (2.0 * np.sqrt(10.0))


def centered_cross_covariance_cka(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    num = np.linalg.norm(xc.T @ yc) ** 2
    return float(num / (np.linalg.norm(xc.T @ xc) * np.linalg.norm(yc.T @ yc)))


class TestGram:

    def test_identity_rows(self):
        np.testing.assert_allclose(gram(np.eye(2)).values.data, np.eye(2))

    def test_hand_computed(self):
        np.testing.assert_allclose(gram(ORACLE_R).values.data, np.diag([1.0, 1.0, 0.0]))

    def test_symmetric_psd(self, rng_factory):
        k = gram(rng_factory(0).standard_normal((6, 3)))
        assert k.is_symmetric()
        assert k.is_psd()

    def test_centering_annihilates_constants(self):
        kc = center_gram(GramMatrix(Tensor(np.ones((3, 3)))))
        np.testing.assert_allclose(kc.values.data, 0.0, atol=1e-7)
        assert kc.centered

    def test_centered_row_sums_vanish(self, rng_factory):
        kc = center_gram(gram(rng_factory(1).standard_normal((7, 4))))
        assert kc.row_sums_vanish()
        assert kc.is_symmetric()

    def test_double_centering_rejected(self):
        kc = center_gram(gram(np.eye(3)))
        with pytest.raises(ContractViolationError):
            center_gram(kc)

    def test_hsic_with_zero(self, rng_factory):
        kc = center_gram(gram(rng_factory(2).standard_normal((4, 2))))
        zero = GramMatrix(Tensor(np.zeros((4, 4))), centered=True)
        assert hsic(kc, zero).item() == 0.0

    def test_hsic_needs_centered_input(self):
        with pytest.raises(ContractViolationError):
            hsic(gram(np.eye(3)), center_gram(gram(np.eye(3))))


class TestLinearCka:

    def test_oracle_pair(self, float64):
        assert linear_cka(ORACLE_R, ORACLE_R_PRIME).item() == pytest.approx(ORACLE_CKA, abs=1e-6)
        assert cka_dissimilarity(ORACLE_R, ORACLE_R_PRIME).item() == pytest.approx(0.52566, abs=1e-5)

    def test_self_similarity(self, float64, rng_factory):
        r = rng_factory(3).standard_normal((8, 5))
        assert linear_cka(r, r).item() == pytest.approx(1.0, abs=1e-6)
        assert cka_dissimilarity(r, r).item() == pytest.approx(0.0, abs=1e-6)

    def test_two_samples_always_one(self, float64, rng_factory):
        rng = rng_factory(4)
        assert linear_cka(rng.standard_normal((2, 3)), rng.standard_normal((2, 5))).item() == pytest.approx(1.0)

    def test_symmetric(self, float64, rng_factory):
        rng = rng_factory(5)
        a, b = rng.standard_normal((6, 3)), rng.standard_normal((6, 4))
        assert linear_cka(a, b).item() == pytest.approx(linear_cka(b, a).item(), abs=1e-6)

    def test_scale_and_rotation_invariance(self, float64, rng_factory):
        rng = rng_factory(6)
        r, other = rng.standard_normal((8, 4)), rng.standard_normal((8, 3))
        q = ortho_group.rvs(4, random_state=6)
        base = linear_cka(r, other).item()
        assert linear_cka(-2.5 * r, other).item() == pytest.approx(base, abs=1e-6)
        assert linear_cka(r @ q, other).item() == pytest.approx(base, abs=1e-6)
        assert linear_cka(r, r @ q).item() == pytest.approx(1.0, abs=1e-6)

    def test_matches_cross_covariance_formula(self, float64, rng_factory):
        rng = rng_factory(7)
        for b in range(3, 9):
            for d1 in range(1, 5):
                for d2 in range(1, 5):
                    x, y = rng.standard_normal((b, d1)), rng.standard_normal((b, d2))
                    value = linear_cka(x, y).item()
                    assert 0.0 <= value <= 1.0 + 1e-12
                    assert value == pytest.approx(centered_cross_covariance_cka(x, y), abs=1e-6)

    def test_large_float32_activations_stay_finite(self, rng_factory):
        """Test HSIC values whose product exceeds the float32 range"""
        rng = rng_factory(15)
        r = (1e5 * rng.standard_normal((8, 4))).astype(np.float32)
        other = (1e5 * rng.standard_normal((8, 3))).astype(np.float32)
        same = linear_cka(r, r)
        assert same.dtype == np.float32
        assert np.isfinite(same.item())
        assert same.item() == pytest.approx(1.0, abs=1e-5)
        value = linear_cka(r, other).item()
        assert np.isfinite(value) and 0.0 <= value <= 1.0 + 1e-5

    def test_constant_representation(self):
        with pytest.raises(DegenerateRepresentationError):
            linear_cka(np.ones((4, 3)), np.arange(8.0).reshape(4, 2))

    def test_batch_mismatch(self):
        with pytest.raises(ShapeError):
            linear_cka(np.eye(3), np.eye(4))

    def test_single_sample_rejected(self):
        with pytest.raises(DegenerateBatchError):
            ActivationMatrix(Tensor(np.ones((1, 3))))

    def test_dissimilarity_grad(self, float64, rng_factory, grad_check):
        rng = rng_factory(8)
        r = Tensor(rng.standard_normal((8, 4)), requires_grad=True)
        r_prime = rng.standard_normal((8, 6))
        assert grad_check(lambda: cka_dissimilarity(r, r_prime), [r]) < 1e-4

    def test_grad_reaches_both_arguments(self, float64, rng_factory, grad_check):
        rng = rng_factory(9)
        a = Tensor(rng.standard_normal((5, 3)), requires_grad=True)
        b = Tensor(rng.standard_normal((5, 2)), requires_grad=True)
        assert grad_check(lambda: linear_cka(a, b), [a, b]) < 1e-4


class TestRsa:

    def test_rdm_of_orthogonal_and_repeated_rows(self):
        d = rdm_cosine([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(d.values.data, [[0, 1, 0], [1, 0, 1], [0, 1, 0]], atol=1e-6)

    def test_rdm_range(self, rng_factory):
        d = rdm_cosine(rng_factory(10).standard_normal((6, 3))).values.data
        assert np.all(d >= -1e-6) and np.all(d <= 2 + 1e-6)
        np.testing.assert_array_equal(np.diag(d), 0.0)
        assert rdm_cosine([[1.0, 2.0], [-1.0, -2.0]]).values.data[0, 1] == pytest.approx(2.0)

    def test_rdm_of_near_parallel_rows_is_non_negative(self):
        """Test rounding on almost identical rows never yields negative distances"""
        base = np.array([0.3, 1.7, -2.2, 0.9], dtype=np.float32)
        rows = np.stack([base * scale + 1e-7 * i for i, scale in enumerate((1.0, 3.0, 7.0, 0.1, 11.0))])
        d = rdm_cosine(rows).values.data
        assert np.all(d >= 0.0)
        assert np.all(d <= 2.0)
        np.testing.assert_array_equal(np.diag(d), 0.0)

    def test_lower_triangle_order(self):
        d = rdm_cosine([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        lower = d.lower_triangle().data
        assert lower.shape == (3,)
        assert lower[0] == pytest.approx(1.0)

    def test_self_similarity(self, float64, rng_factory):
        r = rng_factory(11).standard_normal((6, 4))
        assert rsa_similarity(r, r).item() == pytest.approx(1.0, abs=1e-9)
        assert rsa_dissimilarity(r, 3.0 * r).item() == pytest.approx(0.0, abs=1e-9)

    def test_pearson_affine_invariance(self, float64, rng_factory):
        x = Tensor(rng_factory(12).uniform(0.0, 2.0, size=15))
        assert _pearson(x, x * 0.5 + 3.0).item() == pytest.approx(1.0, abs=1e-6)

    def test_matches_direct_pearson(self, float64, rng_factory):
        rng = rng_factory(13)
        r, r_prime = rng.standard_normal((8, 4)), rng.standard_normal((8, 6))
        expected = pearsonr(pdist(r, "cosine"), pdist(r_prime, "cosine"))[0]
        assert rsa_similarity(r, r_prime).item() == pytest.approx(expected, abs=1e-6)

    def test_needs_three_samples(self):
        with pytest.raises(DegenerateBatchError):
            rsa_similarity(np.eye(2), np.eye(2))

    def test_zero_norm_row(self):
        with pytest.raises(DegenerateRepresentationError):
            rdm_cosine([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])

    def test_dissimilarity_grad(self, float64, rng_factory, grad_check):
        rng = rng_factory(14)
        r = Tensor(rng.standard_normal((6, 4)), requires_grad=True)
        r_prime = rng.standard_normal((6, 3))
        assert grad_check(lambda: rsa_dissimilarity(r, r_prime), [r]) < 1e-4


class TestMetricAdapters:

    def test_get_metric(self):
        assert isinstance(get_metric("cka"), CkaMetric)
        assert isinstance(get_metric("rsa"), RsaMetric)
        assert get_metric("cka").bounded_unit_interval
        assert not get_metric("rsa").bounded_unit_interval

    def test_unknown_metric(self):
        with pytest.raises(ValueError):
            get_metric("svcca")

    def test_adapter_matches_function(self, float64):
        metric = get_metric("cka")
        a, b = ActivationMatrix(Tensor(ORACLE_R)), ActivationMatrix(Tensor(ORACLE_R_PRIME))
        assert metric.similarity(a, b).item() == pytest.approx(ORACLE_CKA, abs=1e-6)
        assert metric.dissimilarity(a, b).item() == pytest.approx(1.0 - ORACLE_CKA, abs=1e-6)
