"""Shift estimator tests.

Dual-route checks: estimates from the k-NN/forest route are compared
against closed-form flip compositions and Monte Carlo boundary masses from
the domain oracle, which never touches a classifier.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import shiftlab as sl
from shiftlab.domains import MultiDomainDataset, dataset_to_table
from shiftlab.errors import ConfigurationError
from shiftlab.features import FeatureTable
from shiftlab.shift import table_to_dataset


def spec(flip=0.0, mean=(0.0, 0.0), normal=(1.0, 0.0), scale=1.0, n=300, seed=None):
    return sl.DomainSpec(mean=mean, normal=normal, scale=scale, flip_rate=flip,
                         n=n, seed=seed)


def margin_dataset(m=3, n=200, seed=0):
    """Domains whose classes are two tight blobs: exactly 1-NN separable."""
    rng = np.random.default_rng(seed)
    feats, labels = [], []
    for _ in range(m):
        a = rng.normal((-3.0, 0.0), 0.4, size=(n // 2, 2))
        b = rng.normal((3.0, 0.0), 0.4, size=(n - n // 2, 2))
        feats.append(np.vstack([a, b]))
        labels.append(np.concatenate([np.zeros(n // 2, dtype=np.int64),
                                      np.ones(n - n // 2, dtype=np.int64)]))
    return MultiDomainDataset(list(range(m)), feats, labels)


class TestEstimateMu:
    def test_exact_copy_gives_zero(self):
        ds = sl.generate_domains([spec(n=100)], master_seed=1)
        copy = MultiDomainDataset([0, 1], [ds.features[0], ds.features[0].copy()],
                                  [ds.labels[0], ds.labels[0].copy()])
        assert sl.estimate_mu(copy, 0, 1) == 0.0
        assert sl.estimate_mu(copy, 1, 0) == 0.0

    def test_flipped_copy_gives_one(self):
        ds = sl.generate_domains([spec(n=100)], master_seed=1)
        flipped = MultiDomainDataset([0, 1], [ds.features[0], ds.features[0].copy()],
                                     [ds.labels[0], 1 - ds.labels[0]])
        assert sl.estimate_mu(flipped, 0, 1) == 1.0

    def test_matches_oracle_for_injected_noise(self):
        # true pairwise disagreement r(0, 0.2) = 0.2
        specs = [spec(), spec(flip=0.2)]
        truth = sl.true_disagreement(specs[0], specs[1], n_mc=50_000, seed=0)
        vals = []
        for s in range(10):
            ds = sl.generate_domains(specs, master_seed=s)
            vals.append(min(sl.estimate_mu(ds, 0, 1), sl.estimate_mu(ds, 1, 0)))
        assert abs(np.mean(vals) - truth) <= 0.05
        assert 0.15 <= np.mean(vals) <= 0.25

    def test_self_estimate_uses_heldout_split(self):
        ds = margin_dataset(m=1, n=200)
        # separable blobs: held-out half is still classified perfectly
        assert sl.estimate_mu(ds, 0, 0, seed=3) == 0.0

    def test_self_estimate_on_random_labels_is_high(self):
        rng = np.random.default_rng(0)
        ds = MultiDomainDataset([0], [rng.normal(size=(200, 2))],
                                [rng.integers(0, 2, 200)])
        assert sl.estimate_mu(ds, 0, 0, seed=1) >= 0.3

    def test_index_validation(self):
        ds = margin_dataset(m=2, n=20)
        with pytest.raises(ConfigurationError):
            sl.estimate_mu(ds, 0, 5)

    def test_empty_domain_rejected(self):
        ds = MultiDomainDataset([0, 1], [np.zeros((0, 2)), np.zeros((5, 2))],
                                [np.zeros(0, dtype=int), np.zeros(5, dtype=int)])
        with pytest.raises(ConfigurationError):
            sl.estimate_mu(ds, 1, 0)


class TestDisparityMatrix:
    def test_symmetric_in_range(self):
        ds = sl.generate_domains([spec(flip=f, n=120) for f in (0.0, 0.1, 0.3)],
                                 master_seed=2)
        d = sl.disparity_matrix(ds, seed=0)
        assert np.array_equal(d, d.T)
        assert d.min() >= 0.0 and d.max() <= 1.0

    def test_entries_are_min_of_directions(self):
        ds = sl.generate_domains([spec(), spec(flip=0.3, scale=2.0)], master_seed=3)
        d = sl.disparity_matrix(ds, seed=0)
        mu_01 = sl.estimate_mu(ds, 0, 1)
        mu_10 = sl.estimate_mu(ds, 1, 0)
        assert d[0, 1] == min(mu_01, mu_10)

    def test_identical_domains_near_zero(self):
        ds = margin_dataset(m=4, n=200, seed=4)
        d = sl.disparity_matrix(ds, seed=0)
        assert d.max() <= 0.05
        assert np.trace(d) <= 0.05 * 4

    def test_thread_count_does_not_change_result(self):
        ds = sl.generate_domains([spec(flip=f, n=80) for f in (0.0, 0.2, 0.4)],
                                 master_seed=5)
        d1 = sl.disparity_matrix(ds, seed=9, threads=1)
        d3 = sl.disparity_matrix(ds, seed=9, threads=3)
        assert np.array_equal(d1, d3)


class TestConditionalShift:
    def test_zero_and_one_matrices(self):
        assert sl.conditional_shift(np.zeros((4, 4))).value == 0.0
        assert sl.conditional_shift(np.ones((4, 4))).value == pytest.approx(1.0)

    def test_frozen_closed_form(self):
        # M=9, all-ones off-diagonal, 0.5 diagonal:
        # sqrt(72 * 1 + 9 * 0.25) / 9
        h = np.ones((9, 9))
        np.fill_diagonal(h, 0.5)
        expect = np.sqrt(72 + 9 * 0.25) / 9
        assert sl.marginal_shift(h).value == pytest.approx(expect, rel=1e-12)

    def test_estimate_fields(self):
        m = np.array([[0.0, 0.2], [0.2, 0.0]])
        est = sl.conditional_shift(m, config={"k": 1})
        assert est.kind == "conditional"
        assert est.config == {"k": 1}
        assert np.array_equal(est.matrix, m)
        d = est.to_json_dict()
        assert d["value"] == est.value and d["matrix"][0][1] == 0.2

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            sl.conditional_shift(np.zeros((2, 3)))
        with pytest.raises(ConfigurationError):
            sl.conditional_shift(np.full((2, 2), 1.5))
        with pytest.raises(ConfigurationError):
            sl.conditional_shift(np.zeros((0, 0)))

    @given(st.integers(min_value=2, max_value=6), st.floats(min_value=0.0, max_value=0.5))
    @settings(max_examples=20, deadline=None)
    def test_monotone_in_entries(self, m, bump):
        rng = np.random.default_rng(m)
        base = rng.uniform(0.0, 0.5, size=(m, m))
        base = (base + base.T) / 2
        bigger = base.copy()
        bigger[0, 1] = bigger[1, 0] = base[0, 1] + bump
        assert sl.conditional_shift(bigger).value >= sl.conditional_shift(base).value


class TestPairwiseDomainScore:
    def test_identical_distribution_near_chance(self):
        ds = sl.generate_domains([spec(n=300), spec(n=300)], master_seed=6)
        v = sl.pairwise_domain_score(ds, 0, 1, sl.ForestConfig(20), seed=0)
        assert 0.4 <= v <= 0.6

    def test_separated_near_one(self):
        ds = sl.generate_domains([spec(n=300), spec(mean=(8.0, 0.0), n=300)],
                                 master_seed=7)
        assert sl.pairwise_domain_score(ds, 0, 1, sl.ForestConfig(20), seed=0) >= 0.95

    def test_unbalanced_pool_subsampled(self):
        ds = sl.generate_domains([spec(n=100), spec(mean=(8.0, 0.0), n=400)],
                                 master_seed=8)
        v = sl.pairwise_domain_score(ds, 0, 1, sl.ForestConfig(10), seed=0)
        assert v >= 0.9

    def test_same_domain_rejected(self):
        ds = sl.generate_domains([spec(n=50)], master_seed=9)
        with pytest.raises(ConfigurationError):
            sl.pairwise_domain_score(ds, 0, 0)


class TestMarginalMatrix:
    def test_shape_diagonal_symmetry(self):
        ds = sl.generate_domains([spec(n=60), spec(mean=(4.0, 0.0), n=60),
                                  spec(mean=(0.0, 4.0), n=60)], master_seed=10)
        h = sl.marginal_matrix(ds, sl.ForestConfig(10), seed=0)
        assert h.shape == (3, 3)
        assert np.all(np.diag(h) == 0.5)
        assert np.array_equal(h, h.T)
        assert h.min() >= 0.0 and h.max() <= 1.0

    def test_configurable_diagonal(self):
        ds = sl.generate_domains([spec(n=60), spec(n=60)], master_seed=11)
        h = sl.marginal_matrix(ds, sl.ForestConfig(5), seed=0, diagonal=0.0)
        assert np.all(np.diag(h) == 0.0)

    def test_error_rate_storage_is_exact_complement(self):
        ds = sl.generate_domains([spec(n=60), spec(mean=(2.0, 0.0), n=60)],
                                 master_seed=12)
        acc = sl.marginal_matrix(ds, sl.ForestConfig(10), seed=4)
        err = sl.marginal_matrix(ds, sl.ForestConfig(10), seed=4, store_error_rate=True)
        assert err[0, 1] == pytest.approx(1.0 - acc[0, 1], abs=1e-12)
        assert np.all(np.diag(err) == 0.5)

    def test_thread_count_does_not_change_result(self):
        ds = sl.generate_domains([spec(n=50), spec(mean=(1.0, 0.0), n=50),
                                  spec(scale=2.0, n=50)], master_seed=13)
        h1 = sl.marginal_matrix(ds, sl.ForestConfig(10), seed=2, threads=1)
        h4 = sl.marginal_matrix(ds, sl.ForestConfig(10), seed=2, threads=4)
        assert np.array_equal(h1, h4)


class TestPerSubjectDisparity:
    def test_uniform_matrices(self):
        ones = np.ones((4, 4))
        assert np.allclose(sl.per_subject_disparity(ones), 1.0)
        assert np.allclose(sl.per_subject_disparity(np.zeros((4, 4))), 0.0)

    def test_hand_built_column(self):
        d = np.zeros((3, 3))
        d[1, 0] = d[0, 1] = 0.2
        d[2, 0] = d[0, 2] = 0.4
        vals = sl.per_subject_disparity(d)
        assert vals[0] == pytest.approx(0.3)

    def test_single_domain_is_zero(self):
        assert sl.per_subject_disparity(np.array([[0.4]]))[0] == 0.0

    def test_non_square_rejected(self):
        with pytest.raises(ConfigurationError):
            sl.per_subject_disparity(np.zeros((2, 3)))


class TestTableToDataset:
    def test_groups_by_subject(self):
        ds = sl.generate_domains([spec(n=30), spec(n=40)], master_seed=14)
        table = dataset_to_table(ds)
        back = table_to_dataset(table)
        assert back.domain_ids == [0, 1]
        assert back.features[1].shape == (40, 2)

    def test_unknown_condition_rejected(self):
        table = FeatureTable(np.array([0, 0]), np.array(["low", "medium"], dtype=object),
                             np.array(["task", "task"], dtype=object), np.zeros((2, 2)))
        with pytest.raises(ConfigurationError, match="medium"):
            table_to_dataset(table)

    def test_no_task_rows_rejected(self):
        table = FeatureTable(np.array([0]), np.array(["low"], dtype=object),
                             np.array(["baseline1"], dtype=object), np.zeros((1, 2)))
        with pytest.raises(ConfigurationError):
            table_to_dataset(table)

    def test_non_task_rows_excluded(self):
        table = FeatureTable(
            np.array([0, 0, 0]),
            np.array(["low", "low", "low"], dtype=object),
            np.array(["task", "baseline1", "task"], dtype=object),
            np.arange(6, dtype=np.float64).reshape(3, 2),
        )
        ds = table_to_dataset(table)
        assert ds.features[0].shape == (2, 2)
