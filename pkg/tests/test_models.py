import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from totvar import (
    ConditioningRule,
    JointModel,
    PosteriorApprox,
    ReplicateBundle,
    ReplicateError,
    apply_conditioning,
    generate_replicates,
    jaccard_distance,
    mean_jaccard_panel_distance,
    weighted_euclidean_distance,
)
from totvar.examples.gaussian import (
    GaussianExampleConfig,
    exact_posterior,
    make_approximator,
    make_model,
)


def scalar_model():
    return JointModel(
        dim_theta=1,
        prior_sampler=lambda rng: rng.standard_normal(1),
        data_simulator=lambda theta, rng: theta + rng.standard_normal(3),
        summarizer=lambda data: np.atleast_1d(data.mean()),
    )


def scalar_approximator(data, seed):
    rng = np.random.default_rng(seed)
    return PosteriorApprox.from_particles(
        (np.mean(data) + 0.1 * rng.standard_normal(8)).reshape(-1, 1)
    )


def bundles_equal(a, b):
    return (
        a.index == b.index
        and a.seed_record == b.seed_record
        and np.array_equal(a.theta_true, b.theta_true)
        and np.array_equal(a.summary, b.summary)
        and a.approx.form == b.approx.form
        and (
            np.array_equal(a.approx.particles, b.approx.particles)
            if a.approx.form == "particles"
            else np.array_equal(a.approx.mean, b.approx.mean)
            and np.array_equal(a.approx.cov, b.approx.cov)
        )
    )


class TestGenerateReplicates:
    def test_bitwise_determinism(self):
        model = scalar_model()
        first = generate_replicates(model, scalar_approximator, 3, master_seed=42)
        second = generate_replicates(model, scalar_approximator, 3, master_seed=42)
        assert all(bundles_equal(a, b) for a, b in zip(first, second))

    def test_worker_count_does_not_change_results(self):
        model = scalar_model()
        serial = generate_replicates(model, scalar_approximator, 6, 7, workers=1)
        threaded = generate_replicates(model, scalar_approximator, 6, 7, workers=4)
        assert all(bundles_equal(a, b) for a, b in zip(serial, threaded))

    def test_conjugate_posterior_mean_matches_analytic(self):
        # oracle: closed-form normal-normal posterior mean from the summary,
        # the summary being the sufficient statistic (sample mean)
        config = GaussianExampleConfig(dim=2, n_obs=5, noise_sd=1.5)
        model = make_model(config)
        approximator = make_approximator(config)
        bundles = generate_replicates(model, approximator, 2, master_seed=11)
        for b in bundles:
            n, sd2 = config.n_obs, config.noise_sd ** 2
            expected = (n / sd2) * b.summary / (1.0 + n / sd2)
            np.testing.assert_allclose(b.approx.mean, expected, rtol=1e-12)

    def test_too_few_replicates(self):
        with pytest.raises(ValueError, match="at least 2 replicates"):
            generate_replicates(scalar_model(), scalar_approximator, 1, 0)

    def test_indices_and_extension(self):
        model = scalar_model()
        full = generate_replicates(model, scalar_approximator, 5, 123)
        assert [b.index for b in full] == [0, 1, 2, 3, 4]
        tail = generate_replicates(model, scalar_approximator, 2, 123, start_index=3)
        assert all(bundles_equal(a, b) for a, b in zip(full[3:], tail))

    def test_approximator_failure_names_replicate_and_seed(self):
        def broken(data, seed):
            raise RuntimeError("boom")

        with pytest.raises(ReplicateError) as err:
            generate_replicates(scalar_model(), broken, 3, 9)
        assert err.value.index == 0
        assert str(err.value.seed) in str(err.value)
        assert "replicate 0" in str(err.value)


def make_summary_bundles(summaries):
    approx = PosteriorApprox.from_particles([[0.0], [1.0]])
    return [
        ReplicateBundle(
            index=i,
            theta_true=np.zeros(1),
            summary=np.atleast_1d(float(s)),
            approx=approx,
            seed_record=i,
        )
        for i, s in enumerate(summaries)
    ]


class TestConditioning:
    def test_keep_all_is_noop(self):
        bundles = make_summary_bundles([0.0, 1.0, 5.0])
        rule = ConditioningRule(keep_count=3)
        assert apply_conditioning(bundles, rule, [0.0]) == bundles

    def test_tolerance_retention(self):
        bundles = make_summary_bundles([0.0, 1.0, 5.0])
        rule = ConditioningRule(tolerance=2.0)
        kept = apply_conditioning(bundles, rule, [0.0])
        assert [b.index for b in kept] == [0, 1]

    def test_tie_break_keeps_lower_index(self):
        bundles = make_summary_bundles([1.0, -1.0])
        rule = ConditioningRule(keep_count=1)
        kept = apply_conditioning(bundles, rule, [0.0])
        assert [b.index for b in kept] == [0]

    def test_empty_tolerance_errors(self):
        bundles = make_summary_bundles([3.0, 4.0])
        rule = ConditioningRule(tolerance=0.5)
        with pytest.raises(ValueError, match="conditioning set empty"):
            apply_conditioning(bundles, rule, [0.0])

    def test_keep_count_caps_at_pool_size(self):
        bundles = make_summary_bundles([0.0, 1.0])
        kept = apply_conditioning(bundles, ConditioningRule(keep_count=10), [0.0])
        assert len(kept) == 2

    def test_original_order_preserved(self):
        bundles = make_summary_bundles([5.0, 0.0, 1.0, 4.0])
        kept = apply_conditioning(bundles, ConditioningRule(keep_count=2), [0.0])
        assert [b.index for b in kept] == [1, 2]

    def test_enlarging_tolerance_never_drops_replicates(self):
        rng = np.random.default_rng(5)
        bundles = make_summary_bundles(rng.standard_normal(20))
        kept_small = {
            b.index
            for b in apply_conditioning(bundles, ConditioningRule(tolerance=0.5), [0.0])
        }
        for tol in (0.75, 1.0, 2.0, 4.0):
            kept = {
                b.index
                for b in apply_conditioning(
                    bundles, ConditioningRule(tolerance=tol), [0.0]
                )
            }
            assert kept_small <= kept
            kept_small = kept

    def test_rule_requires_exactly_one_retention(self):
        with pytest.raises(ValueError):
            ConditioningRule()
        with pytest.raises(ValueError):
            ConditioningRule(tolerance=1.0, keep_count=2)


class TestWeightedEuclidean:
    def test_zero_on_identical(self):
        assert weighted_euclidean_distance([1.0, 2.0], [1.0, 2.0], [3.0, 4.0]) == 0.0

    def test_hand_case_two_dim(self):
        assert weighted_euclidean_distance([1.0, 2.0], [0.0, 0.0], [1.0, 2.0]) == pytest.approx(2.0)

    def test_hand_case_small_weight(self):
        assert weighted_euclidean_distance([3.0], [0.0], [0.5]) == pytest.approx(36.0)

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(ValueError, match="strictly positive"):
            weighted_euclidean_distance([1.0], [0.0], [0.0])
        with pytest.raises(ValueError, match="strictly positive"):
            weighted_euclidean_distance([1.0], [0.0], [-1.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            weighted_euclidean_distance([1.0, 2.0], [0.0], [1.0, 1.0])

    @given(
        st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=6),
        st.lists(st.floats(1e-3, 1e3), min_size=6, max_size=6),
    )
    @settings(max_examples=50)
    def test_nonnegative_and_zero_on_self(self, s, w):
        s = np.array(s)
        w = np.array(w[: len(s)])
        assert weighted_euclidean_distance(s, s, w) == 0.0
        ref = np.zeros_like(s)
        assert weighted_euclidean_distance(s, ref, w) >= 0.0


class TestJaccard:
    def test_identical_vectors(self):
        assert jaccard_distance([1, 0, 1], [1, 0, 1]) == 0.0

    def test_all_zero_convention(self):
        assert jaccard_distance([0, 0, 0], [0, 0, 0]) == 0.0

    def test_hand_count_case(self):
        assert jaccard_distance([1, 0, 1], [1, 1, 0]) == pytest.approx(2.0 / 3.0)

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            jaccard_distance([1, 0], [1])

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError, match="0/1"):
            jaccard_distance([2, 0], [1, 0])

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=12))
    @settings(max_examples=50)
    def test_zero_on_self_and_bounded(self, bits):
        assert jaccard_distance(bits, bits) == 0.0
        flipped = [1 - b for b in bits]
        assert 0.0 <= jaccard_distance(bits, flipped) <= 1.0


class TestPanelJaccard:
    def test_identical_panels(self):
        panels = [[1, 0], [0, 1, 1]]
        assert mean_jaccard_panel_distance(panels, panels) == 0.0

    def test_mean_of_two_panels(self):
        u = [[1, 0, 1], [1, 0, 1]]
        v = [[1, 0, 1], [1, 1, 0]]
        assert mean_jaccard_panel_distance(u, v) == pytest.approx(1.0 / 3.0)

    def test_mismatched_panel_counts(self):
        with pytest.raises(ValueError, match="panel counts"):
            mean_jaccard_panel_distance([[1]], [[1], [0]])


class TestPosteriorApprox:
    def test_particle_form_needs_two_particles(self):
        with pytest.raises(ValueError, match="S >= 2"):
            PosteriorApprox.from_particles([[1.0]])

    def test_gaussian_form_checks_symmetry(self):
        with pytest.raises(ValueError, match="symmetric"):
            PosteriorApprox.from_moments([0.0, 0.0], [[1.0, 0.5], [0.2, 1.0]])

    def test_gaussian_form_checks_diagonal(self):
        with pytest.raises(ValueError, match="non-negative"):
            PosteriorApprox.from_moments([0.0], [[-1.0]])

    def test_exact_posterior_helper_matches_model(self):
        config = GaussianExampleConfig(dim=1, n_obs=3, noise_sd=2.0)
        data = np.array([[1.0], [2.0], [3.0]])
        mean, cov = exact_posterior(data, config)
        # prior N(0,1), likelihood mean theta with variance 4, n=3
        precision = 1.0 + 3.0 / 4.0
        np.testing.assert_allclose(mean, (3.0 / 4.0) * 2.0 / precision)
        np.testing.assert_allclose(cov, [[1.0 / precision]])
