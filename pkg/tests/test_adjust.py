import numpy as np
import pytest

from totvar import (
    AdjustmentMap,
    MomentSummary,
    NumericalError,
    PosteriorApprox,
    ReplicateBundle,
    adjust_observed,
    adjust_replicates,
    estimate_moments,
    fit_adjustment,
    fit_and_apply,
    resolve_links,
    shrink_particles,
    transform_bundles,
)


def scalar_summary(sigma_l, sigma_r1, sigma_r2, mu_l=0.0, mu_r=0.0):
    return MomentSummary(
        mu_l=np.array([mu_l]),
        mu_r=np.array([mu_r]),
        sigma_l=np.array([[sigma_l]]),
        sigma_r1=np.array([[sigma_r1]]),
        sigma_r2=np.array([[sigma_r2]]),
        i_used=10,
    )


def random_pool(rng, n, dim, s=20, mean_scale=0.7, spread=0.6):
    """Synthetic pool whose posterior means track theta with extra noise.

    The default mean_scale < 1 mimics posterior shrinkage, keeping the
    prior-minus-mean covariance difference positive definite."""
    out = []
    for i in range(n):
        theta = rng.standard_normal(dim)
        centre = mean_scale * theta + 0.2 * rng.standard_normal(dim)
        particles = centre + spread * rng.standard_normal((s, dim))
        out.append(
            ReplicateBundle(
                index=i,
                theta_true=theta,
                summary=rng.standard_normal(2),
                approx=PosteriorApprox.from_particles(particles),
                seed_record=i,
            )
        )
    return out


class TestFitAdjustment:
    def test_scalar_hand_case_definite(self):
        m = fit_adjustment(scalar_summary(2.0, 0.25, 1.0))
        assert m.rho == 1.0
        np.testing.assert_allclose(m.chol_c, [[0.5]])
        np.testing.assert_allclose(m.chol_t, [[1.0]])
        np.testing.assert_allclose(m.scale, [[2.0]])

    def test_scalar_shrinkage_hand_case(self):
        # smallest eigenvalue condition: 1 - 2 rho = 0.5 so rho = 0.25
        m = fit_adjustment(scalar_summary(1.0, 0.5, 2.0))
        assert 0 < m.rho < 1
        assert m.rho == pytest.approx(0.25, abs=1e-9)

    def test_already_calibrated_gives_identity_scale(self):
        m = fit_adjustment(scalar_summary(2.0, 1.5, 0.5, mu_l=0.3, mu_r=0.3))
        np.testing.assert_allclose(m.scale, np.eye(1), atol=1e-10)

    def test_factors_reproduce_their_targets(self):
        rng = np.random.default_rng(8)
        a = rng.standard_normal((3, 3))
        sigma_r1 = a @ a.T + 0.5 * np.eye(3)
        b = rng.standard_normal((3, 3))
        sigma_r2 = 0.1 * (b @ b.T)
        sigma_l = sigma_r2 + a @ a.T + np.eye(3)
        s = MomentSummary(
            mu_l=np.zeros(3),
            mu_r=np.zeros(3),
            sigma_l=sigma_l,
            sigma_r1=sigma_r1,
            sigma_r2=sigma_r2,
            i_used=10,
        )
        m = fit_adjustment(s)
        np.testing.assert_allclose(m.chol_c @ m.chol_c.T, sigma_r1, rtol=1e-10)
        np.testing.assert_allclose(
            m.chol_t @ m.chol_t.T, sigma_l - sigma_r2, rtol=1e-10
        )
        assert np.all(np.diag(m.chol_c) > 0)
        assert np.all(np.diag(m.chol_t) > 0)

    def test_singular_within_replicate_covariance(self):
        with pytest.raises(NumericalError, match="increase S or jitter"):
            fit_adjustment(scalar_summary(1.0, 0.0, 0.5))

    def test_jitter_rescues_singular_covariance(self):
        m = fit_adjustment(scalar_summary(1.0, 0.0, 0.5), jitter=1e-6)
        assert m.chol_c[0, 0] == pytest.approx(1e-3)

    def test_unreachable_eigenvalue_condition(self):
        with pytest.raises(NumericalError, match="lambda_min"):
            fit_adjustment(scalar_summary(0.1, 0.5, 1.0))

    def test_shrinkage_eigenvalue_condition_multivariate(self):
        rng = np.random.default_rng(15)
        a = rng.standard_normal((4, 4))
        sigma_r2 = a @ a.T + 4 * np.eye(4)  # dominates sigma_l
        sigma_l = np.eye(4) + 0.1 * np.diag(rng.random(4))
        sigma_r1 = 0.05 * np.eye(4)
        s = MomentSummary(
            mu_l=np.zeros(4),
            mu_r=np.zeros(4),
            sigma_l=sigma_l,
            sigma_r1=sigma_r1,
            sigma_r2=sigma_r2,
            i_used=10,
        )
        m = fit_adjustment(s)
        assert 0 < m.rho < 1
        lam = np.min(np.linalg.eigvalsh(sigma_l - m.rho * sigma_r2))
        np.testing.assert_allclose(lam, np.min(np.linalg.eigvalsh(sigma_r1)), atol=1e-8)


class TestShrinkParticles:
    def test_rho_one_leaves_particles_unchanged(self):
        rng = np.random.default_rng(2)
        bundles = random_pool(rng, 40, 2)
        summary = estimate_moments(bundles)
        m = fit_adjustment(summary)
        assert m.rho == 1.0
        shrunk = shrink_particles(bundles, m)
        for b, s in zip(bundles, shrunk):
            np.testing.assert_allclose(
                s.approx.particles, b.approx.particles, atol=1e-15
            )

    def test_scalar_hand_case(self):
        m = AdjustmentMap(
            mu_l=np.array([0.0]),
            mu_r=np.array([0.0]),
            chol_c=np.array([[1.0]]),
            chol_t=np.array([[1.0]]),
            rho=0.25,
            scale=np.array([[1.0]]),
        )
        b = ReplicateBundle(
            index=0,
            theta_true=np.array([0.0]),
            summary=np.zeros(1),
            approx=PosteriorApprox.from_particles([[3.0], [1.0]]),  # mean 2
            seed_record=0,
        )
        shrunk = shrink_particles([b], m)[0]
        # mu_r + sqrt(rho) (mu_i - mu_r) + (particle - mu_i) = 0 + 1 + 1 = 2
        assert shrunk.approx.particles[0, 0] == pytest.approx(2.0)

    def test_shrinkage_contracts_mean_spread_only(self):
        rng = np.random.default_rng(3)
        # posterior means spread 3x wider than the prior draws
        bundles = random_pool(rng, 60, 3, mean_scale=3.0, spread=0.3)
        summary = estimate_moments(bundles)
        m = fit_adjustment(summary)
        assert 0 < m.rho < 1
        shrunk = shrink_particles(bundles, m)
        after = estimate_moments(shrunk)
        np.testing.assert_allclose(
            after.sigma_r2, m.rho * summary.sigma_r2, rtol=1e-10
        )
        np.testing.assert_allclose(after.mu_r, summary.mu_r, atol=1e-10)
        np.testing.assert_allclose(after.sigma_r1, summary.sigma_r1, rtol=1e-10)

    def test_gaussian_form_mean_shrinks(self):
        m = AdjustmentMap(
            mu_l=np.array([0.0]),
            mu_r=np.array([1.0]),
            chol_c=np.array([[1.0]]),
            chol_t=np.array([[1.0]]),
            rho=0.25,
            scale=np.array([[1.0]]),
        )
        b = ReplicateBundle(
            index=0,
            theta_true=np.array([0.0]),
            summary=np.zeros(1),
            approx=PosteriorApprox.from_moments([3.0], [[2.0]]),
            seed_record=0,
        )
        shrunk = shrink_particles([b], m)[0]
        assert shrunk.approx.mean[0] == pytest.approx(1.0 + 0.5 * 2.0)
        np.testing.assert_array_equal(shrunk.approx.cov, [[2.0]])


class TestAdjustReplicates:
    def test_identity_map_is_noop(self):
        rng = np.random.default_rng(4)
        bundles = random_pool(rng, 5, 2)
        m = AdjustmentMap(
            mu_l=np.zeros(2),
            mu_r=np.zeros(2),
            chol_c=np.eye(2),
            chol_t=np.eye(2),
            rho=1.0,
            scale=np.eye(2),
        )
        adjusted = adjust_replicates(bundles, m)
        for b, a in zip(bundles, adjusted):
            np.testing.assert_allclose(a.approx.particles, b.approx.particles, atol=1e-14)

    def test_scalar_worked_case(self):
        m = AdjustmentMap(
            mu_l=np.array([1.0]),
            mu_r=np.array([0.0]),
            chol_c=np.array([[1.0]]),
            chol_t=np.array([[0.5]]),
            rho=1.0,
            scale=np.array([[0.5]]),
        )
        b = ReplicateBundle(
            index=0,
            theta_true=np.array([0.0]),
            summary=np.zeros(1),
            approx=PosteriorApprox.from_particles([[2.5], [-1.5]]),  # mean 0.5
            seed_record=0,
        )
        adjusted = adjust_replicates([b], m)[0]
        # 1 + (0.5 - 0) + 0.5 (2.5 - 0.5) = 2.5
        assert adjusted.approx.particles[0, 0] == pytest.approx(2.5)

    def test_exactness_identities_random_pool(self):
        rng = np.random.default_rng(5)
        bundles = random_pool(rng, 50, 4)
        map_, adjusted = fit_and_apply(bundles)
        after = estimate_moments(adjusted)
        before = estimate_moments(bundles)
        np.testing.assert_allclose(after.mu_r, before.mu_l, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(after.sigma_r, before.sigma_l, rtol=1e-9, atol=1e-12)

    def test_exactness_with_shrinkage_path(self):
        rng = np.random.default_rng(6)
        bundles = random_pool(rng, 40, 3, mean_scale=3.0, spread=0.3)
        map_, adjusted = fit_and_apply(bundles)
        assert map_.rho < 1
        after = estimate_moments(adjusted)
        before = estimate_moments(bundles)
        np.testing.assert_allclose(after.mu_r, before.mu_l, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(after.sigma_r, before.sigma_l, rtol=1e-9, atol=1e-11)

    def test_idempotence(self):
        rng = np.random.default_rng(7)
        bundles = random_pool(rng, 80, 3)
        _, adjusted = fit_and_apply(bundles)
        remap = fit_adjustment(estimate_moments(adjusted))
        np.testing.assert_allclose(remap.scale, np.eye(3), atol=1e-6)
        np.testing.assert_allclose(remap.mu_l - remap.mu_r, np.zeros(3), atol=1e-6)

    def test_dimension_mismatch(self):
        m = AdjustmentMap(
            mu_l=np.zeros(2),
            mu_r=np.zeros(2),
            chol_c=np.eye(2),
            chol_t=np.eye(2),
            rho=1.0,
            scale=np.eye(2),
        )
        b = ReplicateBundle(
            index=0,
            theta_true=np.zeros(1),
            summary=np.zeros(1),
            approx=PosteriorApprox.from_particles([[0.0], [1.0]]),
            seed_record=0,
        )
        with pytest.raises(ValueError, match="dimension"):
            adjust_replicates([b], m)


class TestAdjustObserved:
    def test_identity_map_leaves_gaussian_unchanged(self):
        m = AdjustmentMap(
            mu_l=np.array([0.5]),
            mu_r=np.array([0.5]),
            chol_c=np.array([[1.0]]),
            chol_t=np.array([[1.0]]),
            rho=1.0,
            scale=np.array([[1.0]]),
        )
        obs = PosteriorApprox.from_moments([0.2], [[1.5]])
        out = adjust_observed(obs, m)
        np.testing.assert_allclose(out.mean, obs.mean)
        np.testing.assert_allclose(out.cov, obs.cov)

    def test_gaussian_scalar_hand_case(self):
        m = AdjustmentMap(
            mu_l=np.array([1.0]),
            mu_r=np.array([0.0]),
            chol_c=np.array([[1.0]]),
            chol_t=np.array([[0.5]]),
            rho=1.0,
            scale=np.array([[0.5]]),
        )
        out = adjust_observed(PosteriorApprox.from_moments([0.5], [[4.0]]), m)
        assert out.mean[0] == pytest.approx(1.5)
        assert out.cov[0, 0] == pytest.approx(1.0)

    def test_particle_mean_maps_exactly(self):
        rng = np.random.default_rng(10)
        particles = rng.standard_normal((200, 3))
        obs = PosteriorApprox.from_particles(particles)
        bundles = random_pool(rng, 30, 3)
        map_, _ = fit_and_apply(bundles)
        out = adjust_observed(obs, map_)
        expected = map_.mu_l + (particles.mean(axis=0) - map_.mu_r)
        np.testing.assert_allclose(out.particles.mean(axis=0), expected, atol=1e-12)

    def test_particle_and_gaussian_paths_agree(self):
        rng = np.random.default_rng(11)
        bundles = random_pool(rng, 40, 2)
        map_, _ = fit_and_apply(bundles)
        mean = np.array([0.4, -0.2])
        cov = np.array([[0.8, 0.3], [0.3, 0.5]])
        gauss = adjust_observed(PosteriorApprox.from_moments(mean, cov), map_)
        s = 100_000
        cloud = rng.multivariate_normal(mean, cov, size=s)
        part = adjust_observed(PosteriorApprox.from_particles(cloud), map_)
        emp_mean = part.particles.mean(axis=0)
        emp_cov = np.cov(part.particles.T, ddof=1)
        # 3 Monte Carlo standard errors
        se_mean = np.sqrt(np.diag(gauss.cov) / s)
        assert np.all(np.abs(emp_mean - gauss.mean) < 3 * se_mean)
        se_cov = np.sqrt(2.0 / (s - 1)) * np.sqrt(
            np.outer(np.diag(gauss.cov), np.diag(gauss.cov))
        )
        assert np.all(np.abs(emp_cov - gauss.cov) < 3 * se_cov + 1e-12)


class TestLinks:
    def test_resolve_single_name_broadcasts(self):
        links = resolve_links("log", 3)
        assert [l.name for l in links] == ["log", "log", "log"]

    def test_resolve_comma_list(self):
        links = resolve_links("identity,log,logit", 3)
        assert [l.name for l in links] == ["identity", "log", "logit"]

    def test_unknown_link_rejected(self):
        with pytest.raises(ValueError, match="unknown link"):
            resolve_links("cube", 1)

    def test_round_trip(self):
        rng = np.random.default_rng(13)
        links = resolve_links("log,logit", 2)
        theta = np.column_stack([rng.random(10) + 0.5, rng.random(10) * 0.8 + 0.1])
        bundles = [
            ReplicateBundle(
                index=i,
                theta_true=theta[i],
                summary=np.zeros(1),
                approx=PosteriorApprox.from_particles(
                    np.clip(theta[i] + 0.01 * rng.standard_normal((4, 2)), 0.05, 0.95)
                ),
                seed_record=i,
            )
            for i in range(10)
        ]
        forward = transform_bundles(bundles, links)
        back = transform_bundles(forward, links, inverse=True)
        for b, r in zip(bundles, back):
            np.testing.assert_allclose(r.theta_true, b.theta_true, rtol=1e-12)
            np.testing.assert_allclose(r.approx.particles, b.approx.particles, rtol=1e-12)

    def test_gaussian_rejects_nonidentity_links(self):
        links = resolve_links("log", 1)
        b = ReplicateBundle(
            index=0,
            theta_true=np.array([1.0]),
            summary=np.zeros(1),
            approx=PosteriorApprox.from_moments([1.0], [[0.1]]),
            seed_record=0,
        )
        with pytest.raises(ValueError, match="particle"):
            transform_bundles([b], links)
