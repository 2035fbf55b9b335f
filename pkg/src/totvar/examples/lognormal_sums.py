"""Likelihood-free inference for sums of i.i.d. lognormals.

Each observation is a sum of kappa independent LogNormal(mu, sigma^2)
variables, a model with an intractable density.  A Fenton-Wilkinson
approximation (a lognormal matched to the mean and variance of the sum)
gives a fast auxiliary likelihood; a Laplace approximation to the auxiliary
posterior over theta = (mu, eta) with eta = log sigma^2 serves as the
posterior approximator.  A rejection sampler on a large prior pool, keyed on
the same auxiliary summary, provides a gold-standard reference posterior.

The example pipeline conditions the replicate pool on the observed summary,
fits the total-variance adjustment, and compares unadjusted and adjusted
posterior moments for (mu, sigma) against the reference.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from ..adjust import adjust_observed, fit_and_apply
from ..assess import bootstrap_diagnostics, diagnostic_summary, write_diagnostics_csv
from ..errors import NumericalError
from ..models import (
    ConditioningRule,
    JointModel,
    PosteriorApprox,
    apply_conditioning,
    generate_replicates,
)
from ..moments import estimate_moments
from ..store import write_bundles, write_json

__all__ = [
    "FWParams",
    "FWPrior",
    "fw_moments",
    "make_model",
    "laplace_auxiliary_posterior",
    "laplace_modes_batch",
    "rejection_abc_oracle",
    "run_example",
]


@dataclass(frozen=True)
class FWParams:
    """Data-generating configuration: lognormal log-mean ``mu``,
    ``eta = log sigma^2``, the number of summands ``kappa``, and the number
    of observations ``n`` per dataset."""

    mu: float = 0.0
    eta: float = 0.0
    kappa: int = 10
    n: int = 10

    def __post_init__(self):
        if self.kappa < 1 or self.n < 1:
            raise ValueError("kappa and n must be at least 1")


@dataclass(frozen=True)
class FWPrior:
    """Independent priors: mu ~ Normal(mu_mean, mu_sd^2) and
    sigma ~ Gamma(sigma_shape, sigma_scale) (shape-scale form)."""

    mu_mean: float = 0.0
    mu_sd: float = 1.0
    sigma_shape: float = 1.0
    sigma_scale: float = 1.0


def fw_moments(mu, sigma2, kappa):
    """Lognormal parameters (m, s2) matching the mean and variance of a sum
    of ``kappa`` i.i.d. LogNormal(mu, sigma2) variables.

    For kappa = 1 the inputs are returned unchanged.  Accepts scalars or
    arrays; large sigma2 switches to an overflow-free equivalent form.
    """
    if kappa == 1:
        return mu, sigma2
    sigma2 = np.asarray(sigma2, dtype=float)
    big = sigma2 > 500.0
    # log((exp(v) - 1 + kappa) / kappa), written two ways for accuracy
    precise = np.log1p(np.expm1(np.where(big, 0.0, sigma2)) / kappa)
    stable = np.logaddexp(sigma2, np.log(kappa - 1.0)) - np.log(kappa)
    s2 = np.where(big, stable, precise)
    m = mu + np.log(kappa) + 0.5 * (sigma2 - s2)
    if np.isscalar(mu) and s2.ndim == 0:
        return float(m), float(s2)
    return m, s2


def make_model(params: FWParams, prior: FWPrior = FWPrior()) -> JointModel:
    """Joint model over theta = (mu, eta) with summed-lognormal data.

    The stored summary is the pair (mean, variance) of the log data, the
    sufficient statistic of the auxiliary lognormal family.
    """

    def prior_sampler(rng: np.random.Generator) -> np.ndarray:
        mu = prior.mu_mean + prior.mu_sd * rng.standard_normal()
        sigma = rng.gamma(prior.sigma_shape, prior.sigma_scale)
        return np.array([mu, 2.0 * np.log(sigma)])

    def simulate(theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return simulate_dataset(theta[0], theta[1], params, rng)

    def summarize(data: np.ndarray) -> np.ndarray:
        logs = np.log(data)
        return np.array([logs.mean(), logs.var()])

    return JointModel(
        dim_theta=2,
        prior_sampler=prior_sampler,
        data_simulator=simulate,
        summarizer=summarize,
    )


def simulate_dataset(mu: float, eta: float, params: FWParams, rng) -> np.ndarray:
    sigma = np.exp(0.5 * eta)
    draws = rng.lognormal(mean=mu, sigma=sigma, size=(params.n, params.kappa))
    return draws.sum(axis=1)


# ---------------------------------------------------------------------------
# Laplace approximation of the auxiliary posterior


def _suff_stats(data: np.ndarray):
    logs = np.log(np.asarray(data, dtype=float))
    return float(logs.sum()), float(np.square(logs).sum()), logs.shape[0]


def _log_h_and_grad(mu, eta, l1, l2, n, kappa, prior: FWPrior):
    """Log prior plus auxiliary log likelihood (up to additive constants)
    and its analytic gradient in (mu, eta).  Vectorized; regions where the
    objective overflows evaluate to -inf."""
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        sigma2 = np.exp(np.asarray(eta, dtype=float))
        if kappa == 1:
            s2 = sigma2
            ds2_deta = sigma2
            m = np.asarray(mu, dtype=float) + 0.0 * sigma2
            dm_deta = np.zeros_like(sigma2)
        else:
            log_km1 = np.log(kappa - 1.0)
            big = sigma2 > 500.0
            # log1p/expm1 keeps full relative precision for small sigma2;
            # logaddexp avoids overflow for large sigma2
            precise = np.log1p(np.expm1(np.where(big, 0.0, sigma2)) / kappa)
            stable = np.logaddexp(sigma2, log_km1) - np.log(kappa)
            s2 = np.where(big, stable, precise)
            ds2_deta = sigma2 * expit(sigma2 - log_km1)
            m = mu + np.log(kappa) + 0.5 * (sigma2 - s2)
            dm_deta = 0.5 * (sigma2 - ds2_deta)
        # centred form of sum (log y - m)^2 avoids cancellation across evals
        m_hat = l1 / n
        ss = l2 - l1 * m_hat
        q = ss + n * (m - m_hat) ** 2
        loglik = -0.5 * n * np.log(s2) - q / (2.0 * s2)
        dll_dm = n * (m_hat - m) / s2
        dll_ds2 = -0.5 * n / s2 + q / (2.0 * s2 * s2)

        z = (mu - prior.mu_mean) / prior.mu_sd
        sigma = np.exp(0.5 * np.asarray(eta, dtype=float))
        logprior = (
            -0.5 * z * z
            + 0.5 * prior.sigma_shape * eta
            - sigma / prior.sigma_scale
        )
        value = loglik + logprior
        g_mu = dll_dm - z / prior.mu_sd
        g_eta = (
            dll_dm * dm_deta
            + dll_ds2 * ds2_deta
            + 0.5 * prior.sigma_shape
            - 0.5 * sigma / prior.sigma_scale
        )
    value = np.where(np.isfinite(value), value, -np.inf)
    return value, g_mu, g_eta


def _log_h(mu, eta, l1, l2, n, kappa, prior: FWPrior):
    return _log_h_and_grad(mu, eta, l1, l2, n, kappa, prior)[0]


def _start_points(l1, l2, n, kappa):
    """Moment-matched start: invert the auxiliary parameters at the
    empirical mean and variance of the log data, then two fixed offsets."""
    m_hat = l1 / n
    s2_hat = max(l2 / n - m_hat * m_hat, 1e-12)
    sigma2 = np.log1p(kappa * np.expm1(s2_hat)) if kappa > 1 else s2_hat
    mu = m_hat - np.log(kappa) - 0.5 * (sigma2 - s2_hat)
    base = np.array([mu, np.log(sigma2)])
    return [base, base + np.array([0.5, 0.5]), base - np.array([0.5, 0.5])]


def _fd_hessian(f, x: np.ndarray, rel_step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian with per-coordinate step rel_step*(1+|x|)."""
    d = x.shape[0]
    h = rel_step * (1.0 + np.abs(x))
    hess = np.empty((d, d))
    for j in range(d):
        ej = np.zeros(d)
        ej[j] = h[j]
        hess[j, j] = (f(x + ej) - 2.0 * f(x) + f(x - ej)) / h[j] ** 2
        for k in range(j + 1, d):
            ek = np.zeros(d)
            ek[k] = h[k]
            hess[j, k] = hess[k, j] = (
                f(x + ej + ek) - f(x + ej - ek) - f(x - ej + ek) + f(x - ej - ek)
            ) / (4.0 * h[j] * h[k])
    return hess


def _gaussian_from_mode(neg_log_h, mode: np.ndarray) -> PosteriorApprox:
    """Laplace approximation: mean at the mode, covariance the inverse of the
    finite-difference Hessian of the negative log density."""
    hess = _fd_hessian(neg_log_h, mode)
    hess = 0.5 * (hess + hess.T)
    try:
        np.linalg.cholesky(hess)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Laplace approximation invalid at mode") from exc
    cov = np.linalg.inv(hess)
    cov = 0.5 * (cov + cov.T)
    return PosteriorApprox.from_moments(mode, cov)


def _is_stationary(hess: np.ndarray, grad: np.ndarray, value: float) -> bool:
    """Curvature-scaled stationarity: the Newton decrement bounds the
    remaining objective improvement, which must be below resolution."""
    try:
        decrement = float(grad @ np.linalg.solve(hess, grad))
    except np.linalg.LinAlgError:
        return False
    return 0.5 * abs(decrement) <= 1e-9 * (1.0 + abs(value))


def laplace_auxiliary_posterior(
    data,
    prior: FWPrior = FWPrior(),
    kappa: int = 10,
    fixed_eta: float | None = None,
) -> PosteriorApprox:
    """Gaussian approximation of the auxiliary posterior over (mu, eta).

    Maximizes log prior plus auxiliary log likelihood by quasi-Newton from
    three deterministic starts, then inverts a central finite-difference
    Hessian at the mode.  With ``fixed_eta`` the optimization runs over mu
    alone and a one-dimensional Gaussian over mu is returned.

    Raises
    ------
    NumericalError
        If no start converges, or the Hessian at the mode is not positive
        definite.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 1 or data.size < 1 or np.any(data <= 0):
        raise ValueError("data must be a vector of positive values")
    l1, l2, n = _suff_stats(data)

    if fixed_eta is None:
        def neg(x):
            return -_log_h(x[0], x[1], l1, l2, n, kappa, prior)

        def neg_with_grad(x):
            v, g1, g2 = _log_h_and_grad(x[0], x[1], l1, l2, n, kappa, prior)
            return -v, -np.array([g1, g2])

        starts = _start_points(l1, l2, n, kappa)
    else:
        def neg(x):
            return -_log_h(x[0], fixed_eta, l1, l2, n, kappa, prior)

        def neg_with_grad(x):
            v, g1, _ = _log_h_and_grad(x[0], fixed_eta, l1, l2, n, kappa, prior)
            return -v, -np.array([g1])

        m0 = l1 / n - (np.log(kappa) if kappa > 1 else 0.0)
        starts = [np.array([m0]), np.array([m0 + 0.5]), np.array([m0 - 0.5])]

    best = None
    for x0 in starts:
        res = minimize(
            neg_with_grad, x0, jac=True, method="BFGS",
            options={"gtol": 1e-7, "maxiter": 200},
        )
        if best is None or res.fun < best.fun:
            best = res
    mode = np.asarray(best.x)
    grad_ok = best.success or (
        np.linalg.norm(best.jac) <= 1e-5 * (1.0 + np.linalg.norm(mode))
    )
    if not grad_ok:
        # gradient norms are curvature-dependent; accept a stationary point
        # by Newton decrement before declaring failure
        hess = _fd_hessian(neg, mode)
        if not _is_stationary(0.5 * (hess + hess.T), np.asarray(best.jac), float(best.fun)):
            raise NumericalError(
                f"Laplace mode search did not converge; best iterate {mode} "
                f"with objective {-float(best.fun):.6g}"
            )
    return _gaussian_from_mode(neg, mode)


def laplace_modes_batch(
    l1: np.ndarray,
    l2: np.ndarray,
    n: int,
    kappa: int = 10,
    prior: FWPrior = FWPrior(),
    max_iter: int = 60,
) -> np.ndarray:
    """Auxiliary posterior modes for many datasets at once.

    Damped Newton on (mu, eta) with finite-difference derivatives, run
    simultaneously over all datasets from the same three starts as the
    single-dataset path; per dataset the best converged start wins.  Used to
    build large summary pools where a per-dataset optimizer would dominate
    the runtime; agrees with laplace_auxiliary_posterior to optimizer
    tolerance.
    """
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    size = l1.shape[0]

    def value(mu, eta):
        return _log_h_and_grad(mu, eta, l1, l2, n, kappa, prior)[0]

    def grad(mu, eta):
        _, g1, g2 = _log_h_and_grad(mu, eta, l1, l2, n, kappa, prior)
        return g1, g2

    def hessian(mu, eta):
        # central differences of the analytic gradient
        h1 = 1e-6 * (1.0 + np.abs(mu))
        h2 = 1e-6 * (1.0 + np.abs(eta))
        gp1 = grad(mu + h1, eta)
        gm1 = grad(mu - h1, eta)
        gp2 = grad(mu, eta + h2)
        gm2 = grad(mu, eta - h2)
        h11 = (gp1[0] - gm1[0]) / (2 * h1)
        h22 = (gp2[1] - gm2[1]) / (2 * h2)
        hx = 0.5 * ((gp1[1] - gm1[1]) / (2 * h1) + (gp2[0] - gm2[0]) / (2 * h2))
        return h11, hx, h22

    m_hat = l1 / n
    s2_hat = np.maximum(l2 / n - m_hat**2, 1e-12)
    sigma2 = np.log1p(kappa * np.expm1(s2_hat)) if kappa > 1 else s2_hat
    mu0 = m_hat - np.log(kappa) - 0.5 * (sigma2 - s2_hat)
    eta0 = np.log(sigma2)
    starts = [(mu0, eta0), (mu0 + 0.5, eta0 + 0.5), (mu0 - 0.5, eta0 - 0.5)]

    best_val = np.full(size, -np.inf)
    best_mu = np.array(mu0)
    best_eta = np.array(eta0)
    any_converged = np.zeros(size, dtype=bool)
    for mu_s, eta_s in starts:
        mu = np.array(mu_s, dtype=float)
        eta = np.array(eta_s, dtype=float)
        converged = np.zeros(size, dtype=bool)
        for _ in range(max_iter):
            f0 = value(mu, eta)
            g1, g2 = grad(mu, eta)
            h11, hx, h22 = hessian(mu, eta)
            det = h11 * h22 - hx * hx
            # Newton step for maximization is safe where the Hessian of the
            # objective is negative definite; fall back to gradient ascent
            safe = (h11 < 0) & (det > 0)
            # gradient-ascent fallback with bounded step where the Hessian
            # is not usable
            gscale = 1.0 + np.maximum(np.abs(g1), np.abs(g2))
            d1 = np.where(safe, -(h22 * g1 - hx * g2) / det, g1 / gscale)
            d2 = np.where(safe, -(h11 * g2 - hx * g1) / det, g2 / gscale)
            gnorm = np.maximum(np.abs(g1), np.abs(g2))
            decrement = d1 * g1 + d2 * g2
            converged |= gnorm <= 1e-8 * (1.0 + np.maximum(np.abs(mu), np.abs(eta)))
            converged |= safe & (0.5 * decrement <= 1e-12 * (1.0 + np.abs(f0)))
            if np.all(converged):
                break
            alpha = np.ones(size)
            worse = np.zeros(size, dtype=bool)
            for _ in range(40):
                trial = value(mu + alpha * d1, eta + alpha * d2)
                worse = ~converged & (~np.isfinite(trial) | (trial < f0))
                if not np.any(worse):
                    break
                alpha = np.where(worse, alpha * 0.5, alpha)
            keep = converged | worse
            mu = np.where(keep, mu, mu + alpha * d1)
            eta = np.where(keep, eta, eta + alpha * d2)
        val = value(mu, eta)
        better = converged & (val > best_val)
        best_mu = np.where(better, mu, best_mu)
        best_eta = np.where(better, eta, best_eta)
        best_val = np.where(better, val, best_val)
        any_converged |= converged
    if not np.all(any_converged):
        bad = int(np.flatnonzero(~any_converged)[0])
        raise NumericalError(
            f"batch mode search failed to converge for dataset {bad}"
        )
    return np.column_stack([best_mu, best_eta])


# ---------------------------------------------------------------------------
# Rejection sampler reference


def rejection_abc_oracle(
    obs_summary,
    pool_thetas,
    pool_summaries,
    accept_count: int,
    weights=None,
) -> np.ndarray:
    """Reference posterior sample: parameters of the pool entries whose
    summaries are nearest the observed summary in squared weighted
    Euclidean distance.

    Returns the accepted parameter rows in pool order.  Weights default to
    the per-coordinate mean absolute deviations of the pool summaries.
    """
    pool_thetas = np.asarray(pool_thetas, dtype=float)
    pool_summaries = np.asarray(pool_summaries, dtype=float)
    obs = np.asarray(obs_summary, dtype=float)
    if pool_thetas.shape[0] == 0:
        raise ValueError("empty reference pool")
    if accept_count < 1 or accept_count > pool_thetas.shape[0]:
        raise ValueError("accept_count must lie in [1, pool size]")
    if weights is None:
        weights = summary_mad(pool_summaries)
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    z = (pool_summaries - obs) / w
    d = np.einsum("ij,ij->i", z, z)
    order = np.argsort(d, kind="stable")[:accept_count]
    return pool_thetas[np.sort(order)]


def summary_mad(summaries: np.ndarray) -> np.ndarray:
    """Per-coordinate mean absolute deviation about the mean."""
    s = np.asarray(summaries, dtype=float)
    return np.mean(np.abs(s - s.mean(axis=0)), axis=0)


# ---------------------------------------------------------------------------
# End-to-end example


def _mu_sigma_moments_from_gaussian(approx: PosteriorApprox, seed: int, s: int = 4000):
    """Report posterior mean and sd of (mu, sigma) by sampling the Gaussian
    over (mu, eta) and mapping eta to sigma."""
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(approx.cov + 1e-12 * np.eye(2))
    draws = approx.mean + rng.standard_normal((s, 2)) @ chol.T
    return _mu_sigma_moments_from_particles(draws)


def _mu_sigma_moments_from_particles(thetas: np.ndarray):
    mu = thetas[:, 0]
    sigma = np.exp(0.5 * thetas[:, 1])
    return {
        "mean": [float(mu.mean()), float(sigma.mean())],
        "sd": [float(mu.std(ddof=1)), float(sigma.std(ddof=1))],
    }


def reference_distance(stats: dict, reference: dict) -> float:
    """Scale-free squared distance between (mean, sd) summaries, normalized
    by the reference sd per parameter."""
    total = 0.0
    for p in range(2):
        scale = reference["sd"][p]
        total += ((stats["mean"][p] - reference["mean"][p]) / scale) ** 2
        total += ((stats["sd"][p] - reference["sd"][p]) / scale) ** 2
    return float(total)


def run_example(
    r_pool: int = 10_000,
    keep: int = 1000,
    seed: int = 0,
    params: FWParams = FWParams(),
    prior: FWPrior = FWPrior(),
    abc_pool: int = 100_000,
    abc_accept: int = 200,
    b_count: int = 500,
    jitter: float = 0.0,
    out_dir=None,
    reference_pool=None,
) -> dict:
    """Full likelihood-free pipeline with a rejection-sampler reference.

    Builds a prior pool of Laplace approximations, conditions on the
    observed auxiliary summary (keep nearest), fits and applies the
    adjustment, and reports unadjusted, adjusted and reference posterior
    moments for (mu, sigma).  ``reference_pool`` accepts a precomputed
    (thetas, summaries) pair so the expensive reference pool can be shared
    across runs; otherwise it is generated from a dedicated seed stream.
    """
    if keep > r_pool:
        raise ValueError("keep must not exceed the pool size")
    pool_seed, obs_seed, abc_seed, report_seed, boot_seed = (
        int(s) for s in np.random.SeedSequence(int(seed)).generate_state(5, np.uint64)
    )
    model = make_model(params, prior)

    def approximator(data, seed_):
        return laplace_auxiliary_posterior(data, prior=prior, kappa=params.kappa)

    bundles = generate_replicates(model, approximator, r_pool, pool_seed)
    # condition on the auxiliary-model point estimate, i.e. the Laplace mean
    bundles = [replace(b, summary=b.approx.mean.copy()) for b in bundles]

    obs_rng = np.random.default_rng(obs_seed)
    observed = simulate_dataset(params.mu, params.eta, params, obs_rng)
    obs_approx = laplace_auxiliary_posterior(observed, prior=prior, kappa=params.kappa)
    obs_summary = obs_approx.mean

    weights = summary_mad(np.array([b.summary for b in bundles]))
    rule = ConditioningRule(keep_count=keep, weights=weights)
    retained = apply_conditioning(bundles, rule, obs_summary)

    summary = estimate_moments(retained)
    map_, adjusted = fit_and_apply(retained, jitter=jitter)
    adjusted_obs = adjust_observed(obs_approx, map_)
    diag = bootstrap_diagnostics(retained, b_count, boot_seed)

    if reference_pool is None:
        reference_pool = make_reference_pool(abc_pool, abc_seed, params, prior)
    ref_thetas, ref_summaries = reference_pool
    reference = rejection_abc_oracle(obs_summary, ref_thetas, ref_summaries, abc_accept)

    stats_unadj = _mu_sigma_moments_from_gaussian(obs_approx, report_seed)
    stats_adj = _mu_sigma_moments_from_gaussian(adjusted_obs, report_seed)
    stats_ref = _mu_sigma_moments_from_particles(reference)

    report = {
        "config": {
            "r_pool": r_pool,
            "keep": keep,
            "seed": seed,
            "abc_pool": int(np.asarray(ref_thetas).shape[0]),
            "abc_accept": abc_accept,
            "b_count": b_count,
            "jitter": jitter,
            "kappa": params.kappa,
            "n": params.n,
            "observed_mu": params.mu,
            "observed_eta": params.eta,
            "prior": prior.__dict__,
        },
        "moments": summary.to_dict(),
        "adjustment": map_.to_dict(),
        "diagnostics": diagnostic_summary(diag),
        "unadjusted": stats_unadj,
        "adjusted": stats_adj,
        "reference": stats_ref,
        "distance_unadjusted": reference_distance(stats_unadj, stats_ref),
        "distance_adjusted": reference_distance(stats_adj, stats_ref),
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(report["config"], out / "config.json")
        write_bundles(bundles, out / "replicates.jsonl")
        write_json(report["moments"], out / "moments.json")
        write_json(report["adjustment"], out / "adjustment.json")
        write_diagnostics_csv(diag, out / "diagnostics.csv")
        write_json(
            {k: report[k] for k in (
                "diagnostics", "unadjusted", "adjusted", "reference",
                "distance_unadjusted", "distance_adjusted",
            )},
            out / "report.json",
        )
    report["_map"] = map_
    report["_retained"] = retained
    report["_adjusted_obs"] = adjusted_obs
    return report


def make_reference_pool(
    size: int, seed: int, params: FWParams, prior: FWPrior = FWPrior()
):
    """Draw (theta, auxiliary summary) pairs from the prior predictive.

    Summaries are auxiliary posterior modes computed with the batched
    optimizer; dataset i derives from the stream (seed, i) so the pool can
    be regenerated or extended deterministically.
    """
    rng = np.random.default_rng(seed)
    mus = prior.mu_mean + prior.mu_sd * rng.standard_normal(size)
    sigmas = rng.gamma(prior.sigma_shape, prior.sigma_scale, size=size)
    etas = 2.0 * np.log(sigmas)
    # lognormal sums for all datasets in one vectorized pass
    normals = rng.standard_normal((size, params.n, params.kappa))
    draws = np.exp(mus[:, None, None] + np.sqrt(np.exp(etas))[:, None, None] * normals)
    data = draws.sum(axis=2)
    logs = np.log(data)
    l1 = logs.sum(axis=1)
    l2 = np.square(logs).sum(axis=1)
    thetas = np.column_stack([mus, etas])
    summaries = laplace_modes_batch(l1, l2, params.n, kappa=params.kappa, prior=prior)
    return thetas, summaries
