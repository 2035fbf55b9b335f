"""Sample estimators for the prior/posterior moment identities.

For a pool of replicates the tower property and the law of total variance
say that the prior mean equals the average posterior mean and the prior
covariance equals the average posterior covariance plus the covariance of
the posterior means.  This module computes both sides from a replicate
pool: the left side from the true parameter draws, the right side from the
attached posterior approximations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .models import GAUSSIAN, PARTICLES, PosteriorApprox, ReplicateBundle

__all__ = [
    "PerReplicateMoments",
    "MomentSummary",
    "per_replicate_moments",
    "estimate_moments",
]


@dataclass(frozen=True)
class PerReplicateMoments:
    """Posterior mean and covariance extracted from one approximation."""

    mu: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class MomentSummary:
    """Both sides of the moment identities over a replicate pool.

    Attributes
    ----------
    mu_l, sigma_l : prior-sample estimates of mean and covariance
        (divisors I and I-1).
    mu_r : average of the per-replicate posterior means (divisor I).
    sigma_r1 : average of the per-replicate posterior covariances
        (divisor I).
    sigma_r2 : covariance of the per-replicate posterior means
        (divisor I-1).
    i_used : number of replicates aggregated.

    The right-hand covariance estimate is ``sigma_r = sigma_r1 + sigma_r2``.
    """

    mu_l: np.ndarray
    mu_r: np.ndarray
    sigma_l: np.ndarray
    sigma_r1: np.ndarray
    sigma_r2: np.ndarray
    i_used: int

    def __post_init__(self):
        if self.i_used < 2:
            raise ValueError("moment summary needs at least 2 replicates")
        for name in ("sigma_l", "sigma_r1", "sigma_r2"):
            m = getattr(self, name)
            scale = max(float(np.max(np.abs(m))), 1e-300)
            if float(np.max(np.abs(m - m.T))) > 1e-12 * scale:
                raise ValueError(f"{name} is not symmetric")
        # sample covariances are PSD by construction; allow eigenvalue
        # round-off down to -1e-10 relative
        for name in ("sigma_l", "sigma_r2"):
            m = getattr(self, name)
            lo = float(np.min(np.linalg.eigvalsh(m)))
            scale = max(float(np.max(np.abs(m))), 1e-300)
            if lo < -1e-10 * scale:
                raise ValueError(f"{name} has eigenvalue {lo} below tolerance")

    @property
    def sigma_r(self) -> np.ndarray:
        return self.sigma_r1 + self.sigma_r2

    @property
    def dim(self) -> int:
        return self.mu_l.shape[0]

    def to_dict(self) -> dict:
        return {
            "mu_l": self.mu_l.tolist(),
            "mu_r": self.mu_r.tolist(),
            "sigma_l": self.sigma_l.tolist(),
            "sigma_r1": self.sigma_r1.tolist(),
            "sigma_r2": self.sigma_r2.tolist(),
            "sigma_r": self.sigma_r.tolist(),
            "i_used": self.i_used,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MomentSummary":
        return cls(
            mu_l=np.asarray(d["mu_l"], dtype=float),
            mu_r=np.asarray(d["mu_r"], dtype=float),
            sigma_l=np.asarray(d["sigma_l"], dtype=float),
            sigma_r1=np.asarray(d["sigma_r1"], dtype=float),
            sigma_r2=np.asarray(d["sigma_r2"], dtype=float),
            i_used=int(d["i_used"]),
        )


def per_replicate_moments(approx: PosteriorApprox) -> PerReplicateMoments:
    """Mean and covariance of one posterior approximation.

    Particle form: sample mean and covariance with divisor S-1.  Gaussian
    form: the stored moments pass through unchanged.
    """
    if approx.form == GAUSSIAN:
        return PerReplicateMoments(mu=approx.mean.copy(), sigma=approx.cov.copy())
    p = approx.particles
    if p.shape[0] < 2:
        raise ValueError("need S >= 2 particles for the S-1 divisor")
    mu = p.mean(axis=0)
    dev = p - mu
    sigma = dev.T @ dev / (p.shape[0] - 1)
    sigma = 0.5 * (sigma + sigma.T)
    return PerReplicateMoments(mu=mu, sigma=sigma)


def _triple_arrays(bundles: Sequence[ReplicateBundle]):
    """Per-replicate triples (theta, posterior mean, posterior covariance),
    stably ordered by replicate index so aggregation is order-independent."""
    order = sorted(range(len(bundles)), key=lambda i: bundles[i].index)
    dim = bundles[order[0]].dim_theta
    thetas = np.empty((len(bundles), dim))
    mus = np.empty((len(bundles), dim))
    sigmas = np.empty((len(bundles), dim, dim))
    for row, i in enumerate(order):
        b = bundles[i]
        if b.dim_theta != dim or b.approx.dim != dim:
            raise ValueError(
                f"bundle {b.index}: parameter dimension differs across the pool"
            )
        pm = per_replicate_moments(b.approx)
        thetas[row] = b.theta_true
        mus[row] = pm.mu
        sigmas[row] = pm.sigma
    return thetas, mus, sigmas


def reduce_triples(thetas: np.ndarray, mus: np.ndarray, sigmas: np.ndarray) -> MomentSummary:
    """Aggregate per-replicate triples into a MomentSummary.

    The rows must already be in the canonical (index-sorted) order; the
    bootstrap reuses this reduction on resampled rows.
    """
    n = thetas.shape[0]
    if n < 2:
        raise ValueError("moment estimation needs at least 2 replicates")
    mu_l = thetas.mean(axis=0)
    dev_l = thetas - mu_l
    sigma_l = dev_l.T @ dev_l / (n - 1)
    sigma_l = 0.5 * (sigma_l + sigma_l.T)
    mu_r = mus.mean(axis=0)
    dev_r = mus - mu_r
    sigma_r2 = dev_r.T @ dev_r / (n - 1)
    sigma_r2 = 0.5 * (sigma_r2 + sigma_r2.T)
    sigma_r1 = sigmas.mean(axis=0)
    sigma_r1 = 0.5 * (sigma_r1 + sigma_r1.T)
    return MomentSummary(
        mu_l=mu_l,
        mu_r=mu_r,
        sigma_l=sigma_l,
        sigma_r1=sigma_r1,
        sigma_r2=sigma_r2,
        i_used=n,
    )


def estimate_moments(bundles: Sequence[ReplicateBundle]) -> MomentSummary:
    """Estimate both sides of the moment identities from a replicate pool.

    Aggregation order is fixed by replicate index, so permuting the input
    list leaves the result bitwise unchanged.
    """
    if len(bundles) < 2:
        raise ValueError("moment estimation needs at least 2 replicates")
    return reduce_triples(*_triple_arrays(bundles))
