"""Affine adjustment of posterior approximations so the prior/posterior
moment identities hold exactly over a replicate pool.

The fitted map recentres each replicate's particles on the prior-sample mean
and rescales them by T C^{-1}, where C C^T factors the average posterior
covariance and T T^T factors the prior covariance minus the covariance of
posterior means.  When that difference is indefinite, posterior means are
first shrunk towards their grand mean by sqrt(rho), with rho chosen so the
smallest eigenvalue of the shrunk difference matches the smallest eigenvalue
of the average posterior covariance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import expit, logit

from .errors import NumericalError
from .models import GAUSSIAN, PosteriorApprox, ReplicateBundle
from .moments import MomentSummary, estimate_moments, per_replicate_moments

__all__ = [
    "AdjustmentMap",
    "fit_adjustment",
    "shrink_particles",
    "adjust_replicates",
    "adjust_observed",
    "fit_and_apply",
    "Link",
    "LINKS",
    "resolve_links",
    "transform_bundles",
    "transform_approx",
]

_RHO_TOL = 1e-10


@dataclass(frozen=True)
class AdjustmentMap:
    """A fitted affine correction.

    ``chol_c`` and ``chol_t`` are lower-triangular Cholesky factors with
    strictly positive diagonals; ``scale`` caches chol_t @ chol_c^{-1}.
    ``rho`` is 1 unless mean shrinkage was required.  The coordinate order
    of the pool the map was fitted on is frozen into the factors, so a map
    must only be applied to approximations with the same parameter layout.
    """

    mu_l: np.ndarray
    mu_r: np.ndarray
    chol_c: np.ndarray
    chol_t: np.ndarray
    rho: float
    scale: np.ndarray

    def __post_init__(self):
        for name in ("chol_c", "chol_t"):
            f = getattr(self, name)
            if np.any(np.diag(f) <= 0):
                raise ValueError(f"{name} must have a strictly positive diagonal")
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0, 1]")

    @property
    def dim(self) -> int:
        return self.mu_l.shape[0]

    def to_dict(self) -> dict:
        return {
            "mu_l": self.mu_l.tolist(),
            "mu_r": self.mu_r.tolist(),
            "chol_c": self.chol_c.tolist(),
            "chol_t": self.chol_t.tolist(),
            "rho": self.rho,
            "scale": self.scale.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AdjustmentMap":
        return cls(
            mu_l=np.asarray(d["mu_l"], dtype=float),
            mu_r=np.asarray(d["mu_r"], dtype=float),
            chol_c=np.asarray(d["chol_c"], dtype=float),
            chol_t=np.asarray(d["chol_t"], dtype=float),
            rho=float(d["rho"]),
            scale=np.asarray(d["scale"], dtype=float),
        )


def _lambda_min(m: np.ndarray) -> float:
    return float(np.min(np.linalg.eigvalsh(0.5 * (m + m.T))))


def fit_adjustment(summary: MomentSummary, jitter: float = 0.0) -> AdjustmentMap:
    """Fit the affine adjustment from a moment summary.

    Parameters
    ----------
    summary : MomentSummary
    jitter : float
        Non-negative ridge added to the average posterior covariance before
        factorization, for pools whose within-replicate spread is nearly
        degenerate.

    Raises
    ------
    NumericalError
        If the average posterior covariance is singular after jitter, or if
        no shrinkage factor in (0, 1) can make the recentred difference
        positive definite.
    """
    if jitter < 0:
        raise ValueError("jitter must be non-negative")
    dim = summary.dim
    sigma_r1 = summary.sigma_r1 + jitter * np.eye(dim)
    try:
        chol_c = np.linalg.cholesky(sigma_r1)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "within-replicate covariance singular; increase S or jitter"
        ) from exc

    diff = summary.sigma_l - summary.sigma_r2
    if _lambda_min(diff) > 0:
        rho = 1.0
        target_matrix = diff
    else:
        target = _lambda_min(sigma_r1)
        lo_val = _lambda_min(summary.sigma_l)  # limit of the difference as rho -> 0
        if lo_val < target:
            raise NumericalError(
                "no shrinkage factor in (0, 1) can reach the required "
                f"smallest eigenvalue: prior covariance has lambda_min={lo_val:.6g} "
                f"below the within-replicate lambda_min={target:.6g}"
            )
        lo, hi = 0.0, 1.0
        while hi - lo > _RHO_TOL:
            mid = 0.5 * (lo + hi)
            # lambda_min is nonincreasing in rho, so bisection is safe
            if _lambda_min(summary.sigma_l - mid * summary.sigma_r2) >= target:
                lo = mid
            else:
                hi = mid
        rho = 0.5 * (lo + hi)
        target_matrix = summary.sigma_l - rho * summary.sigma_r2
    try:
        chol_t = np.linalg.cholesky(0.5 * (target_matrix + target_matrix.T))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "prior-minus-mean covariance factorization failed after shrinkage"
        ) from exc
    # scale = chol_t @ chol_c^{-1} via a triangular solve on the right
    scale = solve_triangular(chol_c.T, chol_t.T, lower=False).T
    return AdjustmentMap(
        mu_l=summary.mu_l.copy(),
        mu_r=summary.mu_r.copy(),
        chol_c=chol_c,
        chol_t=chol_t,
        rho=rho,
        scale=scale,
    )


def _check_dim(dim: int, map_: AdjustmentMap) -> None:
    if dim != map_.dim:
        raise ValueError(
            f"dimension {dim} does not match the fitted map dimension {map_.dim}"
        )


def shrink_particles(
    bundles: Sequence[ReplicateBundle], map_: AdjustmentMap
) -> list[ReplicateBundle]:
    """Shrink each replicate's posterior mean towards the grand mean by
    sqrt(rho), leaving within-replicate spread untouched.

    The covariance of the posterior means contracts by the factor rho while
    the grand mean and every per-replicate covariance stay fixed.  Gaussian
    approximations get the equivalent shift of their stored mean.
    """
    root = np.sqrt(map_.rho)
    out = []
    for b in bundles:
        _check_dim(b.approx.dim, map_)
        a = b.approx
        if a.form == GAUSSIAN:
            new_mean = map_.mu_r + root * (a.mean - map_.mu_r)
            new_approx = PosteriorApprox.from_moments(new_mean, a.cov)
        else:
            mu_i = a.particles.mean(axis=0)
            shifted = map_.mu_r + root * (mu_i - map_.mu_r) + (a.particles - mu_i)
            new_approx = PosteriorApprox.from_particles(shifted)
        out.append(replace(b, approx=new_approx))
    return out


def _adjust_approx(approx: PosteriorApprox, map_: AdjustmentMap) -> PosteriorApprox:
    _check_dim(approx.dim, map_)
    if approx.form == GAUSSIAN:
        new_mean = map_.mu_l + (approx.mean - map_.mu_r)
        new_cov = map_.scale @ approx.cov @ map_.scale.T
        return PosteriorApprox.from_moments(new_mean, 0.5 * (new_cov + new_cov.T))
    mu_i = approx.particles.mean(axis=0)
    centred = approx.particles - mu_i
    new_particles = map_.mu_l + (mu_i - map_.mu_r) + centred @ map_.scale.T
    return PosteriorApprox.from_particles(new_particles)


def adjust_replicates(
    bundles: Sequence[ReplicateBundle], map_: AdjustmentMap
) -> list[ReplicateBundle]:
    """Apply the affine adjustment to every replicate's approximation.

    When the map was fitted on this pool (after shrinkage if rho < 1), the
    re-estimated right-hand moments of the adjusted pool equal the
    left-hand moments exactly up to round-off.
    """
    return [replace(b, approx=_adjust_approx(b.approx, map_)) for b in bundles]


def adjust_observed(obs_approx: PosteriorApprox, map_: AdjustmentMap) -> PosteriorApprox:
    """Adjust the posterior approximation for the observed data.

    Particle form maps each particle through the fitted affine correction
    around the approximation's own mean; Gaussian form maps the mean and
    transforms the covariance by scale on both sides.
    """
    return _adjust_approx(obs_approx, map_)


def fit_and_apply(
    bundles: Sequence[ReplicateBundle], jitter: float = 0.0
) -> tuple[AdjustmentMap, list[ReplicateBundle]]:
    """Estimate moments, fit the map, shrink if required, and adjust.

    Returns the fitted map and the adjusted pool.
    """
    map_ = fit_adjustment(estimate_moments(bundles), jitter=jitter)
    if map_.rho < 1.0:
        bundles = shrink_particles(bundles, map_)
    return map_, adjust_replicates(bundles, map_)


# ---------------------------------------------------------------------------
# Coordinate links
#
# The adjustment assumes unrestricted parameter coordinates.  Constrained
# coordinates can be mapped to the real line before moment estimation and
# back after adjustment.


@dataclass(frozen=True)
class Link:
    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]


LINKS = {
    "identity": Link("identity", lambda x: x, lambda x: x),
    "log": Link("log", np.log, np.exp),
    "logit": Link("logit", logit, expit),
}


def resolve_links(names: str | Sequence[str], dim: int) -> list[Link]:
    """Resolve a comma-separated spec or name list into per-coordinate links.

    A single name applies to every coordinate.
    """
    if isinstance(names, str):
        names = [n.strip() for n in names.split(",")]
    if len(names) == 1:
        names = list(names) * dim
    if len(names) != dim:
        raise ValueError(f"expected {dim} links, got {len(names)}")
    try:
        return [LINKS[n] for n in names]
    except KeyError as exc:
        raise ValueError(
            f"unknown link {exc.args[0]!r}; choose from {sorted(LINKS)}"
        ) from exc


def _map_columns(x: np.ndarray, links: Sequence[Link], inverse: bool) -> np.ndarray:
    out = np.array(x, dtype=float, copy=True)
    cols = out.reshape(-1, out.shape[-1])
    for j, link in enumerate(links):
        f = link.inverse if inverse else link.forward
        cols[:, j] = f(cols[:, j])
    return out


def transform_approx(
    approx: PosteriorApprox, links: Sequence[Link], inverse: bool = False
) -> PosteriorApprox:
    if all(l.name == "identity" for l in links):
        return approx
    if approx.form == GAUSSIAN:
        raise ValueError(
            "non-identity links apply to particle approximations only; "
            "draw particles from the Gaussian first"
        )
    return PosteriorApprox.from_particles(
        _map_columns(approx.particles, links, inverse)
    )


def transform_bundles(
    bundles: Sequence[ReplicateBundle], links: Sequence[Link], inverse: bool = False
) -> list[ReplicateBundle]:
    """Apply per-coordinate links to true parameters and particles."""
    if all(l.name == "identity" for l in links):
        return list(bundles)
    return [
        replace(
            b,
            theta_true=_map_columns(b.theta_true, links, inverse),
            approx=transform_approx(b.approx, links, inverse),
        )
        for b in bundles
    ]
