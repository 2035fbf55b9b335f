"""Joint models, posterior approximations, replicate generation and conditioning.

A replicate is one draw (theta, y) from a joint Bayesian model together with an
approximate posterior computed from the simulated data y.  Pools of replicates
are the raw material for the moment diagnostics and the total-variance
adjustment; conditioning rules filter a pool down to a neighbourhood of an
observed data summary.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

__all__ = [
    "JointModel",
    "PosteriorApprox",
    "ReplicateBundle",
    "ConditioningRule",
    "ReplicateError",
    "generate_replicates",
    "apply_conditioning",
    "replicate_seed",
    "weighted_euclidean_distance",
    "jaccard_distance",
    "mean_jaccard_panel_distance",
]

PARTICLES = "particles"
GAUSSIAN = "gaussian"


class ReplicateError(RuntimeError):
    """Raised when a single replicate fails; carries index and seed for replay."""

    def __init__(self, index: int, seed: int, cause: BaseException):
        self.index = index
        self.seed = seed
        super().__init__(
            f"approximation failed on replicate {index} (replicate seed {seed}): {cause!r}"
        )


@dataclass(frozen=True)
class JointModel:
    """A joint Bayesian model given as three seeded procedures.

    Parameters
    ----------
    dim_theta : int
        Length of the parameter vector.
    prior_sampler : callable(rng) -> ndarray
        Draws one parameter vector of length ``dim_theta``.
    data_simulator : callable(theta, rng) -> object
        Simulates one raw dataset given a parameter vector.
    summarizer : callable(dataset) -> ndarray
        Reduces a raw dataset to a fixed-length summary vector.
    parallel_safe : bool
        Whether the three procedures may be called concurrently from
        multiple threads.  Set False to force serial generation.

    All procedures must be deterministic functions of their inputs and the
    generator state handed to them.
    """

    dim_theta: int
    prior_sampler: Callable[[np.random.Generator], np.ndarray]
    data_simulator: Callable[[np.ndarray, np.random.Generator], Any]
    summarizer: Callable[[Any], np.ndarray]
    parallel_safe: bool = True

    def __post_init__(self):
        if self.dim_theta < 1:
            raise ValueError("dim_theta must be a positive integer")


@dataclass(frozen=True)
class PosteriorApprox:
    """An approximate posterior, either a particle sample or Gaussian moments.

    Exactly one representation is populated.  Particle form stores an
    (S, dim) matrix with S >= 2; Gaussian form stores a mean vector and a
    symmetric covariance matrix with non-negative diagonal.
    """

    form: str
    particles: np.ndarray | None = None
    mean: np.ndarray | None = None
    cov: np.ndarray | None = None

    @classmethod
    def from_particles(cls, particles) -> "PosteriorApprox":
        particles = np.atleast_2d(np.asarray(particles, dtype=float))
        return cls(form=PARTICLES, particles=particles)

    @classmethod
    def from_moments(cls, mean, cov) -> "PosteriorApprox":
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        return cls(form=GAUSSIAN, mean=mean, cov=cov)

    def __post_init__(self):
        if self.form == PARTICLES:
            if self.particles is None or self.particles.ndim != 2:
                raise ValueError("particle form requires an (S, dim) matrix")
            if self.particles.shape[0] < 2:
                raise ValueError(
                    "particle form requires S >= 2 particles so the "
                    "covariance (divisor S-1) is estimable"
                )
        elif self.form == GAUSSIAN:
            if self.mean is None or self.cov is None:
                raise ValueError("gaussian form requires mean and cov")
            d = self.mean.shape[0]
            if self.cov.shape != (d, d):
                raise ValueError("cov shape must match mean length")
            _check_symmetric(self.cov, rtol=1e-12, what="cov")
            if np.any(np.diag(self.cov) < 0):
                raise ValueError("cov diagonal must be non-negative")
        else:
            raise ValueError(f"unknown approximation form {self.form!r}")

    @property
    def dim(self) -> int:
        if self.form == PARTICLES:
            return self.particles.shape[1]
        return self.mean.shape[0]

    @property
    def n_particles(self) -> int:
        if self.form != PARTICLES:
            raise ValueError("n_particles is defined only for particle form")
        return self.particles.shape[0]


def _check_symmetric(a: np.ndarray, rtol: float, what: str) -> None:
    scale = max(float(np.max(np.abs(a))), 1e-300)
    if float(np.max(np.abs(a - a.T))) > rtol * scale:
        raise ValueError(f"{what} is not symmetric within {rtol:g} relative")


@dataclass(frozen=True)
class ReplicateBundle:
    """One prior-predictive replicate: true parameter, data summary, posterior
    approximation, and the seed that regenerates the raw dataset."""

    index: int
    theta_true: np.ndarray
    summary: np.ndarray
    approx: PosteriorApprox
    seed_record: int

    def __post_init__(self):
        object.__setattr__(self, "theta_true", np.asarray(self.theta_true, dtype=float))
        object.__setattr__(self, "summary", np.asarray(self.summary, dtype=float))

    @property
    def dim_theta(self) -> int:
        return self.theta_true.shape[0]


def replicate_seed(master_seed: int, index: int) -> int:
    """Deterministic per-replicate seed derived from (master_seed, index).

    The derivation is a hash, so replicates may be generated in any order or
    on any worker without changing results.
    """
    ss = np.random.SeedSequence((int(master_seed), int(index)))
    return int(ss.generate_state(1, np.uint64)[0])


def _make_replicate(model: JointModel, approximator, index: int, seed: int) -> ReplicateBundle:
    # The single recorded seed feeds two independent streams: one for the
    # model draw, one handed to the approximator.
    sim_seed, approx_seed = (
        int(s) for s in np.random.SeedSequence(seed).generate_state(2, np.uint64)
    )
    rng = np.random.default_rng(sim_seed)
    theta = np.asarray(model.prior_sampler(rng), dtype=float)
    if theta.shape != (model.dim_theta,):
        raise ValueError(
            f"prior_sampler returned shape {theta.shape}, expected ({model.dim_theta},)"
        )
    dataset = model.data_simulator(theta, rng)
    summary = np.asarray(model.summarizer(dataset), dtype=float)
    try:
        approx = approximator(dataset, approx_seed)
    except Exception as exc:
        raise ReplicateError(index, seed, exc) from exc
    return ReplicateBundle(
        index=index, theta_true=theta, summary=summary, approx=approx, seed_record=seed
    )


def _resolve_workers(workers: int | None) -> int:
    cap = os.environ.get("TOTVAR_THREADS")
    cap = int(cap) if cap else None
    if workers is None:
        workers = cap or 1
    if cap is not None:
        workers = min(workers, cap)
    return max(1, workers)


def generate_replicates(
    model: JointModel,
    approximator: Callable[[Any, int], PosteriorApprox],
    count: int,
    master_seed: int,
    workers: int | None = None,
    start_index: int = 0,
) -> list[ReplicateBundle]:
    """Draw ``count`` replicates (theta, y) from the joint model and attach
    an approximate posterior to each.

    Parameters
    ----------
    model : JointModel
    approximator : callable(dataset, seed) -> PosteriorApprox
        Must be deterministic given its seed argument.
    count : int
        Number of replicates; at least 2.
    master_seed : int
        Every replicate i is reproducible from (master_seed, i) alone.
    workers : int, optional
        Thread count; defaults to the TOTVAR_THREADS environment variable
        or 1.  Results are independent of the worker count.
    start_index : int
        First replicate index, for extending an existing pool.

    Returns
    -------
    list of ReplicateBundle, ordered by index.
    """
    if count < 2:
        raise ValueError("need at least 2 replicates")
    indices = range(start_index, start_index + count)
    seeds = [replicate_seed(master_seed, i) for i in indices]
    workers = _resolve_workers(workers)
    if workers == 1 or not model.parallel_safe:
        bundles = [
            _make_replicate(model, approximator, i, s) for i, s in zip(indices, seeds)
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            bundles = list(
                pool.map(
                    lambda args: _make_replicate(model, approximator, *args),
                    zip(indices, seeds),
                )
            )
    bundles.sort(key=lambda b: b.index)
    return bundles


# ---------------------------------------------------------------------------
# Distances


def weighted_euclidean_distance(s, ref, weights) -> float:
    """Squared coordinate-weighted Euclidean distance
    ``sum_j (s_j - ref_j)^2 / w_j^2``.

    Weights are per-coordinate scales and must be strictly positive.
    """
    s = np.asarray(s, dtype=float)
    ref = np.asarray(ref, dtype=float)
    w = np.asarray(weights, dtype=float)
    if s.shape != ref.shape or s.shape != w.shape:
        raise ValueError("summary, reference and weights must have equal length")
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    z = (s - ref) / w
    return float(z @ z)


def _check_binary(v: np.ndarray, name: str) -> None:
    if not np.all((v == 0) | (v == 1)):
        raise ValueError(f"{name} must contain only 0/1 entries")


def jaccard_distance(u, v) -> float:
    """Jaccard distance between two equal-length binary vectors.

    With a the number of positions where both are 1 and b the number of
    positions where they differ, returns b / (a + b); 0/0 is defined as 0.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError("binary vectors must have equal length")
    _check_binary(u, "u")
    _check_binary(v, "v")
    both = int(np.sum((u == 1) & (v == 1)))
    diff = int(np.sum(u != v))
    if both + diff == 0:
        return 0.0
    return diff / (both + diff)


def mean_jaccard_panel_distance(panels_u: Sequence, panels_v: Sequence) -> float:
    """Mean of per-panel Jaccard distances over two matched panel collections."""
    if len(panels_u) != len(panels_v):
        raise ValueError("panel counts must match")
    if len(panels_u) == 0:
        raise ValueError("need at least one panel")
    return float(
        np.mean([jaccard_distance(a, b) for a, b in zip(panels_u, panels_v)])
    )


# ---------------------------------------------------------------------------
# Conditioning


@dataclass(frozen=True)
class ConditioningRule:
    """A distance on data summaries plus a retention rule.

    Exactly one of ``tolerance`` (keep distances strictly below) or
    ``keep_count`` (keep the k nearest, ties broken by lower index) must be
    set.  When ``distance`` is omitted the squared weighted Euclidean
    distance is used, with unit weights unless ``weights`` is given.
    """

    tolerance: float | None = None
    keep_count: int | None = None
    weights: np.ndarray | None = None
    distance: Callable[[np.ndarray, np.ndarray], float] | None = None

    def __post_init__(self):
        if (self.tolerance is None) == (self.keep_count is None):
            raise ValueError("set exactly one of tolerance or keep_count")
        if self.tolerance is not None and self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.keep_count is not None and self.keep_count < 1:
            raise ValueError("keep_count must be at least 1")
        if self.weights is not None:
            object.__setattr__(
                self, "weights", np.asarray(self.weights, dtype=float)
            )

    def distance_to(self, summary: np.ndarray, reference: np.ndarray) -> float:
        if self.distance is not None:
            return float(self.distance(summary, reference))
        w = self.weights
        if w is None:
            w = np.ones_like(np.asarray(reference, dtype=float))
        return weighted_euclidean_distance(summary, reference, w)


def apply_conditioning(
    bundles: Sequence[ReplicateBundle],
    rule: ConditioningRule,
    reference_summary,
) -> list[ReplicateBundle]:
    """Filter a replicate pool to the neighbourhood of a reference summary.

    Returns the retained bundles in their original index order.  Under
    keep-count retention exactly min(k, len(bundles)) replicates survive,
    the k smallest distances with ties at the cutoff broken by lower index.
    Under tolerance retention an empty result is an error.
    """
    reference = np.asarray(reference_summary, dtype=float)
    for b in bundles:
        if b.summary.shape != reference.shape:
            raise ValueError(
                f"bundle {b.index} summary length {b.summary.shape} does not "
                f"match reference {reference.shape}"
            )
    d = np.array([rule.distance_to(b.summary, reference) for b in bundles])
    if rule.keep_count is not None:
        k = min(rule.keep_count, len(bundles))
        idx = np.array([b.index for b in bundles])
        # primary key distance, ties at the cutoff broken by lower index
        order = np.lexsort((idx, d))[:k]
        keep = np.zeros(len(bundles), dtype=bool)
        keep[order] = True
    else:
        keep = d < rule.tolerance
        if not np.any(keep):
            raise ValueError("conditioning set empty; increase the tolerance")
    return [b for b, kept in zip(bundles, keep) if kept]
