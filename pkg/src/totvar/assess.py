"""Bootstrap assessment of calibration.

Resamples the per-replicate triples (true parameter, posterior mean,
posterior covariance) with replacement, recomputes both sides of the moment
identities on every resample, and reduces the results to per-coordinate
scatter pairs for means, standard deviations and correlations.  Points above
the unit diagonal indicate overestimation by the posterior approximation,
points below indicate underestimation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .models import ReplicateBundle
from .moments import _triple_arrays, reduce_triples

__all__ = [
    "BootstrapDiagnostics",
    "bootstrap_diagnostics",
    "diagnostic_summary",
    "write_diagnostics_csv",
    "write_scatter_svgs",
]


@dataclass(frozen=True)
class BootstrapDiagnostics:
    """Scatter data from B bootstrap resamples.

    ``mean_pairs`` and ``sd_pairs`` have shape (dim, B, 2) with columns
    (left, right); ``corr_pairs`` has shape (n_pairs, B, 2) with one slice
    per coordinate pair j < k listed in ``pair_labels``.  ``redraws`` counts
    degenerate resamples (all indices equal) that were redrawn.
    """

    b_count: int
    seed: int
    redraws: int
    mean_pairs: np.ndarray
    sd_pairs: np.ndarray
    corr_pairs: np.ndarray
    pair_labels: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if np.any(self.sd_pairs < 0):
            raise ValueError("standard deviations must be non-negative")
        if self.corr_pairs.size and np.any(np.abs(self.corr_pairs) > 1):
            raise ValueError("correlations must lie in [-1, 1]")

    @property
    def dim(self) -> int:
        return self.mean_pairs.shape[0]

    def rows(self):
        """Iterate (statistic_name, coord_label, b, left, right) rows."""
        for j in range(self.dim):
            for b in range(self.b_count):
                yield ("mean", str(j), b, *self.mean_pairs[j, b])
        for j in range(self.dim):
            for b in range(self.b_count):
                yield ("sd", str(j), b, *self.sd_pairs[j, b])
        for p, (j, k) in enumerate(self.pair_labels):
            for b in range(self.b_count):
                yield ("corr", f"{j},{k}", b, *self.corr_pairs[p, b])


def _correlations(cov: np.ndarray, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    out = np.empty(len(pairs))
    d = np.diag(cov)
    for p, (j, k) in enumerate(pairs):
        denom = np.sqrt(d[j] * d[k])
        # degenerate spread: define the correlation as 0
        out[p] = cov[j, k] / denom if denom > 0 else 0.0
    return np.clip(out, -1.0, 1.0)


def bootstrap_diagnostics(
    bundles: Sequence[ReplicateBundle], b_count: int, seed: int
) -> BootstrapDiagnostics:
    """Bootstrap both sides of the moment identities over a replicate pool.

    Resample b draws its indices from the stream (seed, b), so replicates of
    the computation are reproducible and order-independent.  Each resample's
    statistics equal a direct moment estimate on the resampled pool.
    """
    if b_count < 1:
        raise ValueError("need at least one bootstrap resample")
    if len(bundles) < 2:
        raise ValueError("bootstrap needs at least 2 replicates")
    thetas, mus, sigmas = _triple_arrays(bundles)
    n, dim = thetas.shape
    pairs = [(j, k) for j in range(dim) for k in range(j + 1, dim)]

    mean_pairs = np.empty((dim, b_count, 2))
    sd_pairs = np.empty((dim, b_count, 2))
    corr_pairs = np.empty((len(pairs), b_count, 2))
    redraws = 0
    for b in range(b_count):
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), int(b))))
        while True:
            idx = rng.integers(0, n, size=n)
            if not np.all(idx == idx[0]):
                break
            redraws += 1
        # canonical (sorted) order makes the reduction identical to a direct
        # moment estimate on the resampled pool
        idx = np.sort(idx)
        summ = reduce_triples(thetas[idx], mus[idx], sigmas[idx])
        sigma_r = summ.sigma_r
        mean_pairs[:, b, 0] = summ.mu_l
        mean_pairs[:, b, 1] = summ.mu_r
        sd_pairs[:, b, 0] = np.sqrt(np.diag(summ.sigma_l))
        sd_pairs[:, b, 1] = np.sqrt(np.diag(sigma_r))
        if pairs:
            corr_pairs[:, b, 0] = _correlations(summ.sigma_l, pairs)
            corr_pairs[:, b, 1] = _correlations(sigma_r, pairs)
    return BootstrapDiagnostics(
        b_count=b_count,
        seed=seed,
        redraws=redraws,
        mean_pairs=mean_pairs,
        sd_pairs=sd_pairs,
        corr_pairs=corr_pairs,
        pair_labels=tuple(pairs),
    )


def _fraction_above(pairs: np.ndarray) -> float:
    left, right = pairs[:, 0], pairs[:, 1]
    return float(np.mean(np.where(right > left, 1.0, np.where(right == left, 0.5, 0.0))))


def diagnostic_summary(diag: BootstrapDiagnostics) -> list[dict]:
    """Reduce scatter to one row per statistic.

    Each row reports the medians of both sides and the fraction of bootstrap
    points where the approximation side exceeds the prior-sample side (ties
    count 0.5).
    """
    rows = []

    def add(name, coord, pairs):
        rows.append(
            {
                "statistic": name,
                "coord": coord,
                "left_median": float(np.median(pairs[:, 0])),
                "right_median": float(np.median(pairs[:, 1])),
                "fraction_above": _fraction_above(pairs),
            }
        )

    for j in range(diag.dim):
        add("mean", str(j), diag.mean_pairs[j])
    for j in range(diag.dim):
        add("sd", str(j), diag.sd_pairs[j])
    for p, (j, k) in enumerate(diag.pair_labels):
        add("corr", f"{j},{k}", diag.corr_pairs[p])
    return rows


def write_diagnostics_csv(diag: BootstrapDiagnostics, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["statistic_name", "coord", "b", "left", "right"])
        for name, coord, b, left, right in diag.rows():
            writer.writerow([name, coord, b, repr(float(left)), repr(float(right))])


# ---------------------------------------------------------------------------
# Minimal deterministic SVG scatter rendering (no timestamps, no randomness)

_SVG_SIZE = 360
_SVG_MARGIN = 40


def _svg_panel(pairs: np.ndarray, title: str) -> str:
    lo = float(min(pairs.min(), 0.0)) if pairs.size else 0.0
    hi = float(pairs.max()) if pairs.size else 1.0
    lo, hi = min(lo, hi), max(lo, hi)
    span = hi - lo or 1.0
    lo -= 0.05 * span
    hi += 0.05 * span
    span = hi - lo
    inner = _SVG_SIZE - 2 * _SVG_MARGIN

    def sx(v):
        return _SVG_MARGIN + (v - lo) / span * inner

    def sy(v):
        return _SVG_SIZE - _SVG_MARGIN - (v - lo) / span * inner

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_SIZE}" '
        f'height="{_SVG_SIZE}" viewBox="0 0 {_SVG_SIZE} {_SVG_SIZE}">',
        f'<rect width="{_SVG_SIZE}" height="{_SVG_SIZE}" fill="white"/>',
        f'<text x="{_SVG_SIZE / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{title}</text>',
        f'<line x1="{sx(lo):.2f}" y1="{sy(lo):.2f}" x2="{sx(hi):.2f}" '
        f'y2="{sy(hi):.2f}" stroke="red" stroke-width="1"/>',
    ]
    for left, right in pairs:
        parts.append(
            f'<circle cx="{sx(left):.2f}" cy="{sy(right):.2f}" r="2" '
            'fill="steelblue" fill-opacity="0.35"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_scatter_svgs(diag: BootstrapDiagnostics, out_dir) -> list[Path]:
    """Write one scatter panel per statistic; returns the files written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for j in range(diag.dim):
        p = out_dir / f"mean_{j}.svg"
        p.write_text(_svg_panel(diag.mean_pairs[j], f"mean[{j}]"))
        written.append(p)
    for j in range(diag.dim):
        p = out_dir / f"sd_{j}.svg"
        p.write_text(_svg_panel(diag.sd_pairs[j], f"sd[{j}]"))
        written.append(p)
    for i, (j, k) in enumerate(diag.pair_labels):
        p = out_dir / f"corr_{j}_{k}.svg"
        p.write_text(_svg_panel(diag.corr_pairs[i], f"corr[{j},{k}]"))
        written.append(p)
    return written
