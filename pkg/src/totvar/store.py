"""Persistent replicate store and JSON serialization helpers.

Replicates are stored as JSON Lines, one bundle per line, so expensive
posterior approximations can be computed once and reused.  Floats are
serialized in shortest round-trip decimal form, making write/read lossless
at full double precision.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .models import GAUSSIAN, PARTICLES, PosteriorApprox, ReplicateBundle

__all__ = [
    "StoreError",
    "approx_to_dict",
    "approx_from_dict",
    "write_bundles",
    "read_bundles",
    "write_json",
    "read_json",
]


class StoreError(ValueError):
    """A malformed store file; the message names the offending line."""


def approx_to_dict(approx: PosteriorApprox) -> dict:
    if approx.form == PARTICLES:
        return {
            "form": PARTICLES,
            "particles": approx.particles.tolist(),
            "mean": None,
            "cov": None,
        }
    return {
        "form": GAUSSIAN,
        "particles": None,
        "mean": approx.mean.tolist(),
        "cov": approx.cov.tolist(),
    }


def approx_from_dict(d: dict) -> PosteriorApprox:
    form = d.get("form")
    if form == PARTICLES:
        return PosteriorApprox.from_particles(np.asarray(d["particles"], dtype=float))
    if form == GAUSSIAN:
        return PosteriorApprox.from_moments(
            np.asarray(d["mean"], dtype=float), np.asarray(d["cov"], dtype=float)
        )
    raise ValueError(f"unknown approximation form {form!r}")


def _bundle_to_dict(b: ReplicateBundle) -> dict:
    return {
        "i": int(b.index),
        "theta": b.theta_true.tolist(),
        "summary": b.summary.tolist(),
        "approx": approx_to_dict(b.approx),
        "seed": int(b.seed_record),
    }


_REQUIRED_KEYS = {"i", "theta", "summary", "approx", "seed"}


def _bundle_from_dict(d: dict) -> ReplicateBundle:
    missing = _REQUIRED_KEYS - d.keys()
    if missing:
        raise ValueError(f"missing keys {sorted(missing)}")
    return ReplicateBundle(
        index=int(d["i"]),
        theta_true=np.asarray(d["theta"], dtype=float),
        summary=np.asarray(d["summary"], dtype=float),
        approx=approx_from_dict(d["approx"]),
        seed_record=int(d["seed"]),
    )


def write_bundles(bundles: Sequence[ReplicateBundle], path, append: bool = False) -> None:
    """Write bundles as JSON Lines; set ``append`` to extend an existing store."""
    mode = "a" if append else "w"
    with open(path, mode) as fh:
        for b in bundles:
            fh.write(json.dumps(_bundle_to_dict(b)) + "\n")


def read_bundles(path) -> list[ReplicateBundle]:
    """Read and validate a JSON Lines replicate store.

    An empty file yields an empty list.  Malformed lines, schema violations
    and duplicate indices raise StoreError naming the line number.
    """
    bundles = []
    seen = set()
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StoreError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                b = _bundle_from_dict(d)
            except (ValueError, TypeError, KeyError) as exc:
                raise StoreError(f"{path}:{lineno}: {exc}") from exc
            if b.index in seen:
                raise StoreError(f"{path}:{lineno}: duplicate replicate index {b.index}")
            seen.add(b.index)
            bundles.append(b)
    return bundles


def write_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
