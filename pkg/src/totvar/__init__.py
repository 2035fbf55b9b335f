"""Assessment and adjustment of approximate Bayesian inference algorithms
using prior-predictive replicates and the law of total variance."""

from .adjust import (
    AdjustmentMap,
    adjust_observed,
    adjust_replicates,
    fit_adjustment,
    fit_and_apply,
    resolve_links,
    shrink_particles,
    transform_bundles,
)
from .assess import (
    BootstrapDiagnostics,
    bootstrap_diagnostics,
    diagnostic_summary,
    write_diagnostics_csv,
    write_scatter_svgs,
)
from .errors import NumericalError
from .models import (
    ConditioningRule,
    JointModel,
    PosteriorApprox,
    ReplicateBundle,
    ReplicateError,
    apply_conditioning,
    generate_replicates,
    jaccard_distance,
    mean_jaccard_panel_distance,
    replicate_seed,
    weighted_euclidean_distance,
)
from .moments import (
    MomentSummary,
    PerReplicateMoments,
    estimate_moments,
    per_replicate_moments,
)
from .store import StoreError, read_bundles, write_bundles

__version__ = "0.1.0"

__all__ = [
    "AdjustmentMap",
    "BootstrapDiagnostics",
    "ConditioningRule",
    "JointModel",
    "MomentSummary",
    "NumericalError",
    "PerReplicateMoments",
    "PosteriorApprox",
    "ReplicateBundle",
    "ReplicateError",
    "StoreError",
    "adjust_observed",
    "adjust_replicates",
    "apply_conditioning",
    "bootstrap_diagnostics",
    "diagnostic_summary",
    "estimate_moments",
    "fit_adjustment",
    "fit_and_apply",
    "generate_replicates",
    "jaccard_distance",
    "mean_jaccard_panel_distance",
    "per_replicate_moments",
    "read_bundles",
    "replicate_seed",
    "resolve_links",
    "shrink_particles",
    "transform_bundles",
    "weighted_euclidean_distance",
    "write_bundles",
    "write_diagnostics_csv",
    "write_scatter_svgs",
    "__version__",
]
