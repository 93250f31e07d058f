"""Separable NMF by successive projection.

Library layout: `linalg` (dense primitives), `selectors` (strongly convex
selector families), `spa` (the recursive extraction), `outliers`
(outlier-tolerant variant), `baselines` (PPI/VCA/SiVM), `synth` (benchmark
instance generators), `metrics` (recovery sweeps and bound comparison),
`matrixio` (file formats), `cli` (command-line front end), `rng`
(deterministic streams).
"""

from ._version import __version__
from .baselines import BaselineOptions, ppi, sivm, vca
from .errors import (
    ConvergenceFailureError,
    InvalidMatrixError,
    InvalidOptionsError,
    RankDeficiencyError,
    SepnmfError,
    ZeroDirectionError,
)
from .linalg import (
    WGeometry,
    as_matrix,
    column_norms_sq,
    norm_sq_after_projection,
    project_out,
    simplex_project,
    svd,
    w_geometry,
)
from .metrics import (
    RecoveryReport,
    bound_report,
    default_grid,
    recovery_fraction,
    run_algorithm,
    sweep,
)
from .outliers import (
    AbundanceSolution,
    OutlierOptions,
    OutlierResult,
    extract_with_outliers,
    outlier_score_report,
    simplex_least_squares,
)
from .selectors import (
    SelectorSpec,
    constants,
    evaluate,
    gradient,
    parse_selector,
    sandwich_check,
)
from .spa import (
    BoundEstimate,
    ExtractionOptions,
    ExtractionResult,
    extract,
    extract_fast,
    l1_normalize_columns,
    recovery_bound,
)
from .synth import (
    ExperimentConfig,
    GroundTruth,
    gen_dirichlet_gaussian,
    gen_middle_points,
    gen_w_illconditioned,
    gen_w_uniform,
    generate_instance,
)

__all__ = [name for name in dir() if not name.startswith("_")]
