"""De-sparsified Lasso inference with false discovery proportion control."""

from .bench import (
    ExperimentReport,
    MethodOptions,
    ReplicationRecord,
    fdp_calibration,
    ranking_comparison,
    run_experiment,
    run_replication,
)
from .dlasso import (
    DeltaDiagnostic,
    DLassoResult,
    debias,
    delta_diagnostic,
    dlasso_pipeline,
    estimate_sigma,
    scaled_sigma_fit,
    standardize,
)
from .errors import DLassoError
from .inference import (
    CurvePoint,
    EvalMetrics,
    SelectionResult,
    evaluate,
    fdp_hat,
    fdp_tpp_curve,
    find_threshold,
    normal_cdf,
    normal_quantile,
    rank_by_z,
    select_bh,
    select_fdp,
    select_fwer,
)
from .lasso import (
    Dataset,
    LassoFit,
    SolverOptions,
    default_lambda,
    fit_lasso,
    kkt_residual,
    lasso_path_ranking,
    soft_threshold,
)
from .precision import (
    NodewiseColumnFit,
    PrecisionFit,
    build_precision,
    fit_nodewise_column,
    gram,
    nodewise_lambda,
)
from .simulate import (
    ModelTruth,
    SimConfig,
    gen_dataset,
    gen_precision_er,
    replication_rng,
    sample_design,
)

__version__ = "0.1.0"
