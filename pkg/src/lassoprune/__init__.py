"""Layer-wise post-training pruning of linear operators.

Dense weight matrices are made sparse (an unstructured fraction or an n:m
group pattern) by minimizing an L1-regularized output-reconstruction
objective with an accelerated proximal-gradient solver, rounding to the
exact pattern, and adapting the penalty by bisection on the share of error
the rounding step introduces. Units of several operators are pruned in
sequence so that downstream solves see the propagated outputs of already
pruned operators instead of the dense ones.
"""

from .errors import (
    ConvergenceWarning,
    FormatError,
    GraphError,
    NumericalError,
    OracleError,
    ParameterError,
    ShapeError,
)
from .linalg import (
    Matrix,
    as_matrix,
    frobenius_norm,
    lipschitz_constant,
    matmul,
    soft_shrinkage,
)
from .npyio import load_array, save_array
from .runner import (
    Manifest,
    NodeSpec,
    UnitSpec,
    eval_error,
    generate_problem,
    load_manifest,
    report_ok,
    run_prune,
    save_manifest,
    strip_timing,
    sweep,
)
from .solver import (
    FistaResult,
    FistaSettings,
    fista_run,
    kkt_residual,
    lasso_oracle,
    objective,
)
from .sparsity import (
    SemiStructured,
    SparsityPattern,
    Unstructured,
    format_pattern,
    parse_pattern,
    round_to_pattern,
    satisfies_pattern,
    sparsity_of,
    target_rate,
)
from .tuner import (
    STOP_EPSILON,
    STOP_INTERVAL_COLLAPSE,
    STOP_NON_IMPROVEMENT,
    BisectionState,
    OperatorPruneResult,
    TunerConfig,
    bisect_lambda,
    compute_errors,
    prune_operator,
)
from .unitgraph import (
    OperatorNode,
    PruneUnit,
    UnitPruneResult,
    dense_forward,
    prune_unit,
    prune_unit_uncorrected,
    warm_start,
)

__version__ = "0.1.0"

__all__ = [
    "BisectionState",
    "ConvergenceWarning",
    "FistaResult",
    "FistaSettings",
    "FormatError",
    "GraphError",
    "Manifest",
    "Matrix",
    "NodeSpec",
    "NumericalError",
    "OperatorNode",
    "OperatorPruneResult",
    "OracleError",
    "ParameterError",
    "PruneUnit",
    "SemiStructured",
    "ShapeError",
    "SparsityPattern",
    "STOP_EPSILON",
    "STOP_INTERVAL_COLLAPSE",
    "STOP_NON_IMPROVEMENT",
    "TunerConfig",
    "Unstructured",
    "UnitPruneResult",
    "UnitSpec",
    "as_matrix",
    "bisect_lambda",
    "compute_errors",
    "dense_forward",
    "eval_error",
    "fista_run",
    "format_pattern",
    "frobenius_norm",
    "generate_problem",
    "kkt_residual",
    "lasso_oracle",
    "lipschitz_constant",
    "load_array",
    "load_manifest",
    "matmul",
    "objective",
    "parse_pattern",
    "prune_operator",
    "prune_unit",
    "prune_unit_uncorrected",
    "report_ok",
    "round_to_pattern",
    "run_prune",
    "satisfies_pattern",
    "save_array",
    "save_manifest",
    "soft_shrinkage",
    "sparsity_of",
    "strip_timing",
    "sweep",
    "target_rate",
    "warm_start",
]
