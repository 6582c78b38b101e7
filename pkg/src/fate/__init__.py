"""Utility-fairness trade-off estimation for learned representations.

Estimates how much predictive accuracy must be given up to satisfy a group
fairness constraint — both for representations built from the raw features
(data-space frontier) and for the idealized case where the labels themselves
are the input (label-space frontier) — then scores external embeddings by
their distance to each frontier.
"""

__version__ = "0.1.0"

from .config import (RunConfig, config_digest, dataset_from_config,
                     load_run_config, parse_run_config, run_config_to_dict)
from .data import (Dataset, SyntheticSpec, discretize_column,
                   generate_synthetic, load_csv, load_embeddings, load_matrix,
                   save_dataset_csv, save_matrix)
from .dependence import (NOTIONS, dep_empirical, dep_of_representation,
                         dep_terms_for_notion, notion_slices)
from .encoder import (EncoderProblem, FairEncoder, FairKernelEncoder, build_B,
                      build_C, solve_encoder)
from .exceptions import (BadConfig, BadSpec, DegenerateBatch,
                         DegenerateColumn, DimensionMismatch,
                         DivergenceDetected, EmptyClass, EmptyCurve,
                         EmptyFile, EmptyGroup, EmptyInput, FateError,
                         IndefiniteBeyondJitter, IoError, LabelOutOfRange,
                         MissingColumn, NoConvergence, NotPositiveDefinite,
                         NotSymmetric, ParseError, PartialFailure,
                         RankDeficient, RankTooHigh, RowCountMismatch,
                         SchemaError, ShapeMismatch, SingleClass)
from .io import load_curve, save_curve
from .kernels import (BasisMap, GramFactor, KernelConfig,
                      RandomFourierFeatures, center, gram_factor,
                      median_heuristic_bandwidth, onehot_factor, rff_features)
from .linalg import cholesky_psd, generalized_sym_eig, pinv_apply, sym_eig
from .metrics import accuracy, dpv, eod, eood
from .nn import (LogisticClassifier, Mlp, MlpClassifier, SgdConfig, cosine_lr,
                 init_mlp, mlp_forward, objective_and_grad, sgd_ascent,
                 train_classifier, train_feature_extractor)
from .tradeoff import (DEFAULT_LAMBDA_GRID, CurveBin, EstimatorConfig,
                       EvaluationReport, TradeoffCurve, TradeoffPoint,
                       classify_region, dist_to_curve, estimate_dst_point,
                       estimate_lst_point, evaluate_representation,
                       pareto_front, sweep, unfairness_for_notion)

__all__ = [
    "__version__",
    # configuration and persistence
    "RunConfig", "config_digest", "dataset_from_config", "load_run_config",
    "parse_run_config", "run_config_to_dict", "load_curve", "save_curve",
    # data handling
    "Dataset", "SyntheticSpec", "discretize_column", "generate_synthetic",
    "load_csv", "load_embeddings", "load_matrix", "save_dataset_csv",
    "save_matrix",
    # dependence measure
    "NOTIONS", "dep_empirical", "dep_of_representation",
    "dep_terms_for_notion", "notion_slices",
    # encoder
    "EncoderProblem", "FairEncoder", "FairKernelEncoder", "build_B",
    "build_C", "solve_encoder",
    # kernels
    "BasisMap", "GramFactor", "KernelConfig", "RandomFourierFeatures",
    "center", "gram_factor", "median_heuristic_bandwidth", "onehot_factor",
    "rff_features",
    # linear algebra
    "cholesky_psd", "generalized_sym_eig", "pinv_apply", "sym_eig",
    # networks and classifiers
    "LogisticClassifier", "Mlp", "MlpClassifier", "SgdConfig", "cosine_lr",
    "init_mlp", "mlp_forward", "objective_and_grad", "sgd_ascent",
    "train_classifier", "train_feature_extractor",
    # fairness metrics
    "accuracy", "dpv", "eod", "eood",
    # trade-off estimation
    "DEFAULT_LAMBDA_GRID", "CurveBin", "EstimatorConfig", "EvaluationReport",
    "TradeoffCurve", "TradeoffPoint", "classify_region", "dist_to_curve",
    "estimate_dst_point", "estimate_lst_point", "evaluate_representation",
    "pareto_front", "sweep", "unfairness_for_notion",
    # errors
    "FateError", "BadConfig", "BadSpec", "DegenerateBatch",
    "DegenerateColumn", "DimensionMismatch", "DivergenceDetected",
    "EmptyClass", "EmptyCurve", "EmptyFile", "EmptyGroup", "EmptyInput",
    "IndefiniteBeyondJitter", "IoError", "LabelOutOfRange", "MissingColumn",
    "NoConvergence", "NotPositiveDefinite", "NotSymmetric", "ParseError",
    "PartialFailure", "RankDeficient", "RankTooHigh", "RowCountMismatch",
    "SchemaError", "ShapeMismatch", "SingleClass",
]
