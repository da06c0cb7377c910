"""Local outlier factor anomaly detection with automatic hyperparameter tuning.

The tuner picks the contamination c and neighborhood size k jointly from
unlabeled training data by maximizing a standardized difference of mean log
LOF scores between the predicted-outlier block and the nearest-ranked
inlier block, comparing contaminations on a common noncentral-t quantile
scale. Gaussian random projection, synthetic benchmark generators, and
F1/AUC evaluation round out the pipeline; `loftune --help` exposes it all
on the command line.
"""

from .core import (
    CellStats,
    ContaminationStats,
    Dataset,
    LofScoreTable,
    TunedModel,
    TuningGrid,
    load_model,
    save_model,
    validate_dataset,
)
from .datagen import (
    LabeledSet,
    gen_balls,
    gen_hypercube_mixture,
    gen_hypersphere_mixture,
    gen_polygons,
)
from .evaluation import (
    EvalReport,
    evaluate_model,
    f1_score,
    grid_performance,
    novelty_scores,
    predict,
    roc_auc,
)
from .knn import (
    NeighborIndex,
    NeighborList,
    NeighborTable,
    build_index,
    compiled_available,
    default_backend,
    neighbor_lists_up_to_k,
    query_k_nearest,
    query_many,
)
from .lof import (
    LofScores,
    lof_novelty_score,
    lof_novelty_scores,
    lof_scores_over_grid,
    lof_train_scores,
)
from .nct import NctParams, log_mean_var, noncentral_t_cdf
from .projection import ProjectionSpec, make_projection, project
from .tuner import select_c, select_k_for_c, split_out_in, t_statistic, tune

__version__ = "0.1.0"

__all__ = [
    "CellStats",
    "ContaminationStats",
    "Dataset",
    "EvalReport",
    "LabeledSet",
    "LofScoreTable",
    "LofScores",
    "NctParams",
    "NeighborIndex",
    "NeighborList",
    "NeighborTable",
    "ProjectionSpec",
    "TunedModel",
    "TuningGrid",
    "build_index",
    "compiled_available",
    "default_backend",
    "evaluate_model",
    "f1_score",
    "gen_balls",
    "gen_hypercube_mixture",
    "gen_hypersphere_mixture",
    "gen_polygons",
    "grid_performance",
    "load_model",
    "lof_novelty_score",
    "lof_novelty_scores",
    "lof_scores_over_grid",
    "lof_train_scores",
    "log_mean_var",
    "make_projection",
    "neighbor_lists_up_to_k",
    "noncentral_t_cdf",
    "novelty_scores",
    "predict",
    "project",
    "query_k_nearest",
    "query_many",
    "roc_auc",
    "save_model",
    "select_c",
    "select_k_for_c",
    "split_out_in",
    "t_statistic",
    "tune",
    "validate_dataset",
]
