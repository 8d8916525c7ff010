"""Gradient-boosted situation prediction from device and demographic features."""

from .baselines import CATEGORICAL_COLUMNS, DecisionTreeClassifier, KnnClassifier
from .boosting import (
    DEFAULT_RANK_K,
    SpForest,
    SpTrainConfig,
    Tree,
    find_best_split,
    multiclass_log_loss,
    sp_predict,
    sp_rank,
    sp_train,
)
from .forestio import forest_to_bytes, read_forest, write_forest

__all__ = [
    "CATEGORICAL_COLUMNS",
    "DEFAULT_RANK_K",
    "DecisionTreeClassifier",
    "KnnClassifier",
    "SpForest",
    "SpTrainConfig",
    "Tree",
    "find_best_split",
    "multiclass_log_loss",
    "read_forest",
    "sp_predict",
    "sp_rank",
    "sp_train",
    "write_forest",
    "forest_to_bytes",
]
