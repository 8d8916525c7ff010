"""Metrics and evaluation protocols for both prediction branches."""

from .metrics import (
    accuracy,
    accuracy_at_k,
    auc_binary,
    confusion_matrix,
    joint_overlap,
    macro_auc_detail,
    macro_auc_ovr,
    rankdata_average,
    topk_indices,
)
from .protocol import (
    DEFAULT_K,
    DEFAULT_TEST_FRACTION,
    EvalData,
    EvalReport,
    LocalVsGlobalRow,
    SeedResult,
    UamatExperimentConfig,
    combine_seed_results,
    local_vs_global,
    prepare_sp_matrices,
    run_protocol,
    run_protocol_seed,
    run_sp_branch,
    sp_design_matrix,
    run_uamat_branch,
    train_split_embeddings,
)
from .render import (
    confusion_csv,
    format_mean_std,
    local_vs_global_csv,
    render_local_vs_global,
    render_report_table,
    report_csv,
)

__all__ = [
    "accuracy",
    "accuracy_at_k",
    "auc_binary",
    "confusion_matrix",
    "joint_overlap",
    "macro_auc_detail",
    "macro_auc_ovr",
    "rankdata_average",
    "topk_indices",
    "DEFAULT_K",
    "DEFAULT_TEST_FRACTION",
    "EvalData",
    "EvalReport",
    "LocalVsGlobalRow",
    "SeedResult",
    "UamatExperimentConfig",
    "combine_seed_results",
    "local_vs_global",
    "prepare_sp_matrices",
    "run_protocol",
    "run_protocol_seed",
    "run_sp_branch",
    "sp_design_matrix",
    "run_uamat_branch",
    "train_split_embeddings",
    "confusion_csv",
    "format_mean_std",
    "local_vs_global_csv",
    "render_local_vs_global",
    "render_report_table",
    "report_csv",
]
