"""Peer-comparison fairness auditing for binary decision systems.

Thin wrapper over the C++ core; heavy lifting happens in `peerfair._core`.
Report-producing calls return JSON strings so downstream tooling can decide
how to persist or render them.
"""

from peerfair._core import (
    Dataset,
    PipelineError,
    UsageError,
    __version__,
    auc,
    categorize,
    compute_marginal,
    default_config_json,
    generate,
    load_dataset,
    load_dataset_text,
    null_preset_json,
    report_to_category_csv,
    report_to_scatter_csv,
    run_audit,
    run_imbalance,
    sample_peer_means,
    sme_preset_json,
    split,
    undersample_to_omega,
    z_test,
)

__all__ = [
    "Dataset",
    "PipelineError",
    "UsageError",
    "__version__",
    "auc",
    "categorize",
    "compute_marginal",
    "default_config_json",
    "generate",
    "load_dataset",
    "load_dataset_text",
    "null_preset_json",
    "report_to_category_csv",
    "report_to_scatter_csv",
    "run_audit",
    "run_imbalance",
    "sample_peer_means",
    "sme_preset_json",
    "split",
    "undersample_to_omega",
    "z_test",
]
