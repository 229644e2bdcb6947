"""Per-annotator disagreement modeling toolkit.

Thin python layer over the C++ core: deterministic tokenization and TF-IDF
features, gold hard/soft label derivation, Krippendorff's alpha and the
shared-task metrics, plus the batch commands (stats, synth, train, eval,
compare) operating on config dicts.
"""

from peranno._core import (
    PerannoError,
    Vocabulary,
    binarize_convabuse,
    dataset_stats,
    derive_hard_label,
    derive_soft_label,
    krippendorff_alpha,
    micro_f1,
    run_compare,
    run_eval,
    run_stats,
    run_synth,
    run_train,
    soft_cross_entropy,
    tokenize,
)

__all__ = [
    "PerannoError",
    "Vocabulary",
    "binarize_convabuse",
    "dataset_stats",
    "derive_hard_label",
    "derive_soft_label",
    "krippendorff_alpha",
    "micro_f1",
    "run_compare",
    "run_eval",
    "run_stats",
    "run_synth",
    "run_train",
    "soft_cross_entropy",
    "tokenize",
]
