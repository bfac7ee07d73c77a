"""Certified pruned search over the word tree."""
from .engine import (
    BACKEND,
    DEFAULT_BUDGET,
    LiftError,
    CoefficientSample,
    CountResult,
    CountTable,
    Lifted,
    count_below,
    count_table,
    dedup_scan,
    default_threads,
    fast_coefficient_sample,
    level_log_norms,
    level_sum,
)
from .spec import (
    BudgetExceeded,
    CertificateError,
    DominantEntry,
    Envelope,
    GasketSpec,
    Geometric,
    PermutationDominance,
    RowMinBound,
    TailModel,
    Unipotent2,
    check_unipotent2,
    dominant_entry_certificate,
    permutation_certificate,
    rowmin_applies,
    validate_certificate,
)
