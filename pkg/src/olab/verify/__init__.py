"""Empirical verifiers.  Each returns a :class:`VerificationReport`."""
from .claims import claim_constants, verify_claim1, verify_claim3
from .fractional import (InternalConsistencyError, exponent_identities, verify_fractional_diag,
                         verify_fractional_mid)
from .lemmas import level_set_constants, verify_level_set_lemma, verify_reverse_holder
from .params import T_GRID, Admissible, admissible
from .report import CSV_COLUMNS, Record, VerificationReport, check
from .sandwich import verify_cz_sandwich
from .theorem import linf_contraction, norm_equivalence, verify_corollaries, verify_theorem1

__all__ = [
    "Admissible", "CSV_COLUMNS", "InternalConsistencyError", "Record", "T_GRID",
    "VerificationReport", "admissible", "check", "claim_constants", "exponent_identities",
    "level_set_constants", "linf_contraction", "norm_equivalence", "verify_claim1",
    "verify_claim3", "verify_corollaries", "verify_cz_sandwich", "verify_fractional_diag",
    "verify_fractional_mid", "verify_level_set_lemma", "verify_reverse_holder",
    "verify_theorem1",
]
