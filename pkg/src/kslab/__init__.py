"""Kochen-Specker inequality laboratory.

Pauli sign-group algebra, quantum expectation engines, classical bound
oracles, finite hidden-variable models, and a CLI tying them together.
"""

from .errors import VerificationError
from .experiment import (
    CorrelatorRecord,
    evaluate_experiment,
    ingest_correlators,
    required_words,
)
from .fine_model import (
    FiniteHVModel,
    apply_spectrally,
    build_model,
    check_D,
    check_FUNC,
    check_JD,
    check_PROD,
    check_indicator_pullback,
    check_measure_lemma,
    indicator_matrix,
    random_commuting_family,
    random_measure_space,
    run_fine_suite,
    spectrum_subsets,
)
from .hv_oracle import (
    ENUMERATION_CAP,
    Assignment,
    BoundReport,
    ContradictionCertificate,
    HvknReport,
    bruteforce_bound,
    bruteforce_report,
    g_value,
    ghz_certificate,
    halfgroup_sums,
    peres_mermin_certificate,
    verify_hvkn,
)
from .inequalities import (
    InequalityReport,
    decide_violation,
    multipartite_bound,
    multipartite_report,
    scan,
    scan_from_csv,
    scan_to_csv,
    scan_to_json,
    two_partite_report,
)
from .pauli import (
    IdentityReport,
    LambdaIndex,
    PauliString,
    RIndex,
    commutes,
    group_product,
    lambda_element,
    pauli_mul,
    r_element,
    verify_sum_identities,
)
from .states import (
    DenseState,
    GhzSuperposition,
    ProductState,
    WernerState,
    bell_fidelity,
    expectation,
    f_value,
    maximally_mixed,
    parse_state_spec,
    pi_vector,
    random_density,
    read_dense_state,
    to_density_matrix,
    write_dense_state,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BoundReport",
    "ContradictionCertificate",
    "CorrelatorRecord",
    "DenseState",
    "ENUMERATION_CAP",
    "FiniteHVModel",
    "GhzSuperposition",
    "HvknReport",
    "IdentityReport",
    "InequalityReport",
    "LambdaIndex",
    "PauliString",
    "ProductState",
    "RIndex",
    "VerificationError",
    "WernerState",
    "apply_spectrally",
    "bell_fidelity",
    "bruteforce_bound",
    "bruteforce_report",
    "build_model",
    "check_D",
    "check_FUNC",
    "check_JD",
    "check_PROD",
    "check_indicator_pullback",
    "check_measure_lemma",
    "commutes",
    "decide_violation",
    "evaluate_experiment",
    "expectation",
    "f_value",
    "g_value",
    "ghz_certificate",
    "group_product",
    "halfgroup_sums",
    "indicator_matrix",
    "ingest_correlators",
    "lambda_element",
    "maximally_mixed",
    "multipartite_bound",
    "multipartite_report",
    "parse_state_spec",
    "pauli_mul",
    "peres_mermin_certificate",
    "pi_vector",
    "r_element",
    "random_commuting_family",
    "random_density",
    "random_measure_space",
    "read_dense_state",
    "required_words",
    "run_fine_suite",
    "scan",
    "scan_from_csv",
    "scan_to_csv",
    "scan_to_json",
    "spectrum_subsets",
    "to_density_matrix",
    "two_partite_report",
    "verify_hvkn",
    "verify_sum_identities",
    "write_dense_state",
]
