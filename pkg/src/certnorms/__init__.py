"""certnorms: certified two-sided bounds for hypercube polynomial norms,
completely bounded (cb) norms and their duals, quantum query error, and the
Moebius witness family — every reported value backed by an explicit,
re-checkable witness or dual certificate."""

from .errors import (
    CapExceededError,
    CertifiedBoundError,
    CertnormsError,
    DimensionMismatchError,
    InputValidationError,
)
from .hypercube import Partition, Polynomial, random_block_multilinear, random_polynomial
from .tensors import Tensor, symmetric_tensor_of
from .certificates import (
    CbCertificate,
    CertifiedInterval,
    basis_certificate,
    cb_dualnorm_upper,
    cb_norm_lower,
    certificate_parity_lift,
    from_ell1,
    parity_lift,
)
from .matnorms import (
    KG_BRACKET,
    cb_dualnorm_matrix,
    cb_norm_matrix,
    gamma2_lower,
    gamma2_upper,
    grothendieck_experiment,
    inf_to_one_dualnorm,
    norm_inf_to_one,
    norm_inf_to_one_witness,
    poly_inf_dualnorm,
)
from .queryerror import (
    QueryErrorResult,
    Sdp2Instance,
    eps_bilinear,
    eps_lower_from_witness,
    eps_upper_via_cb,
    probe_open_question,
    sdp2_from_polynomial,
    sdp2_parity_lift,
    verify_sdp2_instance,
    xor_game_values,
)
from .witness import (
    build_family,
    build_qn,
    extend_with_identity,
    moebius_sieve,
    ratio_report,
    squarefree_density,
    varopoulos_certificate,
)

__version__ = "1.0.0"

__all__ = [
    "CapExceededError",
    "CbCertificate",
    "CertifiedBoundError",
    "CertifiedInterval",
    "CertnormsError",
    "DimensionMismatchError",
    "InputValidationError",
    "KG_BRACKET",
    "Partition",
    "Polynomial",
    "QueryErrorResult",
    "Sdp2Instance",
    "Tensor",
    "basis_certificate",
    "build_family",
    "build_qn",
    "cb_dualnorm_matrix",
    "cb_dualnorm_upper",
    "cb_norm_lower",
    "cb_norm_matrix",
    "certificate_parity_lift",
    "eps_bilinear",
    "eps_lower_from_witness",
    "eps_upper_via_cb",
    "extend_with_identity",
    "from_ell1",
    "gamma2_lower",
    "gamma2_upper",
    "grothendieck_experiment",
    "inf_to_one_dualnorm",
    "moebius_sieve",
    "norm_inf_to_one",
    "norm_inf_to_one_witness",
    "parity_lift",
    "poly_inf_dualnorm",
    "probe_open_question",
    "random_block_multilinear",
    "random_polynomial",
    "ratio_report",
    "sdp2_from_polynomial",
    "sdp2_parity_lift",
    "squarefree_density",
    "symmetric_tensor_of",
    "varopoulos_certificate",
    "verify_sdp2_instance",
    "xor_game_values",
]
