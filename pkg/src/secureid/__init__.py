"""Secure identification over Gaussian wiretap channels: capacities, code
construction, Monte Carlo estimators and channel quantization."""
from .capacity import (
    CapacityReport,
    CrCapacity,
    GaussianChannelParams,
    PowerAllocation,
    WiretapParams,
    awgn_capacity,
    bob_mi_lower_bound,
    correlation_assisted_id_lower_bound,
    cr_capacity,
    eve_mi_upper_bound,
    fano_mi_lower_bound,
    fig8_rows,
    gwc_secrecy_capacity,
    id_capacity_awgn,
    mimo_capacity,
    mimo_id_capacity_lower_bound,
    parallel_capacity,
    secure_id_capacity,
    secure_id_report,
    waterfill,
)
from .channel import (
    Codeword,
    MimoParams,
    RngStream,
    SvdDecomposition,
    awgn_transmit,
    gwc_transmit,
    mimo_post_process,
    mimo_pre_process,
    mimo_transmit,
    svd_decompose,
)
from .errors import (
    ConfigFileError,
    ConfigurationError,
    DomainError,
    InvariantError,
    ResourceError,
    SecureIdError,
    ShapeError,
)
from .idcode import (
    ColoringFamily,
    IdentificationCode,
    InnerTransmissionCode,
    WiretapColorCode,
    build_coloring_family,
    build_identification_code,
    build_inner_code,
    build_wiretap_color_code,
)
from .infotheory import JointPmf, LogBase, Pmf, mutual_information, total_variation
from .kernels import BACKEND
from .quantizer import (
    InputDistribution,
    QuantizationSpec,
    QuantizedChannel,
    build_discrete_channel,
    compute_spans,
    tv_gap_estimate,
)
from .simulator import (
    Estimate,
    SimConfig,
    SimReport,
    estimate_eve_distinguishability,
    estimate_type1,
    estimate_type2,
    mi_bound_crosscheck,
    run_experiment,
)

__version__ = "0.1.0"
