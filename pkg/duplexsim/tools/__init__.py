"""duplexsim tools - signal, impairment, canceller and budget functions."""

# Signal core
from .signal_tools import (
    ComplexSignal,
    awgn,
    complex_gaussian,
    db_to_linear,
    dbm_to_watts,
    linear_to_db,
    make_rng,
    measure_power,
    thermal_floor_power,
    watts_to_dbm,
)

# Waveform
from .waveform_tools import (
    OfdmParams,
    generate_ofdm,
    ofdm_autocorrelation,
    papr,
    qam16,
)

# Analog impairments
from .impairment_tools import (
    PhModel,
    SiChannel,
    StageSpec,
    TwoToneResult,
    WidelyLinearResponse,
    adc_full_scale_dbm,
    agc_adc,
    apply_channel,
    apply_iq_imbalance,
    apply_ph,
    apply_stage,
    basis_function,
    cascade_noise_factor,
    draw_si_channel,
    irr_to_response,
    pa_from_config,
    pa_from_specs,
    quantize,
    rf_cancellation,
    stage_polynomial,
    two_tone_test,
    vm_weight,
)

# Transceiver chain
from .transceiver_tools import (
    ChainDiagnostics,
    ChainGains,
    SeedSet,
    full_chain,
    image_phase,
    pa_drive_dbm,
    tx_vga_gain_db,
)

# Least squares
from .linalg_tools import ls_solve

# Digital cancellers
from .canceller_tools import (
    CancellerEstimate,
    CancellerKind,
    build_augmented_matrix,
    build_joint_matrix,
    build_linear_matrix,
    build_matrix,
    build_ph_matrix,
    cancel,
    estimate,
    estimate_delay,
    load_estimate,
    save_estimate,
)

# Link budget
from .linkbudget_tools import (
    BUDGET_COMPONENTS,
    BudgetRow,
    PowerBudgetReport,
    adc_snr,
    budget_point,
    budget_sweep,
    check_config,
    detector_noise_power,
    nl_power,
    quantization_floor,
    receiver_budget_summary,
    receiver_noise_factor,
    thermal_noise_powers,
)

# Measurements and SINR
from .metrics_tools import (
    REFERENCE,
    SinrReport,
    SinrRow,
    measure_detector_noise,
    measure_irr,
    measure_k_factor,
    measure_si_suppression,
    measure_tone_powers,
    reference_sinr,
    sinr_point,
    sinr_twin_run,
)

__all__ = [
    # Signal core
    "ComplexSignal",
    "awgn",
    "complex_gaussian",
    "db_to_linear",
    "dbm_to_watts",
    "linear_to_db",
    "make_rng",
    "measure_power",
    "thermal_floor_power",
    "watts_to_dbm",
    # Waveform
    "OfdmParams",
    "generate_ofdm",
    "ofdm_autocorrelation",
    "papr",
    "qam16",
    # Impairments
    "PhModel",
    "SiChannel",
    "StageSpec",
    "TwoToneResult",
    "WidelyLinearResponse",
    "adc_full_scale_dbm",
    "agc_adc",
    "apply_channel",
    "apply_iq_imbalance",
    "apply_ph",
    "apply_stage",
    "basis_function",
    "cascade_noise_factor",
    "draw_si_channel",
    "irr_to_response",
    "pa_from_config",
    "pa_from_specs",
    "quantize",
    "rf_cancellation",
    "stage_polynomial",
    "two_tone_test",
    "vm_weight",
    # Transceiver chain
    "ChainDiagnostics",
    "ChainGains",
    "SeedSet",
    "full_chain",
    "image_phase",
    "pa_drive_dbm",
    "tx_vga_gain_db",
    # Least squares
    "ls_solve",
    # Cancellers
    "CancellerEstimate",
    "CancellerKind",
    "build_augmented_matrix",
    "build_joint_matrix",
    "build_linear_matrix",
    "build_matrix",
    "build_ph_matrix",
    "cancel",
    "estimate",
    "estimate_delay",
    "load_estimate",
    "save_estimate",
    # Link budget
    "BUDGET_COMPONENTS",
    "BudgetRow",
    "PowerBudgetReport",
    "adc_snr",
    "budget_point",
    "budget_sweep",
    "check_config",
    "detector_noise_power",
    "nl_power",
    "quantization_floor",
    "receiver_budget_summary",
    "receiver_noise_factor",
    "thermal_noise_powers",
    # Measurements
    "REFERENCE",
    "SinrReport",
    "SinrRow",
    "measure_detector_noise",
    "measure_irr",
    "measure_k_factor",
    "measure_si_suppression",
    "measure_tone_powers",
    "reference_sinr",
    "sinr_point",
    "sinr_twin_run",
]
