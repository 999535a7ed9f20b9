"""Link-level simulator and analytical BER toolkit for RIS-assisted
received spatial modulation with Alamouti space-time coding."""

__version__ = "0.1.0"

from .channel import (
    ChannelRealization,
    EffectiveChannel,
    ReceivedFrame,
    RisPhaseProfile,
    draw_channel,
    effective_channel,
    full_surface_gains,
    ris_phases_for_target,
    snr_db_to_noise_var,
    transmit_frame,
    transmit_rsm_slot,
)
from .detector import ComplexityReport, Decision, complexity_count, ml_detect, ml_detect_rsm
from .modem import (
    AlamoutiCodeword,
    Constellation,
    ConstellationKind,
    Scheme,
    SystemConfig,
    build_constellation,
    encode_alamouti,
    frame_bit_count,
    frame_labels,
    merge_bits,
    spectral_efficiency,
    split_bits,
)
from .sim import BerPoint, StopRule, derive_point_seed, run_point, run_sweep, wilson_interval
from .theory import (
    EnumerationBudgetError,
    PepEvent,
    QuadFormSpec,
    build_slot_quadform,
    mgf_correct_antenna,
    mgf_gamma13,
    mgf_gamma23,
    mgf_quadform,
    mgf_wrong_antenna,
    pep,
    q_function,
    union_bound_bep,
)
