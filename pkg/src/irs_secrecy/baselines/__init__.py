from .ao import AOConfig, AOResult, alternating_optimize
from .heuristics import matched_filter_allocation
from .ga import GAConfig, GAResult, ga_power, project_simplex
from .rcg import PhaseObjective, RCGConfig, RCGResult, project_tangent, rcg_phase, retract
from .variants import KINDS, GnnVariant, train_variant
from .wmmse import WMMSEConfig, WMMSEResult, sum_rate, wmmse_beamforming

__all__ = [
    "AOConfig", "AOResult", "GAConfig", "GAResult", "GnnVariant", "KINDS", "PhaseObjective", "RCGConfig",
    "RCGResult", "WMMSEConfig", "WMMSEResult", "alternating_optimize", "ga_power", "matched_filter_allocation",
    "project_simplex",
    "project_tangent", "rcg_phase", "retract", "sum_rate", "train_variant", "wmmse_beamforming",
]
