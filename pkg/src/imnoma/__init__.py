"""OFDM with index modulation for two-user power-domain NOMA: link simulation and BER analysis."""

from .codec import SubblockSpec, bit_budget, build_subblock, enumerate_realizations
from .config import ExperimentConfig, SystemConfig, load_config
from .harness import optimize_alpha, run_ber_point, run_baseline_ofdm_noma, sweep_snr

__all__ = [
    "SubblockSpec", "bit_budget", "build_subblock", "enumerate_realizations",
    "ExperimentConfig", "SystemConfig", "load_config",
    "optimize_alpha", "run_ber_point", "run_baseline_ofdm_noma", "sweep_snr",
]
__version__ = "0.1.0"
