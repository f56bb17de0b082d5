"""Artificial-noise precoder design and secrecy evaluation for clipped
visible-light links."""

__version__ = "0.1.0"

from .clipping import (
    ClippingStats,
    ClipWindow,
    bussgang_stats,
    clip_mean,
    q_function,
    stats_vector,
    std_normal_pdf,
)
from .config import ConfigError, ExperimentConfig, config_hash, load_config
from .metrics import (
    PrecoderPair,
    SecrecyReport,
    SinrInputs,
    exact_sinr_pair,
    normalized_noise_variance,
    secrecy_rate,
    sinr,
    tilde_sinr_pair,
)
from .montecarlo import LinkSimulation, placement_sweep, simulate_link, solve_placement
from .optimizer import (
    CcpConfig,
    CcpTrace,
    ccp_solve,
    compute_tilde,
    initial_point,
    no_an_solve,
)
from .scene import (
    Luminaire,
    NoiseModel,
    Photodiode,
    ReceiverPosition,
    RoomScene,
    SceneError,
    channel_vector,
    los_gain,
    receiver_noise_variance,
    default_scene,
)
from .subproblem import (
    CcpSubproblem,
    InfeasibleRecoveryError,
    SubproblemSolution,
    TildeData,
    build_subproblem,
    solve_subproblem,
)

__all__ = [
    "__version__",
    "ClipWindow", "ClippingStats", "std_normal_pdf", "q_function",
    "bussgang_stats", "clip_mean", "stats_vector",
    "RoomScene", "Luminaire", "Photodiode", "NoiseModel", "ReceiverPosition",
    "SceneError", "los_gain", "channel_vector", "receiver_noise_variance",
    "default_scene",
    "PrecoderPair", "SinrInputs", "SecrecyReport", "sinr", "exact_sinr_pair",
    "tilde_sinr_pair", "secrecy_rate", "normalized_noise_variance",
    "TildeData", "CcpSubproblem", "SubproblemSolution", "build_subproblem",
    "solve_subproblem", "InfeasibleRecoveryError",
    "CcpConfig", "CcpTrace", "ccp_solve", "no_an_solve", "initial_point",
    "compute_tilde",
    "LinkSimulation", "simulate_link", "solve_placement", "placement_sweep",
    "ConfigError", "ExperimentConfig", "load_config", "config_hash",
]
