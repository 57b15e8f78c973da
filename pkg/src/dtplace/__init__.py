"""Twin-placement simulation and cooperative Q-learning for satellite-edge networks.

The package models users, end-side compute nodes, and a satellite-backed
cloud; delay formulas and a brute-force placement oracle live alongside a
slotted multi-agent environment and a from-scratch recurrent Q-learning
stack (value-decomposition, monotone mixing, and independent baselines).
"""

from .config import ExperimentConfig, SweepSpec, config_hash, load_config
from .deployment import (
    DeploymentMatrix,
    SystemSnapshot,
    allocate,
    brute_force_optimal,
    per_user_delays,
    total_delay,
    validate,
)
from .env import DTEnv, EnvConfig, discounted_return, reward
from .marl import (
    QmixMixer,
    ReplayBuffer,
    Trainer,
    TrainerConfig,
    VdnMixer,
    evaluate,
    evaluate_random,
    select_action,
    td_loss,
    td_target,
)
from .nets import AgentNet, load_checkpoint, save_checkpoint
from .stin import (
    ChannelParams,
    EndSideNode,
    SatelliteCloudPath,
    User,
    channel_gain,
    cloud_delay,
    end_side_delay,
    local_delay,
    shannon_rate,
)

__version__ = "0.1.0"

__all__ = [
    "AgentNet",
    "ChannelParams",
    "DTEnv",
    "DeploymentMatrix",
    "EndSideNode",
    "EnvConfig",
    "ExperimentConfig",
    "QmixMixer",
    "ReplayBuffer",
    "SatelliteCloudPath",
    "SweepSpec",
    "SystemSnapshot",
    "Trainer",
    "TrainerConfig",
    "User",
    "VdnMixer",
    "allocate",
    "brute_force_optimal",
    "channel_gain",
    "cloud_delay",
    "config_hash",
    "discounted_return",
    "end_side_delay",
    "evaluate",
    "evaluate_random",
    "load_checkpoint",
    "load_config",
    "local_delay",
    "per_user_delays",
    "reward",
    "save_checkpoint",
    "select_action",
    "shannon_rate",
    "td_loss",
    "td_target",
    "total_delay",
    "validate",
    "__version__",
]
