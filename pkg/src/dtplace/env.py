"""Episodic placement environment: one agent per user, shared reward.

Each slot every agent picks a placement target for its user's digital twin
(own device, an end-side node, or the cloud).  Choices that would overflow a
node's capacity are resolved in agent-index order, losers fall back to local.
The executed deployment yields per-user delays; the shared reward trades the
total delay against the number of twins placed off-device.  Between slots
users move (Gaussian steps reflected at the area boundary) and shadowing is
redrawn, so channel gains drift over the episode.

Observations are per-agent, normalized to [0, 1]: own task attributes, link
rates to each end-side node and the satellite, residual node capacities, and
a one-hot of the agent's previous action.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deployment import (
    LOCAL,
    DeploymentMatrix,
    SystemSnapshot,
    per_user_delays,
)
from .stin import (
    ChannelParams,
    EndSideNode,
    SatelliteCloudPath,
    User,
    channel_gain,
)

MB_BITS = 8e6  # 1 megabyte of twin data is 8e6 bits


@dataclass(frozen=True)
class EnvConfig:
    """Scenario parameters; defaults give the reference 20-user setup."""

    num_users: int = 20
    num_end_nodes: int = 3
    area_m: float = 500.0
    episode_len: int = 20
    alpha: float = 0.7  # weight of the delay term in the reward
    beta: float = 0.3  # weight of the deployment-cost term
    phi: float = 0.1  # cost per off-device twin
    gamma: float = 0.9  # episode return discount
    mobility_sigma_m: float = 5.0
    data_size_mb_min: float = 0.5
    data_size_mb_max: float = 2.0
    workload_min: float = 50.0  # CPU cycles per bit
    workload_max: float = 150.0
    cpu_ghz_min: float = 0.5  # user device CPU speed
    cpu_ghz_max: float = 20.0
    tx_power_w_min: float = 0.1
    tx_power_w_max: float = 0.2
    end_node_cpu_ghz_min: float = 10.0  # end-side nodes have rich compute
    end_node_cpu_ghz_max: float = 20.0
    end_node_capacity: int = 8
    bandwidth_hz: float = 2.0e6  # user <-> end-side node link
    noise_dbm_per_hz: float = -174.0
    pathloss_exponent: float = 3.0
    ref_gain_db: float = -30.0
    shadowing_sigma_db: float = 4.0
    sat_distance_m: float = 6.0e5
    sat_cloud_distance_m: float = 6.0e5
    sat_uplink_bw_hz: float = 1.0e6
    sat_cloud_bw_hz: float = 2.0e7
    sat_tx_power_w: float = 10.0
    sat_uplink_gain: float = 5.0e-14
    sat_cloud_gain: float = 2.4e-14
    cloud_cpu_ghz: float = 100.0
    rate_norm_bps: float = 1.0e7  # squashing scale for rate observations

    def __post_init__(self) -> None:
        if self.num_users < 1:
            raise ValueError(f"num_users must be >= 1, got {self.num_users}")
        if self.num_end_nodes < 1:
            raise ValueError(f"num_end_nodes must be >= 1, got {self.num_end_nodes}")
        if self.episode_len < 1:
            raise ValueError(f"episode_len must be >= 1, got {self.episode_len}")
        if self.area_m <= 0:
            raise ValueError("area_m must be positive")
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise ValueError("alpha and beta must be >= 0 with alpha + beta > 0")
        if self.phi < 0:
            raise ValueError("phi must be >= 0")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.mobility_sigma_m < 0:
            raise ValueError("mobility_sigma_m must be >= 0")
        for lo_name, hi_name in (
            ("data_size_mb_min", "data_size_mb_max"),
            ("workload_min", "workload_max"),
            ("cpu_ghz_min", "cpu_ghz_max"),
            ("tx_power_w_min", "tx_power_w_max"),
            ("end_node_cpu_ghz_min", "end_node_cpu_ghz_max"),
        ):
            lo, hi = getattr(self, lo_name), getattr(self, hi_name)
            if lo <= 0 or hi < lo:
                raise ValueError(f"need 0 < {lo_name} <= {hi_name}, got {lo}..{hi}")
        if self.tx_power_w_max > 0.2:
            raise ValueError("tx_power_w_max exceeds the 200 mW device cap")
        if self.end_node_capacity < 1:
            raise ValueError("end_node_capacity must be >= 1")
        for name in (
            "bandwidth_hz",
            "sat_distance_m",
            "sat_cloud_distance_m",
            "sat_uplink_bw_hz",
            "sat_cloud_bw_hz",
            "sat_tx_power_w",
            "sat_uplink_gain",
            "sat_cloud_gain",
            "cloud_cpu_ghz",
            "rate_norm_bps",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def num_targets(self) -> int:
        """Local + end-side nodes + cloud."""
        return self.num_end_nodes + 2

    @property
    def cloud_action(self) -> int:
        return self.num_end_nodes + 1

    @property
    def obs_dim(self) -> int:
        # own attributes, end-node rates, satellite rate, residual capacities
        # (end nodes + cloud), previous-action one-hot
        return 3 + self.num_end_nodes + 1 + (self.num_end_nodes + 1) + self.num_targets

    def channel_params(self) -> ChannelParams:
        return ChannelParams(
            bandwidth_hz=self.bandwidth_hz,
            noise_psd_w_per_hz=10.0 ** ((self.noise_dbm_per_hz - 30.0) / 10.0),
            pathloss_exponent=self.pathloss_exponent,
            ref_gain_db=self.ref_gain_db,
            shadowing_sigma_db=self.shadowing_sigma_db,
        )

    def satellite_path(self) -> SatelliteCloudPath:
        return SatelliteCloudPath(
            d_is_m=self.sat_distance_m,
            d_sc_m=self.sat_cloud_distance_m,
            w_is_hz=self.sat_uplink_bw_hz,
            w_sc_hz=self.sat_cloud_bw_hz,
            p_sc_w=self.sat_tx_power_w,
            g_is=self.sat_uplink_gain,
            g_sc=self.sat_cloud_gain,
            cloud_cpu_hz=self.cloud_cpu_ghz * 1e9,
            noise_psd_w_per_hz=10.0 ** ((self.noise_dbm_per_hz - 30.0) / 10.0),
        )


def reward(l_sum: float, remote_count: int, config: EnvConfig) -> float:
    """Shared slot reward: alpha * (-total delay) - beta * (phi * off-device count)."""
    return config.alpha * (-l_sum) - config.beta * (config.phi * remote_count)


def discounted_return(rewards, gamma: float) -> float:
    """Discounted sum of a reward sequence; empty sequences return 0."""
    total = 0.0
    factor = 1.0
    for r in rewards:
        total += factor * float(r)
        factor *= gamma
    return total


@dataclass(frozen=True)
class SystemState:
    """Everything the environment tracks between slots."""

    snapshot: SystemSnapshot
    matrix: DeploymentMatrix
    slot: int


@dataclass(frozen=True)
class StepResult:
    reward: float
    observations: np.ndarray  # (num_users, obs_dim)
    matrix: DeploymentMatrix  # the deployment actually executed
    per_user_delays: np.ndarray
    done: bool
    l_sum: float
    remote_count: int


class DTEnv:
    """Multi-agent placement environment over a drifting channel."""

    def __init__(self, config: EnvConfig):
        self.config = config
        self._rng: np.random.Generator | None = None
        self._user_pos: np.ndarray | None = None
        self._users: list[User] = []
        self._end_nodes: list[EndSideNode] = []
        self._path: SatelliteCloudPath | None = None
        self._channel: ChannelParams | None = None
        self._snapshot: SystemSnapshot | None = None
        self._matrix: DeploymentMatrix | None = None
        self._slot = 0

    # -- episode lifecycle ----------------------------------------------------

    def reset(self, seed: int) -> tuple[SystemState, np.ndarray]:
        """Draw a fresh instance and return (state, initial observations).

        All twins start on their own devices.  Draw order is fixed (user
        positions, task attributes, node inventory, shadowing) so a seed pins
        the whole episode.
        """
        cfg = self.config
        rng = np.random.default_rng(seed)
        self._rng = rng

        self._user_pos = rng.uniform(0.0, cfg.area_m, size=(cfg.num_users, 2))
        data_bits = rng.uniform(cfg.data_size_mb_min, cfg.data_size_mb_max, cfg.num_users) * MB_BITS
        workload = rng.uniform(cfg.workload_min, cfg.workload_max, cfg.num_users)
        cpu = rng.uniform(cfg.cpu_ghz_min, cfg.cpu_ghz_max, cfg.num_users) * 1e9
        tx = rng.uniform(cfg.tx_power_w_min, cfg.tx_power_w_max, cfg.num_users)
        self._task_attrs = (data_bits, workload, cpu, tx)

        node_pos = rng.uniform(0.0, cfg.area_m, size=(cfg.num_end_nodes, 2))
        node_cpu = (
            rng.uniform(cfg.end_node_cpu_ghz_min, cfg.end_node_cpu_ghz_max, cfg.num_end_nodes)
            * 1e9
        )
        self._end_nodes = [
            EndSideNode(
                id=j,
                position=(float(node_pos[j, 0]), float(node_pos[j, 1])),
                total_cpu_hz=float(node_cpu[j]),
                capacity=cfg.end_node_capacity,
            )
            for j in range(cfg.num_end_nodes)
        ]
        self._node_pos = node_pos
        self._path = cfg.satellite_path()
        self._channel = cfg.channel_params()

        self._rebuild_snapshot()
        self._matrix = DeploymentMatrix.from_assignment(
            np.zeros(cfg.num_users, dtype=np.int64), cfg.num_targets
        )
        self._slot = 0
        self._prev_actions = np.zeros(cfg.num_users, dtype=np.int64)
        return self.state, self._observations()

    def step(self, joint_action) -> StepResult:
        """Execute one slot: resolve capacity, deploy, reward, advance channel."""
        cfg = self.config
        if self._snapshot is None:
            raise RuntimeError("call reset() before step()")
        actions = np.asarray(joint_action, dtype=np.int64)
        if actions.shape != (cfg.num_users,):
            raise ValueError(f"joint_action must have shape ({cfg.num_users},)")
        if np.any(actions < 0) or np.any(actions >= cfg.num_targets):
            raise ValueError("action index out of range")

        executed = self._resolve_capacity(actions)
        matrix = DeploymentMatrix.from_assignment(executed, cfg.num_targets)
        delays = per_user_delays(matrix, self._snapshot)
        l_sum = float(delays.sum())
        remote = int(np.sum(executed != LOCAL))
        r = reward(l_sum, remote, cfg)

        self._slot += 1
        done = self._slot >= cfg.episode_len
        self._advance_channel()
        self._matrix = matrix
        self._prev_actions = executed
        return StepResult(
            reward=r,
            observations=self._observations(),
            matrix=matrix,
            per_user_delays=delays,
            done=done,
            l_sum=l_sum,
            remote_count=remote,
        )

    # -- views ----------------------------------------------------------------

    @property
    def state(self) -> SystemState:
        return SystemState(snapshot=self._snapshot, matrix=self._matrix, slot=self._slot)

    @property
    def snapshot(self) -> SystemSnapshot:
        return self._snapshot

    def action_mask(self, agent: int) -> np.ndarray:
        """Feasible-action hints from current occupancy; local and cloud stay open.

        Masks are occupancy-based and identical across agents; the agent index
        is accepted for interface symmetry.
        """
        del agent
        cfg = self.config
        mask = np.ones(cfg.num_targets, dtype=bool)
        occ = self._matrix.entries.sum(axis=0)
        for j, node in enumerate(self._end_nodes):
            if occ[1 + j] >= node.capacity:
                mask[1 + j] = False
        return mask

    def action_masks(self) -> np.ndarray:
        """Stacked per-agent masks, shape (num_users, num_targets)."""
        one = self.action_mask(0)
        return np.tile(one, (self.config.num_users, 1))

    def global_state(self) -> np.ndarray:
        """Centralized-critic view: all observations plus node occupancy."""
        occ = self._matrix.entries.sum(axis=0).astype(np.float64)
        occ_frac = occ[1:] / self.config.num_users  # end nodes + cloud
        return np.concatenate([self._observations().ravel(), occ_frac])

    @property
    def global_state_dim(self) -> int:
        return self.config.num_users * self.config.obs_dim + self.config.num_end_nodes + 1

    # -- internals --------------------------------------------------------------

    def _resolve_capacity(self, actions: np.ndarray) -> np.ndarray:
        """Agents are granted end-side slots in index order; losers go local."""
        cfg = self.config
        counts = np.zeros(cfg.num_targets, dtype=np.int64)
        executed = np.empty(cfg.num_users, dtype=np.int64)
        for i, a in enumerate(actions):
            a = int(a)
            if 1 <= a <= cfg.num_end_nodes:
                if counts[a] >= self._end_nodes[a - 1].capacity:
                    a = LOCAL
            executed[i] = a
            counts[a] += 1
        return executed

    def _rebuild_snapshot(self) -> None:
        cfg = self.config
        data_bits, workload, cpu, tx = self._task_attrs
        self._users = [
            User(
                id=i,
                position=(float(self._user_pos[i, 0]), float(self._user_pos[i, 1])),
                data_size_bits=float(data_bits[i]),
                cpu_hz=float(cpu[i]),
                workload_density=float(workload[i]),
                tx_power_w=float(tx[i]),
            )
            for i in range(cfg.num_users)
        ]
        gains = np.zeros((cfg.num_users, cfg.num_end_nodes))
        shadowing = self._rng.normal(
            0.0, cfg.shadowing_sigma_db, size=(cfg.num_users, cfg.num_end_nodes)
        )
        for i in range(cfg.num_users):
            for j in range(cfg.num_end_nodes):
                d = float(np.hypot(*(self._user_pos[i] - self._node_pos[j])))
                gains[i, j] = channel_gain(d, self._channel, float(shadowing[i, j]))
        self._snapshot = SystemSnapshot(
            users=self._users,
            end_nodes=self._end_nodes,
            path=self._path,
            channel=self._channel,
            end_gains=gains,
        )

    def _advance_channel(self) -> None:
        """Move users (reflecting at the boundary) and redraw shadowing."""
        cfg = self.config
        if cfg.mobility_sigma_m > 0:
            steps = self._rng.normal(0.0, cfg.mobility_sigma_m, size=self._user_pos.shape)
            pos = self._user_pos + steps
            pos = np.where(pos < 0.0, -pos, pos)
            pos = np.where(pos > cfg.area_m, 2.0 * cfg.area_m - pos, pos)
            self._user_pos = np.clip(pos, 0.0, cfg.area_m)
        self._rebuild_snapshot()

    def _observations(self) -> np.ndarray:
        cfg = self.config
        snap = self._snapshot
        n, e, k = cfg.num_users, cfg.num_end_nodes, cfg.num_targets
        obs = np.zeros((n, cfg.obs_dim))
        data_bits, workload, cpu, _tx = self._task_attrs

        end_rates = snap.end_rates()
        occ = self._matrix.entries.sum(axis=0)
        residual = np.zeros(e + 1)
        for j, node in enumerate(self._end_nodes):
            residual[j] = max(node.capacity - occ[1 + j], 0) / node.capacity
        residual[e] = max(n - occ[cfg.cloud_action], 0) / n

        for i in range(n):
            obs[i, 0] = _range_norm(data_bits[i], cfg.data_size_mb_min * MB_BITS, cfg.data_size_mb_max * MB_BITS)
            obs[i, 1] = _range_norm(cpu[i], cfg.cpu_ghz_min * 1e9, cfg.cpu_ghz_max * 1e9)
            obs[i, 2] = _range_norm(workload[i], cfg.workload_min, cfg.workload_max)
            for j in range(e):
                obs[i, 3 + j] = _rate_norm(end_rates[i, j], cfg.rate_norm_bps)
            obs[i, 3 + e] = _rate_norm(
                snap.satellite_uplink_rate(snap.users[i]), cfg.rate_norm_bps
            )
            obs[i, 4 + e : 4 + 2 * e + 1] = residual
            obs[i, 4 + 2 * e + 1 + int(self._prev_actions[i])] = 1.0
        return obs


def _range_norm(value: float, lo: float, hi: float) -> float:
    span = hi - lo
    if span <= 0.0:
        return 0.0
    return min(max((value - lo) / span, 0.0), 1.0)


def _rate_norm(rate: float, scale: float) -> float:
    return rate / (rate + scale)
