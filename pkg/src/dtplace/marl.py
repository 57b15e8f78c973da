"""Cooperative Q-learning for the placement environment.

One recurrent Q-network is shared by all agents (their observations carry the
per-user differences).  Training is centralized: episode trajectories go into
a replay buffer, and batched backprop-through-time minimizes a TD loss on
either a joint action value (sum mixing for the value-decomposition scheme, a
monotone state-conditioned mixing network for "qmix") or on per-agent values
("iql", no mixer).  Execution is decentralized: each agent picks epsilon-
greedy actions from its own Q-values under the environment's feasibility
mask.

Schemes: "proposed" (sum mixer), "qmix", "iql"; the "rd" baseline picks
uniformly among unmasked actions and has no trainer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deployment import LOCAL
from .env import DTEnv, EnvConfig, discounted_return
from .nets import (
    AgentNet,
    CheckpointError,
    Dense,
    RmsProp,
    clip_global_norm,
    soft_update,
)

TRAINED_SCHEMES = ("proposed", "qmix", "iql")
ALL_SCHEMES = TRAINED_SCHEMES + ("rd",)


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; carries the parameters at the point of failure."""

    def __init__(self, message: str, tensors: dict | None = None, metrics: list | None = None):
        super().__init__(message)
        self.tensors = tensors or {}
        self.metrics = metrics or []


@dataclass(frozen=True)
class TrainerConfig:
    """Optimization knobs; defaults give the reference training recipe."""

    episodes: int = 1000
    batch: int = 64
    gamma: float = 0.9
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_episodes: int | None = None  # None: anneal over half of training
    tau: float = 0.005
    lr: float = 1e-4
    buffer_capacity: int = 5000
    updates_per_episode: int = 1
    grad_clip: float = 10.0
    hidden_dim: int = 64
    mixer_embed_dim: int = 32
    seed: int = 0
    fixed_instance_seed: int | None = None  # train on one frozen instance

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if not 0 <= self.eps_end <= self.eps_start <= 1:
            raise ValueError("need 0 <= eps_end <= eps_start <= 1")
        if self.eps_decay_episodes is not None and self.eps_decay_episodes < 1:
            raise ValueError("eps_decay_episodes must be >= 1")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must be in (0, 1]")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.buffer_capacity < self.batch:
            raise ValueError("buffer_capacity must be >= batch")
        if self.updates_per_episode < 1:
            raise ValueError("updates_per_episode must be >= 1")
        if self.grad_clip <= 0:
            raise ValueError("grad_clip must be positive")
        if self.hidden_dim < 1 or self.mixer_embed_dim < 1:
            raise ValueError("network sizes must be >= 1")


def epsilon_by_episode(episode: int, cfg: TrainerConfig) -> float:
    """Linear anneal from eps_start to eps_end, then flat."""
    decay = cfg.eps_decay_episodes or max(1, cfg.episodes // 2)
    frac = min(max(episode, 0) / decay, 1.0)
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac


@dataclass
class EpisodeRecord:
    """One episode's trajectory, aligned for sequence replay.

    observations/masks/states have T+1 entries (the last is the post-terminal
    view used for bootstrap targets); actions and rewards have T.  Actions are
    the agents' choices before capacity resolution; the executed deployment is
    visible to the learner through the next observation.
    """

    observations: np.ndarray  # (T+1, n, obs_dim)
    actions: np.ndarray  # (T, n) int
    masks: np.ndarray  # (T+1, n, K) bool
    rewards: np.ndarray  # (T,)
    states: np.ndarray  # (T+1, state_dim)

    def __post_init__(self) -> None:
        t = self.rewards.shape[0]
        if (
            self.observations.shape[0] != t + 1
            or self.actions.shape[0] != t
            or self.masks.shape[0] != t + 1
            or self.states.shape[0] != t + 1
        ):
            raise ValueError("episode sequences are not length-aligned")

    @property
    def length(self) -> int:
        return int(self.rewards.shape[0])


class ReplayBuffer:
    """FIFO episode store with uniform sampling."""

    def __init__(self, capacity: int = 5000):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._records: list[EpisodeRecord] = []

    def add(self, record: EpisodeRecord) -> None:
        self._records.append(record)
        if len(self._records) > self.capacity:
            del self._records[0]  # evict oldest

    def __len__(self) -> int:
        return len(self._records)

    def sample(self, batch: int, rng: np.random.Generator) -> list[EpisodeRecord]:
        if batch > len(self._records):
            raise ValueError(
                f"cannot sample {batch} episodes from a buffer of {len(self._records)}"
            )
        idx = rng.choice(len(self._records), size=batch, replace=False)
        return [self._records[i] for i in idx]


def one_hot(indices: np.ndarray, width: int) -> np.ndarray:
    """Row-wise one-hot encoding of integer indices."""
    out = np.zeros(indices.shape + (width,))
    np.put_along_axis(out, np.asarray(indices)[..., None], 1.0, axis=-1)
    return out


def masked_argmax(q: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Greedy action per row, considering only unmasked entries.

    Ties resolve to the lowest action index.  Adding a constant to every Q
    value leaves the choice unchanged.
    """
    masked = np.where(mask, q, -np.inf)
    return np.argmax(masked, axis=-1)


def select_actions(
    net: AgentNet,
    observations: np.ndarray,
    prev_actions: np.ndarray,
    hidden: np.ndarray,
    masks: np.ndarray,
    epsilon: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Epsilon-greedy actions for a batch of agents sharing one network.

    Network input is the observation concatenated with a one-hot of the
    agent's previous choice.  Returns (actions, next hidden states).
    """
    k = net.num_actions
    x = np.concatenate([observations, one_hot(prev_actions, k)], axis=1)
    q, h_next, _ = net.step(x, hidden)
    actions = masked_argmax(q, masks)
    if epsilon > 0.0:
        explore = rng.random(actions.shape[0]) < epsilon
        for i in np.nonzero(explore)[0]:
            choices = np.nonzero(masks[i])[0]
            actions[i] = rng.choice(choices)
    return actions, h_next


def select_action(
    net: AgentNet,
    observation: np.ndarray,
    prev_action: int,
    hidden: np.ndarray,
    mask: np.ndarray,
    epsilon: float,
    rng: np.random.Generator,
) -> tuple[int, np.ndarray]:
    """Single-agent convenience wrapper around select_actions."""
    actions, h_next = select_actions(
        net,
        observation[None, :],
        np.array([prev_action]),
        hidden.reshape(1, -1),
        mask[None, :],
        epsilon,
        rng,
    )
    return int(actions[0]), h_next[0]


def td_target(reward, gamma: float, next_value):
    """One-step bootstrap target r + gamma * next_value (0 at terminal)."""
    return reward + gamma * next_value


def td_loss(y: np.ndarray, q: np.ndarray) -> float:
    """Mean squared TD residual over a batch of targets and predictions."""
    y = np.asarray(y, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if y.shape != q.shape:
        raise ValueError(f"shape mismatch {y.shape} vs {q.shape}")
    if y.size == 0:
        raise ValueError("empty batch")
    diff = y - q
    return float(np.mean(diff * diff))


class VdnMixer:
    """Joint action value as the plain sum of per-agent values."""

    def forward(self, q_agents: np.ndarray, state: np.ndarray | None = None
                ) -> tuple[np.ndarray, tuple]:
        del state
        return q_agents.sum(axis=1), (q_agents.shape,)

    def backward(self, cache: tuple, dq_tot: np.ndarray) -> np.ndarray:
        (shape,) = cache
        # dQ_tot/dQ_i = 1 for every agent, exactly
        return np.repeat(dq_tot[:, None], shape[1], axis=1)

    def parameters(self) -> list[np.ndarray]:
        return []

    def gradients(self) -> list[np.ndarray]:
        return []

    def zero_grads(self) -> None:
        pass

    def state_dict(self) -> dict[str, np.ndarray]:
        return {}

    def clone(self) -> "VdnMixer":
        return VdnMixer()


def _elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0.0, x, np.expm1(x))


def _elu_grad(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0.0, 1.0, np.exp(np.minimum(x, 0.0)))


class QmixMixer:
    """Monotone mixing network conditioned on the global state.

    Per-agent values pass through one hidden layer whose weights are the
    absolute values of hypernetwork outputs, so dQ_tot/dQ_i >= 0 for every
    agent regardless of the state.
    """

    PART_NAMES = ("hyper_w1.w", "hyper_w1.b", "hyper_b1.w", "hyper_b1.b",
                  "hyper_w2.w", "hyper_w2.b", "hyper_b2.w", "hyper_b2.b")

    def __init__(self, num_agents: int, state_dim: int, embed_dim: int = 32,
                 rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        self.num_agents = num_agents
        self.state_dim = state_dim
        self.embed_dim = embed_dim
        self.hyper_w1 = Dense(state_dim, num_agents * embed_dim, "identity", rng)
        self.hyper_b1 = Dense(state_dim, embed_dim, "identity", rng)
        self.hyper_w2 = Dense(state_dim, embed_dim, "identity", rng)
        self.hyper_b2 = Dense(state_dim, 1, "identity", rng)

    def forward(self, q_agents: np.ndarray, state: np.ndarray) -> tuple[np.ndarray, tuple]:
        """q_agents: (B, n), state: (B, state_dim) -> (q_tot (B,), cache)."""
        b = q_agents.shape[0]
        w1_raw, c_w1 = self.hyper_w1.forward(state)
        w1 = np.abs(w1_raw).reshape(b, self.num_agents, self.embed_dim)
        b1, c_b1 = self.hyper_b1.forward(state)
        pre = np.einsum("bn,bne->be", q_agents, w1) + b1
        hid = _elu(pre)
        w2_raw, c_w2 = self.hyper_w2.forward(state)
        w2 = np.abs(w2_raw)
        b2, c_b2 = self.hyper_b2.forward(state)
        q_tot = np.sum(hid * w2, axis=1) + b2[:, 0]
        cache = (q_agents, w1_raw, w1, pre, hid, w2_raw, w2, c_w1, c_b1, c_w2, c_b2)
        return q_tot, cache

    def backward(self, cache: tuple, dq_tot: np.ndarray) -> np.ndarray:
        """Accumulate hypernetwork gradients; return dQ per agent (B, n)."""
        (q_agents, w1_raw, w1, pre, hid, w2_raw, w2, c_w1, c_b1, c_w2, c_b2) = cache
        b = q_agents.shape[0]
        dq_tot = dq_tot.reshape(b)

        dhid = dq_tot[:, None] * w2
        dw2 = dq_tot[:, None] * hid
        db2 = dq_tot[:, None]
        dpre = dhid * _elu_grad(pre)
        dq_agents = np.einsum("be,bne->bn", dpre, w1)
        dw1 = q_agents[:, :, None] * dpre[:, None, :]
        db1 = dpre

        self.hyper_w1.backward(c_w1, (dw1 * np.sign(w1_raw.reshape(dw1.shape))).reshape(b, -1))
        self.hyper_b1.backward(c_b1, db1)
        self.hyper_w2.backward(c_w2, dw2 * np.sign(w2_raw))
        self.hyper_b2.backward(c_b2, db2)
        return dq_agents

    def parameters(self) -> list[np.ndarray]:
        return (self.hyper_w1.parameters() + self.hyper_b1.parameters()
                + self.hyper_w2.parameters() + self.hyper_b2.parameters())

    def gradients(self) -> list[np.ndarray]:
        return (self.hyper_w1.gradients() + self.hyper_b1.gradients()
                + self.hyper_w2.gradients() + self.hyper_b2.gradients())

    def zero_grads(self) -> None:
        for g in self.gradients():
            g[...] = 0.0

    def state_dict(self) -> dict[str, np.ndarray]:
        return dict(zip(self.PART_NAMES, self.parameters()))

    def load_state_dict(self, tensors: dict[str, np.ndarray]) -> None:
        for name, param in zip(self.PART_NAMES, self.parameters()):
            if name not in tensors:
                raise CheckpointError(f"missing tensor {name}")
            incoming = np.asarray(tensors[name], dtype=np.float64)
            if incoming.shape != param.shape:
                raise CheckpointError(
                    f"shape mismatch for {name}: file {incoming.shape}, net {param.shape}"
                )
            param[...] = incoming

    def clone(self) -> "QmixMixer":
        twin = QmixMixer(self.num_agents, self.state_dim, self.embed_dim)
        twin.load_state_dict(self.state_dict())
        return twin


@dataclass
class TrainingResult:
    scheme: str
    metrics: list[dict]
    net: AgentNet
    mixer: VdnMixer | QmixMixer | None


class Trainer:
    """Episode-replay Q-learning with a soft-updated target network."""

    def __init__(self, env_config: EnvConfig, trainer_config: TrainerConfig, scheme: str):
        if scheme not in TRAINED_SCHEMES:
            raise ValueError(f"scheme must be one of {TRAINED_SCHEMES}, got {scheme!r}")
        self.scheme = scheme
        self.env_config = env_config
        self.cfg = trainer_config
        self.env = DTEnv(env_config)

        init_ss, explore_ss, sample_ss, env_ss = np.random.SeedSequence(
            trainer_config.seed
        ).spawn(4)
        init_rng = np.random.default_rng(init_ss)
        self._explore_rng = np.random.default_rng(explore_ss)
        self._sample_rng = np.random.default_rng(sample_ss)
        self._env_seed_rng = np.random.default_rng(env_ss)

        input_dim = env_config.obs_dim + env_config.num_targets
        self.net = AgentNet(
            input_dim, env_config.num_targets, trainer_config.hidden_dim, init_rng
        )
        self.target_net = self.net.clone()
        if scheme == "proposed":
            self.mixer = VdnMixer()
            self.target_mixer = self.mixer.clone()
        elif scheme == "qmix":
            self.mixer = QmixMixer(
                env_config.num_users,
                self.env.global_state_dim,
                trainer_config.mixer_embed_dim,
                init_rng,
            )
            self.target_mixer = self.mixer.clone()
        else:  # iql
            self.mixer = None
            self.target_mixer = None
        self.opt = RmsProp(lr=trainer_config.lr)
        self.buffer = ReplayBuffer(trainer_config.buffer_capacity)

    # -- public API -------------------------------------------------------------

    def run(self) -> TrainingResult:
        """Train for the configured number of episodes; returns metric history."""
        metrics: list[dict] = []
        for episode in range(self.cfg.episodes):
            eps = epsilon_by_episode(episode, self.cfg)
            record, ep_return, mean_delay = self._rollout(eps)
            self.buffer.add(record)
            losses = []
            if len(self.buffer) >= self.cfg.batch:
                for _ in range(self.cfg.updates_per_episode):
                    losses.append(self._train_step())
            loss = float(np.mean(losses)) if losses else float("nan")
            if losses and not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at episode {episode}",
                    tensors=self.checkpoint_tensors(),
                    metrics=metrics,
                )
            metrics.append(
                {
                    "episode": episode,
                    "return": ep_return,
                    "mean_delay": mean_delay,
                    "loss": loss,
                    "epsilon": eps,
                }
            )
        return TrainingResult(self.scheme, metrics, self.net, self.mixer)

    def checkpoint_tensors(self) -> dict[str, np.ndarray]:
        tensors = {f"agent.{k}": v for k, v in self.net.state_dict().items()}
        if self.mixer is not None:
            tensors.update({f"mixer.{k}": v for k, v in self.mixer.state_dict().items()})
        return tensors

    # -- internals ----------------------------------------------------------------

    def _episode_seed(self) -> int:
        if self.cfg.fixed_instance_seed is not None:
            return self.cfg.fixed_instance_seed
        return int(self._env_seed_rng.integers(0, 2**63 - 1))

    def _rollout(self, epsilon: float) -> tuple[EpisodeRecord, float, float]:
        env = self.env
        n = self.env_config.num_users
        _, obs = env.reset(self._episode_seed())
        hidden = self.net.init_hidden(n)
        prev = np.full(n, LOCAL, dtype=np.int64)

        obs_seq = [obs]
        mask_seq = [env.action_masks()]
        state_seq = [env.global_state()]
        action_seq: list[np.ndarray] = []
        rewards: list[float] = []
        delays: list[float] = []

        done = False
        while not done:
            actions, hidden = select_actions(
                self.net, obs, prev, hidden, mask_seq[-1], epsilon, self._explore_rng
            )
            result = env.step(actions)
            action_seq.append(actions)
            rewards.append(result.reward)
            delays.append(result.l_sum)
            obs = result.observations
            obs_seq.append(obs)
            mask_seq.append(env.action_masks())
            state_seq.append(env.global_state())
            prev = actions
            done = result.done

        record = EpisodeRecord(
            observations=np.stack(obs_seq),
            actions=np.stack(action_seq),
            masks=np.stack(mask_seq),
            rewards=np.array(rewards),
            states=np.stack(state_seq),
        )
        ep_return = discounted_return(rewards, self.cfg.gamma)
        return record, ep_return, float(np.mean(delays))

    def _train_step(self) -> float:
        records = self.buffer.sample(self.cfg.batch, self._sample_rng)
        x = len(records)
        t = records[0].length
        n = self.env_config.num_users
        k = self.env_config.num_targets

        obs = np.stack([r.observations for r in records])  # (X, T+1, n, d)
        actions = np.stack([r.actions for r in records])  # (X, T, n)
        masks = np.stack([r.masks for r in records])  # (X, T+1, n, K)
        rewards = np.stack([r.rewards for r in records])  # (X, T)
        states = np.stack([r.states for r in records])  # (X, T+1, S)

        # network inputs: observation ++ one-hot of the agent's previous choice
        prev = np.concatenate(
            [np.full((x, 1, n), LOCAL, dtype=np.int64), actions[:, :-1]], axis=1
        )  # (X, T, n)
        prev_ext = np.concatenate([prev, actions[:, -1:]], axis=1)  # (X, T+1, n)
        d = obs.shape[-1]
        rows = x * n

        def seq_inputs(upto: int, prevs: np.ndarray) -> np.ndarray:
            xs = np.zeros((upto, rows, d + k))
            for step in range(upto):
                xs[step, :, :d] = obs[:, step].reshape(rows, d)
                xs[step, :, d:] = one_hot(prevs[:, step].reshape(rows), k)
            return xs

        xs_online = seq_inputs(t, prev)
        xs_target = seq_inputs(t + 1, prev_ext)

        qs_online, _, caches = self.net.forward_sequence(xs_online)  # (T, rows, K)
        qs_target, _, _ = self.target_net.forward_sequence(xs_target)  # (T+1, rows, K)

        # chosen Q values, (X, T, n)
        acts_flat = actions.transpose(1, 0, 2).reshape(t, rows)
        q_chosen = np.take_along_axis(qs_online, acts_flat[:, :, None], axis=2)[:, :, 0]
        q_chosen = q_chosen.reshape(t, x, n).transpose(1, 0, 2)

        # greedy target values at the next step, masked, (X, T, n)
        next_masks = masks[:, 1:].transpose(1, 0, 2, 3).reshape(t, rows, k)
        q_next = np.where(next_masks, qs_target[1:], -np.inf).max(axis=2)
        q_next = q_next.reshape(t, x, n).transpose(1, 0, 2)

        if self.scheme == "iql":
            y = td_target(rewards[:, :, None], self.cfg.gamma, q_next)
            y[:, -1, :] = rewards[:, -1][:, None]  # terminal: no bootstrap
            residual = q_chosen - y
            loss = float(np.mean(residual * residual))
            dq_chosen = 2.0 * residual / residual.size
        else:
            state_now = states[:, :-1].reshape(x * t, -1)
            state_next = states[:, 1:].reshape(x * t, -1)
            q_tot, mix_cache = self.mixer.forward(
                q_chosen.reshape(x * t, n), state_now
            )
            next_tot, _ = self.target_mixer.forward(
                q_next.reshape(x * t, n), state_next
            )
            q_tot = q_tot.reshape(x, t)
            next_tot = next_tot.reshape(x, t)
            y = td_target(rewards, self.cfg.gamma, next_tot)
            y[:, -1] = rewards[:, -1]  # terminal: no bootstrap
            residual = q_tot - y
            loss = float(np.mean(residual * residual))
            dq_tot = 2.0 * residual / residual.size
            self.mixer.zero_grads()
            dq_chosen = self.mixer.backward(mix_cache, dq_tot.reshape(x * t))
            dq_chosen = dq_chosen.reshape(x, t, n)

        # scatter into per-action gradients and run BPTT
        dqs = np.zeros_like(qs_online)
        dq_flat = dq_chosen.transpose(1, 0, 2).reshape(t, rows)
        np.put_along_axis(dqs, acts_flat[:, :, None], dq_flat[:, :, None], axis=2)
        self.net.zero_grads()
        self.net.backward_sequence(caches, dqs)

        params = self.net.parameters()
        grads = self.net.gradients()
        if self.mixer is not None:
            params = params + self.mixer.parameters()
            grads = grads + self.mixer.gradients()
        clip_global_norm(grads, self.cfg.grad_clip)
        self.opt.step(params, grads)

        soft_update(self.target_net.parameters(), self.net.parameters(), self.cfg.tau)
        if self.mixer is not None:
            soft_update(
                self.target_mixer.parameters(), self.mixer.parameters(), self.cfg.tau
            )
        return loss


def _tier_of(action: int, num_end_nodes: int) -> str:
    if action == LOCAL:
        return "local"
    if action <= num_end_nodes:
        return "end"
    return "cloud"


def _run_eval_episodes(env_config: EnvConfig, episodes: int, seed: int,
                       pick_actions, fixed_instance_seed: int | None = None) -> dict:
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    env = DTEnv(env_config)
    seed_rng = np.random.default_rng(seed)
    returns, delays = [], []
    tier_counts = {"local": 0, "end": 0, "cloud": 0}
    for _ in range(episodes):
        ep_seed = (
            fixed_instance_seed
            if fixed_instance_seed is not None
            else int(seed_rng.integers(0, 2**63 - 1))
        )
        _, obs = env.reset(ep_seed)
        rewards, ep_delays = [], []
        done = False
        ctx = {"hidden": None, "prev": np.full(env_config.num_users, LOCAL, dtype=np.int64)}
        while not done:
            actions = pick_actions(env, obs, ctx)
            result = env.step(actions)
            for a in result.matrix.assignment():
                tier_counts[_tier_of(int(a), env_config.num_end_nodes)] += 1
            rewards.append(result.reward)
            ep_delays.append(result.l_sum)
            obs = result.observations
            done = result.done
        returns.append(discounted_return(rewards, env_config.gamma))
        delays.append(float(np.mean(ep_delays)))
    total = sum(tier_counts.values())
    return {
        "episodes": episodes,
        "mean_return": float(np.mean(returns)),
        "std_return": float(np.std(returns)),
        "mean_delay": float(np.mean(delays)),
        "std_delay": float(np.std(delays)),
        "tier_fractions": {k: v / total for k, v in tier_counts.items()},
        "episode_returns": returns,
        "episode_delays": delays,
    }


def evaluate(net: AgentNet, env_config: EnvConfig, episodes: int, seed: int,
             fixed_instance_seed: int | None = None) -> dict:
    """Greedy-policy evaluation over fresh episodes; returns summary metrics."""

    greedy_rng = np.random.default_rng(0)  # unused at epsilon 0

    def pick(env: DTEnv, obs: np.ndarray, ctx: dict) -> np.ndarray:
        if ctx["hidden"] is None:  # fresh episode
            ctx["hidden"] = net.init_hidden(env_config.num_users)
        actions, ctx["hidden"] = select_actions(
            net, obs, ctx["prev"], ctx["hidden"], env.action_masks(), 0.0, greedy_rng
        )
        ctx["prev"] = actions
        return actions

    return _run_eval_episodes(env_config, episodes, seed, pick, fixed_instance_seed)


def evaluate_random(env_config: EnvConfig, episodes: int, seed: int,
                    fixed_instance_seed: int | None = None) -> dict:
    """Uniform-random baseline: any unmasked action, no networks involved."""
    action_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])

    def pick(env: DTEnv, obs: np.ndarray, ctx: dict) -> np.ndarray:
        del obs, ctx
        masks = env.action_masks()
        actions = np.empty(env_config.num_users, dtype=np.int64)
        for i in range(env_config.num_users):
            actions[i] = action_rng.choice(np.nonzero(masks[i])[0])
        return actions

    return _run_eval_episodes(env_config, episodes, seed, pick, fixed_instance_seed)
