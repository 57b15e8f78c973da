"""Minimal float64 neural layers with hand-written backward passes.

Just enough machinery for the recurrent Q-networks and the mixing network:
dense layers, a GRU cell, truncated-nothing BPTT over fixed-length episodes,
RMSProp, soft target updates, and a checkpoint format.  Forward calls return
a cache; the matching backward consumes it and accumulates parameter
gradients in-place, so a training step is forward -> seed output grads ->
backward in reverse order -> clip -> optimizer step.

All arrays are float64 and all randomness flows through an explicit
numpy Generator, so identical seeds give bit-identical training runs.
"""

from __future__ import annotations

import json

import numpy as np

DEFAULT_LEARNING_RATE = 1e-4
DEFAULT_GRAD_CLIP = 10.0


class CheckpointError(ValueError):
    """Checkpoint file malformed or incompatible with the expected shapes."""


class NonFiniteGradientError(FloatingPointError):
    """A gradient became NaN or infinite; training cannot continue."""


def _uniform_fan_in(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # evaluated piecewise to stay overflow-free for large |x|
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Dense:
    """Affine layer y = act(x @ W.T + b) with activation in {identity, relu}."""

    def __init__(self, in_dim: int, out_dim: int, activation: str = "identity",
                 rng: np.random.Generator | None = None):
        if activation not in ("identity", "relu"):
            raise ValueError(f"unsupported activation {activation!r}")
        rng = rng or np.random.default_rng(0)
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.activation = activation
        self.w = _uniform_fan_in(rng, (out_dim, in_dim), in_dim)
        self.b = _uniform_fan_in(rng, (out_dim,), in_dim)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        """x: (batch, in_dim) -> (y, cache)."""
        z = x @ self.w.T + self.b
        if self.activation == "relu":
            y = np.maximum(z, 0.0)
        else:
            y = z
        return y, (x, z)

    def backward(self, cache: tuple, dy: np.ndarray) -> np.ndarray:
        """Accumulate dW, db from upstream dy and return dx."""
        x, z = cache
        if self.activation == "relu":
            dz = dy * (z > 0.0)
        else:
            dz = dy
        self.dw += dz.T @ x
        self.db += dz.sum(axis=0)
        return dz @ self.w

    def parameters(self) -> list[np.ndarray]:
        return [self.w, self.b]

    def gradients(self) -> list[np.ndarray]:
        return [self.dw, self.db]


class GruCell:
    """Gated recurrent unit over [input; hidden] with per-gate weight matrices.

    h_next = (1 - z) * h_prev + z * tanh(Wh @ [x; r * h_prev] + bh)
    with update gate z and reset gate r both sigmoid([x; h_prev]) affine maps.
    The convex combination keeps every hidden component in (-1, 1) once the
    candidate has been applied.
    """

    def __init__(self, in_dim: int, hidden_dim: int, rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        self.in_dim = in_dim
        self.hidden_dim = hidden_dim
        fan_in = in_dim + hidden_dim
        shape = (hidden_dim, fan_in)
        self.wz = _uniform_fan_in(rng, shape, fan_in)
        self.bz = _uniform_fan_in(rng, (hidden_dim,), fan_in)
        self.wr = _uniform_fan_in(rng, shape, fan_in)
        self.br = _uniform_fan_in(rng, (hidden_dim,), fan_in)
        self.wh = _uniform_fan_in(rng, shape, fan_in)
        self.bh = _uniform_fan_in(rng, (hidden_dim,), fan_in)
        self.dwz = np.zeros_like(self.wz)
        self.dbz = np.zeros_like(self.bz)
        self.dwr = np.zeros_like(self.wr)
        self.dbr = np.zeros_like(self.br)
        self.dwh = np.zeros_like(self.wh)
        self.dbh = np.zeros_like(self.bh)

    def step(self, x: np.ndarray, h_prev: np.ndarray) -> tuple[np.ndarray, tuple]:
        """x: (batch, in_dim), h_prev: (batch, hidden) -> (h_next, cache)."""
        xh = np.concatenate([x, h_prev], axis=1)
        z = _sigmoid(xh @ self.wz.T + self.bz)
        r = _sigmoid(xh @ self.wr.T + self.br)
        xrh = np.concatenate([x, r * h_prev], axis=1)
        cand = np.tanh(xrh @ self.wh.T + self.bh)
        h_next = (1.0 - z) * h_prev + z * cand
        return h_next, (x, h_prev, xh, z, r, xrh, cand)

    def backward(self, cache: tuple, dh_next: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Accumulate gate gradients; return (dx, dh_prev)."""
        x, h_prev, xh, z, r, xrh, cand = cache
        n_in = self.in_dim

        dz = dh_next * (cand - h_prev)
        dcand = dh_next * z
        dh_prev = dh_next * (1.0 - z)

        da_h = dcand * (1.0 - cand * cand)
        self.dwh += da_h.T @ xrh
        self.dbh += da_h.sum(axis=0)
        dxrh = da_h @ self.wh
        dx = dxrh[:, :n_in].copy()
        drh = dxrh[:, n_in:]
        dr = drh * h_prev
        dh_prev = dh_prev + drh * r

        da_z = dz * z * (1.0 - z)
        self.dwz += da_z.T @ xh
        self.dbz += da_z.sum(axis=0)
        dxh = da_z @ self.wz

        da_r = dr * r * (1.0 - r)
        self.dwr += da_r.T @ xh
        self.dbr += da_r.sum(axis=0)
        dxh = dxh + da_r @ self.wr

        dx += dxh[:, :n_in]
        dh_prev = dh_prev + dxh[:, n_in:]
        return dx, dh_prev

    def parameters(self) -> list[np.ndarray]:
        return [self.wz, self.bz, self.wr, self.br, self.wh, self.bh]

    def gradients(self) -> list[np.ndarray]:
        return [self.dwz, self.dbz, self.dwr, self.dbr, self.dwh, self.dbh]


class AgentNet:
    """Recurrent Q-network: dense+relu into a GRU into a linear Q head.

    One step consumes an input row per agent and that agent's hidden state;
    the hidden state carries the agent's action-observation history.
    """

    PART_NAMES = ("fc_in.w", "fc_in.b",
                  "gru.wz", "gru.bz", "gru.wr", "gru.br", "gru.wh", "gru.bh",
                  "fc_out.w", "fc_out.b")

    def __init__(self, input_dim: int, num_actions: int, hidden_dim: int = 64,
                 rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        self.input_dim = input_dim
        self.num_actions = num_actions
        self.hidden_dim = hidden_dim
        self.fc_in = Dense(input_dim, hidden_dim, "relu", rng)
        self.gru = GruCell(hidden_dim, hidden_dim, rng)
        self.fc_out = Dense(hidden_dim, num_actions, "identity", rng)

    def init_hidden(self, batch: int) -> np.ndarray:
        return np.zeros((batch, self.hidden_dim))

    def step(self, x: np.ndarray, h_prev: np.ndarray) -> tuple[np.ndarray, np.ndarray, tuple]:
        """One recurrent step: (q_values, h_next, cache)."""
        feat, c_in = self.fc_in.forward(x)
        h_next, c_gru = self.gru.step(feat, h_prev)
        q, c_out = self.fc_out.forward(h_next)
        return q, h_next, (c_in, c_gru, c_out)

    def backward_step(self, cache: tuple, dq: np.ndarray, dh_next: np.ndarray) -> np.ndarray:
        """Backprop one step; dh_next is the gradient flowing in from step t+1."""
        c_in, c_gru, c_out = cache
        dh = self.fc_out.backward(c_out, dq) + dh_next
        dfeat, dh_prev = self.gru.backward(c_gru, dh)
        self.fc_in.backward(c_in, dfeat)
        return dh_prev

    def forward_sequence(self, xs: np.ndarray, h0: np.ndarray | None = None
                         ) -> tuple[np.ndarray, np.ndarray, list]:
        """xs: (T, batch, input_dim) -> (qs (T, batch, A), h_final, caches)."""
        steps, batch = xs.shape[0], xs.shape[1]
        h = self.init_hidden(batch) if h0 is None else h0
        qs = np.zeros((steps, batch, self.num_actions))
        caches = []
        for t in range(steps):
            q, h, cache = self.step(xs[t], h)
            qs[t] = q
            caches.append(cache)
        return qs, h, caches

    def backward_sequence(self, caches: list, dqs: np.ndarray) -> None:
        """Backprop through time over a full forward_sequence call."""
        batch = dqs.shape[1]
        dh = np.zeros((batch, self.hidden_dim))
        for t in range(len(caches) - 1, -1, -1):
            dh = self.backward_step(caches[t], dqs[t], dh)

    def parameters(self) -> list[np.ndarray]:
        return self.fc_in.parameters() + self.gru.parameters() + self.fc_out.parameters()

    def gradients(self) -> list[np.ndarray]:
        return self.fc_in.gradients() + self.gru.gradients() + self.fc_out.gradients()

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

    def clone(self) -> "AgentNet":
        twin = AgentNet(self.input_dim, self.num_actions, self.hidden_dim)
        twin.load_state_dict(self.state_dict())
        return twin


class RmsProp:
    """Root-mean-square gradient scaling with a decaying squared accumulator."""

    def __init__(self, lr: float = DEFAULT_LEARNING_RATE, decay: float = 0.99,
                 eps: float = 1e-5):
        if lr <= 0:
            raise ValueError("lr must be positive")
        if not 0.0 <= decay < 1.0:
            raise ValueError("decay must be in [0, 1)")
        self.lr = lr
        self.decay = decay
        self.eps = eps
        self._accum: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """In-place update; raises on non-finite gradients."""
        if len(params) != len(grads):
            raise ValueError("params and grads must align")
        if self._accum is None:
            self._accum = [np.zeros_like(p) for p in params]
        for p, g, acc in zip(params, grads, self._accum):
            if not np.all(np.isfinite(g)):
                raise NonFiniteGradientError("non-finite gradient in optimizer step")
            acc *= self.decay
            acc += (1.0 - self.decay) * g * g
            p -= self.lr * g / (np.sqrt(acc) + self.eps)


def clip_global_norm(grads: list[np.ndarray], max_norm: float = DEFAULT_GRAD_CLIP) -> float:
    """Scale all gradients jointly so their global L2 norm is at most max_norm."""
    total = 0.0
    for g in grads:
        total += float(np.sum(g * g))
    norm = float(np.sqrt(total))
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for g in grads:
            g *= scale
    return norm


def soft_update(target_params: list[np.ndarray], online_params: list[np.ndarray],
                tau: float) -> None:
    """Move target parameters a fraction tau toward the online parameters."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    for t, o in zip(target_params, online_params):
        t *= 1.0 - tau
        t += tau * o


def save_checkpoint(path, tensors: dict[str, np.ndarray], meta: dict) -> None:
    """Write named float64 tensors plus a JSON metadata record to an .npz file.

    The metadata must carry at least a config_hash so evaluation can refuse
    checkpoints trained under a different configuration.
    """
    if "config_hash" not in meta:
        raise ValueError("meta must include a config_hash")
    payload = {f"tensor/{k}": np.asarray(v, dtype=np.float64) for k, v in tensors.items()}
    payload["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)
    np.savez(path, **payload)


def load_checkpoint(path, expected_shapes: dict[str, tuple] | None = None
                    ) -> tuple[dict[str, np.ndarray], dict]:
    """Read a checkpoint; verify tensor shapes when expected_shapes is given."""
    try:
        with np.load(path) as data:
            if "meta" not in data:
                raise CheckpointError(f"{path}: missing metadata record")
            meta = json.loads(bytes(data["meta"]).decode())
            tensors = {
                k[len("tensor/"):]: np.array(data[k], dtype=np.float64)
                for k in data.files
                if k.startswith("tensor/")
            }
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, CheckpointError):
            raise
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if expected_shapes is not None:
        for name, shape in expected_shapes.items():
            if name not in tensors:
                raise CheckpointError(f"{path}: missing tensor {name}")
            if tensors[name].shape != tuple(shape):
                raise CheckpointError(
                    f"{path}: tensor {name} has shape {tensors[name].shape}, expected {tuple(shape)}"
                )
    return tensors, meta
