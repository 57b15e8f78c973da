"""Deployment matrices over a frozen system snapshot.

A deployment matrix assigns every user's digital twin to exactly one target.
Targets are indexed 0..K-1 with a fixed layout: column 0 is the user's own
device ("local"), columns 1..E are the end-side nodes, and column E+1 is the
cloud.  A snapshot freezes one slot's worth of physics (user attributes,
node inventory, channel gains), so delays of a matrix are a pure function of
(matrix, snapshot).

Compute on shared nodes is split evenly among the twins deployed there; the
cloud accepts up to one twin per user, end-side nodes up to their capacity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .stin import (
    ChannelParams,
    EndSideNode,
    SatelliteCloudPath,
    User,
    cloud_delay,
    end_side_delay,
    local_delay,
    shannon_rate,
)

LOCAL = 0  # column index of the "own device" target

# Relative slack when comparing allocated compute against a node budget.
_BUDGET_RTOL = 1e-9

DEFAULT_ENUMERATION_CAP = 10**7


class InvalidDeploymentError(ValueError):
    """A deployment matrix that violates one of the placement constraints."""

    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class InstanceTooLargeError(ValueError):
    """Brute-force enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class Violation:
    """One broken placement constraint, with enough context to debug it."""

    constraint: str  # binary_entries | single_target_per_user | node_capacity | node_compute_budget
    subject: str  # "user 3" or "node 1"
    magnitude: float

    def __str__(self) -> str:
        return f"{self.constraint} at {self.subject} (magnitude {self.magnitude:g})"


@dataclass(frozen=True)
class SystemSnapshot:
    """One slot's frozen physics.

    end_gains[i, j] is the linear channel gain between user i and end-side
    node j for this slot (shadowing already applied).  The satellite uplink
    gain lives on the path and applies to every user alike.
    """

    users: list[User]
    end_nodes: list[EndSideNode]
    path: SatelliteCloudPath
    channel: ChannelParams
    end_gains: np.ndarray

    def __post_init__(self) -> None:
        gains = np.asarray(self.end_gains, dtype=np.float64)
        object.__setattr__(self, "end_gains", gains)
        expected = (len(self.users), len(self.end_nodes))
        if gains.shape != expected:
            raise ValueError(f"end_gains shape {gains.shape} != {expected}")
        if not np.all(np.isfinite(gains)) or np.any(gains < 0):
            raise ValueError("end_gains must be finite and >= 0")

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def num_targets(self) -> int:
        """Local + end-side nodes + cloud."""
        return len(self.end_nodes) + 2

    @property
    def cloud_column(self) -> int:
        return len(self.end_nodes) + 1

    def end_rates(self) -> np.ndarray:
        """Link rate in bit/s between each user and each end-side node."""
        rates = np.zeros_like(self.end_gains)
        for i, user in enumerate(self.users):
            for j in range(len(self.end_nodes)):
                rates[i, j] = shannon_rate(
                    self.channel.bandwidth_hz,
                    user.tx_power_w,
                    float(self.end_gains[i, j]),
                    self.channel.noise_psd_w_per_hz,
                )
        return rates

    def satellite_uplink_rate(self, user: User) -> float:
        return shannon_rate(
            self.path.w_is_hz,
            user.tx_power_w,
            self.path.g_is,
            self.path.noise_psd_w_per_hz,
        )


@dataclass(frozen=True)
class DeploymentMatrix:
    """Binary user-by-target matrix; one twin placement per row."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.entries, copy=True)  # keep dtype so validation
        if arr.ndim != 2:  # can still see non-binary values
            raise ValueError(f"entries must be 2-D, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.number):
            raise ValueError(f"entries must be numeric, got dtype {arr.dtype}")
        object.__setattr__(self, "entries", arr)

    @classmethod
    def from_assignment(cls, assignment: np.ndarray, num_targets: int) -> "DeploymentMatrix":
        assignment = np.asarray(assignment, dtype=np.int64)
        if assignment.ndim != 1:
            raise ValueError("assignment must be a 1-D target index per user")
        if np.any(assignment < 0) or np.any(assignment >= num_targets):
            raise ValueError("assignment indices out of range")
        entries = np.zeros((assignment.size, num_targets), dtype=np.int64)
        entries[np.arange(assignment.size), assignment] = 1
        return cls(entries)

    def assignment(self) -> np.ndarray:
        """Target index per user; rows must be one-hot."""
        return np.argmax(self.entries, axis=1)


@dataclass(frozen=True)
class AllocationPlan:
    """Resolved placement: target and CPU share per user, occupancy per target."""

    target_of_user: np.ndarray  # (I,) target column per user
    cpu_of_user: np.ndarray  # (I,) allocated cycles/s per user
    occupancy: np.ndarray  # (K,) number of twins per target column


def _occupancy(entries: np.ndarray) -> np.ndarray:
    return entries.sum(axis=0)


def validate(matrix: DeploymentMatrix, snapshot: SystemSnapshot) -> list[Violation]:
    """All constraint violations of the matrix against the snapshot.

    Structural mismatch (wrong shape) raises; constraint breaches are
    returned so callers can report all of them at once.
    """
    entries = matrix.entries
    expected = (snapshot.num_users, snapshot.num_targets)
    if entries.shape != expected:
        raise ValueError(f"matrix shape {entries.shape} != {expected}")

    violations: list[Violation] = []
    binary = (entries == 0) | (entries == 1)
    for i in np.nonzero(~binary.all(axis=1))[0]:
        bad = entries[i][~binary[i]]
        violations.append(Violation("binary_entries", f"user {i}", float(bad[0])))

    row_sums = entries.sum(axis=1)
    for i in np.nonzero(row_sums != 1)[0]:
        violations.append(
            Violation("single_target_per_user", f"user {i}", float(row_sums[i]))
        )

    occ = _occupancy(entries)
    for j, node in enumerate(snapshot.end_nodes):
        count = int(occ[1 + j])
        if count > node.capacity:
            violations.append(
                Violation("node_capacity", f"node {j}", float(count - node.capacity))
            )
    cloud_count = int(occ[snapshot.cloud_column])
    if cloud_count > snapshot.num_users:
        violations.append(
            Violation(
                "node_capacity",
                "cloud",
                float(cloud_count - snapshot.num_users),
            )
        )

    # Compute budget: the even split hands out exactly the node's pool, so
    # this only trips on inconsistent shares; checked for completeness.
    plan = _even_split(entries, snapshot)
    for j, node in enumerate(snapshot.end_nodes):
        allocated = float(plan.cpu_of_user[plan.target_of_user == 1 + j].sum())
        if allocated > node.total_cpu_hz * (1.0 + _BUDGET_RTOL):
            violations.append(
                Violation(
                    "node_compute_budget",
                    f"node {j}",
                    allocated - node.total_cpu_hz,
                )
            )
    cloud_allocated = float(
        plan.cpu_of_user[plan.target_of_user == snapshot.cloud_column].sum()
    )
    if cloud_allocated > snapshot.path.cloud_cpu_hz * (1.0 + _BUDGET_RTOL):
        violations.append(
            Violation(
                "node_compute_budget",
                "cloud",
                cloud_allocated - snapshot.path.cloud_cpu_hz,
            )
        )
    return violations


def _even_split(entries: np.ndarray, snapshot: SystemSnapshot) -> AllocationPlan:
    """CPU share per user under even splitting, assuming one-hot-ish rows."""
    target = np.argmax(entries, axis=1)
    occ = _occupancy(entries)
    cpu = np.zeros(snapshot.num_users, dtype=np.float64)
    cloud_col = snapshot.cloud_column
    for i, user in enumerate(snapshot.users):
        t = int(target[i])
        if t == LOCAL:
            cpu[i] = user.cpu_hz
        elif t == cloud_col:
            cpu[i] = snapshot.path.cloud_cpu_hz / occ[cloud_col]
        else:
            cpu[i] = snapshot.end_nodes[t - 1].total_cpu_hz / occ[t]
    return AllocationPlan(target_of_user=target, cpu_of_user=cpu, occupancy=occ)


def allocate(matrix: DeploymentMatrix, snapshot: SystemSnapshot) -> AllocationPlan:
    """Even-split CPU allocation for a valid matrix."""
    violations = validate(matrix, snapshot)
    if violations:
        raise InvalidDeploymentError(violations)
    return _even_split(matrix.entries, snapshot)


def per_user_delays(matrix: DeploymentMatrix, snapshot: SystemSnapshot) -> np.ndarray:
    """Delay of each user's twin under the matrix, in seconds."""
    plan = allocate(matrix, snapshot)
    delays = np.zeros(snapshot.num_users, dtype=np.float64)
    cloud_col = snapshot.cloud_column
    for i, user in enumerate(snapshot.users):
        t = int(plan.target_of_user[i])
        if t == LOCAL:
            delays[i] = local_delay(user)
        elif t == cloud_col:
            delays[i] = cloud_delay(user, snapshot.path, float(plan.cpu_of_user[i]))
        else:
            delays[i] = end_side_delay(
                user,
                snapshot.channel,
                float(snapshot.end_gains[i, t - 1]),
                float(plan.cpu_of_user[i]),
            )
    return delays


def total_delay(matrix: DeploymentMatrix, snapshot: SystemSnapshot) -> float:
    """Sum of all users' twin delays under the matrix."""
    return float(per_user_delays(matrix, snapshot).sum())


def brute_force_optimal(
    snapshot: SystemSnapshot, enumeration_cap: int = DEFAULT_ENUMERATION_CAP
) -> tuple[DeploymentMatrix, float]:
    """Exhaustive search for the delay-minimizing feasible deployment.

    Enumerates all K^I assignments in lexicographic order and keeps the first
    one attaining the minimum total delay, so ties break toward lower user
    indices choosing lower target columns.  Raises InstanceTooLargeError when
    K^I exceeds the cap.
    """
    users = snapshot.users
    num_users = snapshot.num_users
    num_targets = snapshot.num_targets
    cloud_col = snapshot.cloud_column
    if num_targets**num_users > enumeration_cap:
        raise InstanceTooLargeError(
            f"{num_targets}^{num_users} assignments exceed cap {enumeration_cap}"
        )

    # Per-user fixed term (communication, plus local compute in column 0) and
    # per-occupant compute slope: a twin sharing node j with occ others costs
    # fixed[i, t] + occ * slope[i, t].
    end_rates = snapshot.end_rates()
    fixed = np.zeros((num_users, num_targets))
    slope = np.zeros((num_users, num_targets))
    feeder_rate = shannon_rate(
        snapshot.path.w_sc_hz,
        snapshot.path.p_sc_w,
        snapshot.path.g_sc,
        snapshot.path.noise_psd_w_per_hz,
    )
    for i, user in enumerate(users):
        fixed[i, LOCAL] = local_delay(user)
        for j, node in enumerate(snapshot.end_nodes):
            rate = end_rates[i, j]
            if rate <= 0.0:
                fixed[i, 1 + j] = np.inf
            else:
                fixed[i, 1 + j] = user.data_size_bits / rate
            slope[i, 1 + j] = user.cpu_cycles / node.total_cpu_hz
        uplink = snapshot.satellite_uplink_rate(user)
        if uplink <= 0.0 or feeder_rate <= 0.0:
            fixed[i, cloud_col] = np.inf
        else:
            fixed[i, cloud_col] = (
                user.data_size_bits / uplink
                + user.data_size_bits / feeder_rate
                + snapshot.path.propagation_delay_s
            )
        slope[i, cloud_col] = user.cpu_cycles / snapshot.path.cloud_cpu_hz

    capacities = np.full(num_targets, num_users, dtype=np.int64)
    for j, node in enumerate(snapshot.end_nodes):
        capacities[1 + j] = node.capacity

    best_delay = np.inf
    best: tuple[int, ...] | None = None
    counts = np.zeros(num_targets, dtype=np.int64)
    assignment = [0] * num_users

    def search(i: int) -> None:
        nonlocal best_delay, best
        if i == num_users:
            delay = 0.0
            for u in range(num_users):
                t = assignment[u]
                delay += fixed[u, t] + counts[t] * slope[u, t]
            if delay < best_delay:
                best_delay = delay
                best = tuple(assignment)
            return
        for t in range(num_targets):
            if t != LOCAL and counts[t] >= capacities[t]:
                continue
            counts[t] += 1
            assignment[i] = t
            search(i + 1)
            counts[t] -= 1

    search(0)
    assert best is not None  # local is always feasible
    matrix = DeploymentMatrix.from_assignment(np.array(best), num_targets)
    return matrix, float(best_delay)


# --- JSON serialization (snapshot and matrix round-trips for the oracle CLI) ---


def snapshot_to_dict(snapshot: SystemSnapshot) -> dict:
    return {
        "users": [
            {
                "id": u.id,
                "position": list(u.position),
                "data_size_bits": u.data_size_bits,
                "cpu_hz": u.cpu_hz,
                "workload_density": u.workload_density,
                "tx_power_w": u.tx_power_w,
            }
            for u in snapshot.users
        ],
        "end_nodes": [
            {
                "id": n.id,
                "position": list(n.position),
                "total_cpu_hz": n.total_cpu_hz,
                "capacity": n.capacity,
            }
            for n in snapshot.end_nodes
        ],
        "path": {
            "d_is_m": snapshot.path.d_is_m,
            "d_sc_m": snapshot.path.d_sc_m,
            "w_is_hz": snapshot.path.w_is_hz,
            "w_sc_hz": snapshot.path.w_sc_hz,
            "p_sc_w": snapshot.path.p_sc_w,
            "g_is": snapshot.path.g_is,
            "g_sc": snapshot.path.g_sc,
            "cloud_cpu_hz": snapshot.path.cloud_cpu_hz,
            "light_speed_m_s": snapshot.path.light_speed_m_s,
            "noise_psd_w_per_hz": snapshot.path.noise_psd_w_per_hz,
        },
        "channel": {
            "bandwidth_hz": snapshot.channel.bandwidth_hz,
            "noise_psd_w_per_hz": snapshot.channel.noise_psd_w_per_hz,
            "pathloss_exponent": snapshot.channel.pathloss_exponent,
            "ref_gain_db": snapshot.channel.ref_gain_db,
            "shadowing_sigma_db": snapshot.channel.shadowing_sigma_db,
        },
        "end_gains": snapshot.end_gains.tolist(),
    }


def snapshot_from_dict(data: dict) -> SystemSnapshot:
    users = [
        User(
            id=int(u["id"]),
            position=(float(u["position"][0]), float(u["position"][1])),
            data_size_bits=float(u["data_size_bits"]),
            cpu_hz=float(u["cpu_hz"]),
            workload_density=float(u["workload_density"]),
            tx_power_w=float(u["tx_power_w"]),
        )
        for u in data["users"]
    ]
    end_nodes = [
        EndSideNode(
            id=int(n["id"]),
            position=(float(n["position"][0]), float(n["position"][1])),
            total_cpu_hz=float(n["total_cpu_hz"]),
            capacity=int(n["capacity"]),
        )
        for n in data["end_nodes"]
    ]
    path = SatelliteCloudPath(**{k: float(v) for k, v in data["path"].items()})
    channel = ChannelParams(**{k: float(v) for k, v in data["channel"].items()})
    return SystemSnapshot(
        users=users,
        end_nodes=end_nodes,
        path=path,
        channel=channel,
        end_gains=np.asarray(data["end_gains"], dtype=np.float64),
    )


def matrix_to_dict(matrix: DeploymentMatrix) -> dict:
    return {"entries": matrix.entries.tolist()}


def matrix_from_dict(data: dict) -> DeploymentMatrix:
    return DeploymentMatrix(np.asarray(data["entries"]))


def snapshot_to_json(snapshot: SystemSnapshot) -> str:
    return json.dumps(snapshot_to_dict(snapshot), indent=2, sort_keys=True)


def snapshot_from_json(text: str) -> SystemSnapshot:
    return snapshot_from_dict(json.loads(text))


def matrix_to_json(matrix: DeploymentMatrix) -> str:
    return json.dumps(matrix_to_dict(matrix), sort_keys=True)


def matrix_from_json(text: str) -> DeploymentMatrix:
    return matrix_from_dict(json.loads(text))
