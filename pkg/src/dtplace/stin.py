"""Physical-layer entities and delay formulas for the satellite-terrestrial network.

Everything here is scalar math over plain dataclasses: users (ground devices
that own a digital twin), end-side nodes (nearby devices that can host twins),
and the satellite relay path to a remote cloud.  All quantities carry SI units:
bits, Hz, watts, meters, seconds, CPU cycles.  Rates come from the Shannon
capacity of the link, delays from transmission plus computation (plus
propagation on the satellite path).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LIGHT_SPEED_M_S = 2.998e8

# Thermal noise floor, -174 dBm/Hz expressed in W/Hz.
NOISE_PSD_W_PER_HZ = 10.0 ** ((-174.0 - 30.0) / 10.0)

# Ground devices never transmit above 200 mW.
MAX_TX_POWER_W = 0.2

# Distances below 1 m are clamped so the log-distance path loss stays finite.
MIN_PATHLOSS_DISTANCE_M = 1.0


class UnreachableNodeError(ValueError):
    """Raised when a link rate of zero makes a remote placement impossible."""


def _require_positive(value: float, name: str) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class User:
    """A ground device with one digital-twin task per slot.

    data_size_bits is the twin's synchronization payload D, workload_density
    the CPU cycles needed per bit, cpu_hz the device's own CPU speed, and
    tx_power_w its uplink transmit power.
    """

    id: int
    position: tuple[float, float]
    data_size_bits: float
    cpu_hz: float
    workload_density: float
    tx_power_w: float

    def __post_init__(self) -> None:
        _require_positive(self.data_size_bits, "data_size_bits")
        _require_positive(self.cpu_hz, "cpu_hz")
        _require_positive(self.workload_density, "workload_density")
        _require_positive(self.tx_power_w, "tx_power_w")
        if self.tx_power_w > MAX_TX_POWER_W:
            raise ValueError(
                f"tx_power_w {self.tx_power_w} exceeds cap {MAX_TX_POWER_W}"
            )

    @property
    def cpu_cycles(self) -> float:
        """Total cycles needed to process the twin's data once."""
        return self.workload_density * self.data_size_bits


@dataclass(frozen=True)
class EndSideNode:
    """A nearby device that can host digital twins for other users.

    total_cpu_hz is shared evenly among all twins deployed on the node;
    capacity caps how many twins it accepts in one slot.
    """

    id: int
    position: tuple[float, float]
    total_cpu_hz: float
    capacity: int

    def __post_init__(self) -> None:
        _require_positive(self.total_cpu_hz, "total_cpu_hz")
        if self.capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {self.capacity}")


@dataclass(frozen=True)
class SatelliteCloudPath:
    """The two-hop relay path user -> satellite -> cloud server.

    g_is is the linear channel gain of the user uplink (one value shared by
    all users; the satellite footprint dwarfs the ground area, so per-user
    geometry differences are negligible), g_sc the gain of the feeder link
    down to the cloud gateway.  cloud_cpu_hz is the cloud's compute pool,
    shared evenly among the twins deployed there.
    """

    d_is_m: float = 6.0e5
    d_sc_m: float = 6.0e5
    w_is_hz: float = 1.0e6
    w_sc_hz: float = 2.0e7
    p_sc_w: float = 10.0
    g_is: float = 5.0e-14
    g_sc: float = 2.4e-14
    cloud_cpu_hz: float = 1.0e11
    light_speed_m_s: float = LIGHT_SPEED_M_S
    noise_psd_w_per_hz: float = NOISE_PSD_W_PER_HZ

    def __post_init__(self) -> None:
        for name in (
            "d_is_m",
            "d_sc_m",
            "w_is_hz",
            "w_sc_hz",
            "p_sc_w",
            "g_is",
            "g_sc",
            "cloud_cpu_hz",
            "light_speed_m_s",
            "noise_psd_w_per_hz",
        ):
            _require_positive(getattr(self, name), name)

    @property
    def propagation_delay_s(self) -> float:
        """Signal flight time over both hops; a floor under any cloud delay."""
        return (self.d_is_m + self.d_sc_m) / self.light_speed_m_s


@dataclass(frozen=True)
class ChannelParams:
    """Terrestrial channel model: bandwidth, noise, and log-distance path loss."""

    bandwidth_hz: float = 2.0e6
    noise_psd_w_per_hz: float = NOISE_PSD_W_PER_HZ
    pathloss_exponent: float = 3.0
    ref_gain_db: float = -30.0
    shadowing_sigma_db: float = 4.0

    def __post_init__(self) -> None:
        _require_positive(self.bandwidth_hz, "bandwidth_hz")
        _require_positive(self.noise_psd_w_per_hz, "noise_psd_w_per_hz")
        _require_positive(self.pathloss_exponent, "pathloss_exponent")
        if not math.isfinite(self.ref_gain_db):
            raise ValueError("ref_gain_db must be finite")
        if not math.isfinite(self.shadowing_sigma_db) or self.shadowing_sigma_db < 0:
            raise ValueError("shadowing_sigma_db must be finite and >= 0")


def shannon_rate(
    bandwidth_hz: float,
    tx_power_w: float,
    gain_linear: float,
    noise_psd_w_per_hz: float,
) -> float:
    """Achievable link rate W * log2(1 + P*G / (W * N0)) in bit/s.

    gain_linear may be zero (blocked link, rate 0); everything else must be
    positive.  The noise term is the PSD integrated over the band.
    """
    _require_positive(bandwidth_hz, "bandwidth_hz")
    _require_positive(tx_power_w, "tx_power_w")
    _require_positive(noise_psd_w_per_hz, "noise_psd_w_per_hz")
    if not math.isfinite(gain_linear) or gain_linear < 0.0:
        raise ValueError(f"gain_linear must be finite and >= 0, got {gain_linear!r}")
    snr = tx_power_w * gain_linear / (bandwidth_hz * noise_psd_w_per_hz)
    return bandwidth_hz * math.log2(1.0 + snr)


def channel_gain(
    distance_m: float, params: ChannelParams, shadowing_db: float = 0.0
) -> float:
    """Linear gain of the log-distance path-loss model with shadowing.

    gain_dB = ref_gain_db - 10 * exponent * log10(d) + shadowing_db, with the
    distance clamped to 1 m so the reference point bounds the gain.
    """
    if not math.isfinite(distance_m) or distance_m < 0.0:
        raise ValueError(f"distance_m must be finite and >= 0, got {distance_m!r}")
    if not math.isfinite(shadowing_db):
        raise ValueError("shadowing_db must be finite")
    d = max(distance_m, MIN_PATHLOSS_DISTANCE_M)
    gain_db = (
        params.ref_gain_db
        - 10.0 * params.pathloss_exponent * math.log10(d)
        + shadowing_db
    )
    return 10.0 ** (gain_db / 10.0)


def local_delay(user: User) -> float:
    """Delay when the twin runs on the user's own device: pure computation."""
    return user.cpu_cycles / user.cpu_hz


def end_side_delay(
    user: User,
    channel: ChannelParams,
    gain_linear: float,
    allocated_cpu_hz: float,
) -> float:
    """Delay when the twin runs on an end-side node.

    Upload of the synchronization data over the terrestrial link, then
    computation with the CPU share the node allocated to this twin.
    """
    _require_positive(allocated_cpu_hz, "allocated_cpu_hz")
    rate = shannon_rate(
        channel.bandwidth_hz, user.tx_power_w, gain_linear, channel.noise_psd_w_per_hz
    )
    if rate <= 0.0:
        raise UnreachableNodeError(
            f"user {user.id}: zero link rate, end-side node unreachable"
        )
    return user.data_size_bits / rate + user.cpu_cycles / allocated_cpu_hz


def cloud_delay(
    user: User,
    path: SatelliteCloudPath,
    allocated_cpu_hz: float,
) -> float:
    """Delay when the twin runs in the cloud behind the satellite relay.

    Two transmission legs (user->satellite, satellite->cloud), propagation
    over both hops, then computation with the allocated cloud CPU share.
    """
    _require_positive(allocated_cpu_hz, "allocated_cpu_hz")
    uplink_rate = shannon_rate(
        path.w_is_hz, user.tx_power_w, path.g_is, path.noise_psd_w_per_hz
    )
    feeder_rate = shannon_rate(
        path.w_sc_hz, path.p_sc_w, path.g_sc, path.noise_psd_w_per_hz
    )
    if uplink_rate <= 0.0 or feeder_rate <= 0.0:
        raise UnreachableNodeError(f"user {user.id}: satellite path unreachable")
    return (
        user.data_size_bits / uplink_rate
        + user.data_size_bits / feeder_rate
        + path.propagation_delay_s
        + user.cpu_cycles / allocated_cpu_hz
    )
