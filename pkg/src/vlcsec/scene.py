"""Indoor geometry, line-of-sight channel gains and receiver noise.

Coordinate convention: the room is centered at the origin in x, y with the
floor at z = 0. Luminaires hang at the ceiling (z = room height) pointing
straight down; receivers sit on a horizontal plane at ``rx_plane_height``
pointing straight up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ELEMENTARY_CHARGE = 1.602176634e-19  # C


class SceneError(ValueError):
    """Raised for physically inconsistent scene parameters."""


@dataclass(frozen=True)
class Luminaire:
    """One ceiling luminaire made of closely packed LED chips.

    position: (x, y, z) in meters, z must equal the room height.
    lambertian_order: exponent m of the cos^m emission pattern.
    n_chips: number of LED chips driven with the same current.
    conversion_w_per_a: LED electro-optical conversion factor (W/A).
    i_min_a, i_max_a: linear drive-current range of one chip (A).
    """

    position: tuple[float, float, float]
    lambertian_order: float = 1.0
    n_chips: int = 24
    conversion_w_per_a: float = 0.44
    i_min_a: float = 0.0
    i_max_a: float = 1.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.position):
            raise SceneError("luminaire position must be finite")
        if self.lambertian_order < 0:
            raise SceneError("lambertian_order must be >= 0")
        if self.n_chips < 1:
            raise SceneError("n_chips must be >= 1")
        if self.conversion_w_per_a <= 0:
            raise SceneError("conversion_w_per_a must be > 0")
        if not self.i_min_a < self.i_max_a:
            raise SceneError("i_min_a must be < i_max_a")


@dataclass(frozen=True)
class Photodiode:
    """Receiver photodiode: active area (m^2), responsivity (A/W), FoV (rad)."""

    area_m2: float = 1e-4
    responsivity_a_per_w: float = 0.54
    fov_rad: float = math.radians(70.0)

    def __post_init__(self):
        if self.area_m2 <= 0:
            raise SceneError("area_m2 must be > 0")
        if self.responsivity_a_per_w <= 0:
            raise SceneError("responsivity_a_per_w must be > 0")
        if not 0 < self.fov_rad <= math.pi / 2:
            raise SceneError("fov_rad must lie in (0, pi/2]")


@dataclass(frozen=True)
class NoiseModel:
    """Receiver noise: modulation bandwidth (Hz), ambient photocurrent
    density (A/(m^2 sr)) and pre-amplifier noise current density (A/sqrt(Hz))."""

    bandwidth_hz: float = 20e6
    ambient_photocurrent: float = 10.93
    amp_noise_density: float = 5e-12

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise SceneError("bandwidth_hz must be > 0")
        if self.ambient_photocurrent < 0:
            raise SceneError("ambient_photocurrent must be >= 0")
        if self.amp_noise_density < 0:
            raise SceneError("amp_noise_density must be >= 0")


@dataclass(frozen=True)
class RoomScene:
    """Room geometry plus transmitter and receiver hardware parameters.

    All luminaires must share the chip count, conversion factor and drive
    range: the emitted-power and SINR expressions assume a single n_c, eta
    and clipping window across the array.
    """

    length_m: float = 5.0
    width_m: float = 5.0
    height_m: float = 3.0
    rx_plane_height_m: float = 0.85
    luminaires: tuple[Luminaire, ...] = field(default_factory=tuple)
    pd: Photodiode = field(default_factory=Photodiode)
    noise: NoiseModel = field(default_factory=NoiseModel)
    elementary_charge: float = ELEMENTARY_CHARGE

    def __post_init__(self):
        if min(self.length_m, self.width_m, self.height_m) <= 0:
            raise SceneError("room dimensions must be > 0")
        if not 0 < self.rx_plane_height_m < self.height_m:
            raise SceneError("rx_plane_height_m must lie in (0, height_m)")
        if len(self.luminaires) < 1:
            raise SceneError("at least one luminaire is required")
        for lum in self.luminaires:
            if abs(lum.position[2] - self.height_m) > 1e-9:
                raise SceneError("luminaire z-coordinate must equal the room height")
        first = self.luminaires[0]
        for lum in self.luminaires[1:]:
            same = (
                lum.n_chips == first.n_chips
                and lum.conversion_w_per_a == first.conversion_w_per_a
                and lum.i_min_a == first.i_min_a
                and lum.i_max_a == first.i_max_a
            )
            if not same:
                raise SceneError("luminaires must share n_chips, conversion factor and drive range")

    @property
    def n_luminaires(self) -> int:
        return len(self.luminaires)

    @property
    def n_chips(self) -> int:
        return self.luminaires[0].n_chips

    @property
    def conversion_w_per_a(self) -> float:
        return self.luminaires[0].conversion_w_per_a

    @property
    def i_min_a(self) -> float:
        return self.luminaires[0].i_min_a

    @property
    def i_max_a(self) -> float:
        return self.luminaires[0].i_max_a

    def contains(self, x: float, y: float) -> bool:
        return abs(x) <= self.length_m / 2 and abs(y) <= self.width_m / 2


@dataclass(frozen=True)
class ReceiverPosition:
    """Receiver location on the receiver plane (z is fixed by the scene)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise SceneError("receiver coordinates must be finite")


def default_scene(rx_plane_height_m: float = 0.85) -> RoomScene:
    """Default 5 x 5 x 3 m room with four symmetric luminaires."""
    s = math.sqrt(2.0)
    positions = [(-s, -s, 3.0), (s, -s, 3.0), (s, s, 3.0), (-s, s, 3.0)]
    return RoomScene(
        luminaires=tuple(Luminaire(position=p) for p in positions),
        rx_plane_height_m=rx_plane_height_m,
    )


def los_gain(scene: RoomScene, luminaire_index: int, rx: ReceiverPosition) -> float:
    """Line-of-sight DC gain from one LED chip to the receiver photodiode.

    Lambertian point-source model:

        h = (m+1) * A_r / (2 pi d^2) * cos(phi)^m * cos(psi)

    with d the chip-receiver distance, phi the irradiance angle off the
    downward luminaire normal and psi the incidence angle off the upward
    receiver normal. Returns 0 when psi exceeds the photodiode FoV.
    """
    if not 0 <= luminaire_index < scene.n_luminaires:
        raise IndexError(f"luminaire_index {luminaire_index} out of range")
    if not scene.contains(rx.x, rx.y):
        raise SceneError(f"receiver ({rx.x}, {rx.y}) outside the room footprint")
    lum = scene.luminaires[luminaire_index]
    dx = rx.x - lum.position[0]
    dy = rx.y - lum.position[1]
    dz = scene.rx_plane_height_m - lum.position[2]
    d2 = dx * dx + dy * dy + dz * dz
    if d2 == 0.0:
        raise SceneError("receiver coincides with a luminaire")
    d = math.sqrt(d2)
    # downward normal at the luminaire, upward normal at the receiver:
    # cos(phi) = cos(psi) = |dz| / d
    cos_angle = -dz / d
    if cos_angle <= 0.0:
        return 0.0
    psi = math.acos(cos_angle)
    if psi > scene.pd.fov_rad:
        return 0.0
    m = lum.lambertian_order
    return (m + 1.0) * scene.pd.area_m2 / (2.0 * math.pi * d2) * cos_angle ** m * cos_angle


def channel_vector(scene: RoomScene, rx: ReceiverPosition) -> np.ndarray:
    """Per-chip LoS gains from every luminaire to one receiver."""
    return np.array([los_gain(scene, k, rx) for k in range(scene.n_luminaires)])


def receiver_noise_variance(scene: RoomScene, gains: np.ndarray, i_dc: float) -> float:
    """Receiver noise variance (A^2): signal shot + ambient shot + amplifier.

        sigma^2 = 2 e gamma Pr_avg B + 4 pi e gamma A_r chi (1 - cos FoV) B
                  + i_amp^2 B

    Pr_avg is the average received optical power n_c eta I_DC sum(h); the
    clipped drive signal is treated as having mean I_DC.
    """
    gains = np.asarray(gains, dtype=float)
    if not scene.i_min_a <= i_dc <= scene.i_max_a:
        raise SceneError(f"i_dc {i_dc} outside drive range [{scene.i_min_a}, {scene.i_max_a}]")
    pd = scene.pd
    nm = scene.noise
    e = scene.elementary_charge
    pr_avg = scene.n_chips * scene.conversion_w_per_a * i_dc * float(gains.sum())
    if pr_avg < 0:
        raise SceneError("negative average received power")
    shot_signal = 2.0 * e * pd.responsivity_a_per_w * pr_avg * nm.bandwidth_hz
    shot_ambient = (
        4.0 * math.pi * e * pd.responsivity_a_per_w * pd.area_m2
        * nm.ambient_photocurrent * (1.0 - math.cos(pd.fov_rad)) * nm.bandwidth_hz
    )
    amplifier = nm.amp_noise_density ** 2 * nm.bandwidth_hz
    return shot_signal + shot_ambient + amplifier
