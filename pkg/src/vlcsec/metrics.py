"""SINR and secrecy-rate evaluation for a precoder pair.

Two model variants are computed for each receiver:

* exact: clipping statistics evaluated at the actual per-luminaire drive
  powers v_n^2 + w_n^2;
* cap ("tilde"): clipping statistics evaluated at the per-luminaire power
  budgets P_n, the regime assumed during precoder design.

Both coincide whenever every luminaire transmits at its budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clipping import stats_vector
from .scene import RoomScene, receiver_noise_variance

POWER_FEAS_TOL = 1e-9


class MetricsError(ValueError):
    """Raised for inconsistent precoder or SINR inputs."""


@dataclass(frozen=True)
class PrecoderPair:
    """Information precoder v, jamming precoder w and power budgets P (A^2)."""

    v: np.ndarray
    w: np.ndarray
    budgets: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        w = np.asarray(self.w, dtype=float)
        p = np.asarray(self.budgets, dtype=float)
        if not (v.shape == w.shape == p.shape) or v.ndim != 1:
            raise MetricsError("v, w and budgets must be 1-D arrays of equal length")
        if np.any(p < 0):
            raise MetricsError("power budgets must be >= 0")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "budgets", p)

    @property
    def per_luminaire_power(self) -> np.ndarray:
        return self.v ** 2 + self.w ** 2

    def is_power_feasible(self, tol: float = POWER_FEAS_TOL) -> bool:
        return bool(np.all(self.per_luminaire_power <= self.budgets + tol))


@dataclass(frozen=True)
class SinrInputs:
    """Everything one receiver needs for the SINR ratio.

    h_eff: attenuation-weighted channel h * R (per chip).
    h_raw: raw channel gains h (per chip).
    clip_noise_std: per-luminaire clipping-noise std (A).
    noise_norm: receiver noise variance normalized by (gamma * eta)^2 (A^2).
    n_chips: LED chips per luminaire.
    """

    h_eff: np.ndarray
    h_raw: np.ndarray
    clip_noise_std: np.ndarray
    noise_norm: float
    n_chips: int

    def __post_init__(self):
        if not (len(self.h_eff) == len(self.h_raw) == len(self.clip_noise_std)):
            raise MetricsError("SINR input vectors must share one length")
        if self.noise_norm <= 0:
            raise MetricsError("normalized noise variance must be > 0")


def sinr(inputs: SinrInputs, pc: PrecoderPair) -> float:
    """Signal-to-interference-plus-noise ratio for one receiver.

        (n_c h_eff . v)^2
        -----------------------------------------------------
        (n_c h_eff . w)^2 + (n_c h_raw . clip_std)^2 + noise
    """
    if len(pc.v) != len(inputs.h_eff):
        raise MetricsError("precoder length does not match the channel")
    nc = inputs.n_chips
    signal = (nc * float(inputs.h_eff @ pc.v)) ** 2
    jam = (nc * float(inputs.h_eff @ pc.w)) ** 2
    clip = (nc * float(inputs.h_raw @ inputs.clip_noise_std)) ** 2
    return signal / (jam + clip + inputs.noise_norm)


def normalized_noise_variance(scene: RoomScene, gains: np.ndarray, i_dc: float) -> float:
    """Receiver noise variance divided by (responsivity * conversion)^2."""
    ge = scene.pd.responsivity_a_per_w * scene.conversion_w_per_a
    return receiver_noise_variance(scene, gains, i_dc) / ge ** 2


def _pair(scene, h_b, h_e, pc, i_dc, powers):
    r, s_clip = stats_vector(scene, powers, i_dc)
    nc = scene.n_chips
    in_b = SinrInputs(h_b * r, np.asarray(h_b, float), s_clip,
                      normalized_noise_variance(scene, h_b, i_dc), nc)
    in_e = SinrInputs(h_e * r, np.asarray(h_e, float), s_clip,
                      normalized_noise_variance(scene, h_e, i_dc), nc)
    return sinr(in_b, pc), sinr(in_e, pc)


def exact_sinr_pair(scene: RoomScene, h_b: np.ndarray, h_e: np.ndarray,
                    pc: PrecoderPair, i_dc: float) -> tuple[float, float]:
    """(Bob, Eve) SINR with clipping stats at the actual drive powers."""
    return _pair(scene, h_b, h_e, pc, i_dc, pc.per_luminaire_power)


def tilde_sinr_pair(scene: RoomScene, h_b: np.ndarray, h_e: np.ndarray,
                    pc: PrecoderPair, i_dc: float) -> tuple[float, float]:
    """(Bob, Eve) SINR with clipping stats at the power budgets."""
    return _pair(scene, h_b, h_e, pc, i_dc, pc.budgets)


def secrecy_rate(sinr_b: float, sinr_e: float, clamp: bool = False) -> float:
    """Achievable secrecy rate log2(1+SINR_B) - log2(1+SINR_E) in bit/s/Hz.

    The raw value can be negative for unfavourable geometry; ``clamp``
    returns max(0, rate).
    """
    if sinr_b < 0 or sinr_e < 0:
        raise MetricsError("SINRs must be >= 0")
    rate = math.log2(1.0 + sinr_b) - math.log2(1.0 + sinr_e)
    return max(0.0, rate) if clamp else rate


@dataclass
class SecrecyReport:
    """Solved-instance summary: SINRs, rates, feasibility and the CCP trace."""

    sinr_bob: float
    sinr_eve: float
    tilde_sinr_bob: float
    tilde_sinr_eve: float
    secrecy_rate: float
    tilde_secrecy_rate: float
    no_an: bool
    power_feasible: bool
    eve_constraint_feasible: bool
    degenerate: bool = False
    trace: "object | None" = field(default=None, repr=False)

    @property
    def secrecy_rate_clamped(self) -> float:
        return max(0.0, self.secrecy_rate)

    @property
    def tilde_secrecy_rate_clamped(self) -> float:
        return max(0.0, self.tilde_secrecy_rate)
