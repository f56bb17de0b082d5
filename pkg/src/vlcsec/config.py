"""Experiment configuration: YAML schema, defaults and validation.

Schema (all blocks and keys optional; omitted keys take the default room
and hardware values of the reference setup):

    scene:
      room: {length_m, width_m, height_m, rx_plane_height_m}
      luminaires: [{x_m, y_m}, ...]          # z pinned to the ceiling
      led: {lambertian_order, chips_per_luminaire, conversion_w_per_a,
            i_min_a, i_max_a}
      pd: {area_m2, responsivity_a_per_w, fov_deg}
      noise: {bandwidth_hz, ambient_photocurrent_a_m2sr,
              amp_noise_density_a_sqrthz}
    optimizer:
      {lambda_db, max_iters, rel_tol, feas_tol, opt_tol}
    sweep:
      {sigma_p_grid_a: [...], n_placements, lambda_db_list: [...]}
    single:
      {bob_xy_m: [x, y], eve_xy_m: [x, y], sigma_p_a}
    validate:
      {n_samples, sigma_p_grid_a: [...], sigma_fractions: [...]}

Validation failures raise ConfigError naming the offending key.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import yaml

from .optimizer import CcpConfig, DesignError
from .scene import Luminaire, NoiseModel, Photodiode, RoomScene, SceneError

_SQRT2 = math.sqrt(2.0)

DEFAULT_LUMINAIRE_XY = ((-_SQRT2, -_SQRT2), (_SQRT2, -_SQRT2),
                        (_SQRT2, _SQRT2), (-_SQRT2, _SQRT2))
DEFAULT_SIGMA_P_GRID = (0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40)
DEFAULT_LAMBDA_DB_LIST = (0.0, -5.0)
DEFAULT_N_PLACEMENTS = 500
# fractions of the power cap at which the clipping statistics are probed;
# below half the cap the bias rule leaves the window at >4 sigma and a
# finite sample sees no clipping at all
DEFAULT_SIGMA_FRACTIONS = (0.5, 0.75, 1.0)


class ConfigError(ValueError):
    """Raised when a configuration file cannot be validated."""


@dataclass(frozen=True)
class SweepSettings:
    sigma_p_grid_a: tuple[float, ...] = DEFAULT_SIGMA_P_GRID
    n_placements: int = DEFAULT_N_PLACEMENTS
    lambda_db_list: tuple[float, ...] = DEFAULT_LAMBDA_DB_LIST


@dataclass(frozen=True)
class SingleSettings:
    bob_xy_m: tuple[float, float] | None = None
    eve_xy_m: tuple[float, float] | None = None
    sigma_p_a: float = 0.25


@dataclass(frozen=True)
class ValidateSettings:
    n_samples: int = 10_000_000
    sigma_p_grid_a: tuple[float, ...] = DEFAULT_SIGMA_P_GRID
    sigma_fractions: tuple[float, ...] = DEFAULT_SIGMA_FRACTIONS


@dataclass(frozen=True)
class ExperimentConfig:
    scene: RoomScene
    optimizer: CcpConfig
    sweep: SweepSettings = field(default_factory=SweepSettings)
    single: SingleSettings = field(default_factory=SingleSettings)
    validate: ValidateSettings = field(default_factory=ValidateSettings)
    raw: dict = field(default_factory=dict, compare=False)


def _require_mapping(node, path):
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected a mapping")
    return node


def _check_unknown(node: dict, allowed, path):
    for key in node:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")


def _number(node, key, path, default, minimum=None, maximum=None, strict_min=False):
    val = node.get(key, default)
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigError(f"{path}.{key}: expected a number")
    val = float(val)
    if not math.isfinite(val):
        raise ConfigError(f"{path}.{key}: must be finite")
    if minimum is not None and (val <= minimum if strict_min else val < minimum):
        op = ">" if strict_min else ">="
        raise ConfigError(f"{path}.{key}: must be {op} {minimum}")
    if maximum is not None and val > maximum:
        raise ConfigError(f"{path}.{key}: must be <= {maximum}")
    return val


def _integer(node, key, path, default, minimum=1):
    val = node.get(key, default)
    if not isinstance(val, int) or isinstance(val, bool):
        raise ConfigError(f"{path}.{key}: expected an integer")
    if val < minimum:
        raise ConfigError(f"{path}.{key}: must be >= {minimum}")
    return val


def _number_list(node, key, path, default):
    val = node.get(key, list(default))
    if not isinstance(val, (list, tuple)) or not val:
        raise ConfigError(f"{path}.{key}: expected a non-empty list of numbers")
    out = []
    for i, x in enumerate(val):
        if not isinstance(x, (int, float)) or isinstance(x, bool):
            raise ConfigError(f"{path}.{key}[{i}]: expected a number")
        out.append(float(x))
    return tuple(out)


def _xy(node, key, path):
    val = node.get(key)
    if val is None:
        return None
    if not isinstance(val, (list, tuple)) or len(val) != 2:
        raise ConfigError(f"{path}.{key}: expected [x, y]")
    return (float(val[0]), float(val[1]))


def _build_scene(node: dict) -> RoomScene:
    node = _require_mapping(node, "scene")
    _check_unknown(node, {"room", "luminaires", "led", "pd", "noise"}, "scene")

    room = _require_mapping(node.get("room"), "scene.room")
    _check_unknown(room, {"length_m", "width_m", "height_m", "rx_plane_height_m"}, "scene.room")
    length = _number(room, "length_m", "scene.room", 5.0, minimum=0, strict_min=True)
    width = _number(room, "width_m", "scene.room", 5.0, minimum=0, strict_min=True)
    height = _number(room, "height_m", "scene.room", 3.0, minimum=0, strict_min=True)
    rx_h = _number(room, "rx_plane_height_m", "scene.room", 0.85, minimum=0, strict_min=True)

    led = _require_mapping(node.get("led"), "scene.led")
    _check_unknown(led, {"lambertian_order", "chips_per_luminaire", "conversion_w_per_a",
                         "i_min_a", "i_max_a"}, "scene.led")
    m_order = _number(led, "lambertian_order", "scene.led", 1.0, minimum=0)
    n_chips = _integer(led, "chips_per_luminaire", "scene.led", 24)
    eta = _number(led, "conversion_w_per_a", "scene.led", 0.44, minimum=0, strict_min=True)
    i_min = _number(led, "i_min_a", "scene.led", 0.0)
    i_max = _number(led, "i_max_a", "scene.led", 1.0)
    if i_min >= i_max:
        raise ConfigError("scene.led.i_min_a: must be < scene.led.i_max_a")

    pd_node = _require_mapping(node.get("pd"), "scene.pd")
    _check_unknown(pd_node, {"area_m2", "responsivity_a_per_w", "fov_deg"}, "scene.pd")
    area = _number(pd_node, "area_m2", "scene.pd", 1e-4, minimum=0, strict_min=True)
    resp = _number(pd_node, "responsivity_a_per_w", "scene.pd", 0.54, minimum=0, strict_min=True)
    fov_deg = _number(pd_node, "fov_deg", "scene.pd", 70.0, minimum=0, strict_min=True, maximum=90.0)

    noise_node = _require_mapping(node.get("noise"), "scene.noise")
    _check_unknown(noise_node, {"bandwidth_hz", "ambient_photocurrent_a_m2sr",
                                "amp_noise_density_a_sqrthz"}, "scene.noise")
    bw = _number(noise_node, "bandwidth_hz", "scene.noise", 20e6, minimum=0, strict_min=True)
    chi = _number(noise_node, "ambient_photocurrent_a_m2sr", "scene.noise", 10.93, minimum=0)
    iamp = _number(noise_node, "amp_noise_density_a_sqrthz", "scene.noise", 5e-12, minimum=0)

    lum_node = node.get("luminaires", [{"x_m": x, "y_m": y} for x, y in DEFAULT_LUMINAIRE_XY])
    if not isinstance(lum_node, list) or not lum_node:
        raise ConfigError("scene.luminaires: expected a non-empty list")
    luminaires = []
    for i, entry in enumerate(lum_node):
        entry = _require_mapping(entry, f"scene.luminaires[{i}]")
        _check_unknown(entry, {"x_m", "y_m"}, f"scene.luminaires[{i}]")
        x = _number(entry, "x_m", f"scene.luminaires[{i}]", None)
        y = _number(entry, "y_m", f"scene.luminaires[{i}]", None)
        luminaires.append(Luminaire(
            position=(x, y, height), lambertian_order=m_order, n_chips=n_chips,
            conversion_w_per_a=eta, i_min_a=i_min, i_max_a=i_max,
        ))

    try:
        return RoomScene(
            length_m=length, width_m=width, height_m=height, rx_plane_height_m=rx_h,
            luminaires=tuple(luminaires),
            pd=Photodiode(area_m2=area, responsivity_a_per_w=resp,
                          fov_rad=math.radians(fov_deg)),
            noise=NoiseModel(bandwidth_hz=bw, ambient_photocurrent=chi,
                             amp_noise_density=iamp),
        )
    except SceneError as exc:
        raise ConfigError(f"scene: {exc}") from exc


def _build_optimizer(node: dict) -> CcpConfig:
    node = _require_mapping(node, "optimizer")
    _check_unknown(node, {"lambda_db", "max_iters", "rel_tol", "feas_tol", "opt_tol"},
                   "optimizer")
    try:
        cfg = CcpConfig(
            lambda_db=_number(node, "lambda_db", "optimizer", 0.0),
            max_iters=_integer(node, "max_iters", "optimizer", 10),
            rel_tol=_number(node, "rel_tol", "optimizer", 1e-2, minimum=0, strict_min=True),
            feas_tol=_number(node, "feas_tol", "optimizer", 1e-8, minimum=0, strict_min=True),
            opt_tol=_number(node, "opt_tol", "optimizer", 1e-8, minimum=0, strict_min=True),
        )
        cfg.lambda_linear  # eager range check
        return cfg
    except DesignError as exc:
        raise ConfigError(f"optimizer.lambda_db: {exc}") from exc


def load_config_dict(data: dict | None) -> ExperimentConfig:
    """Validate an already-parsed configuration mapping."""
    data = _require_mapping(data, "config")
    _check_unknown(data, {"scene", "optimizer", "sweep", "single", "validate"}, "config")

    scene = _build_scene(data.get("scene"))
    optimizer = _build_optimizer(data.get("optimizer"))

    sweep_node = _require_mapping(data.get("sweep"), "sweep")
    _check_unknown(sweep_node, {"sigma_p_grid_a", "n_placements", "lambda_db_list"}, "sweep")
    sweep = SweepSettings(
        sigma_p_grid_a=_number_list(sweep_node, "sigma_p_grid_a", "sweep", DEFAULT_SIGMA_P_GRID),
        n_placements=_integer(sweep_node, "n_placements", "sweep", DEFAULT_N_PLACEMENTS),
        lambda_db_list=_number_list(sweep_node, "lambda_db_list", "sweep", DEFAULT_LAMBDA_DB_LIST),
    )

    single_node = _require_mapping(data.get("single"), "single")
    _check_unknown(single_node, {"bob_xy_m", "eve_xy_m", "sigma_p_a"}, "single")
    single = SingleSettings(
        bob_xy_m=_xy(single_node, "bob_xy_m", "single"),
        eve_xy_m=_xy(single_node, "eve_xy_m", "single"),
        sigma_p_a=_number(single_node, "sigma_p_a", "single", 0.25, minimum=0, strict_min=True),
    )

    val_node = _require_mapping(data.get("validate"), "validate")
    _check_unknown(val_node, {"n_samples", "sigma_p_grid_a", "sigma_fractions"}, "validate")
    validate = ValidateSettings(
        n_samples=_integer(val_node, "n_samples", "validate", 10_000_000),
        sigma_p_grid_a=_number_list(val_node, "sigma_p_grid_a", "validate", DEFAULT_SIGMA_P_GRID),
        sigma_fractions=_number_list(val_node, "sigma_fractions", "validate",
                                     DEFAULT_SIGMA_FRACTIONS),
    )

    # the bias rule must keep the DC point inside the drive range
    for sp in sweep.sigma_p_grid_a:
        i_dc = 2.0 * sp
        if not scene.i_min_a <= i_dc <= scene.i_max_a:
            raise ConfigError(
                f"sweep.sigma_p_grid_a: sigma_p={sp} implies I_DC={i_dc} outside "
                f"the drive range [{scene.i_min_a}, {scene.i_max_a}]"
            )

    return ExperimentConfig(scene=scene, optimizer=optimizer, sweep=sweep,
                            single=single, validate=validate, raw=data)


def load_config(path: str | None) -> ExperimentConfig:
    """Load and validate a YAML configuration file; None gives defaults."""
    if path is None:
        return load_config_dict({})
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file is not valid YAML: {exc}")
    return load_config_dict(data)


def config_hash(cfg: ExperimentConfig) -> str:
    """Stable hash of the merged configuration for output metadata."""
    canon = json.dumps(cfg.raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]
