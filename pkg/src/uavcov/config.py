"""Scenario parameters: validation, defaults, and JSON (de)serialization.

All values are stored in SI units with linear (not dB) ratios: meters,
watts, UAVs per square meter, buildings per square meter.  The JSON config
document uses human units (per-km2 densities, dB threshold) and every
conversion happens exactly once, at parse/serialize time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

KM2 = 1e6  # m^2 per km^2


class ConfigError(ValueError):
    """Invalid or missing scenario parameter; message names the field."""


@dataclass(frozen=True)
class NumericsConfig:
    quad_rel_tol: float = 1e-8    # relative tolerance of adaptive quadrature
    hyp2f1_tol: float = 1e-12     # series truncation tolerance for 2F1
    fd_step: float = 1e-6         # relative step for finite-difference self-checks
    max_quad_depth: int = 50      # adaptive bisection depth cap

    def __post_init__(self):
        for name in ("quad_rel_tol", "hyp2f1_tol", "fd_step"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"numerics.{name} must be > 0")
        if self.max_quad_depth < 1:
            raise ConfigError("numerics.max_quad_depth must be >= 1")


@dataclass(frozen=True)
class ScenarioConfig:
    """One full evaluation scenario (network + channel + environment)."""

    gamma: float            # UAV height above ground, m
    lam: float              # UAV density, per m^2
    theta: float            # SINR threshold, linear
    omega: float = 2.87     # antenna beamwidth, rad
    p: float = 0.1          # transmit power, W
    alpha_los: float = 2.1  # LOS pathloss exponent
    alpha_nlos: float = 4.0  # NLOS pathloss exponent
    m_los: int = 3          # LOS Nakagami shape (integer)
    m_nlos: int = 1         # NLOS Nakagami shape (integer)
    sigma2: float = 1e-9    # noise power, W
    beta: float = 300e-6    # building density, per m^2
    delta: float = 0.5      # built-up area fraction
    kappa: float = 50.0     # Rayleigh scale of building heights, m
    numerics: NumericsConfig = field(default_factory=NumericsConfig)

    def __post_init__(self):
        checks = [
            (self.gamma > 0, "gamma must be > 0"),
            (self.lam >= 0, "lam must be >= 0"),
            (0 < self.omega < math.pi, "omega must be in (0, pi)"),
            (self.p > 0, "p must be > 0"),
            (self.alpha_los > 2, "alpha_los must be > 2"),
            (self.alpha_nlos > self.alpha_los,
             "alpha_nlos must be > alpha_los"),
            (self.sigma2 >= 0, "sigma2 must be >= 0"),
            (self.beta > 0, "beta must be > 0"),
            (0 < self.delta < 1, "delta must be in (0, 1)"),
            (self.kappa > 0, "kappa must be > 0"),
            (self.theta > 0, "theta must be > 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        for name in ("m_los", "m_nlos"):
            m = getattr(self, name)
            if not isinstance(m, int) or isinstance(m, bool) or m < 1:
                raise ConfigError(f"{name} must be a positive integer")

    def with_(self, **changes) -> "ScenarioConfig":
        """Copy with the given fields replaced (re-validates)."""
        return replace(self, **changes)


def table1_defaults(gamma: float, lam: float, theta: float,
                    numerics: NumericsConfig | None = None) -> ScenarioConfig:
    """Baseline scenario with the standard urban parameter set.

    Height, UAV density and SINR threshold have no standard value and must
    be supplied by the caller (the CLI requires them explicitly).
    """
    return ScenarioConfig(gamma=gamma, lam=lam, theta=theta,
                          numerics=numerics or NumericsConfig())


# JSON keys carry their unit in the name; internal fields are SI/linear.
_DIRECT_KEYS = {
    "omega_rad": "omega",
    "p_w": "p",
    "alpha_los": "alpha_los",
    "alpha_nlos": "alpha_nlos",
    "m_los": "m_los",
    "m_nlos": "m_nlos",
    "sigma2_w": "sigma2",
    "delta": "delta",
    "kappa_m": "kappa",
}
_REQUIRED_KEYS = ("gamma_m", "lambda_per_km2", "theta_db")
_ALL_KEYS = set(_DIRECT_KEYS) | set(_REQUIRED_KEYS) | {
    "beta_per_km2", "numerics"}


def config_from_dict(doc: dict, **overrides) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed JSON document.

    `overrides` are internal-unit field values (e.g. from CLI flags) that
    win over the document.  Unknown keys are rejected so typos fail loudly.
    """
    unknown = set(doc) - _ALL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    fields: dict = {}
    for key, name in _DIRECT_KEYS.items():
        if key in doc:
            fields[name] = doc[key]
    if "gamma_m" in doc:
        fields["gamma"] = doc["gamma_m"]
    if "lambda_per_km2" in doc:
        fields["lam"] = doc["lambda_per_km2"] / KM2
    if "theta_db" in doc:
        fields["theta"] = db_to_linear(doc["theta_db"])
    if "beta_per_km2" in doc:
        fields["beta"] = doc["beta_per_km2"] / KM2
    if "numerics" in doc:
        fields["numerics"] = NumericsConfig(**doc["numerics"])

    fields.update({k: v for k, v in overrides.items() if v is not None})

    for key, name in (("gamma_m", "gamma"), ("lambda_per_km2", "lam"),
                      ("theta_db", "theta")):
        if name not in fields:
            raise ConfigError(f"missing required field {key} "
                              "(no standard default exists)")
    for name in ("m_los", "m_nlos"):
        if name in fields:
            m = fields[name]
            if isinstance(m, float):
                if not m.is_integer():
                    raise ConfigError(f"{name} must be a positive integer")
                fields[name] = int(m)
    try:
        return ScenarioConfig(**fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str, **overrides) -> ScenarioConfig:
    """Parse a JSON config document (see README for the schema)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON config: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return config_from_dict(doc, **overrides)


def serialize_config(cfg: ScenarioConfig) -> str:
    """Serialize to the JSON schema; parse_config(serialize_config(c)) == c
    up to float round-off in the unit-converted fields."""
    doc = {
        "gamma_m": cfg.gamma,
        "lambda_per_km2": cfg.lam * KM2,
        "omega_rad": cfg.omega,
        "p_w": cfg.p,
        "alpha_los": cfg.alpha_los,
        "alpha_nlos": cfg.alpha_nlos,
        "m_los": cfg.m_los,
        "m_nlos": cfg.m_nlos,
        "sigma2_w": cfg.sigma2,
        "beta_per_km2": cfg.beta * KM2,
        "delta": cfg.delta,
        "kappa_m": cfg.kappa,
        "theta_db": linear_to_db(cfg.theta),
        "numerics": {
            "quad_rel_tol": cfg.numerics.quad_rel_tol,
            "hyp2f1_tol": cfg.numerics.hyp2f1_tol,
            "fd_step": cfg.numerics.fd_step,
            "max_quad_depth": cfg.numerics.max_quad_depth,
        },
    }
    return json.dumps(doc, indent=2)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ConfigError("dB conversion requires a positive value")
    return 10.0 * math.log10(x)
