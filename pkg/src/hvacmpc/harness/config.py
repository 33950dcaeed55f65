"""Experiment configuration: YAML loading and validation with field paths."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, asdict

import numpy as np
import yaml

from ..core import MODES, ZONE_CLASSES


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field path."""


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    mode: str = "heating"
    seed: int = 0
    # time grid
    tau_s: float = 600.0
    days: float = 3.0
    start_hour: float = 0.0
    # building
    n_zones: int = 20
    zone_classes: list = field(default_factory=list)   # defaults to a rotation
    meas_noise_std: float = 0.0
    # controller
    controller: str = "mpc"          # mpc | thermostat
    lam: int = 72
    backend: str = "auto"
    preconditioning_lead_h: float = 2.0
    # identification campaign
    identification_days: float = 18.0
    # demand response: list of {start, length, energy_bound, reward}
    dr_requests: list = field(default_factory=list)
    # price shape
    price_base: float = 0.06
    price_peak: float = 0.22
    # forecast uncertainty
    uncertainty_sources: list = field(default_factory=list)  # subset of temp/irr/gains
    realizations: int = 20

    @property
    def n_steps(self) -> int:
        return int(round(self.days * 86400.0 / self.tau_s))

    def validate(self) -> "ExperimentConfig":
        if self.mode not in MODES:
            raise ConfigError(f"mode: must be one of {MODES}, got {self.mode!r}")
        if self.tau_s <= 0:
            raise ConfigError(f"tau_s: must be positive, got {self.tau_s}")
        if self.days <= 0:
            raise ConfigError(f"days: must be positive, got {self.days}")
        if self.n_zones < 1:
            raise ConfigError(f"n_zones: must be >= 1, got {self.n_zones}")
        if self.zone_classes:
            if len(self.zone_classes) != self.n_zones:
                raise ConfigError(
                    f"zone_classes: expected {self.n_zones} entries, "
                    f"got {len(self.zone_classes)}")
            for i, zc in enumerate(self.zone_classes):
                if zc not in ZONE_CLASSES:
                    raise ConfigError(f"zone_classes[{i}]: unknown class {zc!r}")
        if self.controller not in ("mpc", "thermostat"):
            raise ConfigError(f"controller: must be mpc|thermostat, got {self.controller!r}")
        if self.lam < 1:
            raise ConfigError(f"lam: must be >= 1, got {self.lam}")
        if self.backend not in ("auto", "simplex", "highs"):
            raise ConfigError(f"backend: unknown backend {self.backend!r}")
        if self.preconditioning_lead_h < 0:
            raise ConfigError("preconditioning_lead_h: must be >= 0")
        if self.identification_days <= 0:
            raise ConfigError("identification_days: must be positive")
        for j, r in enumerate(self.dr_requests):
            for key in ("start", "length", "energy_bound", "reward"):
                if key not in r:
                    raise ConfigError(f"dr_requests[{j}].{key}: missing")
            if r["length"] < 1:
                raise ConfigError(f"dr_requests[{j}].length: must be >= 1")
            if r["energy_bound"] < 0 or r["reward"] < 0:
                raise ConfigError(f"dr_requests[{j}]: bound/reward must be >= 0")
        for s in self.uncertainty_sources:
            if s not in ("temp", "irr", "gains"):
                raise ConfigError(f"uncertainty_sources: unknown source {s!r}")
        if self.realizations < 1:
            raise ConfigError("realizations: must be >= 1")
        if self.price_base < 0 or self.price_peak < self.price_base:
            raise ConfigError("price_peak: need 0 <= price_base <= price_peak")
        if self.meas_noise_std < 0:
            raise ConfigError("meas_noise_std: must be >= 0")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        doc = yaml.safe_load(fh) or {}
    return config_from_dict(doc)


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a mapping")
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown fields: {sorted(unknown)}")
    try:
        cfg = ExperimentConfig(**doc)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def seed_streams(seed: int, names: tuple[str, ...]) -> dict:
    """Named, order-independent random substreams from one root seed."""
    out = {}
    for name in names:
        digest = zlib.crc32(name.encode())
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(digest,))
        out[name] = np.random.default_rng(ss)
    return out
