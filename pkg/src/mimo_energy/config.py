"""Experiment configuration: explicit units in key names, one conversion point.

Configurations serialize to flat JSON whose keys match the dataclass fields;
parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .asymptotics import SchemeKind
from .channel import PathlossModel, db_to_linear, dbm_to_watts
from .geometry import CellGeometry, WalkParams
from .precoding import SinrTargets

__all__ = ["ExperimentConfig", "ConfigError", "MODES"]

MODES = ("fast", "exact")


class ConfigError(ValueError):
    """Configuration rejected; ``errors`` maps field names to messages."""

    def __init__(self, errors: dict[str, str]):
        self.errors = errors
        detail = "; ".join(f"{k}: {v}" for k, v in errors.items())
        super().__init__(f"invalid configuration: {detail}")


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of one simulation or theory run (defaults: reference setup)."""

    k_users: int = 16
    n_antennas: int = 32
    rate_bps_hz: float = 1.5
    rate_min_bps_hz: float | None = None
    rate_max_bps_hz: float | None = None
    scheme: str = "olp"
    mode: str = "fast"
    horizon_h: float = 3.0
    slot_s: float | None = None  # defaults to the walk interval
    trials: int = 1000
    seed: int = 1
    tau: float = 0.0
    radius_m: float = 500.0
    pathloss_beta: float = 4.0
    xbar_m: float = 25.0
    l_xbar_db: float = -93.0
    noise_dbm: float = -97.8
    step_m: float = 50.0
    interval_s: float = 30.0
    theta_terms: int = 100

    def __post_init__(self):
        errors: dict[str, str] = {}
        if self.k_users < 1:
            errors["k_users"] = "must be >= 1"
        if self.n_antennas < 1:
            errors["n_antennas"] = "must be >= 1"
        try:
            SchemeKind.parse(self.scheme)
        except ValueError as exc:
            errors["scheme"] = str(exc)
        if self.mode not in MODES:
            errors["mode"] = f"must be one of {MODES}"
        if (self.rate_min_bps_hz is None) != (self.rate_max_bps_hz is None):
            errors["rate_min_bps_hz"] = "rate range needs both endpoints"
        elif self.rate_min_bps_hz is not None:
            if not 0 < self.rate_min_bps_hz <= self.rate_max_bps_hz:
                errors["rate_min_bps_hz"] = "need 0 < min <= max"
        elif self.rate_bps_hz <= 0:
            errors["rate_bps_hz"] = "must be positive"
        if self.horizon_h <= 0:
            errors["horizon_h"] = "must be positive"
        if self.slot_s is not None and self.slot_s <= 0:
            errors["slot_s"] = "must be positive"
        if self.trials < 1:
            errors["trials"] = "must be >= 1"
        if not 0.0 <= self.tau < 1.0:
            errors["tau"] = "must lie in [0, 1)"
        if self.radius_m <= 0:
            errors["radius_m"] = "must be positive"
        if self.pathloss_beta < 2:
            errors["pathloss_beta"] = "must be >= 2"
        if self.xbar_m <= 0:
            errors["xbar_m"] = "must be positive"
        if self.step_m < 0:
            errors["step_m"] = "must be >= 0"
        if self.interval_s <= 0:
            errors["interval_s"] = "must be positive"
        if self.theta_terms < 1:
            errors["theta_terms"] = "must be >= 1"
        if "scheme" not in errors and "k_users" not in errors:
            if (SchemeKind.parse(self.scheme) is SchemeKind.ZF
                    and self.k_users > self.n_antennas):
                errors["k_users"] = "zero forcing requires K <= N"
        if "scheme" not in errors and "tau" not in errors and self.tau > 0:
            kind = SchemeKind.parse(self.scheme)
            if self.mode == "fast" and kind not in (SchemeKind.ZF,
                                                    SchemeKind.RZF_STATISTICAL):
                errors["tau"] = ("imperfect-CSI theory exists for zf and rzf "
                                 "only; use exact mode for other schemes")
        if errors:
            raise ConfigError(errors)

    # ------------------------------------------------------------------
    # derived quantities
    # ------------------------------------------------------------------

    @property
    def c_ratio(self) -> float:
        return self.k_users / self.n_antennas

    @property
    def horizon_s(self) -> float:
        return self.horizon_h * 3600.0

    @property
    def slot_duration_s(self) -> float:
        return self.interval_s if self.slot_s is None else self.slot_s

    @property
    def slots(self) -> int:
        return int(self.horizon_s / self.slot_duration_s)

    @property
    def noise_w(self) -> float:
        return dbm_to_watts(self.noise_dbm)

    def scheme_kind(self) -> SchemeKind:
        return SchemeKind.parse(self.scheme)

    def rates(self) -> np.ndarray:
        if self.rate_min_bps_hz is not None:
            return np.linspace(self.rate_min_bps_hz, self.rate_max_bps_hz,
                               self.k_users)
        return np.full(self.k_users, self.rate_bps_hz)

    def targets(self) -> SinrTargets:
        return SinrTargets.from_rates(self.rates())

    def geometry(self) -> CellGeometry:
        return CellGeometry(radius_m=self.radius_m)

    def walk(self) -> WalkParams:
        return WalkParams(step_m=self.step_m, interval_s=self.interval_s)

    def model(self) -> PathlossModel:
        return PathlossModel(beta=self.pathloss_beta, xbar_m=self.xbar_m,
                             l_xbar=db_to_linear(self.l_xbar_db))

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError({k: "unknown field" for k in sorted(unknown)})
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError({"<file>": f"not valid JSON ({exc})"})
        if not isinstance(data, dict):
            raise ConfigError({"<file>": "top-level JSON object expected"})
        return cls.from_dict(data)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]
