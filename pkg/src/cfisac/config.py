"""System configuration: network geometry, channel statistics, run controls."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .errors import ConfigError


def db_to_linear(x_db: float) -> float:
    """Convert a dB quantity to linear scale, 10^(x/10)."""
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Full parameterization of one simulation scenario.

    Angles are given in degrees; all internal computation uses radians.
    Powers and variances are linear unless the name carries a _dB suffix.
    """

    M: int = 4                      # transmit APs
    N: int = 2                      # receive APs
    K: int = 2                      # single-antenna UEs
    n_tx: int = 32                  # antennas per transmit AP
    n_rx: int = 32                  # antennas per receive AP
    L: int = 10                     # propagation paths per channel
    theta_deg: tuple[float, ...] = (-15.0, 35.0, 5.0, 40.0)   # target seen from tx AP m
    phi_deg: tuple[float, ...] = (10.0, -20.0)                # target seen from rx AP n
    spacing: float = 0.5            # element spacing over wavelength
    sigma_n2: float = 0.01          # rx AP noise power (-20 dB)
    sigma_mn2: float = 0.1          # target reflection gain variance, all (m,n) pairs (-10 dB)
    sigma_k2: float = 1.0           # UE noise power
    p_max: float = 1.0              # per-AP transmit power budget
    delta_dB: float = 40.0          # sensing SNR threshold Delta (dB)
    n_iter: int = 3                 # exchange iterations of the two-stage design
    seed: int = 0                   # root seed for all substreams
    init_credit: str = "balanced"   # "balanced" | "nominal" first-iteration credit rule

    def __post_init__(self) -> None:
        if min(self.M, self.N, self.K, self.n_tx, self.n_rx, self.L) < 1:
            raise ConfigError("M, N, K, n_tx, n_rx, L must all be >= 1")
        if len(self.theta_deg) != self.M:
            raise ConfigError(f"theta_deg needs {self.M} entries, got {len(self.theta_deg)}")
        if len(self.phi_deg) != self.N:
            raise ConfigError(f"phi_deg needs {self.N} entries, got {len(self.phi_deg)}")
        if self.n_tx < self.K:
            raise ConfigError(
                "n_tx must be >= K so the interference null space is nonempty")
        if self.spacing <= 0:
            raise ConfigError("spacing must be positive")
        for name in ("sigma_n2", "sigma_mn2", "sigma_k2", "p_max"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.n_iter < 0:
            raise ConfigError("n_iter must be >= 0")
        if self.init_credit not in ("balanced", "nominal"):
            raise ConfigError("init_credit must be 'balanced' or 'nominal'")

    @property
    def delta_linear(self) -> float:
        """Sensing threshold in linear scale."""
        return db_to_linear(self.delta_dB)

    @property
    def theta_rad(self) -> np.ndarray:
        return np.deg2rad(np.asarray(self.theta_deg, dtype=float))

    @property
    def phi_rad(self) -> np.ndarray:
        return np.deg2rad(np.asarray(self.phi_deg, dtype=float))

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **overrides) -> "SystemConfig":
        """Return a copy with the given fields replaced (validation re-runs)."""
        return replace(self, **overrides)


def default_config() -> SystemConfig:
    """Canonical evaluation scenario: 4 tx APs, 2 rx APs, 2 UEs, 32 antennas."""
    return SystemConfig()


_FIELD_TYPES = {f.name: f.type for f in fields(SystemConfig)}


def _coerce(name: str, value):
    """Coerce a JSON/CLI value to the declared field type."""
    if name not in _FIELD_TYPES:
        raise ConfigError(f"unknown config field: {name}")
    current = getattr(SystemConfig(), name)
    if isinstance(current, bool):
        return bool(value)
    if isinstance(current, int) and not isinstance(value, bool):
        return int(value)
    if isinstance(current, float):
        return float(value)
    if isinstance(current, tuple):
        if isinstance(value, str):
            value = [float(v) for v in value.split(",") if v.strip()]
        return tuple(float(v) for v in value)
    if isinstance(current, str):
        return str(value)
    return value


def load_config(path: str | None = None, overrides: dict | None = None) -> SystemConfig:
    """Build a SystemConfig from an optional JSON file plus overrides.

    The JSON file holds a flat object of field name to value. Overrides are
    applied after the file and accept CLI-style string values.
    """
    data: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
    merged = {k: _coerce(k, v) for k, v in data.items()}
    for k, v in (overrides or {}).items():
        merged[k] = _coerce(k, v)
    return SystemConfig(**merged)
