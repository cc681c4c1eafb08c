"""Scenario and solver configuration.

Angles follow the steering convention selected by ``steering``: with the
default ``"sin"`` convention 0 deg is broadside and +-90 deg is endfire.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError

OBJECTIVES = ("sum_se", "gm_se")
STEERING_CONVENTIONS = ("sin", "cos")
NSP_ROWS = ("combiner", "full")


@dataclass(frozen=True)
class SolverSettings:
    # RMCG outer loop
    outer_tol: float = 1e-4
    max_outer_iters: int = 50
    penalty0: float = 1.0
    penalty_growth: float = 10.0
    feasibility_tol: float = 1e-3
    # Riemannian CG inner loop
    grad_tol: float = 1e-6
    max_inner_iters: int = 200
    armijo_shrink: float = 0.5
    armijo_slope: float = 0.1
    initial_step: float = 1.0
    pr_restart: bool = True
    # baseband power projection
    bb_max_iters: int = 300
    bb_grad_tol: float = 1e-10
    # blind combiner
    lmbc_tol: float = 1e-10
    lmbc_max_iters: int = 200
    # GM-SE loop
    gm_tol: float = 1e-4
    max_gm_iters: int = 10
    rate_floor: float = 1e-6

    def validate(self) -> None:
        positive = [
            "outer_tol", "max_outer_iters", "penalty0", "feasibility_tol",
            "grad_tol", "max_inner_iters", "initial_step", "bb_max_iters",
            "bb_grad_tol", "lmbc_tol", "lmbc_max_iters", "gm_tol",
            "max_gm_iters", "rate_floor",
        ]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"solver.{name} must be positive, got {getattr(self, name)!r}")
        if not self.penalty_growth > 1:
            raise ConfigError("solver.penalty_growth must exceed 1")
        if not 0 < self.armijo_shrink < 1:
            raise ConfigError("solver.armijo_shrink must lie in (0, 1)")
        if not 0 < self.armijo_slope < 0.5:
            raise ConfigError("solver.armijo_slope must lie in (0, 0.5)")


@dataclass(frozen=True)
class SystemConfig:
    n_tx: int = 64
    n_rx: int = 8
    n_users: int = 3
    n_targets: int = 2
    n_rf: int | None = None
    user_angles_deg: tuple[float, ...] = (0.0, 30.0, 60.0)
    target_angles_deg: tuple[float, ...] = (-60.0, -20.0)
    snr_db: float = 20.0
    epsilon_db: float = -10.0
    noise_dbm: float = -91.0
    n_paths: int = 10
    angular_spread_deg: float = 10.0
    sigma_theta: float = 1.0 / math.sqrt(2.0)
    grid_step_deg: float = 1.0
    n_trials: int = 500
    seed: int = 0
    objective: str = "sum_se"
    distance_m: float = 30.0
    pl_intercept_db: float = 61.4
    pl_exponent: float = 2.0
    shadowing_std_db: float = 5.8
    normalize_path_loss: bool = True
    steering: str = "sin"
    element_spacing: float = 0.5
    nsp_rows: str = "combiner"
    solver: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        # JSON gives lists; keep the dataclass hashable
        object.__setattr__(self, "user_angles_deg", tuple(float(a) for a in self.user_angles_deg))
        object.__setattr__(self, "target_angles_deg", tuple(float(a) for a in self.target_angles_deg))

    @property
    def n_streams(self) -> int:
        return self.n_users + self.n_targets

    @property
    def rf_chains(self) -> int:
        return self.n_streams if self.n_rf is None else self.n_rf

    @property
    def epsilon(self) -> float:
        return 10.0 ** (self.epsilon_db / 10.0)

    @property
    def noise_power_w(self) -> float:
        return 10.0 ** ((self.noise_dbm - 30.0) / 10.0)

    @property
    def tx_power_w(self) -> float:
        return 10.0 ** (self.snr_db / 10.0) * self.noise_power_w

    @property
    def mean_path_loss_db(self) -> float:
        return self.pl_intercept_db + 10.0 * self.pl_exponent * math.log10(self.distance_m)

    @property
    def effective_noise_var(self) -> float:
        """Noise variance seen against the channel matrices.

        With ``normalize_path_loss`` the deterministic part of the path loss is
        folded into the noise, so ``snr_db`` is the link SNR before shadowing,
        fading and array gain.
        """
        if self.normalize_path_loss:
            return self.noise_power_w * 10.0 ** (-self.mean_path_loss_db / 10.0)
        return self.noise_power_w

    def validate(self) -> "SystemConfig":
        for name in ("n_tx", "n_rx", "n_users", "n_paths", "n_trials"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.n_targets, int) or self.n_targets < 0:
            raise ConfigError(f"n_targets must be a nonnegative integer, got {self.n_targets!r}")
        if self.rf_chains < self.n_streams:
            raise ConfigError(
                f"n_rf={self.rf_chains} is smaller than K=M+L={self.n_streams}"
            )
        if self.rf_chains > self.n_tx:
            raise ConfigError(f"n_rf={self.rf_chains} exceeds n_tx={self.n_tx}")
        if len(self.user_angles_deg) != self.n_users:
            raise ConfigError("user_angles_deg must have n_users entries")
        if len(self.target_angles_deg) != self.n_targets:
            raise ConfigError("target_angles_deg must have n_targets entries")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.steering not in STEERING_CONVENTIONS:
            raise ConfigError(f"steering must be one of {STEERING_CONVENTIONS}")
        if self.nsp_rows not in NSP_ROWS:
            raise ConfigError(f"nsp_rows must be one of {NSP_ROWS}")
        for name in ("grid_step_deg", "sigma_theta", "distance_m", "element_spacing"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.angular_spread_deg < 0 or self.shadowing_std_db < 0:
            raise ConfigError("spreads must be nonnegative")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        self.solver.validate()
        return self

    def replace(self, **changes: Any) -> "SystemConfig":
        solver_changes = changes.pop("solver", None)
        cfg = dataclasses.replace(self, **changes)
        if solver_changes is not None:
            if isinstance(solver_changes, dict):
                solver_changes = dataclasses.replace(cfg.solver, **solver_changes)
            cfg = dataclasses.replace(cfg, solver=solver_changes)
        return cfg

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def user_layout(n_users: int) -> tuple[float, ...]:
    """Users spread evenly over [0, 60] deg (the default three sit at 0, 30, 60)."""
    if n_users == 1:
        return (0.0,)
    return tuple(60.0 * k / (n_users - 1) for k in range(n_users))


def target_layout(n_targets: int) -> tuple[float, ...]:
    """Targets in [-90, 0] deg spaced 10 deg apart, starting at -60 deg."""
    return tuple(-60.0 + 10.0 * k for k in range(n_targets))


def _from_dict(cls, data: dict[str, Any], where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")
    return data


def config_from_dict(data: dict[str, Any]) -> SystemConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    data = dict(_from_dict(SystemConfig, data, "config"))
    solver = data.pop("solver", {}) or {}
    if not isinstance(solver, dict):
        raise ConfigError("'solver' must be an object")
    _from_dict(SolverSettings, solver, "solver")
    try:
        cfg = SystemConfig(**data, solver=SolverSettings(**solver))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def load_config(path: str | Path) -> SystemConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data)
