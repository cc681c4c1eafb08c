"""ULA steering vectors, path loss and sparse (Saleh-Valenzuela) mmWave channels."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UlaGeometry:
    n_elements: int
    spacing_over_wavelength: float = 0.5
    convention: str = "sin"

    def __post_init__(self):
        if int(self.n_elements) < 1:
            raise DomainError(f"invalid geometry: n_elements={self.n_elements}")
        if not self.spacing_over_wavelength > 0:
            raise DomainError("invalid geometry: spacing must be positive")
        if self.convention not in ("sin", "cos"):
            raise DomainError(f"unknown steering convention {self.convention!r}")


@dataclass(frozen=True)
class PathParams:
    gain: complex
    aod_deg: float
    aoa_deg: float


@dataclass(frozen=True)
class ChannelRealization:
    matrix: np.ndarray
    paths: tuple[PathParams, ...]
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray
    distance_m: float
    shadowing_db: float = 0.0

    def __post_init__(self):
        for arr in (self.matrix, self.U, self.singular_values, self.V):
            arr.setflags(write=False)

    @classmethod
    def from_matrix(cls, H, paths=(), distance_m=1.0, shadowing_db=0.0):
        H = np.array(H, dtype=complex)
        U, s, Vh = np.linalg.svd(H, full_matrices=True)
        return cls(H, tuple(paths), U, s, Vh.conj().T, float(distance_m), float(shadowing_db))

    @property
    def n_rx(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_tx(self) -> int:
        return self.matrix.shape[1]

    def dominant_left(self) -> np.ndarray:
        return self.U[:, 0]

    def dominant_right(self) -> np.ndarray:
        return self.V[:, 0]


def _direction_cosine(angle_deg, convention):
    rad = np.deg2rad(angle_deg)
    return np.sin(rad) if convention == "sin" else np.cos(rad)


def ula_response(geometry: UlaGeometry, angle_deg: float) -> np.ndarray:
    """Unit-norm array response of a ULA towards ``angle_deg``."""
    if not -90.0 <= angle_deg <= 90.0:
        logger.warning("steering angle %.3f deg outside [-90, 90]", angle_deg)
    return steering_matrix(geometry, [angle_deg])[:, 0]


def steering_matrix(geometry: UlaGeometry, angles_deg) -> np.ndarray:
    """Columns are ``ula_response`` for each angle; shape (n_elements, len(angles))."""
    angles = np.atleast_1d(np.asarray(angles_deg, dtype=float))
    n = np.arange(geometry.n_elements)[:, None]
    phase = 2.0 * np.pi * geometry.spacing_over_wavelength * n * _direction_cosine(angles, geometry.convention)
    return np.exp(1j * phase) / np.sqrt(geometry.n_elements)


def path_loss_db(distance_m: float, shadowing_db: float = 0.0, intercept_db: float = 61.4,
                 exponent: float = 2.0) -> float:
    if not distance_m > 0:
        raise DomainError(f"distance must be positive, got {distance_m}")
    return intercept_db + 10.0 * exponent * np.log10(distance_m) + shadowing_db


def laplacian_angles(rng: np.random.Generator, center_deg: float, spread_deg: float, size: int) -> np.ndarray:
    # spread is the standard deviation; Laplace scale b has std sqrt(2) b
    scale = spread_deg / np.sqrt(2.0)
    offsets = rng.laplace(0.0, scale, size) if scale > 0 else np.zeros(size)
    return np.clip(center_deg + offsets, -90.0, 90.0)


def draw_channel(config, user_index: int, rng: np.random.Generator) -> ChannelRealization:
    """Draw one user's channel H = sum_i alpha_i a_r(aoa_i) a_t(aod_i)^H."""
    if config.n_paths < 1:
        raise ConfigError("n_paths must be at least 1")
    if not 0 <= user_index < config.n_users:
        raise ConfigError(f"user_index {user_index} out of range for {config.n_users} users")
    n_p = config.n_paths
    tx = UlaGeometry(config.n_tx, config.element_spacing, config.steering)
    rx = UlaGeometry(config.n_rx, config.element_spacing, config.steering)

    shadowing = float(rng.normal(0.0, config.shadowing_std_db))
    pl = path_loss_db(config.distance_m, shadowing, config.pl_intercept_db, config.pl_exponent)
    variance = (config.n_rx * config.n_tx / n_p) * 10.0 ** (-0.1 * pl)
    gains = np.sqrt(variance / 2.0) * (rng.standard_normal(n_p) + 1j * rng.standard_normal(n_p))
    aod = laplacian_angles(rng, config.user_angles_deg[user_index], config.angular_spread_deg, n_p)
    aoa = rng.uniform(-90.0, 90.0, n_p)

    At = steering_matrix(tx, aod)
    Ar = steering_matrix(rx, aoa)
    H = (Ar * gains) @ At.conj().T
    paths = tuple(PathParams(complex(g), float(t), float(r)) for g, t, r in zip(gains, aod, aoa))
    return ChannelRealization.from_matrix(H, paths, config.distance_m, shadowing)


def channel_from_paths(paths, n_rx: int, n_tx: int, spacing: float = 0.5, convention: str = "sin") -> np.ndarray:
    """Rebuild H from stored path parameters."""
    tx = UlaGeometry(n_tx, spacing, convention)
    rx = UlaGeometry(n_rx, spacing, convention)
    H = np.zeros((n_rx, n_tx), dtype=complex)
    for p in paths:
        H += p.gain * np.outer(ula_response(rx, p.aoa_deg), ula_response(tx, p.aod_deg).conj())
    return H


def draw_channels(config, rng: np.random.Generator) -> list[ChannelRealization]:
    return [draw_channel(config, m, rng) for m in range(config.n_users)]
