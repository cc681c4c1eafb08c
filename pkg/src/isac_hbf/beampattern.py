"""Desired radar beampattern, transmit gain, and the beampattern MSE.

The MSE is evaluated on an angular grid ``theta_1..theta_Lg`` as

    Psi(F) = 1/Lg * sum_l |beta* G_d(theta_l) - a(theta_l)^H F F^H a(theta_l)|^2

with ``beta*`` the least-squares scale.  Writing ``d = vec(F F^H)`` this is the
quadratic form ``d^H C d``; ``C`` is ``Nt^2 x Nt^2`` and is never formed here.
Its largest eigenvalue is obtained from the ``Lg x Lg`` Gram matrix of the
``b_l`` vectors instead.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channel import UlaGeometry, steering_matrix
from .errors import DegenerateError, ShapeError


def desired_pattern(grid_angles, target_angles, spread: float) -> np.ndarray:
    """Indicator of grid angles lying strictly within +-spread of some target."""
    grid = np.asarray(grid_angles, dtype=float)
    targets = np.asarray(target_angles, dtype=float)
    if grid.size == 0:
        raise ShapeError("angular grid must be nonempty")
    if targets.size == 0:
        return np.zeros(grid.shape)
    close = np.abs(grid[:, None] - targets[None, :]) < spread
    return close.any(axis=1).astype(float)


def angular_grid(step_deg: float = 1.0, lo: float = -90.0, hi: float = 90.0) -> np.ndarray:
    n = int(round((hi - lo) / step_deg))
    return lo + step_deg * np.arange(n + 1)


@dataclass(frozen=True, eq=False)
class BeampatternSpec:
    grid_angles_deg: np.ndarray
    desired_gains: np.ndarray
    steering: np.ndarray  # Nt x Lg, columns a_t(theta_l)
    target_angles_deg: np.ndarray
    sigma_theta: float
    epsilon: float

    def __post_init__(self):
        if self.steering.shape[1] != self.grid_angles_deg.size or self.desired_gains.size != self.grid_angles_deg.size:
            raise ShapeError("grid, desired gains and steering matrix disagree in length")
        for arr in (self.grid_angles_deg, self.desired_gains, self.steering, self.target_angles_deg):
            arr.setflags(write=False)

    @property
    def n_grid(self) -> int:
        return self.grid_angles_deg.size

    @property
    def n_tx(self) -> int:
        return self.steering.shape[0]

    @property
    def zeta(self) -> float:
        return float(self.desired_gains @ self.desired_gains)

    def steering_outer(self, l: int) -> np.ndarray:
        a = self.steering[:, l]
        return np.outer(a, a.conj())

    def weighted_outer(self, weights) -> np.ndarray:
        """sum_l w_l a_l a_l^H as an Nt x Nt matrix."""
        return (self.steering * np.asarray(weights, dtype=float)) @ self.steering.conj().T


def make_spec(n_tx: int, target_angles, sigma_theta: float = 1 / np.sqrt(2), epsilon: float = 0.1,
              grid_step_deg: float = 1.0, spacing: float = 0.5, convention: str = "sin",
              grid=None) -> BeampatternSpec:
    grid = angular_grid(grid_step_deg) if grid is None else np.asarray(grid, dtype=float)
    targets = np.asarray(target_angles, dtype=float)
    S = steering_matrix(UlaGeometry(n_tx, spacing, convention), grid)
    return BeampatternSpec(grid.copy(), desired_pattern(grid, targets, sigma_theta), S,
                           targets.copy(), float(sigma_theta), float(epsilon))


def spec_from_config(config) -> BeampatternSpec:
    return make_spec(config.n_tx, config.target_angles_deg, config.sigma_theta, config.epsilon,
                     config.grid_step_deg, config.element_spacing, config.steering)


def tx_gain(F, angle_deg: float, spacing: float = 0.5, convention: str = "sin") -> float:
    """a_t(theta)^H F F^H a_t(theta)."""
    F = np.atleast_2d(np.asarray(F, dtype=complex))
    if F.size == 0:
        raise ShapeError("precoder must be nonempty")
    a = steering_matrix(UlaGeometry(F.shape[0], spacing, convention), [angle_deg])[:, 0]
    return float(np.sum(np.abs(a.conj() @ F) ** 2))


def grid_gains(spec: BeampatternSpec, F) -> np.ndarray:
    F = np.atleast_2d(np.asarray(F, dtype=complex))
    if F.shape[0] != spec.n_tx:
        raise ShapeError(f"precoder has {F.shape[0]} rows, spec expects {spec.n_tx}")
    return np.sum(np.abs(spec.steering.conj().T @ F) ** 2, axis=1)


def optimal_beta(spec: BeampatternSpec, gains) -> float:
    zeta = spec.zeta
    if zeta <= 0:
        raise DegenerateError("desired beampattern is identically zero")
    return float(spec.desired_gains @ np.asarray(gains, dtype=float)) / zeta


def psi_from_gains(spec: BeampatternSpec, gains) -> float:
    gains = np.asarray(gains, dtype=float)
    beta = optimal_beta(spec, gains)
    return float(np.mean((beta * spec.desired_gains - gains) ** 2))


def pattern_fit(spec: BeampatternSpec, gains) -> tuple[float, float]:
    """``(beta*, Psi)`` for achieved grid gains; an empty desired pattern gives ``beta* = 0``.

    Without targets ``beta G_d`` vanishes for every beta, so the MSE is simply
    the mean squared gain.  Reporting code uses this instead of ``psi_mse``,
    which treats the empty pattern as an error.
    """
    gains = np.asarray(gains, dtype=float)
    if spec.zeta <= 0:
        return 0.0, float(np.mean(gains**2))
    return optimal_beta(spec, gains), psi_from_gains(spec, gains)


def psi_mse(spec: BeampatternSpec, F) -> float:
    return psi_from_gains(spec, grid_gains(spec, F))


def psi_gradient(spec: BeampatternSpec, F) -> np.ndarray:
    """Euclidean gradient of psi_mse in F: (4/Lg) (sum_l g_l A_l - beta* sum_l G_l A_l) F."""
    F = np.atleast_2d(np.asarray(F, dtype=complex))
    gains = grid_gains(spec, F)
    beta = optimal_beta(spec, gains)
    M = spec.weighted_outer(gains - beta * spec.desired_gains)
    return (4.0 / spec.n_grid) * (M @ F)


def psi_normalized(spec: BeampatternSpec, F, ref_power: float = 1.0) -> float:
    """Beampattern MSE of ``F`` rescaled to total power ``ref_power``.

    With ``ref_power`` equal to the number of RF chains this is the MSE in the
    scale of a constant-modulus RF precoder, the scale in which the budget
    epsilon is expressed.
    """
    F = np.atleast_2d(np.asarray(F, dtype=complex))
    power = np.linalg.norm(F) ** 2
    if power == 0:
        return 0.0
    return psi_mse(spec, F) * (ref_power / power) ** 2


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """Implicit representation of C = 1/Lg sum_l b_l b_l^H."""
    spec: BeampatternSpec
    gram: np.ndarray  # Lg x Lg real, entries b_l^H b_k
    lambda_max: float
    zeta: float

    @property
    def n_grid(self) -> int:
        return self.gram.shape[0]

    @cached_property
    def b_vectors(self) -> np.ndarray:
        """Rows are b_l (length Nt^2, column-major vec).  Memory heavy for large Nt."""
        S = self.spec.steering
        G = self.spec.desired_gains
        # a_l = vec(a a^H) = kron(conj(a), a)
        a_vecs = np.einsum("il,jl->lji", S, S.conj()).reshape(self.n_grid, -1)
        s = G @ a_vecs
        return np.outer(G, s) / self.zeta - a_vecs

    def dense(self) -> np.ndarray:
        B = self.b_vectors
        return B.T @ B.conj() / self.n_grid

    def value(self, F) -> float:
        """d^H C d for d = vec(F F^H), through b_l^H d = beta* G_l - g_l."""
        return psi_mse(self.spec, F)


def build_quadratic_form(spec: BeampatternSpec) -> QuadraticForm:
    zeta = spec.zeta
    if zeta <= 0:
        raise DegenerateError("desired beampattern is identically zero")
    G = spec.desired_gains
    # a_l^H a_k = |a(theta_l)^H a(theta_k)|^2
    Q = np.abs(spec.steering.conj().T @ spec.steering) ** 2
    QG = Q @ G
    gram = (
        Q
        - (np.outer(G, QG) + np.outer(QG, G)) / zeta
        + np.outer(G, G) * (G @ QG) / zeta**2
    )
    gram = 0.5 * (gram + gram.T)
    lam = float(np.linalg.eigvalsh(gram)[-1]) / spec.n_grid
    return QuadraticForm(spec, gram, max(lam, 0.0), zeta)
