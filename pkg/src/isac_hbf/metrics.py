"""Link and sensing metrics of a complete design."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beampattern import BeampatternSpec, grid_gains, pattern_fit
from .errors import DomainError, ShapeError


def _stream_amplitudes(w, H, F_RF, F_BB_hat) -> np.ndarray:
    return np.asarray(w).conj() @ np.asarray(H) @ np.asarray(F_RF) @ np.asarray(F_BB_hat)


def sinr(m: int, W, F_RF, F_BB_hat, channels, noise_var: float) -> float:
    """SINR of user m; every other stream, radar streams included, is interference."""
    if not noise_var > 0:
        raise DomainError(f"noise variance must be positive, got {noise_var}")
    H = channels[m].matrix if hasattr(channels[m], "matrix") else channels[m]
    w = W[m]
    if np.asarray(F_BB_hat).shape[1] <= m:
        raise ShapeError("fewer baseband columns than users")
    amp = np.abs(_stream_amplitudes(w, H, F_RF, F_BB_hat)) ** 2
    signal = amp[m]
    interference = float(np.sum(amp)) - signal
    return float(signal / (interference + noise_var * np.vdot(w, w).real))


def user_rate(value: float) -> float:
    if value < 0:
        raise DomainError(f"SINR must be nonnegative, got {value}")
    return float(np.log2(1.0 + value))


def geometric_mean(rates) -> float:
    rates = np.asarray(rates, dtype=float)
    if np.any(rates <= 0):
        return 0.0
    return float(np.exp(np.mean(np.log(rates))))


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    per_user_sinr: np.ndarray
    per_user_rate: np.ndarray
    sum_se: float
    gm_se: float
    min_rate: float
    psi: float
    beampattern: tuple[np.ndarray, np.ndarray]
    zero_rate_users: tuple[int, ...] = ()
    feasible: bool = True

    @property
    def psi_db(self) -> float:
        return 10.0 * math.log10(self.psi) if self.psi > 0 else -math.inf

    def check(self, tol: float = 1e-9) -> None:
        """Raise AssertionError if a report invariant is broken."""
        r = self.per_user_rate
        assert np.all(r >= 0)
        assert abs(self.sum_se - math.fsum(r)) <= tol * max(1.0, abs(self.sum_se))
        assert self.min_rate == float(np.min(r))
        if np.all(r > 0):
            assert abs(self.gm_se - float(np.prod(r)) ** (1.0 / r.size)) <= tol * max(1.0, self.gm_se)
        assert self.gm_se <= self.sum_se / r.size + tol


def evaluate(design, combiners, channels, spec: BeampatternSpec, noise_var: float,
             feasible: bool | None = None) -> EvaluationReport:
    M = len(channels)
    sinrs = np.array([sinr(m, combiners, design.F_RF, design.F_BB_hat, channels, noise_var) for m in range(M)])
    rates = np.array([user_rate(s) for s in sinrs])
    # sensing metrics in the scale of the RF precoder: total power = number of RF chains
    F = design.F_RF @ design.F_BB_hat
    ref = design.F_RF.shape[1] / float(np.sum(np.abs(F) ** 2))
    gains = grid_gains(spec, F) * ref
    _, psi = pattern_fit(spec, gains)
    zero = tuple(int(i) for i in np.flatnonzero(rates <= 0))
    return EvaluationReport(
        per_user_sinr=sinrs,
        per_user_rate=rates,
        sum_se=math.fsum(rates),
        gm_se=geometric_mean(rates),
        min_rate=float(np.min(rates)),
        psi=psi,
        beampattern=(np.asarray(spec.grid_angles_deg), gains),
        zero_rate_users=zero,
        feasible=design.feasible if feasible is None else feasible,
    )
