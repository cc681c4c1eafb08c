"""Blind phase-only receive combiners.

Each user designs its combiner from its own channel only.  The unknown
precoder is replaced by the user's strongest right singular vector for its
own stream and the weakest right singular directions for the other users'
streams, so the received model reduces to ``y = h s + (residual interference)
+ n`` with ``h = sigma_1 u_1``.  The model is normalized by ``sigma_1`` which
leaves the optimal phases unchanged and keeps the objective O(1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .errors import NumericError, ShapeError


@dataclass(frozen=True)
class LmbcSettings:
    tol: float = 1e-10
    max_iters: int = 200
    armijo_shrink: float = 0.5
    armijo_slope: float = 0.1
    initial_step: float = 1.0

    @classmethod
    def from_solver(cls, solver) -> "LmbcSettings":
        return cls(solver.lmbc_tol, solver.lmbc_max_iters, solver.armijo_shrink, solver.armijo_slope,
                   solver.initial_step)


@dataclass(frozen=True, eq=False)
class CombinerSet:
    W: tuple[np.ndarray, ...]
    phases: tuple[np.ndarray, ...]
    traces: tuple[list[float], ...]

    def __len__(self):
        return len(self.W)

    def __getitem__(self, m):
        return self.W[m]


def blind_precoder_surrogate(channel: ChannelRealization, M: int) -> np.ndarray:
    """[v_1, weakest M-1 right singular vectors] of the user's channel."""
    n_tx = channel.n_tx
    if M > n_tx:
        raise ShapeError(f"M={M} streams exceed N_t={n_tx}")
    if M < 1:
        raise ShapeError("M must be at least 1")
    V = channel.V
    return np.hstack([V[:, :1], V[:, n_tx - M + 1:]])


@dataclass(frozen=True, eq=False)
class CombinerModel:
    """Normalized quadratic model g(w) = 1 - 2 Re{w^H h} + w^H R w."""
    h: np.ndarray
    R: np.ndarray

    def value(self, phases) -> float:
        w = phases_to_combiner(phases)
        return float(1.0 - 2.0 * np.real(np.vdot(w, self.h)) + np.real(np.vdot(w, self.R @ w)))

    def gradient(self, phases) -> np.ndarray:
        w = phases_to_combiner(phases)
        return 2.0 * np.imag(w.conj() * (self.R @ w - self.h))


def phases_to_combiner(phases) -> np.ndarray:
    phases = np.asarray(phases, dtype=float)
    return np.exp(1j * phases) / np.sqrt(phases.size)


def combiner_model(channel: ChannelRealization, noise_var: float, n_users: int,
                   signal_power: float = 1.0) -> CombinerModel:
    s1 = channel.singular_values[0]
    if s1 == 0:
        raise NumericError("channel is identically zero")
    F_tilde = blind_precoder_surrogate(channel, n_users)
    H_eff = channel.matrix @ F_tilde / s1
    h = H_eff[:, 0]
    interference = H_eff[:, 1:]
    noise = noise_var / (signal_power * s1**2)
    R = np.outer(h, h.conj()) + interference @ interference.conj().T + noise * np.eye(channel.n_rx)
    return CombinerModel(h, R)


def lmbc_design(channel: ChannelRealization, noise_var: float, settings: LmbcSettings = LmbcSettings(),
                n_users: int = 1, signal_power: float = 1.0):
    """Phase-only combiner by Armijo gradient descent on the combiner phases.

    Returns ``(w, phases, trace)``.
    """
    model = combiner_model(channel, noise_var, n_users, signal_power)
    phases = np.angle(channel.dominant_left())
    g = model.value(phases)
    if not np.isfinite(g):
        raise NumericError("combiner objective is not finite")
    trace = [g]
    step = settings.initial_step
    for _ in range(settings.max_iters):
        grad = model.gradient(phases)
        gnorm2 = float(grad @ grad)
        if gnorm2 == 0:
            break
        t = step
        while True:
            trial = phases - t * grad
            g_new = model.value(trial)
            if not np.isfinite(g_new):
                raise NumericError("combiner objective is not finite")
            if g_new <= g - settings.armijo_slope * t * gnorm2:
                break
            t *= settings.armijo_shrink
            if t < 1e-16:
                return phases_to_combiner(phases), phases, trace
        phases = trial
        decrease = g - g_new
        g = g_new
        trace.append(g)
        step = 2.0 * t
        if decrease <= settings.tol:
            break
    return phases_to_combiner(phases), phases, trace


def design_combiners(channels, noise_var: float, settings: LmbcSettings = LmbcSettings(),
                     signal_power: float = 1.0) -> CombinerSet:
    M = len(channels)
    results = [lmbc_design(ch, noise_var, settings, M, signal_power) for ch in channels]
    return CombinerSet(tuple(r[0] for r in results), tuple(r[1] for r in results),
                       tuple(r[2] for r in results))
