"""Geometric-mean spectral efficiency by sequential weighted redesign.

Around the current rates R the map f(R) = 1 / GM(R) is linearized; its
gradient gives per-user weights rho_m = f / R_m that scale the columns of the
digital target F_opt before the RF design is rerun.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .beampattern import BeampatternSpec, QuadraticForm
from .combiner import LmbcSettings, design_combiners
from .errors import DegenerateError, ZeroRateError
from .metrics import EvaluationReport, evaluate
from .precoder import HybridDesign, design_hybrid

logger = logging.getLogger(__name__)


def gm_weights(rates) -> tuple[np.ndarray, float]:
    rates = np.asarray(rates, dtype=float)
    if rates.size == 0 or np.any(rates <= 0):
        raise ZeroRateError(f"all rates must be positive, got {rates}")
    f = float(np.exp(-np.mean(np.log(rates))))
    return f / rates, f


def linearized_f(rates, rates0) -> float:
    """First-order model 2 f(R0) - (1/M) sum rho_m R_m of f around R0."""
    rho, f0 = gm_weights(rates0)
    rates = np.asarray(rates, dtype=float)
    return 2.0 * f0 - float(np.mean(rho * rates))


@dataclass
class GmState:
    iteration: int
    rates: np.ndarray
    weights: np.ndarray
    f_value: float
    floored: tuple[int, ...] = ()
    history: list[tuple[float, float, float]] = field(default_factory=list)


def gm_sequential(channels, spec: BeampatternSpec, config, qf: QuadraticForm | None = None,
                  rng: np.random.Generator | None = None,
                  initial: tuple[HybridDesign, EvaluationReport] | None = None):
    """Returns ``(design, combiners, report, states)``.

    A candidate from a weighted redesign is kept only if it raises the GM-SE
    by at least ``gm_tol`` relative, so the GM-SE history of accepted designs
    increases and the loop stops at the first candidate that does not.
    """
    solver = config.solver
    noise_var = config.effective_noise_var
    per_stream = config.tx_power_w / config.n_streams
    combiners = design_combiners(channels, noise_var, LmbcSettings.from_solver(solver), per_stream)

    if initial is None:
        design = design_hybrid(channels, spec, config, qf=qf, rng=rng)
        report = evaluate(design, combiners, channels, spec, noise_var)
    else:
        design, report = initial

    states: list[GmState] = []
    history = [(report.sum_se, report.gm_se, report.min_rate)]
    for kappa in range(solver.max_gm_iters):
        rates = np.asarray(report.per_user_rate, dtype=float)
        floored = tuple(int(i) for i in np.flatnonzero(rates < solver.rate_floor))
        rho, f = gm_weights(np.maximum(rates, solver.rate_floor))
        states.append(GmState(kappa, rates, rho, f, floored, list(history)))
        if floored:
            logger.info("rate floor applied to users %s", floored)

        # a common factor does not move the LS argmin; normalizing keeps the fit O(1)
        weight = np.diag(rho / np.mean(rho))
        candidate = design_hybrid(channels, spec, config, qf=qf, weight=weight, init=design.F_RF)
        cand_report = evaluate(candidate, combiners, channels, spec, noise_var)
        gain = (cand_report.gm_se - report.gm_se) / max(report.gm_se, 1e-300)
        if gain < solver.gm_tol:
            break  # converged; a sub-tolerance change is not worth a different design
        design, report = candidate, cand_report
        history.append((report.sum_se, report.gm_se, report.min_rate))

    if np.all(report.per_user_rate < solver.rate_floor):
        raise DegenerateError("all user rates vanish; fairness weights are undefined")
    rates = np.asarray(report.per_user_rate, dtype=float)
    rho, f = gm_weights(np.maximum(rates, solver.rate_floor))
    states.append(GmState(len(states), rates, rho, f, (), list(history)))
    return design, combiners, report, states


def gm_value(rates) -> float:
    rates = np.asarray(rates, dtype=float)
    return float(np.prod(rates)) ** (1.0 / rates.size) if np.all(rates > 0) else 0.0
