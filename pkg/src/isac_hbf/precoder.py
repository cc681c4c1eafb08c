"""Two-stage hybrid precoder.

The RF precoder is designed by a penalized Riemannian conjugate gradient over
the constant-modulus set (outer loop rebuilds the beampattern majorizer).  The
baseband is then assembled from a least-squares fit, a zero-forcing stage over
the users' effective scalar channels, a null-space radar block, and a final
projection onto the scaled-unitary power constraint.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .beampattern import (BeampatternSpec, QuadraticForm, build_quadratic_form, grid_gains,
                          pattern_fit, psi_gradient, psi_mse)
from .errors import DegenerateError, RankError, ShapeError
from .manifold import (CircleManifold, ManifoldPoint, RcgInfo, RcgSettings, ScaledUnitaryManifold,
                       rcg_minimize)
from .mm_surrogate import surrogate_coeffs, surrogate_gradient, tight_surrogate_value

logger = logging.getLogger(__name__)

COND_LIMIT = 1e12
MAX_BARRIER_SCALE = 1e8


@dataclass(frozen=True)
class RmcgSettings:
    outer_tol: float = 1e-4
    max_outer_iters: int = 50
    penalty0: float = 1.0
    penalty_growth: float = 10.0
    feasibility_tol: float = 1e-3
    inner: RcgSettings = RcgSettings()

    def __post_init__(self):
        if not (self.outer_tol > 0 and self.max_outer_iters > 0 and self.penalty0 > 0):
            raise ValueError("RMCG settings must be positive")
        if not self.penalty_growth > 1:
            raise ValueError("penalty_growth must exceed 1")

    @classmethod
    def from_solver(cls, solver) -> "RmcgSettings":
        return cls(solver.outer_tol, solver.max_outer_iters, solver.penalty0, solver.penalty_growth,
                   solver.feasibility_tol, RcgSettings.from_solver(solver))


@dataclass
class RmcgDiagnostics:
    objective: list[float] = field(default_factory=list)  # fit after each outer iteration
    psi: list[float] = field(default_factory=list)  # normalized beampattern MSE after each outer iteration
    penalized: list[float] = field(default_factory=list)  # every accepted inner cost, concatenated
    inner_iterations: list[int] = field(default_factory=list)
    penalty: list[float] = field(default_factory=list)
    feasible: bool = True
    epsilon: float = float("inf")

    @property
    def outer_iterations(self) -> int:
        return len(self.objective)

    @property
    def total_inner_iterations(self) -> int:
        return int(sum(self.inner_iterations))


@dataclass(frozen=True, eq=False)
class HybridDesign:
    F_RF: np.ndarray
    F_BB1: np.ndarray
    F_BB2: np.ndarray
    F_BB_radar: np.ndarray
    F_BB_hat: np.ndarray
    beta: float
    psi_achieved: float
    feasible: bool = True
    power: float = 0.0
    diagnostics: RmcgDiagnostics | None = None

    @property
    def precoder(self) -> np.ndarray:
        return self.F_RF @ self.F_BB_hat

    @property
    def n_streams(self) -> int:
        return self.F_BB_hat.shape[1]


def optimal_digital_precoder(channels) -> np.ndarray:
    if len(channels) < 1:
        raise ShapeError("at least one channel is required")
    cols = []
    for m, ch in enumerate(channels):
        if ch.singular_values[0] == 0:
            raise DegenerateError(f"channel of user {m} is identically zero")
        cols.append(ch.dominant_right())
    return np.stack(cols, axis=1)


def bb_stage1_ls(F_RF, F_opt, weight=None) -> np.ndarray:
    F_RF = np.asarray(F_RF, dtype=complex)
    target = np.asarray(F_opt, dtype=complex)
    if weight is not None:
        target = target @ np.asarray(weight)
    gram = F_RF.conj().T @ F_RF
    if np.linalg.cond(gram) > COND_LIMIT:
        raise RankError("F_RF is (numerically) rank deficient")
    return np.linalg.solve(gram, F_RF.conj().T @ target)


def bb_stage2_zf(effective_rows) -> np.ndarray:
    H = np.atleast_2d(np.asarray(effective_rows, dtype=complex))
    gram = H @ H.conj().T
    if np.any(np.linalg.norm(H, axis=1) == 0) or np.linalg.cond(gram) > COND_LIMIT:
        raise DegenerateError("effective channel is singular; zero forcing is undefined")
    return H.conj().T @ np.linalg.inv(gram)


def bb_radar_nsp(effective_channels, L: int) -> np.ndarray:
    """Orthonormal radar streams spanning the weakest right-singular directions."""
    stacked = np.vstack([np.atleast_2d(h) for h in effective_channels])
    m_t = stacked.shape[1]
    if L > m_t:
        raise ShapeError(f"cannot place {L} radar streams in {m_t} RF chains")
    if L == 0:
        return np.zeros((m_t, 0), dtype=complex)
    _, _, Vh = np.linalg.svd(stacked, full_matrices=True)
    return Vh.conj().T[:, m_t - L:]


def _gram_orthonormalize(F: np.ndarray) -> np.ndarray:
    """A feasible (not optimal) unit-Gram point near F, via QR."""
    if F.shape[0] <= F.shape[1]:
        Q, R = np.linalg.qr(F.conj().T)
        return (Q * np.sign(np.diag(R)).conj()).conj().T
    Q, R = np.linalg.qr(F)
    return Q * np.sign(np.diag(R))


def bb_power_constrain(F_BB, P_t: float, K: int, settings: RcgSettings | None = None) -> np.ndarray:
    """Closest matrix to F_BB with F F^H = (P_t/K) I (rows orthogonal) or F^H F = (P_t/K) I.

    Solved by RCG on the scaled-unitary manifold, on a normalized copy of the
    problem so tolerances do not depend on the power scale.  The nearest
    scaled-unitary point does not change when F_BB is rescaled, so the target
    is brought to unit-manifold norm first; the result is then independent of
    P_t apart from the final factor.
    """
    F_BB = np.asarray(F_BB, dtype=complex)
    if F_BB.shape[1] != K:
        raise ShapeError(f"F_BB has {F_BB.shape[1]} columns, expected K={K}")
    if not P_t > 0:
        raise ValueError("P_t must be positive")
    rank = np.linalg.matrix_rank(F_BB)
    if rank < min(F_BB.shape):
        raise RankError(f"baseband precoder has rank {rank} < {min(F_BB.shape)}")
    c = P_t / K
    scale = np.sqrt(c)
    target = F_BB * (np.sqrt(min(F_BB.shape)) / np.linalg.norm(F_BB))
    settings = settings or RcgSettings(grad_tol=1e-10, max_inner_iters=300)
    man = ScaledUnitaryManifold(1.0)
    if man.violation(target) <= 1e-12:
        return target * scale
    start = ManifoldPoint(_gram_orthonormalize(target), man)
    point, _ = rcg_minimize(lambda X: float(np.sum(np.abs(X - target) ** 2)),
                            lambda X: 2.0 * (X - target), start, settings)
    return point.value * scale


def _ls_solve(X, target):
    return np.linalg.solve(X.conj().T @ X, X.conj().T @ target)


def rf_fit(F_RF, target, bb_fixed=None) -> tuple[float, np.ndarray]:
    """Fit ||target - F_RF B||^2 with B at its least-squares value (or ``bb_fixed``), and its gradient in F_RF.

    At the least-squares B the B-dependence drops out of the gradient.
    """
    B = _ls_solve(F_RF, target) if bb_fixed is None else bb_fixed
    R = target - F_RF @ B
    return float(np.sum(np.abs(R) ** 2)), -2.0 * R @ B.conj().T


def rmcg_rf_design(F_opt, spec: BeampatternSpec, qf: QuadraticForm | None, settings: RmcgSettings,
                   init=None, n_rf: int | None = None, weight=None, epsilon: float | None = None,
                   bb_fixed=None, rng: np.random.Generator | None = None):
    """Constant-modulus RF precoder minimizing ||F_opt P - F_RF F_BB1||^2 subject to psi_mse(F_RF) <= epsilon.

    ``F_BB1`` is kept at its least-squares value for the current ``F_RF``
    throughout (unless ``bb_fixed`` pins it), so the fit is a function of
    ``F_RF`` alone.  ``epsilon = inf`` switches the sensing constraint off.

    A constrained run first restores feasibility if needed by minimizing the
    squared excess of the MSE over the budget.  If the budget cannot be met
    this ends at a (local) minimum of the MSE, which is returned flagged
    infeasible.  Otherwise each outer iteration rebuilds the majorizer ``s``
    of the MSE at the current point and runs RCG on the fit plus the log
    barrier ``-(scale / mu) log(1 - s / epsilon)``; ``mu`` is multiplied by
    ``penalty_growth`` after each pass.  Because ``s`` dominates the MSE, every
    iterate of this phase stays feasible.

    Without ``init`` a constrained run is warm-started from the unconstrained
    design, which is returned as is when it already meets the budget.  Returns ``(F_RF, F_BB1, RmcgDiagnostics)``.
    """
    F_opt = np.asarray(F_opt, dtype=complex)
    n_tx, m = F_opt.shape
    eps = spec.epsilon if epsilon is None else float(epsilon)
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    constrained = bool(np.isfinite(eps))
    target = F_opt if weight is None else F_opt @ np.asarray(weight)
    man = CircleManifold(1.0 / np.sqrt(n_tx))
    diag = RmcgDiagnostics(epsilon=eps)

    def psi_of(X):
        return pattern_fit(spec, grid_gains(spec, X))[1]

    if init is not None:
        F = np.array(init, dtype=complex)
        m_t = F.shape[1]
    else:
        m_t = n_rf if n_rf is not None else m
        rng = rng if rng is not None else np.random.default_rng(0)
        F = man.random_point((n_tx, m_t), rng)
        if constrained:
            F, _, warm = rmcg_rf_design(F_opt, spec, qf, settings, init=F, weight=weight,
                                        epsilon=np.inf, bb_fixed=bb_fixed)
            diag.penalized.extend(warm.penalized)
            diag.inner_iterations.extend(warm.inner_iterations)
    if m_t < m:
        raise ShapeError(f"M_t={m_t} RF chains cannot carry {m} user streams")
    if constrained and qf is None:
        qf = build_quadratic_form(spec)
    if constrained and init is None and psi_of(F) <= eps:
        # the unconstrained optimum already meets the budget, so it solves the constrained problem
        diag.objective.extend(warm.objective)
        diag.psi.extend(warm.psi)
        diag.penalty.extend(warm.penalty)
        diag.feasible = True
        return F, bb_stage1_ls(F, target) if bb_fixed is None else np.array(bb_fixed, dtype=complex), diag

    B_fixed = None if bb_fixed is None else np.array(bb_fixed, dtype=complex)

    def fit_and_grad(X):
        return rf_fit(X, target, B_fixed)

    margin = settings.feasibility_tol
    restore_level = eps * (1.0 - 10.0 * margin)
    scale = max(float(np.sum(np.abs(target) ** 2)), np.finfo(float).tiny)
    mu = settings.penalty0
    interior = constrained and psi_of(F) < eps * (1.0 - margin)
    best = None
    prev_obj = fit_and_grad(F)[0]
    prev_psi = psi_of(F)

    for _ in range(settings.max_outer_iters):
        if not constrained:
            def cost(X):
                return fit_and_grad(X)[0]

            def egrad(X):
                return fit_and_grad(X)[1]
        elif not interior:
            def cost(X):
                return max(0.0, psi_of(X) - restore_level) ** 2 / eps**2

            def egrad(X):
                excess = psi_of(X) - restore_level
                return (2.0 * excess / eps**2) * psi_gradient(spec, X) if excess > 0 else np.zeros_like(X)
        else:
            state, weight_k = surrogate_coeffs(qf, spec, F), scale / mu

            def cost(X):
                slack = 1.0 - tight_surrogate_value(state, X) / eps
                return fit_and_grad(X)[0] - weight_k * np.log(slack) if slack > 0 else np.inf

            def egrad(X):
                slack = 1.0 - tight_surrogate_value(state, X) / eps
                return fit_and_grad(X)[1] + (weight_k / (eps * slack)) * surrogate_gradient(state, X)

        restoring = constrained and not interior
        info = RcgInfo()
        point, trace = rcg_minimize(cost, egrad, ManifoldPoint(F, man), settings.inner, info=info)
        F = point.value
        obj = fit_and_grad(F)[0]
        psi = psi_of(F)
        feasible = (not constrained) or psi <= eps * (1.0 + margin)

        diag.objective.append(obj)
        diag.psi.append(psi)
        diag.penalized.extend(trace if not diag.penalized else trace[1:])
        diag.inner_iterations.append(info.iterations)
        diag.penalty.append(mu)

        key = (0, obj) if feasible else (1, psi)
        if best is None or key < best[0]:
            best = (key, F.copy())
        if interior:
            mu = min(mu * settings.penalty_growth, MAX_BARRIER_SCALE)
        elif restoring:
            if psi < eps * (1.0 - margin):
                interior = True
            elif prev_psi - psi <= settings.outer_tol * prev_psi:
                break  # stalled at a minimum of the MSE above the budget
        if feasible and not restoring and abs(prev_obj - obj) <= settings.outer_tol * scale:
            break
        prev_obj, prev_psi = obj, psi

    (status, _), F = best
    diag.feasible = status == 0
    if not diag.feasible:
        logger.info("MSE budget %.3g not met; best effort reaches %.3g", eps, min(diag.psi))
    return F, B_fixed if B_fixed is not None else bb_stage1_ls(F, target), diag


def effective_user_rows(channels, F_RF, F_BB1=None) -> np.ndarray:
    """Row m is u_m^H H_m F_RF (F_BB1), u_m the dominant left singular vector of H_m."""
    rows = [ch.dominant_left().conj() @ ch.matrix @ F_RF for ch in channels]
    H = np.stack(rows)
    return H if F_BB1 is None else H @ F_BB1


def design_hybrid(channels, spec: BeampatternSpec, config, qf: QuadraticForm | None = None,
                  weight=None, init=None, rng: np.random.Generator | None = None) -> HybridDesign:
    """Full hybrid precoder: RF design, LS, ZF, NSP, power projection."""
    solver = config.solver
    M = len(channels)
    L = config.n_targets
    K = M + L
    m_t = config.rf_chains
    P_t = config.tx_power_w

    F_opt = optimal_digital_precoder(channels)
    # with no targets there is no pattern to match and the budget is void
    epsilon = config.epsilon if spec.zeta > 0 else np.inf
    F_RF, F_BB1, diag = rmcg_rf_design(F_opt, spec, qf, RmcgSettings.from_solver(solver), init=init,
                                       n_rf=m_t, weight=weight, epsilon=epsilon, rng=rng)
    H_eff = effective_user_rows(channels, F_RF)
    F_BB2 = bb_stage2_zf(H_eff @ F_BB1)
    comm = F_BB1 @ F_BB2
    if config.nsp_rows == "full":
        radar = bb_radar_nsp([ch.matrix @ F_RF for ch in channels], L)
    else:
        radar = bb_radar_nsp([H_eff], L)
    # keep the user block orthogonal to the radar streams: zero forcing survives, and the
    # power projection below then leaves the radar block (and its null-space property) intact
    comm = comm - radar @ (radar.conj().T @ comm)
    comm = comm / np.linalg.norm(comm, axis=0, keepdims=True)
    F_BB = np.hstack([comm, radar])
    bb_settings = RcgSettings.from_solver(solver, grad_tol=solver.bb_grad_tol, max_inner_iters=solver.bb_max_iters)
    F_BB_hat = bb_power_constrain(F_BB, P_t, K, bb_settings)

    F = F_RF @ F_BB_hat
    power = float(np.sum(np.abs(F) ** 2))
    if power > P_t:
        F_BB_hat = F_BB_hat * np.sqrt(P_t / power)
        F = F_RF @ F_BB_hat
        power = float(np.sum(np.abs(F) ** 2))
    beta, psi = pattern_fit(spec, grid_gains(spec, F) * (m_t / power))
    return HybridDesign(F_RF, F_BB1, F_BB2, radar, F_BB_hat, beta, psi, diag.feasible, power, diag)
