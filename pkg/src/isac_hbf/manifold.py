"""Riemannian conjugate gradient on two matrix manifolds.

* ``CircleManifold``: every entry has the same modulus (phase-only RF
  precoders).
* ``ScaledUnitaryManifold``: ``X X^H = c I`` when X is wide or square and
  ``X^H X = c I`` when it is tall (power-constrained baseband precoders).

Both use the real inner product ``Re tr(A^H B)`` inherited from the ambient
space, projection-based vector transport and Polak-Ribiere directions with
Armijo backtracking.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, NumericError, RankError, ShapeError

logger = logging.getLogger(__name__)


def inner(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.real(np.vdot(A, B)))


def _herm(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


@dataclass(frozen=True)
class CircleManifold:
    modulus: float

    def __post_init__(self):
        if not self.modulus > 0:
            raise DomainError("circle modulus must be positive")

    def project(self, X, Z):
        return Z - np.real(Z * X.conj()) * X / self.modulus**2

    def retract(self, X, eta, step):
        if step == 0:
            return X
        Y = X + step * eta
        mag = np.abs(Y)
        if np.any(mag == 0):
            raise DomainError("retraction hit a zero entry; phase undefined")
        return self.modulus * Y / mag

    def violation(self, X) -> float:
        return float(np.max(np.abs(np.abs(X) - self.modulus))) if X.size else 0.0

    def random_point(self, shape, rng):
        return self.modulus * np.exp(2j * np.pi * rng.random(shape))


@dataclass(frozen=True)
class ScaledUnitaryManifold:
    gram_scale: float
    rank_tol: float = 1e-12

    def __post_init__(self):
        if not self.gram_scale > 0:
            raise DomainError("gram_scale must be positive")

    def project(self, X, Z):
        c = self.gram_scale
        if X.shape[0] <= X.shape[1]:
            return Z - _herm(Z @ X.conj().T) @ X / c
        return Z - X @ _herm(X.conj().T @ Z) / c

    def retract(self, X, eta, step):
        if step == 0:
            return X
        return self.polar(X + step * eta)

    def polar(self, Y):
        """sqrt(c) * (Y Y^H)^{-1/2} Y, via the SVD."""
        U, s, Vh = np.linalg.svd(Y, full_matrices=False)
        if s.size == 0 or s[-1] <= self.rank_tol * s[0]:
            raise RankError("matrix is rank deficient; cannot normalize onto the scaled-unitary manifold")
        return np.sqrt(self.gram_scale) * (U @ Vh)

    def violation(self, X) -> float:
        G = X @ X.conj().T if X.shape[0] <= X.shape[1] else X.conj().T @ X
        return float(np.max(np.abs(G - self.gram_scale * np.eye(G.shape[0]))))

    def random_point(self, shape, rng):
        Z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        return self.polar(Z)


Manifold = CircleManifold | ScaledUnitaryManifold


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    value: np.ndarray
    manifold: Manifold

    @property
    def manifold_kind(self) -> str:
        return "circle" if isinstance(self.manifold, CircleManifold) else "scaled_unitary"

    def violation(self) -> float:
        return self.manifold.violation(self.value)


@dataclass(frozen=True)
class RcgSettings:
    grad_tol: float = 1e-6
    max_inner_iters: int = 200
    armijo_shrink: float = 0.5
    armijo_slope: float = 0.1
    initial_step: float = 1.0
    pr_restart: bool = True
    max_backtracks: int = 60

    def __post_init__(self):
        if not (self.grad_tol > 0 and self.max_inner_iters > 0 and self.initial_step > 0):
            raise DomainError("RCG settings must be positive")
        if not 0 < self.armijo_shrink < 1:
            raise DomainError("armijo_shrink must lie in (0, 1)")
        if not 0 < self.armijo_slope < 0.5:
            raise DomainError("armijo_slope must lie in (0, 0.5)")

    @classmethod
    def from_solver(cls, solver, **overrides) -> "RcgSettings":
        base = dict(grad_tol=solver.grad_tol, max_inner_iters=solver.max_inner_iters,
                    armijo_shrink=solver.armijo_shrink, armijo_slope=solver.armijo_slope,
                    initial_step=solver.initial_step, pr_restart=solver.pr_restart)
        base.update(overrides)
        return cls(**base)


@dataclass
class RcgInfo:
    iterations: int = 0
    converged: bool = False
    reason: str = ""
    grad_norms: list[float] = field(default_factory=list)
    steps: list[float] = field(default_factory=list)


def _check_shape(point: ManifoldPoint, Z: np.ndarray) -> None:
    if Z.shape != point.value.shape:
        raise ShapeError(f"shape {Z.shape} does not match point shape {point.value.shape}")


def tangent_project(point: ManifoldPoint, ambient_grad) -> np.ndarray:
    Z = np.asarray(ambient_grad, dtype=complex)
    _check_shape(point, Z)
    return point.manifold.project(point.value, Z)


def retract(point: ManifoldPoint, direction, step: float) -> ManifoldPoint:
    if step < 0:
        raise DomainError("retraction step must be nonnegative")
    eta = np.asarray(direction, dtype=complex)
    _check_shape(point, eta)
    return ManifoldPoint(point.manifold.retract(point.value, eta, step), point.manifold)


def transport(new_point: ManifoldPoint, old_direction) -> np.ndarray:
    """Projection-based transport of a tangent vector to ``new_point``."""
    return tangent_project(new_point, old_direction)


def rcg_minimize(cost: Callable[[np.ndarray], float], euclidean_grad: Callable[[np.ndarray], np.ndarray],
                 start: ManifoldPoint, settings: RcgSettings = RcgSettings(),
                 callback: Callable[[ManifoldPoint], None] | None = None,
                 info: RcgInfo | None = None) -> tuple[ManifoldPoint, list[float]]:
    """Minimize ``cost`` over the manifold of ``start``.

    Returns the final point and the cost trace (initial cost followed by the
    cost after every accepted step).
    """
    info = RcgInfo() if info is None else info
    man = start.manifold
    x = start.value

    def evaluate(X):
        # +inf marks a trial point outside a barrier's domain and is simply rejected
        value = float(cost(X))
        if np.isnan(value) or value == -np.inf:
            raise NumericError(f"cost is not finite ({value}) at an iterate with "
                               f"max |entry| {np.max(np.abs(X)):.3e}")
        return value

    f = evaluate(x)
    if not np.isfinite(f):
        raise NumericError(f"cost is not finite ({f}) at the starting point")
    trace = [f]
    grad = man.project(x, np.asarray(euclidean_grad(x), dtype=complex))
    gnorm2 = inner(grad, grad)
    direction = -grad
    step_guess = settings.initial_step

    for it in range(settings.max_inner_iters):
        gnorm = np.sqrt(gnorm2)
        info.grad_norms.append(gnorm)
        if gnorm <= settings.grad_tol:
            info.converged, info.reason = True, "gradient tolerance"
            break
        slope = inner(grad, direction)
        if slope >= 0:
            direction, slope = -grad, -gnorm2

        t = step_guess
        accepted = False
        for _ in range(settings.max_backtracks):
            x_new = man.retract(x, direction, t)
            f_new = evaluate(x_new)
            if f_new <= f + settings.armijo_slope * t * slope:
                accepted = True
                break
            t *= settings.armijo_shrink
        if not accepted:
            info.reason = "line search failed"
            break
        # one safeguarded quadratic-interpolation step along the accepted ray
        curv = f_new - f - slope * t
        if curv > 0:
            t_q = -slope * t * t / (2.0 * curv)
            if abs(t_q - t) > 1e-3 * t:
                x_q = man.retract(x, direction, t_q)
                f_q = evaluate(x_q)
                if f_q < f_new and f_q <= f + settings.armijo_slope * t_q * slope:
                    x_new, f_new, t = x_q, f_q, t_q

        grad_new = man.project(x_new, np.asarray(euclidean_grad(x_new), dtype=complex))
        grad_old_t = man.project(x_new, grad)
        dir_old_t = man.project(x_new, direction)
        nu = inner(grad_new, grad_new - grad_old_t) / gnorm2
        if settings.pr_restart:
            nu = max(0.0, nu)
        direction = -grad_new + nu * dir_old_t

        x, f, grad = x_new, f_new, grad_new
        gnorm2 = inner(grad, grad)
        trace.append(f)
        info.steps.append(t)
        info.iterations = it + 1
        step_guess = 2.0 * t
        if callback is not None:
            callback(ManifoldPoint(x, man))
    else:
        info.reason = "iteration limit"
    return ManifoldPoint(x, man), trace
