"""Majorizer of the beampattern MSE around an expansion point F_t.

Using ``C <= lambda I`` the quadratic form ``d^H C d`` (``d = vec(F F^H)``) is
bounded by ``lambda ||d||^2 + Re{d^H b_t} + c1``.  The term ``Re{d^H b_t}``
splits into a convex part ``sum_j f_j^H B1 f_j`` and a concave part
``sum_j f_j^H B2 f_j``; the concave part is linearized at ``F_t`` through
``u_j = B2 f_t,j``.  Everything is assembled from ``Nt x Nt`` weighted sums of
``a_l a_l^H`` so no ``Nt^2``-sized object appears.

Two values are offered.  ``surrogate_value`` replaces ``lambda ||d||^2`` by its
bound ``lambda M_t^2`` on the constant-modulus set.  ``tight_surrogate_value``
keeps ``lambda ||F F^H||_F^2``; it still majorizes Psi, touches it at F_t and
has the same gradient there, which makes it the better constraint model
inside the solver.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beampattern import BeampatternSpec, QuadraticForm, grid_gains, optimal_beta, psi_from_gains
from .errors import DomainError, ShapeError

MODULUS_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SurrogateState:
    B1: np.ndarray
    B2: np.ndarray
    U: np.ndarray  # column j is u_j = B2^H f_t,j
    c1: float
    c2: float
    b_t: np.ndarray
    F_t: np.ndarray
    lam: float
    psi_t: float

    @property
    def u(self) -> list[np.ndarray]:
        return [self.U[:, j] for j in range(self.U.shape[1])]

    @property
    def n_rf(self) -> int:
        return self.F_t.shape[1]


def check_constant_modulus(F: np.ndarray, tol: float = MODULUS_TOL) -> None:
    target = 1.0 / np.sqrt(F.shape[0])
    worst = float(np.max(np.abs(np.abs(F) - target))) if F.size else 0.0
    if worst > tol:
        raise DomainError(f"expansion point is not constant modulus (max deviation {worst:.3e})")


def surrogate_coeffs(qf: QuadraticForm, spec: BeampatternSpec, F_t) -> SurrogateState:
    F_t = np.array(F_t, dtype=complex, ndmin=2)
    if F_t.shape[0] != spec.n_tx:
        raise ShapeError(f"F_t has {F_t.shape[0]} rows, spec expects {spec.n_tx}")
    check_constant_modulus(F_t)
    L = spec.n_grid
    lam = qf.lambda_max
    G = spec.desired_gains

    gains = grid_gains(spec, F_t)
    beta = optimal_beta(spec, gains)
    W_G = spec.weighted_outer(G)
    W_g = spec.weighted_outer(gains)
    D_t = F_t @ F_t.conj().T

    B1 = (2.0 / L) * (beta * W_G + W_g)
    B2 = -(4.0 / L) * beta * W_G - 2.0 * lam * D_t
    B1 = 0.5 * (B1 + B1.conj().T)
    B2 = 0.5 * (B2 + B2.conj().T)
    # mat(C d) = (W_g - beta W_G) / L, hence b_t = 2 vec(mat(C d)) - 2 lam d
    b_t = (2.0 / L * (W_g - beta * W_G) - 2.0 * lam * D_t).ravel(order="F")

    psi_t = psi_from_gains(spec, gains)
    c1 = lam * float(np.sum(np.abs(D_t) ** 2)) - psi_t
    U = B2.conj().T @ F_t
    m_t = F_t.shape[1]
    c2 = -float(np.real(np.sum(F_t.conj() * (B2.conj().T @ F_t)))) + c1 + lam * m_t**2
    for arr in (B1, B2, U, b_t, F_t):
        arr.setflags(write=False)
    return SurrogateState(B1, B2, U, c1, c2, b_t, F_t, lam, psi_t)


def _check_shape(state: SurrogateState, F: np.ndarray) -> None:
    if F.shape != state.F_t.shape:
        raise ShapeError(f"F has shape {F.shape}, surrogate built for {state.F_t.shape}")


def surrogate_value(state: SurrogateState, F) -> float:
    F = np.array(F, dtype=complex, ndmin=2)
    _check_shape(state, F)
    quad = np.real(np.sum(F.conj() * (state.B1 @ F)))
    lin = 2.0 * np.real(np.sum(F.conj() * state.U))
    return float(quad + lin + state.c2)


def tight_surrogate_value(state: SurrogateState, F) -> float:
    F = np.array(F, dtype=complex, ndmin=2)
    _check_shape(state, F)
    gram = F.conj().T @ F  # ||F F^H||_F = ||F^H F||_F, smaller matrix
    m_t = F.shape[1]
    return surrogate_value(state, F) + state.lam * (float(np.sum(np.abs(gram) ** 2)) - m_t**2)


def surrogate_gradient(state: SurrogateState, F, tight: bool = True) -> np.ndarray:
    """Euclidean gradient (d/d Re + j d/d Im) of the surrogate in F."""
    F = np.array(F, dtype=complex, ndmin=2)
    _check_shape(state, F)
    grad = 2.0 * (state.B1 @ F) + 2.0 * state.U
    if tight:
        grad = grad + 4.0 * state.lam * (F @ (F.conj().T @ F))
    return grad
