"""Similarity profiles of the scaled two-species system.

The pair (U, V) interpolating the equilibria (A-^beta, A-^alpha) at -inf and
(A+^beta, A+^alpha) at +inf satisfies a constrained steady equation with a
reaction-flux multiplier Lambda.  Eliminating V = U^(alpha/beta) and Lambda
reduces it to a scalar two-point boundary value problem

    (beta d1 U + alpha d2 U^(alpha/beta))'' + (y/2) (beta U + alpha U^(alpha/beta))' = 0

which is solved here by a damped Newton iteration on a high-order finite
difference discretization.  The equal-order case has an erf closed form used
as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import erf

from . import fdops
from .errors import DomainError, NonConvergence, NonPositivity
from .grids import Grid

_DAMPING_FLOOR = 2.0**-30


@dataclass(frozen=True)
class ProblemData:
    """Reaction orders, diffusivities, reaction strength and the two equilibria."""

    alpha: float
    beta: float
    d1: float
    d2: float
    k: float
    A_minus: float
    A_plus: float

    def __post_init__(self):
        if not (self.alpha >= 1.0 and self.beta >= 1.0):
            raise DomainError(f"reaction orders must be >= 1, got ({self.alpha}, {self.beta})")
        if self.alpha < self.beta:
            raise DomainError(
                f"canonical orientation requires alpha >= beta, got ({self.alpha}, {self.beta})"
            )
        for name in ("d1", "d2", "k", "A_minus", "A_plus"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v}")

    @property
    def u_minus(self) -> float:
        return self.A_minus**self.beta

    @property
    def u_plus(self) -> float:
        return self.A_plus**self.beta

    @property
    def v_minus(self) -> float:
        return self.A_minus**self.alpha

    @property
    def v_plus(self) -> float:
        return self.A_plus**self.alpha


@dataclass(frozen=True)
class ProfileSolution:
    """Profile pair with multiplier, nodal derivatives and solver residual."""

    grid: Grid
    data: ProblemData
    U: np.ndarray
    V: np.ndarray
    Lambda: np.ndarray
    U1: np.ndarray
    U2: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    residual_norm: float

    def multiplier_mismatch(self) -> float:
        """Sup distance between Lambda recovered from the U-row and the V-row."""
        d = self.data
        lam_u = -(d.d1 * self.U2 + 0.5 * self.grid.nodes * self.U1) / d.alpha
        return float(np.max(np.abs(lam_u - self.Lambda)))


def _erf_ramp(grid: Grid, lo: float, hi: float, scale: float) -> np.ndarray:
    return 0.5 * (hi + lo) + 0.5 * (hi - lo) * erf(grid.nodes / scale)


def _finish(grid: Grid, data: ProblemData, U: np.ndarray, residual_norm: float) -> ProfileSolution:
    # Derivatives use the solver's own stencils so that the multiplier
    # recovered from either row agrees to the solver residual.
    V = U ** (data.alpha / data.beta)
    U1, U2 = fdops.diff1(grid, U), fdops.diff2(grid, U)
    V1, V2 = fdops.diff1(grid, V), fdops.diff2(grid, V)
    Lam = (data.d2 * V2 + 0.5 * grid.nodes * V1) / data.beta
    return ProfileSolution(grid, data, U, V, Lam, U1, U2, V1, V2, residual_norm)


def solve_profile(
    data: ProblemData, grid: Grid, tol: float = 1e-8, max_iter: int = 40
) -> ProfileSolution:
    """Solve the scalar profile equation by damped Newton.

    The Newton step keeps every iterate above half of the smaller boundary
    value (V = U^(alpha/beta) needs strict positivity); the step is halved
    until the residual decreases, down to a floor of 2^-30.

    Raises NonConvergence when the residual stalls above ``tol`` and
    NonPositivity when the damping floor is hit on the positivity constraint.
    """
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    a, b, d1, d2 = data.alpha, data.beta, data.d1, data.d2
    gam = a / b
    lo_bc, hi_bc = data.u_minus, data.u_plus

    def g(U):
        return b * d1 * U + a * d2 * U**gam

    def gp(U):
        return b * d1 + a * d2 * gam * U ** (gam - 1.0)

    def w(U):
        return b * U + a * U**gam

    def wp(U):
        return b + a * gam * U ** (gam - 1.0)

    U = _erf_ramp(grid, lo_bc, hi_bc, np.sqrt(2.0 * (d1 + d2)))
    U[0], U[-1] = lo_bc, hi_bc
    floor = 0.5 * min(lo_bc, hi_bc)

    def resid(U):
        return fdops.scalar_residual(grid, g(U), w(U))

    R = resid(U)
    rnorm = float(np.max(np.abs(R[1:-1])))
    for iteration in range(max_iter):
        if rnorm <= tol:
            return _finish(grid, data, U, rnorm)
        ab = fdops.jacobian_banded(grid, gp(U), wp(U))
        delta = solve_banded((2, 2), ab, -R[1:-1])
        lam = 1.0
        accepted = False
        positivity_bound = False
        while lam >= _DAMPING_FLOOR:
            trial = U.copy()
            trial[1:-1] = U[1:-1] + lam * delta
            if np.min(trial) < floor:
                positivity_bound = True
                lam *= 0.5
                continue
            R_trial = resid(trial)
            r_trial = float(np.max(np.abs(R_trial[1:-1])))
            if r_trial < rnorm or r_trial <= tol:
                U, R, rnorm = trial, R_trial, r_trial
                accepted = True
                break
            positivity_bound = False
            lam *= 0.5
        if not accepted:
            if positivity_bound:
                raise NonPositivity(
                    f"damping floor reached while enforcing U >= {floor:.3g} "
                    f"(residual {rnorm:.3e})"
                )
            # roundoff plateau: the residual cannot decrease further
            raise NonConvergence(iteration + 1, rnorm)
    if rnorm <= tol:
        return _finish(grid, data, U, rnorm)
    raise NonConvergence(max_iter, rnorm)


def closed_form_profile(data: ProblemData, grid: Grid) -> ProfileSolution:
    """Equal-order profile: erf ramp with the averaged diffusivity.

    U(y) = (A+^a + A-^a)/2 + ((A+^a - A-^a)/2) erf(y / sqrt(2 (d1+d2))),
    V = U, and Lambda = ((d2 - d1) / (2 a)) U'' with the analytic U''.
    """
    if data.alpha != data.beta:
        raise DomainError("closed form requires alpha == beta")
    a, d1, d2 = data.alpha, data.d1, data.d2
    c = np.sqrt(2.0 * (d1 + d2))
    lo, hi = data.v_minus, data.v_plus  # A^alpha = A^beta here
    half = 0.5 * (hi - lo)
    y = grid.nodes
    U = 0.5 * (hi + lo) + half * erf(y / c)
    U1 = half * (2.0 / (c * np.sqrt(np.pi))) * np.exp(-((y / c) ** 2))
    U2 = -(2.0 * y / c**2) * U1
    Lam = ((d2 - d1) / (2.0 * a)) * U2
    residual = fdops.scalar_residual(grid, (a * d1 + a * d2) * U, 2.0 * a * U)
    rnorm = float(np.max(np.abs(residual[1:-1])))
    return ProfileSolution(grid, data, U, U.copy(), Lam, U1, U2, U1.copy(), U2.copy(), rnorm)


def linear_diffusion_profile(
    D: float, A_minus: float, A_plus: float, grid: Grid
) -> np.ndarray:
    """Scaled single-species diffusion profile: mixing erf ramp with scale sqrt(4 D)."""
    if not (np.isfinite(D) and D > 0):
        raise DomainError(f"diffusivity must be positive, got {D}")
    return 0.5 * (A_plus + A_minus) + 0.5 * (A_plus - A_minus) * erf(
        grid.nodes / np.sqrt(4.0 * D)
    )


def profile_invariants(sol: ProfileSolution, tol: float = 1e-8) -> dict[str, bool]:
    """Check the defining properties of a profile solution.

    Returns a name -> bool map: the algebraic constraint U^alpha = V^beta,
    boundary values, nodewise monotonicity, positivity above the smaller
    equilibrium, and agreement of the multiplier recovered from either row.
    """
    d = sol.data
    constraint = float(np.max(np.abs(sol.U**d.alpha - sol.V**d.beta)))
    checks = {
        "algebraic_constraint": constraint <= 1e-8 * float(np.max(sol.U**d.alpha)),
        "boundary_values": bool(
            abs(sol.U[0] - d.u_minus) <= 1e-8
            and abs(sol.U[-1] - d.u_plus) <= 1e-8
            and abs(sol.V[0] - d.v_minus) <= 1e-8
            and abs(sol.V[-1] - d.v_plus) <= 1e-8
        ),
        "positivity": (
            float(np.min(sol.U)) >= min(d.u_minus, d.u_plus) - 1e-10
            and float(np.min(sol.V)) >= min(d.v_minus, d.v_plus) - 1e-10
        ),
        "multiplier_consistency": sol.multiplier_mismatch() <= max(tol, 10.0 * sol.residual_norm),
        "residual": sol.residual_norm <= tol,
    }
    if d.A_minus < d.A_plus:
        checks["monotone"] = bool(np.all(np.diff(sol.U) >= -1e-12) and np.all(np.diff(sol.V) >= -1e-12))
    elif d.A_minus > d.A_plus:
        checks["monotone"] = bool(np.all(np.diff(sol.U) <= 1e-12) and np.all(np.diff(sol.V) <= 1e-12))
    else:
        checks["monotone"] = True
    return checks
