"""Relative entropies and dissipation functionals for states against a profile.

Scalar generators: the Boltzmann function z log z - z + 1, the power family
F_p with F_p'' = z^(p-2) and F_p(1) = F_p'(1) = 0, their convex conjugates,
and the nonnegative reaction pairing (a - b)(log a - log b).  Functionals are
trapezoid quadratures on the shared grid, with relative densities rho = u/U
and zeta = v/V.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedEntropy
from .grids import Grid, check_values, derivative1, integrate
from .profile import ProfileSolution

# densities below this are treated as on the axis of the reaction pairing,
# where the pairing is infinite; simulation enforces positivity, so hitting
# the clamp is a diagnostic failure rather than a value.
_DENSITY_CLAMP = 1e-300


@dataclass(frozen=True)
class State:
    """Concentrations (u, v) on a grid at scaled time tau."""

    grid: Grid
    u: np.ndarray
    v: np.ndarray
    tau: float

    def __post_init__(self):
        u = check_values(self.grid, self.u)
        v = check_values(self.grid, self.v)
        if np.min(u) <= 0 or np.min(v) <= 0:
            raise DomainError("state concentrations must be positive nodewise")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class RelativeDensities:
    """rho = u/U and zeta = v/V for a state over a profile."""

    grid: Grid
    rho: np.ndarray
    zeta: np.ndarray


def relative_densities(state: State, profile: ProfileSolution) -> RelativeDensities:
    if state.grid != profile.grid:
        raise DomainError("state and profile must share one grid")
    return RelativeDensities(state.grid, state.u / profile.U, state.v / profile.V)


@dataclass
class DiagnosticsRecord:
    """Functional values at one sampling instant.

    ``D_B_total`` is assembled as I_Fisher + E_B/2 - I_Lambda + e^tau D_react,
    an identity by construction; ``dissipation_residual`` is filled later by
    the time integrator from finite differences of E_B across samples.
    """

    tau: float
    E_B: float
    E_p: dict[float, float] = field(default_factory=dict)
    I_Fisher: float = 0.0
    D_react: float = 0.0
    I_Lambda: float = 0.0
    I_Lambda_1: float = 0.0
    I_Lambda_2: float = 0.0
    hellinger_sq: float = 0.0
    D_B_total: float = 0.0
    dissipation_residual: float = float("nan")


def lambda_B(z: float) -> float:
    """Boltzmann function z log z - z + 1, continuously extended by 1 at z = 0."""
    if z < 0:
        raise DomainError(f"Boltzmann function needs z >= 0, got {z}")
    if z == 0.0:
        return 1.0
    return z * math.log(z) - z + 1.0


def _lambda_B_arr(z: np.ndarray) -> np.ndarray:
    safe = np.maximum(z, _DENSITY_CLAMP)
    return np.where(z > 0, safe * np.log(safe) - safe + 1.0, 1.0)


def F_p(z: float, p: float) -> float:
    """Power-family entropy generator; p = 1 is Boltzmann, p = 0 the dual log branch."""
    if z < 0 or (z == 0 and p <= 0):
        raise DomainError(f"F_p needs z >= 0 (z > 0 for p <= 0), got z={z}, p={p}")
    if p == 1.0:
        return lambda_B(z)
    if p == 0.0:
        return z - math.log(z) - 1.0
    return (z**p - p * z + p - 1.0) / (p * (p - 1.0))


def _F_p_arr(z: np.ndarray, p: float) -> np.ndarray:
    if np.min(z) < 0 or (p <= 0 and np.min(z) <= 0):
        raise DomainError("F_p needs nonnegative arguments (positive for p <= 0)")
    if p == 1.0:
        return _lambda_B_arr(z)
    if p == 0.0:
        return z - np.log(z) - 1.0
    return (z**p - p * z + p - 1.0) / (p * (p - 1.0))


def F_p_conjugate(zeta: float, p: float, tol: float = 1e-10) -> float:
    """Legendre transform sup_z (zeta z - F_p(z)).

    Closed form 2 zeta / (2 - zeta) for p = 1/2 (finite for zeta < 2); other
    p are resolved by a log-grid search refined by golden section.
    """
    if p == 0.5:
        if zeta >= 2.0:
            raise DomainError(f"conjugate of F_(1/2) is finite only for zeta < 2, got {zeta}")
        return 2.0 * zeta / (2.0 - zeta)
    if p < 1 and zeta >= 1.0 / (1.0 - p):
        raise DomainError(f"conjugate of F_p is finite only for zeta < {1/(1-p):g}")
    z = np.logspace(-12, 12, 4001)
    vals = zeta * z - _F_p_arr(z, p)
    k = int(np.argmax(vals))
    lo, hi = z[max(k - 1, 0)], z[min(k + 1, len(z) - 1)]
    obj = lambda t: zeta * t - F_p(t, p)
    return _golden_max(obj, lo, hi, tol)


def _golden_max(f, lo: float, hi: float, tol: float) -> float:
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * max(1.0, abs(a), abs(b)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = f(d)
    return max(fc, fd)


def gamma_fn(a: float, b: float) -> float:
    """Reaction pairing (a - b)(log a - log b) >= 0, extended by 0 at (0,0) and +inf on the axes."""
    if a < 0 or b < 0:
        raise DomainError(f"reaction pairing needs nonnegative arguments, got ({a}, {b})")
    if a == 0.0 and b == 0.0:
        return 0.0
    if a == 0.0 or b == 0.0:
        return math.inf
    return (a - b) * (math.log(a) - math.log(b))


def _clamped(x: np.ndarray, what: str) -> np.ndarray:
    if np.min(x) < _DENSITY_CLAMP:
        raise DomainError(f"{what} fell below {_DENSITY_CLAMP:g}; reaction pairing diverges")
    return x


def relative_entropy(state: State, profile: ProfileSolution, p: float = 1.0) -> float:
    """E_p = integral of U F_p(u/U) + V F_p(v/V)."""
    dens = relative_densities(state, profile)
    vals = profile.U * _F_p_arr(dens.rho, p) + profile.V * _F_p_arr(dens.zeta, p)
    return integrate(state.grid, vals)


def fisher_information(
    dens: RelativeDensities, profile: ProfileSolution, p: float = 1.0
) -> float:
    """Gradient dissipation: integral of d1 U rho^(p-2) rho_y^2 + d2 V zeta^(p-2) zeta_y^2."""
    rho = _clamped(dens.rho, "relative density rho")
    zeta = _clamped(dens.zeta, "relative density zeta")
    ry = derivative1(dens.grid, rho)
    zy = derivative1(dens.grid, zeta)
    d = profile.data
    vals = d.d1 * profile.U * rho ** (p - 2.0) * ry**2 + d.d2 * profile.V * zeta ** (
        p - 2.0
    ) * zy**2
    return integrate(dens.grid, vals)


def _require_equal_orders(profile: ProfileSolution, p: float, what: str) -> None:
    d = profile.data
    if p != 1.0 and d.alpha != d.beta:
        raise UnsupportedEntropy(
            f"{what} with p != 1 requires equal reaction orders, got "
            f"alpha={d.alpha}, beta={d.beta}"
        )


def reactive_dissipation(
    dens: RelativeDensities, profile: ProfileSolution, p: float = 1.0
) -> float:
    """Reaction dissipation; Boltzmann pairing for p = 1, power pairing for equal orders."""
    _require_equal_orders(profile, p, "reactive dissipation")
    d = profile.data
    rho = _clamped(dens.rho, "relative density rho")
    zeta = _clamped(dens.zeta, "relative density zeta")
    if p == 1.0:
        a, b = rho**d.alpha, zeta**d.beta
        vals = d.k * profile.U**d.alpha * (a - b) * (np.log(a) - np.log(b))
    else:
        if p == 0.0:
            raise UnsupportedEntropy("reactive dissipation is not defined for p = 0")
        a = d.alpha
        vals = (
            d.k
            * profile.U**a
            * (a / (p - 1.0))
            * (zeta ** (p - 1.0) - rho ** (p - 1.0))
            * (zeta**a - rho**a)
        )
    return integrate(dens.grid, vals)


def mixed_term(dens: RelativeDensities, profile: ProfileSolution, p: float = 1.0) -> float:
    """Signed multiplier term; the only dissipation contribution without a sign."""
    _require_equal_orders(profile, p, "mixed term")
    d = profile.data
    if p == 1.0:
        vals = ((1.0 - dens.rho) * d.alpha - (1.0 - dens.zeta) * d.beta) * profile.Lambda
    else:
        if p == 0.0:
            raise UnsupportedEntropy("mixed term is not defined for p = 0")
        vals = (1.0 / p) * (dens.zeta**p - dens.rho**p) * d.alpha * profile.Lambda
    return integrate(dens.grid, vals)


def ramp(r: np.ndarray, alpha: float) -> np.ndarray:
    """Concave comparison map alpha (r^(1/alpha) - 1) used to split the mixed term."""
    return alpha * (r ** (1.0 / alpha) - 1.0)


def split_mixed_term(
    dens: RelativeDensities, profile: ProfileSolution
) -> tuple[float, float]:
    """Split the mixed term into a reaction-controlled and an entropy-controlled part.

    With Psi(r) = alpha (r^(1/alpha) - 1) the first part pairs
    Psi(zeta^beta) - Psi(rho^alpha) with the multiplier; the remainder is
    nonpositive against the Boltzmann entropy up to the flatness number theta.
    The rho contribution of the remainder vanishes identically.
    """
    d = profile.data
    if d.alpha <= d.beta:
        raise DomainError("mixed-term split requires alpha > beta")
    a, b = d.alpha, d.beta
    psi_z = ramp(dens.zeta**b, a)
    psi_r = ramp(dens.rho**a, a)  # equals a (rho - 1) exactly
    part1 = integrate(dens.grid, (psi_z - psi_r) * profile.Lambda)
    rem = (dens.zeta - 1.0 - psi_z / b) * b - (dens.rho - 1.0 - psi_r / a) * a
    part2 = integrate(dens.grid, rem * profile.Lambda)
    return part1, part2


def hellinger_sq(state: State, profile: ProfileSolution) -> float:
    """Squared Hellinger distance of (u, v) to (U, V); equals E_(1/2) / 2."""
    vals = (np.sqrt(state.u) - np.sqrt(profile.U)) ** 2 + (
        np.sqrt(state.v) - np.sqrt(profile.V)
    ) ** 2
    return integrate(state.grid, vals)


def dissipation_total(
    dens: RelativeDensities,
    state: State,
    profile: ProfileSolution,
    p: float = 1.0,
    p_list: tuple[float, ...] = (),
) -> DiagnosticsRecord:
    """Assemble one diagnostics record; the decomposition uses entropy family ``p``.

    ``dissipation_residual`` is left NaN for the integrator to fill from
    sampled finite differences.
    """
    d = profile.data
    E_B = relative_entropy(state, profile, 1.0)
    E_p = {q: relative_entropy(state, profile, q) for q in dict.fromkeys((*p_list, p))}
    I_F = fisher_information(dens, profile, p)
    D_re = reactive_dissipation(dens, profile, p)
    I_L = mixed_term(dens, profile, p)
    if d.alpha > d.beta:
        I_L1, I_L2 = split_mixed_term(dens, profile)
    else:
        I_L1, I_L2 = I_L, 0.0  # the remainder part vanishes identically at equal orders
    E_drive = E_B if p == 1.0 else E_p[p]
    total = I_F + 0.5 * E_drive - I_L + math.exp(state.tau) * D_re
    return DiagnosticsRecord(
        tau=state.tau,
        E_B=E_B,
        E_p=E_p,
        I_Fisher=I_F,
        D_react=D_re,
        I_Lambda=I_L,
        I_Lambda_1=I_L1,
        I_Lambda_2=I_L2,
        hellinger_sq=hellinger_sq(state, profile),
        D_B_total=total,
    )
