"""Energy functional for -Delta u + V(eps x) u = u log u^2 and its splitting.

The functional

    J(u) = 1/2 ||u||_eps^2 - 1/2 integral(u^2 log u^2)

is not smooth on the whole space; the integrand -1/2 s^2 log s^2 is split as
F1(s) - F2(s) with F1 convex, even and nonnegative (for delta small enough)
and F2 of power growth.  J then decomposes into a C^1 part Phi and a convex
lower-semicontinuous part Psi = integral(F1(u)).  This module evaluates the
pieces, the L2-metric gradient, the pointwise proximal map of F1, and the
logarithmic Sobolev slack used as a sanity check on quadrature.

The nodewise convention s^2 log s^2 := 0 at s = 0 is applied throughout;
grids do hit exact zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import NDArray

from .grid import Grid, GridField, integrate_array, kinetic_array, laplacian_array, node_coordinates

# F1''(s) = -(log s^2 + 3) on the inner branch, so convexity needs
# delta <= e^{-3/2}.
CONVEXITY_THRESHOLD = math.exp(-1.5)


@dataclass(frozen=True)
class SplitParams:
    """Cutoff delta for the F1/F2 splitting and the diagnostic growth exponent."""

    delta: float = 0.1
    growth_exponent: float = 4.0

    def __post_init__(self) -> None:
        if not (0.0 < self.delta <= CONVEXITY_THRESHOLD):
            raise ValueError(
                f"delta must lie in (0, {CONVEXITY_THRESHOLD:.5f}] to keep F1 convex, got {self.delta}"
            )
        if not self.growth_exponent > 2.0:
            raise ValueError(f"growth_exponent must exceed 2, got {self.growth_exponent}")


@dataclass
class EnergyBreakdown:
    """All energy pieces of a field.

    Invariants (asserted on construction by :func:`energy`):
    J = Phi + Psi, Psi >= 0, and J - pairing_JprimeU/2 = half_mass.
    """

    J: float
    Phi: float
    Psi: float
    pairing_JprimeU: float
    half_mass: float
    eps_norm_sq: float

    def to_dict(self) -> dict:
        return {
            "J": self.J,
            "Phi": self.Phi,
            "Psi": self.Psi,
            "pairing_JprimeU": self.pairing_JprimeU,
            "half_mass": self.half_mass,
            "eps_norm_sq": self.eps_norm_sq,
        }


def _safe_log_sq(a: NDArray) -> NDArray:
    """log(a^2) with the value at a = 0 irrelevant (callers mask it)."""
    return 2.0 * np.log(np.where(a > 0, a, 1.0))


def sq_log_sq(s: Union[float, NDArray]) -> Union[float, NDArray]:
    """s^2 log s^2 with the continuous extension 0 at s = 0."""
    arr = np.asarray(s, dtype=float)
    a = np.abs(arr)
    out = np.where(a > 0, arr * arr * _safe_log_sq(a), 0.0)
    return float(out) if np.isscalar(s) or arr.ndim == 0 else out


def _as_array(s) -> tuple[NDArray, bool]:
    arr = np.asarray(s, dtype=float)
    return arr, (arr.ndim == 0)


def f1(s, params: SplitParams):
    """Convex, even, nonnegative piece of the splitting.

    0 at 0; -1/2 s^2 log s^2 inside |s| < delta; quadratic continuation
    -1/2 s^2 (log delta^2 + 3) + 2 delta |s| - 1/2 delta^2 outside.
    """
    arr, scalar = _as_array(s)
    d = params.delta
    a = np.abs(arr)
    inner = np.where(a > 0, -0.5 * arr * arr * _safe_log_sq(a), 0.0)
    outer = -0.5 * arr * arr * (math.log(d * d) + 3.0) + 2.0 * d * a - 0.5 * d * d
    out = np.where(a < d, inner, outer)
    return float(out) if scalar else out


def f2(s, params: SplitParams):
    """Smooth power-growth complement: F2 - F1 = 1/2 s^2 log s^2."""
    arr, scalar = _as_array(s)
    d = params.delta
    a = np.abs(arr)
    a_safe = np.where(a > 0, a, 1.0)
    outer = (
        0.5 * arr * arr * (2.0 * np.log(a_safe / d))
        + 2.0 * d * a
        - 1.5 * arr * arr
        - 0.5 * d * d
    )
    out = np.where(a < d, 0.0, outer)
    return float(out) if scalar else out


def f1_prime(s, params: SplitParams):
    """Derivative of f1; continuous across |s| = delta, zero at 0."""
    arr, scalar = _as_array(s)
    d = params.delta
    a = np.abs(arr)
    inner = np.where(a > 0, -arr * (_safe_log_sq(a) + 1.0), 0.0)
    outer = -arr * (math.log(d * d) + 3.0) + 2.0 * d * np.sign(arr)
    out = np.where(a < d, inner, outer)
    return float(out) if scalar else out


def f2_prime(s, params: SplitParams):
    """Derivative of f2; vanishes inside |s| < delta and at the splice."""
    arr, scalar = _as_array(s)
    d = params.delta
    a = np.abs(arr)
    a_safe = np.where(a > 0, a, 1.0)
    outer = arr * (2.0 * np.log(a_safe / d)) + 2.0 * d * np.sign(arr) - 2.0 * arr
    out = np.where(a < d, 0.0, outer)
    return float(out) if scalar else out


def _f1_second(a: NDArray, d: float) -> NDArray:
    """F1'' on |s| = a > 0 (needed by the prox Newton step)."""
    inner = -(_safe_log_sq(a) + 3.0)
    return np.where(a < d, inner, -(math.log(d * d) + 3.0))


# ---------------------------------------------------------------------------
# potential sampling (duck-typed: PotentialSpec, GridField, callable, number)
# ---------------------------------------------------------------------------

def potential_samples(potential, grid: Grid, eps: float) -> NDArray:
    """Sample V(eps x) at the grid nodes as a flat array.

    Accepts a PotentialSpec (anything with ``evaluate``), a GridField of
    precomputed samples, a vectorized callable on (m, dim) points, or a
    plain number for a constant potential.
    """
    if isinstance(potential, GridField):
        if potential.grid != grid:
            raise ValueError("sampled potential lives on a different grid")
        return potential.values
    if hasattr(potential, "evaluate"):
        return np.asarray(potential.evaluate(eps * node_coordinates(grid)), dtype=float).ravel()
    if callable(potential):
        return np.asarray(potential(eps * node_coordinates(grid)), dtype=float).ravel()
    return np.full(grid.num_nodes, float(potential))


def _check_weight(vsamp: NDArray) -> None:
    if not np.all(vsamp > -1.0):
        raise ValueError("potential samples must stay above -1 (V + 1 must be positive)")


# ---------------------------------------------------------------------------
# energy and gradient
# ---------------------------------------------------------------------------

def energy_value(grid: Grid, values: NDArray, vsamp: NDArray) -> float:
    """Fast J evaluation used inside solver loops."""
    kin = kinetic_array(grid, values, values)
    sq = values * values
    quad = integrate_array(grid, (vsamp + 1.0) * sq)
    ent = integrate_array(grid, np.where(sq > 0, sq * _safe_log_sq(np.abs(values)), 0.0))
    return 0.5 * (kin + quad) - 0.5 * ent


def energy(u: GridField, potential, eps: float, params: SplitParams) -> EnergyBreakdown:
    """Full energy breakdown of a field.

    J is assembled both directly and as Phi + Psi and the two routes are
    required to agree; the identity J - pairing/2 = half_mass is asserted
    as well.
    """
    grid = u.grid
    vsamp = potential_samples(potential, grid, eps)
    _check_weight(vsamp)
    vals = u.values
    sq = vals * vals
    kin = kinetic_array(grid, vals, vals)
    mass = integrate_array(grid, sq)
    pot = integrate_array(grid, vsamp * sq)
    ent = integrate_array(grid, np.where(sq > 0, sq * _safe_log_sq(np.abs(vals)), 0.0))

    eps_norm_sq = kin + pot + mass
    j_direct = 0.5 * eps_norm_sq - 0.5 * ent
    phi = 0.5 * eps_norm_sq - integrate_array(grid, f2(vals, params))
    psi = integrate_array(grid, f1(vals, params))
    pairing = kin + pot - ent
    half_mass = 0.5 * mass

    scale = max(1.0, abs(phi) + abs(psi))
    if abs(j_direct - (phi + psi)) > 1e-12 * scale:
        raise AssertionError("energy splitting mismatch: J != Phi + Psi beyond tolerance")
    if abs(j_direct - 0.5 * pairing - half_mass) > 1e-10 * max(1.0, abs(j_direct)):
        raise AssertionError("energy identity J - J'(u)u/2 = mass/2 violated")
    if psi < -1e-12 * scale:
        raise AssertionError("Psi must be nonnegative")

    return EnergyBreakdown(
        J=j_direct,
        Phi=phi,
        Psi=psi,
        pairing_JprimeU=pairing,
        half_mass=half_mass,
        eps_norm_sq=eps_norm_sq,
    )


def grad_array(grid: Grid, values: NDArray, vsamp: NDArray) -> NDArray:
    """L2-metric gradient -Lap u + V u - u log u^2 as a raw array."""
    a = np.abs(values)
    nl = np.where(a > 0, values * _safe_log_sq(a), 0.0)
    return -laplacian_array(grid, values) + vsamp * values - nl


def grad_L2(u: GridField, potential, eps: float, params: SplitParams, check_split: bool = True) -> GridField:
    """L2 gradient field of J.

    With ``check_split`` the gradient is also reassembled from the split
    (-Lap u + (V+1)u - F2'(u)) + F1'(u) and both routes must agree to 1e-10.
    """
    grid = u.grid
    vsamp = potential_samples(potential, grid, eps)
    _check_weight(vsamp)
    direct = grad_array(grid, u.values, vsamp)
    if check_split:
        split = (
            -laplacian_array(grid, u.values)
            + (vsamp + 1.0) * u.values
            - f2_prime(u.values, params)
            + f1_prime(u.values, params)
        )
        scale = 1.0 + float(np.max(np.abs(direct)))
        if float(np.max(np.abs(direct - split))) > 1e-10 * scale:
            raise AssertionError("gradient assemblies (direct vs split) disagree")
    return GridField(grid, direct)


# ---------------------------------------------------------------------------
# proximal map of F1
# ---------------------------------------------------------------------------

def prox_f1(v, step: float, params: SplitParams):
    """Unique minimizer of 1/2 (s - v)^2 + step * F1(s).

    Solved from the first-order condition s + step F1'(s) = v by a
    safeguarded Newton iteration with a bisection bracket; F1' has unbounded
    relative slope near 0, so unguarded Newton can overshoot.  The returned
    s satisfies s v >= 0, |s| <= |v| and the first-order condition to 1e-14.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    arr, scalar = _as_array(v)
    a = np.abs(np.atleast_1d(arr).astype(float))
    d = params.delta

    lo = np.zeros_like(a)
    hi = a.copy()
    s = 0.5 * a
    tol = 1e-14 * (1.0 + a)
    active = a > 0
    for _ in range(200):
        if not np.any(active):
            break
        r = s + step * np.abs(f1_prime(s, params)) - a  # all quantities on the positive axis
        hi = np.where(active & (r > 0), s, hi)
        lo = np.where(active & (r < 0), s, lo)
        active = active & (np.abs(r) > tol)
        slope = 1.0 + step * _f1_second(np.where(s > 0, s, d), d)
        newton = s - r / np.where(slope > 0, slope, 1.0)
        inside = (newton > lo) & (newton < hi)
        s = np.where(active, np.where(inside, newton, 0.5 * (lo + hi)), s)

    out = np.sign(arr) * s.reshape(arr.shape)
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# logarithmic Sobolev slack
# ---------------------------------------------------------------------------

def log_sobolev_slack(u: GridField, a: float) -> float:
    """Slack of the logarithmic Sobolev inequality at parameter a > 0.

    Returns (a^2/pi) |grad u|_2^2 + (log |u|_2^2 - N (1 + log a)) |u|_2^2
    - integral(u^2 log u^2), which is nonnegative up to quadrature error.
    """
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    grid = u.grid
    sq = u.values * u.values
    mass = integrate_array(grid, sq)
    if mass <= 0:
        raise ValueError("log-Sobolev slack is undefined for the zero field")
    kin = kinetic_array(grid, u.values, u.values)
    ent = integrate_array(grid, np.where(sq > 0, sq * _safe_log_sq(np.abs(u.values)), 0.0))
    return (a * a / math.pi) * kin + (math.log(mass) - grid.dim * (1.0 + math.log(a))) * mass - ent
