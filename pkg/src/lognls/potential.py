"""Saddle-like potentials, the X/Y subspace split, and hypothesis checkers.

A saddle-like potential is bounded, tends to its infimum c0 along a subspace
X of R^N, and stays strictly above c0 on the cone

    Y_lambda = { z : |P_Y z| > lambda |z| }

around the complementary subspace Y.  The split is realized as an orthogonal
coordinate split (disjoint axis index sets), so the definitional form
"|z.y| > lambda |z||y| for some y in Y" reduces to |P_Y z| > lambda |z|.

Checkers cover the sphere-infimum geometry (V1), boundedness of V and its
first two derivatives (V2), and the level inequalities (V4).  The
Palais-Smale condition for V (V3) constrains sequences at infinity and is
not verifiable by finite sampling; ``v3_diagnostic`` only reports suspect
flat directions, never a pass/fail verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray

from .grid import Grid, GridField, node_coordinates
from .nehari import m_closed_form


@dataclass(frozen=True)
class PotentialSpec:
    """A potential with its subspace split, cone parameter, and constants.

    ``c2 = min(1, c0)`` is derived, never stored independently: replacing a
    spec recomputes it.
    """

    dim: int
    x_axes: tuple[int, ...]
    y_axes: tuple[int, ...]
    lam: float
    evaluate: Callable[[NDArray], NDArray] = field(repr=False)
    kind: str = "custom"
    c0: float = 0.0
    c1: float = 0.0
    c2: float = field(init=False)

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        axes = tuple(sorted(self.x_axes)) + tuple(sorted(self.y_axes))
        if sorted(axes) != list(range(self.dim)) or set(self.x_axes) & set(self.y_axes):
            raise ValueError("x_axes and y_axes must be disjoint and cover all axes")
        if not (0.0 < self.lam < 1.0):
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.c0 <= -1.0:
            raise ValueError(f"c0 must exceed -1, got {self.c0}")
        if self.c1 < self.c0:
            raise ValueError(f"c1 = {self.c1} may not be below c0 = {self.c0}")
        object.__setattr__(self, "c2", min(1.0, self.c0))

    def project_x(self, pts: NDArray) -> NDArray:
        out = np.zeros_like(pts)
        for ax in self.x_axes:
            out[:, ax] = pts[:, ax]
        return out

    def project_y(self, pts: NDArray) -> NDArray:
        out = np.zeros_like(pts)
        for ax in self.y_axes:
            out[:, ax] = pts[:, ax]
        return out

    def in_cone(self, pts: NDArray) -> NDArray:
        """Membership of the cone Y_lambda, |P_Y z| > lambda |z| (vectorized)."""
        norm = np.linalg.norm(pts, axis=1)
        y_norm = np.linalg.norm(self.project_y(pts), axis=1)
        return y_norm > self.lam * norm

    def sample_on_grid(self, grid: Grid, eps: float) -> GridField:
        """V(eps x) at the grid nodes."""
        return GridField(grid, np.asarray(self.evaluate(eps * node_coordinates(grid)), float))

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "x_axes": list(self.x_axes),
            "y_axes": list(self.y_axes),
            "lambda": self.lam,
            "c0": self.c0,
            "c1": self.c1,
            "c2": self.c2,
        }


def model_saddle(c0: float, c1: float, dim: int, x_axes, lam: float) -> PotentialSpec:
    """The reference saddle: V(z) = c0 + (c1-c0)(1 + |P_Y z|^2)/(1 + |z|^2).

    Equal to c1 at the origin and on all of Y, decreasing to c0 along X, and
    bounded below by c0 + (c1-c0) lambda^2 on the cone Y_lambda.
    """
    if not c1 > c0:
        raise ValueError(f"model saddle needs c1 > c0, got c0={c0}, c1={c1}")
    if c0 <= -1.0:
        raise ValueError(f"c0 must exceed -1, got {c0}")
    x_axes = tuple(int(a) for a in x_axes)
    y_axes = tuple(a for a in range(dim) if a not in x_axes)

    def _eval(pts: NDArray) -> NDArray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        sq = np.sum(pts * pts, axis=1)
        y_sq = np.zeros_like(sq)
        for ax in y_axes:
            y_sq += pts[:, ax] ** 2
        return c0 + (c1 - c0) * (1.0 + y_sq) / (1.0 + sq)

    return PotentialSpec(dim, x_axes, y_axes, lam, _eval, kind="model_saddle", c0=c0, c1=c1)


def constant_potential(value: float, dim: int, x_axes=(0,), lam: float = 0.5) -> PotentialSpec:
    """V identically equal to ``value`` (no saddle geometry)."""
    x_axes = tuple(int(a) for a in x_axes)
    y_axes = tuple(a for a in range(dim) if a not in x_axes)

    def _eval(pts: NDArray) -> NDArray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.full(pts.shape[0], float(value))

    return PotentialSpec(dim, x_axes, y_axes, lam, _eval, kind="constant", c0=value, c1=value)


def expression_potential(
    expr: str,
    dim: int,
    x_axes,
    lam: float = 0.5,
    sample_radius: float = 20.0,
    n_samples: int = 20001,
) -> PotentialSpec:
    """Potential from a numpy expression in z0, z1 (e.g. "1 + z0**2/(1+abs(z0))").

    c0 and c1 are estimated by dense sampling over a box of the given radius;
    the estimates carry the sampling resolution as their tolerance.
    """
    x_axes = tuple(int(a) for a in x_axes)
    y_axes = tuple(a for a in range(dim) if a not in x_axes)

    def _eval(pts: NDArray) -> NDArray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        names = {f"z{k}": pts[:, k] for k in range(pts.shape[1])}
        names["np"] = np
        names["abs"] = np.abs
        out = eval(expr, {"__builtins__": {}}, names)  # restricted namespace
        return np.broadcast_to(np.asarray(out, dtype=float), (pts.shape[0],)).copy()

    if dim == 1:
        pts = np.linspace(-sample_radius, sample_radius, n_samples)[:, None]
    else:
        side = int(math.isqrt(n_samples))
        ax = np.linspace(-sample_radius, sample_radius, side)
        xx, yy = np.meshgrid(ax, ax, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
    vals = _eval(pts)
    c0 = float(np.min(vals))
    on_x = pts.copy()
    for ax_i in y_axes:
        on_x[:, ax_i] = 0.0
    c1 = float(np.max(_eval(on_x)))
    return PotentialSpec(dim, x_axes, y_axes, lam, _eval, kind="expression", c0=c0, c1=max(c1, c0))


# ---------------------------------------------------------------------------
# direction sampling helpers
# ---------------------------------------------------------------------------

def _subspace_sphere(dim: int, axes: tuple[int, ...], radius: float, n: int) -> NDArray:
    """Points on the sphere of the given radius inside the axis subspace."""
    if len(axes) == 0:
        return np.zeros((0, dim))
    if len(axes) == 1:
        pts = np.zeros((2, dim))
        pts[0, axes[0]] = radius
        pts[1, axes[0]] = -radius
        return pts
    angles = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    pts = np.zeros((n, dim))
    pts[:, axes[0]] = radius * np.cos(angles)
    pts[:, axes[1]] = radius * np.sin(angles)
    return pts


def _all_directions(dim: int, n: int) -> NDArray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    angles = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return np.column_stack([np.cos(angles), np.sin(angles)])


# ---------------------------------------------------------------------------
# checkers
# ---------------------------------------------------------------------------

@dataclass
class V1Report:
    radii: list
    sup_on_x_spheres: list
    cone_inf: Optional[float]
    margin: float
    passed: bool
    inconclusive: bool

    def to_dict(self) -> dict:
        return {
            "radii": self.radii,
            "sup_on_x_spheres": self.sup_on_x_spheres,
            "cone_inf": self.cone_inf,
            "margin": self.margin,
            "passed": self.passed,
            "inconclusive": self.inconclusive,
        }


def check_V1(
    spec: PotentialSpec,
    radii=(1.0, 2.0, 4.0, 8.0, 16.0),
    samples_per_sphere: int = 64,
    cone_directions: int = 256,
    cone_radii: int = 48,
    box_radius: float = 32.0,
    margin: float = 1e-9,
) -> V1Report:
    """Sampled check of the saddle geometry.

    Computes sup V over spheres in X for the radius schedule, a sampled inf
    of V over the cone Y_lambda inside the box, and passes when the tail of
    the sup sequence undercuts the cone infimum by the margin.  Empty cones
    (no Y axes, or no cone samples in the box) are reported inconclusive.
    """
    sups = []
    for r in radii:
        pts = _subspace_sphere(spec.dim, spec.x_axes, float(r), samples_per_sphere)
        if pts.shape[0] == 0:
            return V1Report(list(radii), [], None, margin, False, True)
        sups.append(float(np.max(spec.evaluate(pts))))

    dirs = _all_directions(spec.dim, cone_directions)
    radii_grid = np.geomspace(1e-3, box_radius, cone_radii)
    pts = (dirs[None, :, :] * radii_grid[:, None, None]).reshape(-1, spec.dim)
    mask = spec.in_cone(pts)
    if not np.any(mask):
        return V1Report(list(radii), sups, None, margin, False, True)
    cone_inf = float(np.min(spec.evaluate(pts[mask])))

    tail = min(sups[-2:]) if len(sups) >= 2 else sups[-1]
    passed = tail < cone_inf - margin
    return V1Report(list(radii), sups, cone_inf, margin, bool(passed), False)


@dataclass
class V2Report:
    max_value: float
    max_gradient: float
    max_second: float
    value_bounded: bool
    gradient_bounded: bool
    second_bounded: bool

    def to_dict(self) -> dict:
        return {
            "max_value": self.max_value,
            "max_gradient": self.max_gradient,
            "max_second": self.max_second,
            "value_bounded": self.value_bounded,
            "gradient_bounded": self.gradient_bounded,
            "second_bounded": self.second_bounded,
        }


def check_V2(
    spec: PotentialSpec,
    sample_radius: float = 10.0,
    n_per_axis: int = 41,
    fd_step: float = 1e-4,
    value_cap: float = 1e6,
    derivative_cap: float = 1e6,
) -> V2Report:
    """Finite-difference boundedness probe for V and its first two derivatives.

    Central differences with the given step over a sample box; maxima are
    compared against configurable caps.  A kink shows up as a second
    difference growing like 1/fd_step.
    """
    ax = np.linspace(-sample_radius, sample_radius, n_per_axis)
    if spec.dim == 1:
        pts = ax[:, None]
    else:
        xx, yy = np.meshgrid(ax, ax, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
    v0 = spec.evaluate(pts)
    max_val = float(np.max(np.abs(v0)))
    max_grad = 0.0
    max_second = 0.0
    eye = np.eye(spec.dim)
    for i in range(spec.dim):
        vp = spec.evaluate(pts + fd_step * eye[i])
        vm = spec.evaluate(pts - fd_step * eye[i])
        max_grad = max(max_grad, float(np.max(np.abs(vp - vm))) / (2 * fd_step))
        max_second = max(max_second, float(np.max(np.abs(vp + vm - 2 * v0))) / fd_step**2)
        for j in range(i + 1, spec.dim):
            vpp = spec.evaluate(pts + fd_step * (eye[i] + eye[j]))
            vpm = spec.evaluate(pts + fd_step * (eye[i] - eye[j]))
            vmp = spec.evaluate(pts - fd_step * (eye[i] - eye[j]))
            vmm = spec.evaluate(pts - fd_step * (eye[i] + eye[j]))
            mixed = np.abs(vpp - vpm - vmp + vmm) / (4 * fd_step**2)
            max_second = max(max_second, float(np.max(mixed)))
    return V2Report(
        max_value=max_val,
        max_gradient=max_grad,
        max_second=max_second,
        value_bounded=max_val <= value_cap,
        gradient_bounded=max_grad <= derivative_cap,
        second_bounded=max_second <= derivative_cap,
    )


@dataclass
class V4Report:
    v_at_origin: float
    m_v0: float
    m_c0: float
    ineq1_m_based: bool
    ineq1_log2_based: bool
    ineq2: bool
    joint_feasible: bool
    conflict_under_gausson_level: bool

    def to_dict(self) -> dict:
        return {
            "v_at_origin": self.v_at_origin,
            "m_v0": self.m_v0,
            "m_c0": self.m_c0,
            "ineq1_m_based": self.ineq1_m_based,
            "ineq1_log2_based": self.ineq1_log2_based,
            "ineq2": self.ineq2,
            "joint_feasible": self.joint_feasible,
            "conflict_under_gausson_level": self.conflict_under_gausson_level,
        }


def check_V4(spec: PotentialSpec, N: int, v_at_origin: Optional[float] = None) -> V4Report:
    """Evaluate the two level inequalities tying V(0) and c1 to the ground level.

    Inequality 1 asks m(V(0)) >= 2 m(c0); with the closed-form level this is
    equivalent to V(0) >= c0 + log 2, and both routes are evaluated and
    reported.  Inequality 2 is c1 <= c0 + (3/10) c2.  Under the closed-form
    level and V(0) <= c1 the two are mutually exclusive (0.3 c2 < log 2);
    that structural conflict is surfaced instead of being resolved silently.
    """
    if N not in (1, 2):
        raise ValueError(f"N must be 1 or 2, got {N}")
    v0 = float(v_at_origin if v_at_origin is not None else np.asarray(
        spec.evaluate(np.zeros((1, spec.dim)))).ravel()[0])
    m_v0 = m_closed_form(v0, N) if v0 > -1.0 else float("nan")
    m_c0 = m_closed_form(spec.c0, N)
    ineq1_m = bool(v0 > -1.0 and m_v0 >= 2.0 * m_c0)
    ineq1_log2 = bool(v0 >= spec.c0 + math.log(2.0))
    ineq2 = bool(spec.c1 <= spec.c0 + 0.3 * spec.c2)
    conflict = bool(v0 <= spec.c1 and 0.3 * spec.c2 < math.log(2.0))
    return V4Report(
        v_at_origin=v0,
        m_v0=m_v0,
        m_c0=m_c0,
        ineq1_m_based=ineq1_m,
        ineq1_log2_based=ineq1_log2,
        ineq2=ineq2,
        joint_feasible=ineq1_m and ineq2,
        conflict_under_gausson_level=conflict,
    )


@dataclass
class V3Report:
    suspects: list

    def to_dict(self) -> dict:
        return {"suspects": self.suspects}


def v3_diagnostic(
    spec: PotentialSpec,
    n_directions: int = 16,
    radii=None,
    tail_fraction: float = 0.5,
    grad_tol: float = 1e-2,
    flat_tol: float = 1e-2,
    fd_step: float = 1e-4,
) -> V3Report:
    """ADVISORY probe for Palais-Smale failure directions of V.

    Walks rays to the sampling boundary and lists directions where the
    gradient stays small while V stays nearly constant along the tail.  The
    condition concerns sequences at infinity, so no pass/fail verdict is
    possible from finite samples; the heat-list is all this returns.
    """
    if radii is None:
        radii = np.geomspace(0.5, 64.0, 32)
    radii = np.asarray(radii, dtype=float)
    n_tail = max(2, int(len(radii) * tail_fraction))
    dirs = _all_directions(spec.dim, n_directions)
    eye = np.eye(spec.dim)
    suspects = []
    for d in dirs:
        pts = radii[:, None] * d[None, :]
        vals = np.asarray(spec.evaluate(pts))
        grad_sq = np.zeros(len(radii))
        for i in range(spec.dim):
            vp = spec.evaluate(pts + fd_step * eye[i])
            vm = spec.evaluate(pts - fd_step * eye[i])
            grad_sq += ((vp - vm) / (2 * fd_step)) ** 2
        tail_grad = float(np.max(np.sqrt(grad_sq[-n_tail:])))
        tail_var = float(np.max(vals[-n_tail:]) - np.min(vals[-n_tail:]))
        if tail_grad < grad_tol and tail_var < flat_tol:
            suspects.append(
                {
                    "direction": [float(c) for c in d],
                    "tail_gradient_max": tail_grad,
                    "tail_variation": tail_var,
                }
            )
    return V3Report(suspects=suspects)
