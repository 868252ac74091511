"""Batch front end: config ingestion, experiment orchestration, data export.

Subcommands (one per experiment):

    gausson          exact constant-potential solution and its level
    ground-state     Nehari ground state for a configured potential
    check-potential  saddle hypothesis checkers (V1, V2, V4 + advisory V3)
    saddle-cert      level certificate at one eps
    sweep-eps        certificates over an eps list, CSV + JSON output
    barycenter-zero  degree evidence for the barycenter zero

Configuration is a JSON file with blocks grid / potential / split / solver /
sweep / certificate / output; command-line flags override file values.  All
floats are written with 17 significant digits and files are written
atomically (write then rename), so reruns with a fixed seed are byte
identical.  Exit codes: 0 success, 2 config error, 3 numerical
non-convergence, 4 certificate inconclusive.

The environment variable LOGNLS_NUM_THREADS caps the worker threads used to
evaluate independent sweep points; output order is fixed by the input order,
so the thread count never changes the bytes written.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import SplitParams, energy
from .grid import Grid, dump_field
from .minimax import (
    CertificateConfig,
    _odd_points,
    barycenter_zero_finder,
    certificate,
    sweep_eps,
)
from .nehari import SolverConfig, gausson, ground_state, m_closed_form
from .potential import (
    PotentialSpec,
    check_V1,
    check_V2,
    check_V4,
    constant_potential,
    expression_potential,
    model_saddle,
    v3_diagnostic,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INCONCLUSIVE = 4


# ---------------------------------------------------------------------------
# deterministic serialization: every float at 17 significant digits
# ---------------------------------------------------------------------------

def format_float(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def to_json_text(obj, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits and stable key order."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  {json.dumps(str(k))}: {to_json_text(v, indent + 1)}' for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}  {to_json_text(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return '"nan"' if math.isnan(v) else format_float(v)
    return json.dumps(obj)


def atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, bool):
                cells.append("true" if cell else "false")
            elif isinstance(cell, (float, np.floating)):
                cells.append(format_float(float(cell)))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    atomic_write(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

DEFAULT_CONFIG = {
    "grid": {"dim": 2, "half_extent": 7.0, "points_per_axis": 129},
    "potential": {"kind": "model_saddle", "c0": 1.0, "c1": 1.25, "x_axes": [0], "lambda": 0.5},
    "split": {"delta": 0.1, "growth_exponent": 4.0},
    "solver": {"tol": 1e-6, "max_iters": 4000, "backend": "projected_gradient"},
    "sweep": {"eps": [0.4, 0.2, 0.1, 0.05], "seed": 1234},
    "certificate": {
        "h_target": 0.15,
        "solver_half_extent": 10.0,
        "r_schedule": [0.25, 0.5, 1.0, 2.0],
        "theta_radius": 0.5,
        "q_samples": 9,
        "beta_tol": 1e-3,
        "compute_numerical_m": True,
    },
    "output": {"directory": "lognls-out", "formats": ["json", "csv"]},
}


@dataclass
class ConfigError(Exception):
    violations: list[str] = field(default_factory=list)


def merge_config(base: dict, override: dict) -> dict:
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in base.items()}
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key].update(val)
        else:
            out[key] = val
    return out


def validate_config(cfg: dict) -> list[str]:
    """Collect every violated precondition; never stop at the first."""
    problems = []
    g = cfg.get("grid", {})
    if g.get("dim") not in (1, 2):
        problems.append(f"grid.dim must be 1 or 2, got {g.get('dim')}")
    if not (isinstance(g.get("half_extent"), (int, float)) and g.get("half_extent", 0) > 0):
        problems.append(f"grid.half_extent must be positive, got {g.get('half_extent')}")
    if not (isinstance(g.get("points_per_axis"), int) and g.get("points_per_axis", 0) >= 16):
        problems.append(f"grid.points_per_axis must be an integer >= 16, got {g.get('points_per_axis')}")

    p = cfg.get("potential", {})
    kind = p.get("kind")
    if kind not in ("model_saddle", "constant", "expression"):
        problems.append(f"potential.kind must be model_saddle, constant or expression, got {kind}")
    if kind == "model_saddle":
        c0, c1 = p.get("c0"), p.get("c1")
        if not (isinstance(c0, (int, float)) and c0 > -1):
            problems.append(f"potential.c0 must exceed -1, got {c0}")
        if not (isinstance(c1, (int, float)) and isinstance(c0, (int, float)) and c1 > c0):
            problems.append(f"potential.c1 must exceed c0, got c0={c0}, c1={c1}")
    if kind == "constant" and not isinstance(p.get("value", p.get("c0")), (int, float)):
        problems.append("potential.value must be a number for kind=constant")
    if kind == "expression" and not isinstance(p.get("expr"), str):
        problems.append("potential.expr must be a string for kind=expression")
    lam = p.get("lambda", 0.5)
    if not (isinstance(lam, (int, float)) and 0 < lam < 1):
        problems.append(f"potential.lambda must lie in (0,1), got {lam}")
    axes = p.get("x_axes", [0])
    if g.get("dim") in (1, 2) and not all(isinstance(a, int) and 0 <= a < g["dim"] for a in axes):
        problems.append(f"potential.x_axes must index axes of dimension {g.get('dim')}, got {axes}")

    s = cfg.get("split", {})
    delta = s.get("delta", 0.1)
    if not (isinstance(delta, (int, float)) and 0 < delta <= math.exp(-1.5)):
        problems.append(f"split.delta must lie in (0, e^-1.5], got {delta}")
    pexp = s.get("growth_exponent", 4.0)
    if not (isinstance(pexp, (int, float)) and pexp > 2):
        problems.append(f"split.growth_exponent must exceed 2, got {pexp}")

    so = cfg.get("solver", {})
    if not (isinstance(so.get("tol", 1e-8), (int, float)) and so.get("tol", 1e-8) > 0):
        problems.append(f"solver.tol must be positive, got {so.get('tol')}")
    if not (isinstance(so.get("max_iters", 1000), int) and so.get("max_iters", 1000) >= 1):
        problems.append(f"solver.max_iters must be a positive integer, got {so.get('max_iters')}")
    if so.get("backend", "projected_gradient") not in ("projected_gradient", "forward_backward"):
        problems.append(f"solver.backend unknown: {so.get('backend')}")

    sw = cfg.get("sweep", {})
    eps_list = sw.get("eps", [])
    if not all(isinstance(e, (int, float)) and e > 0 for e in eps_list):
        problems.append(f"sweep.eps must be positive numbers, got {eps_list}")
    return problems


def build_potential(cfg: dict) -> PotentialSpec:
    p = cfg["potential"]
    dim = cfg["grid"]["dim"]
    kind = p["kind"]
    lam = float(p.get("lambda", 0.5))
    x_axes = tuple(p.get("x_axes", [0]))
    if kind == "model_saddle":
        return model_saddle(float(p["c0"]), float(p["c1"]), dim, x_axes, lam)
    if kind == "constant":
        return constant_potential(float(p.get("value", p.get("c0", 0.0))), dim, x_axes, lam)
    return expression_potential(p["expr"], dim, x_axes, lam)


def build_split(cfg: dict) -> SplitParams:
    s = cfg.get("split", {})
    return SplitParams(float(s.get("delta", 0.1)), float(s.get("growth_exponent", 4.0)))


def build_solver(cfg: dict) -> SolverConfig:
    s = cfg.get("solver", {})
    return SolverConfig(
        tol=float(s.get("tol", 1e-8)),
        max_iters=int(s.get("max_iters", 50000)),
        backend=s.get("backend", "projected_gradient"),
    )


def build_grid_from_config(cfg: dict) -> Grid:
    g = cfg["grid"]
    return Grid(g["dim"], float(g["half_extent"]), int(g["points_per_axis"]))


def build_certificate_config(cfg: dict) -> CertificateConfig:
    c = cfg.get("certificate", {})
    return CertificateConfig(
        potential=build_potential(cfg),
        params=build_split(cfg),
        h_target=float(c.get("h_target", 0.15)),
        solver_half_extent=float(c.get("solver_half_extent", 10.0)),
        r_schedule=tuple(c.get("r_schedule", (0.25, 0.5, 1.0, 2.0))),
        theta_radius=float(c.get("theta_radius", 0.5)),
        q_samples=int(c.get("q_samples", 9)),
        beta_tol=float(c.get("beta_tol", 1e-3)),
        solver=build_solver(cfg),
        seed=int(cfg.get("sweep", {}).get("seed", 1234)),
        compute_numerical_m=bool(c.get("compute_numerical_m", True)),
    )


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = {k: dict(v) if isinstance(v, dict) else v for k, v in DEFAULT_CONFIG.items()}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = merge_config(cfg, json.load(fh))
    cfg = merge_config(cfg, overrides)
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def ensure_outdir(cfg: dict) -> str:
    outdir = cfg.get("output", {}).get("directory", "lognls-out")
    os.makedirs(outdir, exist_ok=True)
    atomic_write(os.path.join(outdir, "config_resolved.json"), to_json_text(cfg) + "\n")
    return outdir


def parse_potential_flag(text: str) -> dict:
    """--V const:0  or  --V saddle:1,1.25  shorthand."""
    kind, _, rest = text.partition(":")
    if kind in ("const", "constant"):
        return {"kind": "constant", "value": float(rest)}
    if kind in ("saddle", "model_saddle"):
        c0_s, c1_s = rest.split(",")
        return {"kind": "model_saddle", "c0": float(c0_s), "c1": float(c1_s)}
    raise ValueError(f"unrecognized potential shorthand {text!r}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gausson(args) -> int:
    overrides = {"grid": {}}
    if args.N is not None:
        overrides["grid"]["dim"] = args.N
        if args.N == 1:
            overrides["grid"].setdefault("half_extent", 10.0)
            overrides["grid"].setdefault("points_per_axis", 513)
    if args.L is not None:
        overrides["grid"]["half_extent"] = args.L
    if args.n is not None:
        overrides["grid"]["points_per_axis"] = args.n
    cfg = load_config(args.config, overrides)
    grid = build_grid_from_config(cfg)
    m = m_closed_form(args.A, grid.dim)
    u = gausson(grid, args.A)
    outdir = ensure_outdir(cfg)
    dump_field(u, os.path.join(outdir, "gausson_field.txt"))
    print(f"m_closed_form = {m:.6f}")
    print(to_json_text({"A": args.A, "N": grid.dim, "m_closed_form": m}))
    return EXIT_OK


def cmd_ground_state(args) -> int:
    overrides: dict = {}
    if args.V is not None:
        overrides["potential"] = parse_potential_flag(args.V)
    grid_over = {}
    if args.dim is not None:
        grid_over["dim"] = args.dim
    if args.L is not None:
        grid_over["half_extent"] = args.L
    if args.n is not None:
        grid_over["points_per_axis"] = args.n
    if grid_over:
        overrides["grid"] = grid_over
    solver_over = {}
    if args.tol is not None:
        solver_over["tol"] = args.tol
    if args.max_iters is not None:
        solver_over["max_iters"] = args.max_iters
    if args.backend is not None:
        solver_over["backend"] = args.backend
    if solver_over:
        overrides["solver"] = solver_over
    cfg = load_config(args.config, overrides)

    grid = build_grid_from_config(cfg)
    pot = build_potential(cfg)
    params = build_split(cfg)
    solver = build_solver(cfg)
    sol = ground_state(grid, pot, args.eps, params, solver)
    breakdown = energy(sol.field, pot, args.eps, params)

    outdir = ensure_outdir(cfg)
    dump_field(sol.field, os.path.join(outdir, "ground_state_field.txt"))
    result = sol.to_dict()
    result["energy_breakdown"] = breakdown.to_dict()
    if "m_closed_form" in sol.diagnostics:
        result["m_closed_form"] = sol.diagnostics["m_closed_form"]
        result["below_closed_form"] = sol.diagnostics["below_closed_form"]
    atomic_write(os.path.join(outdir, "ground_state.json"), to_json_text(result) + "\n")
    print(to_json_text(result))
    return EXIT_OK if sol.converged else EXIT_NO_CONVERGENCE


def cmd_check_potential(args) -> int:
    cfg = load_config(args.config, {})
    pot = build_potential(cfg)
    report = {
        "potential": pot.describe(),
        "V1": check_V1(pot).to_dict(),
        "V2": check_V2(pot).to_dict(),
        "V4": check_V4(pot, cfg["grid"]["dim"]).to_dict(),
        "V3_advisory": v3_diagnostic(pot).to_dict(),
    }
    outdir = ensure_outdir(cfg)
    atomic_write(os.path.join(outdir, "potential_checks.json"), to_json_text(report) + "\n")
    print(to_json_text(report))
    return EXIT_OK


def cmd_saddle_cert(args) -> int:
    cfg = load_config(args.config, {})
    cert_cfg = build_certificate_config(cfg)
    cert = certificate(args.eps, cert_cfg)
    outdir = ensure_outdir(cfg)
    atomic_write(os.path.join(outdir, f"certificate_eps_{args.eps:g}.json"), to_json_text(cert.to_dict()) + "\n")
    print(to_json_text(cert.to_dict()))
    return EXIT_INCONCLUSIVE if cert.inconclusive else EXIT_OK


CSV_COLUMNS = [
    "eps",
    "m_c0",
    "D_eps",
    "sup_X_J",
    "theta_r",
    "R",
    "sigma",
    "flag_constrained_gap",
    "flag_sup_below_two_m",
    "flag_boundary_radius_found",
    "flag_theta_above_half_gap",
    "flag_sandwich",
]


def cmd_sweep_eps(args) -> int:
    overrides: dict = {}
    if args.eps:
        overrides["sweep"] = {"eps": [float(e) for e in args.eps]}
    cfg = load_config(args.config, overrides)
    cert_cfg = build_certificate_config(cfg)
    eps_list = cfg["sweep"]["eps"]
    outdir = ensure_outdir(cfg)

    workers = max(1, int(os.environ.get("LOGNLS_NUM_THREADS", "1")))
    if eps_list and workers > 1:
        # numerical m(c0) is eps independent: compute once, then fan out
        first = certificate(float(eps_list[0]), cert_cfg)
        warm = replace(cert_cfg, m_c0_numerical=first.m_c0_numerical)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rest = list(pool.map(lambda e: certificate(float(e), warm), eps_list[1:]))
        certs = [first] + rest
    else:
        certs = sweep_eps(eps_list, cert_cfg)

    rows = []
    for cert in certs:
        rows.append(
            [
                cert.eps,
                cert.m_c0,
                cert.D_eps_estimate,
                cert.sup_X_J,
                cert.theta_r_estimate,
                cert.R_used if cert.R_used is not None else math.nan,
                cert.sigma_margin,
                cert.flags["constrained_gap"],
                cert.flags["sup_below_two_m"],
                cert.flags["boundary_radius_found"],
                cert.flags["theta_above_half_gap"],
                cert.flags["sandwich"],
            ]
        )
    formats = set(cfg.get("output", {}).get("formats", ["json", "csv"]))
    if "csv" in formats:
        write_csv(os.path.join(outdir, "sweep_eps.csv"), CSV_COLUMNS, rows)
    if "json" in formats:
        atomic_write(
            os.path.join(outdir, "sweep_eps.json"),
            to_json_text([c.to_dict() for c in certs]) + "\n",
        )
    print(f"wrote {len(rows)} sweep rows to {outdir}")
    return EXIT_OK


def cmd_barycenter_zero(args) -> int:
    cfg = load_config(args.config, {})
    cert_cfg = build_certificate_config(cfg)
    pot = cert_cfg.potential
    eps = args.eps
    path_half = min(
        cert_cfg.max_path_half_extent,
        max(cert_cfg.solver_half_extent, args.R / eps + cert_cfg.path_margin),
    )
    grid = Grid(pot.dim, path_half, _odd_points(path_half, cert_cfg.h_target))
    u0 = gausson(grid, pot.c0)
    res = barycenter_zero_finder(
        grid, pot, eps, cert_cfg.params, u0, R=args.R, interpolate=cert_cfg.interpolate
    )
    outdir = ensure_outdir(cfg)
    atomic_write(os.path.join(outdir, "barycenter_zero.json"), to_json_text(res.to_dict()) + "\n")
    print(to_json_text(res.to_dict()))
    return EXIT_INCONCLUSIVE if res.inconclusive else EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lognls",
        description="Ground states and minimax level certificates for the logarithmic Schrodinger equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gausson", help="exact constant-potential solution and level")
    p.add_argument("--A", type=float, default=0.0)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_gausson)

    p = sub.add_parser("ground-state", help="Nehari ground state")
    p.add_argument("--V", default=None, help="potential shorthand, e.g. const:0 or saddle:1,1.25")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=None, dest="max_iters")
    p.add_argument("--backend", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_ground_state)

    p = sub.add_parser("check-potential", help="V1/V2/V4 checkers plus advisory V3")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_check_potential)

    p = sub.add_parser("saddle-cert", help="level certificate at one eps")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_saddle_cert)

    p = sub.add_parser("sweep-eps", help="certificates over an eps list")
    p.add_argument("--eps", type=float, nargs="*", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_sweep_eps)

    p = sub.add_parser("barycenter-zero", help="degree evidence for the barycenter zero")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_barycenter_zero)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(to_json_text({"error": "config", "violations": err.violations}))
        return EXIT_CONFIG
    except OSError as err:
        print(to_json_text({"error": "output", "message": str(err)}))
        return EXIT_CONFIG
    except (ValueError, AssertionError) as err:
        print(to_json_text({"error": "runtime", "message": str(err)}))
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
