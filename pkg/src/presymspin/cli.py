"""Command-line front end: ``presymspin {audit,bmt,conserve,spinorbit}``.

Exit codes: 0 pass, 1 audit or conservation failure, 2 integrator failure,
3 fit failure, 4 bad configuration or arguments.
"""
import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fields
from .config import ConfigError, RunConfig, fmt, to_json
from .dynamics import IntegrationError, convergence_study, effective_coefficients, integrate
from .observables import IllConditionedFit, conservation_report, spin_orbit_family, spin_orbit_fit
from .presymplectic import KernelError, closedness_residual, rank_at

EXIT_OK, EXIT_AUDIT, EXIT_INTEGRATOR, EXIT_FIT, EXIT_USAGE = 0, 1, 2, 3, 4

RANK_EXPECTED = 8
CLOSEDNESS_TOL = 1e-5
MAXWELL_TOL = 1e-6
SLOPE_WINDOW = (1.8, 2.2)
SPIN_ORBIT_RTOL = 0.01

TRAJECTORY_HEADER = ("tau,x,y,z,t,Ix,Iy,Iz,It,Jx,Jy,Jz,Jt,Px,Py,Pz,E,H,"
                     "Jx_am,Jy_am,Jz_am,c1,c2,c3")


@dataclass
class Report:
    command: str
    code: int
    summary: dict
    header: list
    rows: list
    lines: list = field(default_factory=list)  # human-readable stdout lines
    trajectory: object = None


def _cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


def csv_text(header, rows, config):
    echo = "".join(f"# {line}\n" if line else "#\n" for line in config.canonical().splitlines())
    body = "".join(",".join(_cell(v) for v in row) + "\n" for row in rows)
    return echo + ",".join(header) + "\n" + body


def trajectory_rows(traj):
    d = traj.diagnostics
    nan = np.full(len(traj), np.nan)
    cols = [traj.tau, *traj.states.T, *traj.P.T,
            d.get("H", nan), d.get("Jx_am", nan), d.get("Jy_am", nan), d.get("Jz_am", nan),
            d["c1"], d["c2"], d["c3"]]
    return np.column_stack(cols).tolist()


def _sample_states(cfg, rng):
    ex = cfg["experiment"]
    return spin_orbit_family(ex["n_points"], rng, tuple(ex["r_range"]), ex["v_max"])


def cmd_audit(cfg):
    """Rank and closedness of the two-form at seeded random points, plus dF = 0."""
    model = cfg.two_form_model()
    fld = model.field
    rng = np.random.default_rng(cfg["experiment"]["seed"])
    rows, lines, ok_all = [], [], True
    for i, point in enumerate(_sample_states(cfg, rng)):
        try:
            rank = rank_at(model, point)
            closed = closedness_residual(model, point)
            maxwell = fields.check_maxwell(fld, point.X) if fld is not None else 0.0
        except (fields.FieldSingularity, KernelError, ValueError) as exc:
            lines.append(f"point {i}: error {exc}")
            rows.append(["point", i, -1, np.nan, np.nan, False])
            ok_all = False
            continue
        ok = rank == RANK_EXPECTED and closed < CLOSEDNESS_TOL and maxwell < MAXWELL_TOL
        ok_all &= ok
        rows.append(["point", i, rank, closed, maxwell, ok])
        lines.append(f"point {i:3d}  rank {rank}  closedness {closed:.3e}  maxwell {maxwell:.3e}  "
                     f"{'pass' if ok else 'FAIL'}")
    profile = getattr(fld, "profile", None)
    if profile is not None and profile.name == "tabulated":
        direction = np.array([1.0, 0.7, 0.4]) / np.linalg.norm([1.0, 0.7, 0.4])
        for j, r in enumerate(profile.audit_radii()):
            res = fields.check_maxwell(fld, np.append(r * direction, 0.0))
            ok = res < MAXWELL_TOL
            ok_all &= ok
            rows.append(["table", j, RANK_EXPECTED, np.nan, res, ok])
            if not ok:
                lines.append(f"table radius {r:.6g}: maxwell {res:.3e}  FAIL")
    pts = [r for r in rows if r[0] == "point"]
    summary = {
        "passed": bool(ok_all),
        "n_points": len(pts),
        "rank_min": int(min(r[2] for r in pts)) if pts else -1,
        "rank_max": int(max(r[2] for r in pts)) if pts else -1,
        "closedness_max": float(np.nanmax([r[3] for r in pts])) if pts else np.nan,
        "maxwell_max": float(np.nanmax([r[4] for r in rows])) if rows else np.nan,
        "closedness_tol": CLOSEDNESS_TOL,
        "maxwell_tol": MAXWELL_TOL,
    }
    lines.append(f"audit {'PASS' if ok_all else 'FAIL'}")
    return Report("audit", EXIT_OK if ok_all else EXIT_AUDIT, summary,
                  ["kind", "index", "rank", "closedness", "maxwell", "pass"], rows, lines)


def cmd_bmt(cfg):
    """Kernel flow against the linearized flow for both presets."""
    if cfg["field"]["kind"] != "uniform":
        raise ConfigError("bmt needs a uniform field ([field] kind = uniform)")
    start = cfg.start_point()
    integ = cfg["integration"]
    eps_list = cfg["experiment"]["eps_list"]
    rows, lines, summary, ok_all = [], [], {}, True
    for preset in ("souriau", "stora"):
        model = cfg.two_form_model(preset)
        table = convergence_study(model, start, eps_list, horizon=integ.get("horizon"), h=integ["h"])
        ok = SLOPE_WINDOW[0] <= table.slope <= SLOPE_WINDOW[1]
        ok_all &= ok
        for eps, dev in table.rows():
            rows.append([preset, eps, dev, table.slope])
            lines.append(f"{preset:8s} eps {eps:.3e}  deviation {dev:.6e}")
        lines.append(f"{preset:8s} slope {table.slope:.4f}  {'pass' if ok else 'FAIL'}")
        summary[f"{preset}.slope"] = table.slope
        summary[f"{preset}.passed"] = bool(ok)
        summary["horizon"] = table.horizon
        summary["h"] = table.h
    summary = {"passed": bool(ok_all), **summary}
    return Report("bmt", EXIT_OK if ok_all else EXIT_FIT, summary,
                  ["preset", "eps", "deviation", "slope"], rows, lines)


def cmd_conserve(cfg):
    """Kernel flow in a static field and the drift of the energy and angular momentum."""
    model = cfg.two_form_model()
    integ = cfg["integration"]
    traj = integrate("kernel", model, cfg.start_point(), integ["h"], integ["n_steps"],
                     project_every=integ["project_every"])
    fld = model.field if model.variant != "free" else None
    rep = conservation_report(traj, effective_coefficients(model), fld)
    bound = cfg["experiment"]["drift_bound"]
    drifts = [rep.H_drift, *rep.J_drift]
    ok = all(np.isfinite(d) and d < bound for d in drifts)
    names = ["H", "Jx_am", "Jy_am", "Jz_am"]
    rows = [[n, d, bound, bool(np.isfinite(d) and d < bound)] for n, d in zip(names, drifts)]
    lines = [f"{n:6s} drift {d:.3e}  (bound {bound:.1e})" for n, d in zip(names, drifts)]
    lines.append(f"conserve {'PASS' if ok else 'FAIL'}")
    summary = {
        "passed": bool(ok),
        "H0": rep.H0,
        "H_drift": rep.H_drift,
        "Jx_am_drift": float(rep.J_drift[0]),
        "Jy_am_drift": float(rep.J_drift[1]),
        "Jz_am_drift": float(rep.J_drift[2]),
        "max_drift": rep.max_drift,
        "drift_bound": bound,
        "max_constraint_drift": traj.max_drift,
        "n_samples": len(traj),
    }
    return Report("conserve", EXIT_OK if ok else EXIT_AUDIT, summary,
                  ["quantity", "drift", "bound", "pass"], rows, lines, traj)


def cmd_spinorbit(cfg):
    """Spin-orbit coefficient of the energy for the stora and souriau presets."""
    fld = cfg.field_model()
    if getattr(fld, "profile", None) is None:
        raise ConfigError("spinorbit needs a central field ([field] kind = central_electric)")
    ex = cfg["experiment"]
    rng = np.random.default_rng(ex["seed"])
    states = spin_orbit_family(ex["family_size"], rng, tuple(ex["r_range"]), ex["v_max"])
    rows, lines, summary = [], [], {}
    fits = {}
    for preset in ("stora", "souriau"):
        coeffs = cfg.coefficients(preset)
        fit = spin_orbit_fit(coeffs, fld, states, ex["eps_list"])
        fits[preset] = fit
        for eps, c, se in fit.per_eps:
            rows.append([preset, eps, c, se])
        summary[f"{preset}.c"] = fit.c
        summary[f"{preset}.stderr"] = fit.stderr
        summary[f"{preset}.theory"] = fit.theory
        summary[f"{preset}.rel_error"] = fit.rel_error
        lines.append(f"{preset:8s} c {fit.c:.8f}  theory {fit.theory:.8f}  rel.err {fit.rel_error:.2e}")
    m = cfg["model"]
    g = m["g"]
    ratio = fits["stora"].c / fits["souriau"].c
    summary["ratio"] = ratio
    summary["ratio_theory"] = (g - 1.0) / g
    ok = fits["stora"].rel_error < SPIN_ORBIT_RTOL
    lines.append(f"ratio {ratio:.6f}  theory {(g - 1.0) / g:.6f}")
    lines.append(f"spinorbit {'PASS' if ok else 'FAIL'}")
    summary = {"passed": bool(ok), **summary}
    return Report("spinorbit", EXIT_OK if ok else EXIT_FIT, summary,
                  ["preset", "eps", "c", "stderr"], rows, lines)


COMMANDS = {"audit": cmd_audit, "bmt": cmd_bmt, "conserve": cmd_conserve, "spinorbit": cmd_spinorbit}


def write_outputs(report, cfg):
    out = Path(cfg["output"]["directory"])
    out.mkdir(parents=True, exist_ok=True)
    name = report.command
    written = []
    if cfg["output"]["format"] == "csv":
        path = out / f"{name}.csv"
        path.write_text(csv_text(report.header, report.rows, cfg))
    else:
        path = out / f"{name}_table.json"
        records = [dict(zip(report.header, row)) for row in report.rows]
        path.write_text(to_json({"rows": records}))
    written.append(path)
    if report.trajectory is not None:
        path = out / f"{name}_trajectory.csv"
        path.write_text(csv_text(TRAJECTORY_HEADER.split(","), trajectory_rows(report.trajectory), cfg))
        written.append(path)
    summary = {"command": name, "exit_code": report.code, **report.summary}
    summary.update({f"config.{k}": v for k, v in cfg.flat().items()})
    path = out / f"{name}_summary.json"
    path.write_text(to_json(summary))
    written.append(path)
    return written


def run(command, cfg, stream=None):
    """Run one command with a loaded config; returns the exit code."""
    stream = stream or sys.stdout
    try:
        report = COMMANDS[command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"integrator failure: {exc}; reduce [integration] h or the field strength", file=sys.stderr)
        return EXIT_INTEGRATOR
    except fields.FieldSingularity as exc:
        print(f"integrator failure: {exc}; the orbit reached r_min", file=sys.stderr)
        return EXIT_INTEGRATOR
    except IllConditionedFit as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for line in report.lines:
        print(line, file=stream)
    for path in write_outputs(report, cfg):
        print(f"wrote {path}", file=stream)
    return report.code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="presymspin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "audit": "rank and closedness of the two-form at random points",
        "bmt": "weak-field convergence of the kernel flow to the BMT flow",
        "conserve": "energy and angular-momentum drift along the kernel flow",
        "spinorbit": "fit the spin-orbit coefficient of the energy",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", type=Path, help="INI run configuration")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--seed", type=int, help="random seed for sampled states")
        p.add_argument("--format", choices=("csv", "json"), help="table format")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, args.command) if args.config else RunConfig.defaults(args.command)
    except (OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out is not None:
        cfg["output"]["directory"] = str(args.out)
    if args.seed is not None:
        cfg["experiment"]["seed"] = args.seed
    if args.format is not None:
        cfg["output"]["format"] = args.format
    if cfg["output"]["format"] not in ("csv", "json"):
        print("configuration error: [output] format must be csv or json", file=sys.stderr)
        return EXIT_USAGE
    return run(args.command, cfg)


if __name__ == "__main__":
    sys.exit(main())
