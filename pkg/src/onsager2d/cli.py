"""Command line: bifurcations, solve, diagram, verify, energy.

Exit status 0 on success, 1 when an oracle/acceptance bound fails or output
cannot be written, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (density_constraints, euler_lagrange_residual, free_energy,
                       recover_density, spectrum, trivial_free_energy)
from .continuation import asymptotic_predictor, trace_diagram
from .io import (ConfigError, RunConfig, dump_config, fmt, kernel_from_config, load_config,
                 read_branches, snapshot, validate, write_branches, write_json)
from .kernel import bifurcation_points, classify_criticality, lambda_zero
from .plotting import plot_diagram
from .solver import multistart
from .verify import run_all

log = logging.getLogger("onsager2d")

# flag dest -> RunConfig field
FLAG_FIELDS = {
    "kernel": "kernel", "kernel_file": "kernel_file", "P": "P", "M": "M", "N": "N",
    "lam": "lam", "starts": "starts", "radius": "radius", "seed": "seed", "tol": "tol",
    "cluster_radius": "cluster_radius", "lambda_max": "lambda_max", "branches": "branches",
    "ds": "ds", "t0": "t0", "max_steps": "max_steps", "modes": "modes", "trials": "trials",
    "branch_file": "branch_file", "out": "output",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--out", help="output directory (default $ONSAGER2D_OUTPUT or ./onsager2d-out)")
    common.add_argument("--kernel", choices=["onsager", "coefficients", "samples"])
    common.add_argument("--kernel-file", dest="kernel_file", help="JSON kernel file")
    common.add_argument("--P", type=int, help="Onsager truncation order")
    common.add_argument("--M", type=int, help="number of cosine modes")
    common.add_argument("--N", type=int, help="quadrature grid size (0 = auto)")
    common.add_argument("--tol", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="onsager2d", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bifurcations", parents=[common], help="bifurcation points and criticality")
    b.add_argument("--modes", type=int)

    s = sub.add_parser("solve", parents=[common], help="multistart solve at one lambda")
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--starts", type=int)
    s.add_argument("--radius", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--cluster-radius", dest="cluster_radius", type=float)

    d = sub.add_parser("diagram", parents=[common], help="trace branches and draw the diagram")
    d.add_argument("--lambda-max", dest="lambda_max", type=float)
    d.add_argument("--branches", type=int)
    d.add_argument("--ds", type=float)
    d.add_argument("--t0", type=float)
    d.add_argument("--max-steps", dest="max_steps", type=int)

    v = sub.add_parser("verify", parents=[common], help="run the brute-force oracles")
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int)

    e = sub.add_parser("energy", parents=[common], help="free energy along a branch file")
    e.add_argument("--branch-file", dest="branch_file")
    return p


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for dest, name in FLAG_FIELDS.items():
        val = getattr(args, dest, None)
        if val is not None:
            setattr(cfg, name, val)
    return validate(cfg)


def cmd_bifurcations(cfg: RunConfig, out: Path) -> int:
    k = kernel_from_config(cfg)
    pts = bifurcation_points(k)[: cfg.modes]
    rows = []
    for m, lm in pts:
        crit = classify_criticality(k, m).value
        pred = asymptotic_predictor(k, m)
        rows.append([str(m), fmt(lm), fmt(k.k(m)), fmt(pred.gamma), crit, fmt(pred.C)])
    lines = ["mode,lambda_m,k_m,gamma_m,criticality,C_m"] + [",".join(r) for r in rows]
    (out / "bifurcations.csv").write_text("\n".join(lines) + "\n")
    print(f"kernel {k.label}: lambda_0 = {lambda_zero(k):.12g} (tail bound {k.tail_bound():.3e})")
    print(f"{'m':>3} {'lambda_m':>20} {'criticality':>14} {'C_m':>14}")
    for r in rows:
        print(f"{r[0]:>3} {float(r[1]):>20.12f} {r[4]:>14} {float(r[5]):>14.6g}")
    return 0


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    k = kernel_from_config(cfg)
    sset = multistart(cfg.lam, k, cfg.starts, cfg.radius, cfg.seed, M=cfg.M, N=cfg.grid,
                      tol=cfg.tol, cluster_radius=cfg.cluster_radius)
    sols = []
    for c in sset.clusters:
        rep = spectrum(c.representative, cfg.lam, k, cfg.grid)
        sols.append(snapshot(c.representative, cfg.lam, c.residual_h1, hits=c.hits,
                             min_eig=fmt(rep.min_eig), stability=rep.status))
    body = {"lambda": fmt(cfg.lam), "kernel": k.label, "starts": sset.n_starts,
            "failures": sset.failures, "cluster_radius": fmt(sset.radius),
            "max_residual": fmt(max(sset.residuals, default=0.0)), "solutions": sols}
    write_json(body, out / "solutions.json")
    print(sset.summary())
    return 0


def cmd_diagram(cfg: RunConfig, out: Path) -> int:
    k = kernel_from_config(cfg)
    branches = trace_diagram(k, cfg.lambda_max, cfg.branches, M=cfg.M, N=cfg.grid, ds=cfg.ds,
                             t0=cfg.t0, tol=cfg.tol, max_steps=cfg.max_steps)
    write_branches(branches, out / "branches.csv", cfg.M)
    plot_diagram(branches, out / "diagram.svg", title=f"{k.label}, M={cfg.M}")
    for b in branches:
        st = [p.stable for p in b.points]
        print(f"{b.id:>10}: {len(b.points):5d} points, lambda in [{b.lambdas.min():.6g}, "
              f"{b.lambdas.max():.6g}], stable {sum(st)}/{len(st)}, end={b.termination}")
    return 0


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    reports = run_all(seed=cfg.seed, trials=cfg.trials)
    body = [{"name": r.name, "max_abs_error": fmt(r.max_abs_error), "bound": fmt(r.bound),
             "samples": r.samples, "passed": r.passed} for r in reports]
    write_json(body, out / "verify.json")
    for r in reports:
        print(r.line())
    return 0 if all(r.passed for r in reports) else 1


def cmd_energy(cfg: RunConfig, out: Path) -> int:
    if not cfg.branch_file:
        raise ConfigError("energy.branch_file", "required")
    k = kernel_from_config(cfg)
    rows = read_branches(cfg.branch_file)
    lines = ["branch_id,mode,lambda,t,energy,trivial_energy,el_residual,mass_error,min_eig,stable"]
    for r in rows:
        f = recover_density(r.field, r.lam, k, cfg.grid)
        E = free_energy(f, r.lam, k)
        el = euler_lagrange_residual(f, r.lam, k)
        mass = density_constraints(f)["mass"]
        mode = "trivial" if r.mode is None else str(r.mode)
        lines.append(",".join([r.branch_id, mode, fmt(r.lam), fmt(r.t), fmt(E),
                               fmt(trivial_free_energy(r.lam, k)), fmt(el), fmt(mass),
                               fmt(r.min_eig), str(int(r.stable))]))
    (out / "energy.csv").write_text("\n".join(lines) + "\n")
    print(f"{len(rows)} rows written to {out / 'energy.csv'}")
    return 0


COMMANDS = {"bifurcations": cmd_bifurcations, "solve": cmd_solve, "diagram": cmd_diagram,
            "verify": cmd_verify, "energy": cmd_energy}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = cfg.output_dir()
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.ini").write_text(dump_config(cfg))
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
