"""``hyperwave`` command line: one subcommand per pipeline stage.

Exit status is 0 on success, 2 for a verified negative result (genericity
refuted, gap bound failed, no convergence, norm growth over the bound) and
1 for operational errors.
"""
from __future__ import annotations

import argparse
import hashlib
import sys
import time
from pathlib import Path

from .cauchy import initial_from_seed, lifetime_run
from .characteristics import (
    Box,
    connected_components,
    diophantine_profile,
    enumerate_characteristics,
    verify_component_bound,
)
from .config import ConfigError, RunConfig, load_config
from .genericity import build_gamma, certify, nongeneric_measure_estimate
from .operator import assemble_FprimeN, block_gap_fraction, truncated_gap
from .reports import ReportError, dumps, emit_report, envelope, read_artifact, write_artifact, write_manifest
from .solver import scaling_study, solve, transversality

__all__ = ["main", "run_subcommand", "build_parser"]

OK, OPERATIONAL, NEGATIVE = 0, 1, 2


def _hash_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _emit(path, kind, cfg: RunConfig, params: dict, data: dict, t0: float,
          rng_seed: int | None = None) -> dict:
    art = envelope(kind, cfg.hash(), params, data)
    write_artifact(path, art)
    write_manifest(path, cfg.hash(), cfg.rng_seed if rng_seed is None else rng_seed,
                   time.perf_counter() - t0)
    return art


def _certificate(cfg: RunConfig, seed, mode=None, samples=None, rng_seed=None):
    return certify(seed, mode=mode or cfg.genericity_mode, samples=samples or cfg.samples,
                   rng_seed=cfg.rng_seed if rng_seed is None else rng_seed)


def cmd_genericity(args, cfg: RunConfig, t0) -> int:
    # command-line overrides go into the artifact parameters; the hash names the config file
    rng_seed = cfg.rng_seed if args.seed is None else args.seed
    cert = _certificate(cfg, cfg.seed(), args.mode, args.samples, rng_seed)
    _emit(args.out, "genericity", cfg, {"mode": args.mode or cfg.genericity_mode,
                                        "rng_seed": rng_seed},
          cert.to_dict(), t0, rng_seed)
    print(f"generic={cert.generic} fully_verified={cert.fully_verified} -> {args.out}")
    return OK if cert.generic else NEGATIVE


def cmd_charset(args, cfg: RunConfig, t0) -> int:
    seed = cfg.seed()
    box = Box(args.box_n if args.box_n is not None else cfg.n_radius,
              args.box_j if args.box_j is not None else cfg.j_radius)
    cs = enumerate_characteristics(seed, box)
    comp = connected_components(cs, build_gamma(seed))
    check = verify_component_bound(comp)
    prof = diophantine_profile(seed, box)
    data = {"charset": cs.to_dict(), "components": comp.to_dict(), "bound_ok": check.ok,
            "profile": {"q": prof.q, "cprime": prof.cprime,
                        "table": [[N, m, list(x) if x else None] for N, m, x in prof.table],
                        "csv": prof.to_csv()}}
    _emit(args.out, "charset", cfg, {"n_radius": box.n_radius, "j_radius": box.j_radius},
          data, t0)
    print(f"|C| = {len(cs)}, max component {comp.max_size} (B = {comp.bound_B}) -> {args.out}")
    return OK if check.ok else NEGATIVE


def cmd_gap(args, cfg: RunConfig, t0) -> int:
    N = args.N if args.N is not None else cfg.N
    eps = args.eps if args.eps is not None else cfg.epsilon
    seed = cfg.seed(args.delta)
    delta = seed.delta
    op = assemble_FprimeN(seed, N=N, j_radius=cfg.j_radius, H_terms=cfg.load_h_terms())
    rep = truncated_gap(op, delta, eps, N, smallness=cfg.smallness)
    _emit(args.out, "gap", cfg, {"N": N, "delta": delta, "epsilon": eps}, rep.to_dict(), t0)
    print(f"|F'^-1| = {rep.inverse_norm:.4g}, bound {rep.bound:.4g}, pass={rep.passed}")
    return OK if rep.passed else NEGATIVE


def cmd_solve(args, cfg: RunConfig, t0) -> int:
    seed = cfg.seed(args.delta)
    if args.certificate:
        cert_art = read_artifact(args.certificate)
        cert = cert_art["data"]
    else:
        # no certificate given: run the genericity stage inline on the unscaled seed
        cert = _certificate(cfg, cfg.seed()).to_dict()
    cert_hash = _hash_text(dumps(cert))
    params = {"delta": seed.delta, "tol": args.tol or cfg.newton_tol,
              "max_iter": args.max_iter or cfg.max_iter, "precision": args.precision,
              "certificate_hash": cert_hash, "certificate_generic": cert["generic"]}
    if not cert["generic"]:
        _emit(args.out, "solve", cfg, params,
              {"converged": False, "reason": "genericity refuted", "certificate": cert,
               "metadata": {"iterations": 0}, "residual": float("nan"),
               "remainder_norm": float("nan"), "omega": [], "history": []}, t0)
        print("genericity refuted; not solving")
        return NEGATIVE
    art = solve(seed, cfg.load_h_terms(), tol=params["tol"], max_iter=params["max_iter"],
                radius=cfg.lambda_radius, precision=args.precision,
                certificate={"hash": cert_hash, "generic": cert["generic"]})
    _emit(args.out, "solve", cfg, params, art.to_dict(), t0)
    print(f"converged={art.converged} residual={art.residual:.3e} omega={art.omega}")
    return OK if art.converged else NEGATIVE


def cmd_evolve(args, cfg: RunConfig, t0) -> int:
    delta = args.delta if args.delta is not None else max(cfg.amplitudes)
    A = args.A if args.A is not None else cfg.A
    # unit-size data; delta sits in front of the nonlinearity
    seed = cfg.seed(1.0)
    init = initial_from_seed(seed, delta, M=cfg.M, perturbation=cfg.perturbation,
                             rng_seed=cfg.rng_seed, A=A)
    rep = lifetime_run(init, A=A, K=cfg.K, dt=cfg.dt)
    out = Path(args.out)
    write_artifact(out, rep.to_csv())
    write_manifest(out, cfg.hash(), cfg.rng_seed, time.perf_counter() - t0)
    data = rep.to_dict()
    data["rows"] = [list(r) for r in rep.rows]
    data["csv"] = out.name
    _emit(out.with_suffix(".json"), "evolve", cfg, {"delta": delta, "A": A}, data, t0)
    print(f"max excess {rep.max_excess:.3e} (K delta = {cfg.K * delta:.3g}), pass={rep.passed}")
    return OK if rep.passed else NEGATIVE


def cmd_measure(args, cfg: RunConfig, t0) -> int:
    seed = cfg.seed(args.delta)
    data, params = {}, {"kind": args.kind}
    if args.kind == "blockgap":
        eps = args.eps_list or [cfg.epsilon]
        samples = args.samples or cfg.samples
        frac = block_gap_fraction(seed, eps, samples, cfg.rng_seed,
                                  Box(cfg.n_radius, cfg.j_radius))
        data["blockgap"] = [[e, f] for e, f in frac.items()]
        params.update(samples=samples, epsilons=eps)
    elif args.kind == "nongeneric":
        samples = args.samples or cfg.samples
        est = nongeneric_measure_estimate(seed.d, seed.b, seed.p, samples, cfg.rng_seed,
                                          extra_sites=[list(seed.sites)])
        data["nongeneric"] = {"fraction": est.fraction, "violating": est.violating,
                              "samples": est.samples,
                              "config_seed_violates": list(est.extra.values())[0]}
        params.update(samples=samples)
    elif args.kind == "scaling":
        deltas = args.deltas or [1e-2, 5e-3, 2.5e-3]
        data["scaling"] = scaling_study(seed, deltas, cfg.load_h_terms(), tol=cfg.newton_tol,
                                        radius=cfg.lambda_radius)
        params.update(deltas=deltas)
    else:
        deltas = args.deltas or [1e-2, 5e-3, 2.5e-3]
        data["transversality"] = transversality(seed, deltas, cfg.load_h_terms())
        params.update(deltas=deltas)
    _emit(args.out, "measure", cfg, params, data, t0)
    print(f"measure {args.kind} -> {args.out}")
    return OK


def cmd_report(args, t0) -> int:
    rep = emit_report(args.artifacts)
    out = Path(args.out)
    write_artifact(out, rep.text + "\n")
    for name, text in sorted(rep.csvs.items()):
        write_artifact(out.parent / name, text)
    print(rep.text)
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperwave", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def base(name, out_default, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=out_default)
        return p

    p = base("genericity", "certificate.json", "certify conditions (i)-(iii)")
    p.add_argument("--mode", choices=["exhaustive", "sampled"])
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, help="rng seed for sampled mode (default: config)")
    p = base("charset", "charset.json", "characteristics, components, Diophantine profile")
    p.add_argument("--box-n", type=int, help="bound on |n|_1 (default: config n_radius)")
    p.add_argument("--box-j", type=int, help="bound on |j|_inf (default: config j_radius)")
    p = base("gap", "gap.json", "spectral gap of the truncated operator")
    p.add_argument("--N", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--eps", type=float)
    p = base("solve", "solution.json", "Newton / Lyapunov-Schmidt solve")
    p.add_argument("--delta", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--precision", type=int, help="mpmath decimal digits (default float64)")
    p.add_argument("--certificate", help="genericity artifact; computed inline if omitted")
    p = base("evolve", "lifetime.csv", "Cauchy problem lifetime run")
    p.add_argument("--delta", type=float)
    p.add_argument("--A", type=float)
    p = base("measure", "measure.json", "Monte Carlo and scaling studies")
    p.add_argument("--kind", choices=["blockgap", "nongeneric", "scaling", "transversality"],
                   default="blockgap")
    p.add_argument("--delta", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--eps-list", type=float, nargs="+")
    p.add_argument("--deltas", type=float, nargs="+")
    p = sub.add_parser("report", help="cross-linked summary and plot CSVs")
    p.add_argument("artifacts", nargs="+")
    p.add_argument("--out", default="report.txt")
    return ap


_COMMANDS = {"genericity": cmd_genericity, "charset": cmd_charset, "gap": cmd_gap,
             "solve": cmd_solve, "evolve": cmd_evolve, "measure": cmd_measure}


def run_subcommand(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: unknown subcommand or bad flags
        return OK if exc.code == 0 else OPERATIONAL
    t0 = time.perf_counter()
    try:
        if args.command == "report":
            return cmd_report(args, t0)
        cfg = load_config(args.config)
        return _COMMANDS[args.command](args, cfg, t0)
    except (ConfigError, ReportError, OSError, ValueError) as exc:
        print(f"hyperwave {args.command}: error: {exc}", file=sys.stderr)
        return OPERATIONAL
    except Exception as exc:  # anything else is still an operational failure
        print(f"hyperwave {args.command}: internal error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return OPERATIONAL


def main(argv=None) -> int:
    return run_subcommand(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
