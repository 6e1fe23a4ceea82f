"""Command line interface.

Exit codes: 0 on success, 1 for usage or validation errors, 2 for failures while running.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace

from . import experiments as ex
from .config import ConfigError, ExperimentConfig, ExperimentKind, parse_config, validate_config
from .graph import write_graph
from .io import write_manifest, write_table
from .params import ModelParams, ParameterError, compute_thresholds, validate_params

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

COMMANDS = ("phase", "generate", "distance", "scaling", "mu-sweep", "census", "blocks", "perc", "ball-growth")

_KIND = {
    "generate": None,
    "distance": ExperimentKind.DISTANCE_SCALING,
    "scaling": ExperimentKind.DISTANCE_SCALING,
    "mu-sweep": ExperimentKind.MU_SWEEP,
    "census": ExperimentKind.CENSUS,
    "blocks": ExperimentKind.BLOCK_SCAN,
    "perc": ExperimentKind.PERC_CHECK,
    "ball-growth": ExperimentKind.BALL_GROWTH,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    def dflt(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--config", metavar="FILE", default=dflt(None), help="flat key=value config or manifest")
    p.add_argument("--seed", metavar="N", type=int, default=dflt(None), help="run this single seed")
    p.add_argument("--out", metavar="DIR", default=dflt(None), help="output directory")
    p.add_argument("--threads", metavar="N", type=int, default=dflt(1), help="worker threads over seeds")
    p.add_argument("--format", choices=("csv", "json"), default=dflt("csv"), help="table format")


def _float_arg(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinite", "infinity"):
        return math.inf
    return float(t)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="onefpp", description="1-FPP on spatial random graphs")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    ph = sub.add_parser("phase", help="thresholds, eta_0 and phase label")
    _global_flags(ph, suppress=True)
    ph.add_argument("--d", type=int, required=True)
    ph.add_argument("--tau", type=_float_arg, required=True)
    ph.add_argument("--alpha", type=_float_arg, required=True)
    ph.add_argument("--mu", type=_float_arg, required=True)
    ph.add_argument("--beta", type=_float_arg, default=math.inf)
    ph.add_argument("--c-prime", type=_float_arg, default=None)

    helps = {
        "generate": "generate graphs and write them with a summary table",
        "distance": "cost distances for sampled pairs",
        "scaling": "cost distances with scaling fits",
        "mu-sweep": "distance scaling across the mu list on fixed realisations",
        "census": "long-cheap-edge census against the analytic columns",
        "blocks": "good-block check and path-cost certificate",
        "perc": "bond percolation and G_M renormalisation statistics",
        "ball-growth": "cost-ball growth around the root",
    }
    for name in COMMANDS[1:]:
        sp = sub.add_parser(name, help=helps[name])
        _global_flags(sp, suppress=True)
        sp.add_argument("--set", dest="overrides", metavar="KEY=VALUE", action="append", default=[],
                        help="override one config key (repeatable)")
    return parser


def _load(args) -> ExperimentConfig:
    text = ""
    if args.config is not None:
        with open(args.config) as fh:
            text = fh.read()
    lines = text.splitlines()
    for ov in args.overrides:
        if "=" not in ov:
            raise ConfigError(f"override '{ov}' is not KEY=VALUE")
        key = ov.partition("=")[0].strip()
        lines = [ln for ln in lines if ln.partition("=")[0].strip() != key]
        if key == "seeds":
            lines = [ln for ln in lines if ln.partition("=")[0].strip() != "seed"]
        lines.append(ov)
    cfg, _ = parse_config("\n".join(lines))
    if args.seed is not None:
        cfg = cfg.with_seeds([args.seed])
    kind = _KIND[args.command]
    if kind is not None and cfg.experiment != kind:
        cfg = replace(cfg, experiment=kind)
    validate_config(cfg)
    return cfg


def _out_dir(args, default: str) -> str:
    out = args.out if args.out is not None else default
    os.makedirs(out, exist_ok=True)
    return out


def _fmt(x: float) -> str:
    """Twelve significant digits, keeping a decimal point on whole numbers."""
    return repr(float(format(x, ".12g")))


def _run_phase(args) -> int:
    par = ModelParams(d=args.d, tau=args.tau, alpha=args.alpha, mu=args.mu, beta=args.beta, c_prime=args.c_prime)
    validate_params(par)
    rep = compute_thresholds(par)
    print(f"mu_log={_fmt(rep.mu_log)}")
    print(f"mu_pol={_fmt(rep.mu_pol)}")
    print(f"mu_pol_alpha={_fmt(rep.mu_pol_alpha)}")
    print(f"eta_0={_fmt(rep.eta_0)}")
    print(f"explosion_threshold={_fmt(rep.explosion_threshold)}")
    print(f"phase={rep.phase}")
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        row = {"d": par.d, "tau": par.tau, "alpha": par.alpha, "beta": par.beta, "mu": par.mu,
               "mu_log": rep.mu_log, "mu_pol": rep.mu_pol, "mu_pol_alpha": rep.mu_pol_alpha,
               "eta_0": rep.eta_0, "explosion_threshold": rep.explosion_threshold, "phase": str(rep.phase)}
        write_table([row], os.path.join(args.out, "phase"), args.format)
        cfg = ExperimentConfig(d=par.d, tau=par.tau, alpha=par.alpha, mu=par.mu, beta=par.beta,
                               c_prime=par.c_prime)
        write_manifest(args.out, cfg, "phase")
    return EXIT_OK


_RUNNERS = {
    "distance": ex.run_distance_scaling,
    "scaling": ex.run_distance_scaling,
    "mu-sweep": ex.run_mu_sweep,
    "census": ex.run_census,
    "blocks": ex.run_blocks,
    "perc": ex.run_perc,
    "ball-growth": ex.run_ball_growth,
}

_TABLES = {
    "distance": ("samples", "missing"),
    "scaling": ("samples", "fits", "missing"),
    "mu-sweep": ("samples", "fits", "missing"),
    "census": ("census", "census_counts"),
    "blocks": ("blocks", "block_report"),
    "perc": ("perc", "gm"),
    "ball-growth": ("ball_growth", "fits"),
}


_EMPTY_COLUMNS = {
    "missing": ["seed", "radius"],
    "gm": ["seed", "M", "R", "D", "fail_connected", "fail_cross", "fail_diameter", "n_boxes",
           "n_neighbour_pairs", "K", "open_frequency", "one_minus_5eps", "one_minus_20d_eps",
           "largest_cluster", "h_infinity_size"],
}


def _run_experiment(args, cfg: ExperimentConfig) -> int:
    out = _out_dir(args, "onefpp_out")
    threads = max(1, args.threads)
    write_manifest(out, cfg, args.command)
    if args.command == "generate":
        res = ex.run_generate(cfg, threads)
        for seed, g in zip(cfg.seeds, res["graphs"]):
            write_graph(g, os.path.join(out, f"graph_seed{seed}.txt"))
        write_table(res["summary"], os.path.join(out, "summary"), args.format)
        print(f"wrote {len(cfg.seeds)} graphs to {out}")
        return EXIT_OK
    res = _RUNNERS[args.command](cfg, threads)
    for name in _TABLES[args.command]:
        write_table(res[name], os.path.join(out, name), args.format, _EMPTY_COLUMNS.get(name) if not res[name] else None)
    print(f"wrote {', '.join(_TABLES[args.command])} to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if args.threads is not None and args.threads < 1:
        print("onefpp: error: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "phase":
            return _run_phase(args)
        cfg = _load(args)
    except (ConfigError, ParameterError, ValueError, OSError) as exc:
        print(f"onefpp: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _run_experiment(args, cfg)
    except Exception as exc:  # noqa: BLE001 - any failure while running maps to exit 2
        print(f"onefpp: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
