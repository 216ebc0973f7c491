"""Command-line front end: ``analytic``, ``simulate``, ``figure`` and ``plan``.

All commands write CSV (header always present, 6 significant digits). The
simulation commands also write a JSON manifest next to their output; it holds
the only timestamps, so CSVs from identical invocations are byte-identical.

Config files (``--config``) hold one ``key = value`` per line, keys named
like the long flags (``eps-d = 0.1``); ``#`` starts a comment and section
headers are ignored. Flags given on the command line win over file values.

Exit codes: 0 success, 2 usage or config error, 3 too many trials hit the
transmission safety cap.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, analysis
from .ppr import SDConfig, VerifyMode
from .sim import (
    DEFAULT_GRIDS,
    ExperimentConfig,
    figure_scenario,
    grid,
    result_rows,
    run_experiment,
)
from .svgplot import Series, line_plot

HEADER = ["eps_d", "eps_e", "n_max", "mode", "trials", "p_int", "p_int_ci_low",
          "p_int_ci_high", "p_dec", "mean_n", "nu_mean", "seed"]
FIG_HEADER = HEADER + ["delta", "p_int_analytic", "cap_hits"]
ANALYTIC_HEADER = ["eps_d", "eps_e", "n", "n_max", "p_ns", "p_s", "cdf_d", "pmf_d",
                   "cdf_e", "p_dec", "p_int"]
PLAN_HEADER = ["eps_d", "target", "n_max", "achieved_p_dec"]
THREADS_ENV = "RLCSEC_THREADS"


class ConfigError(Exception):
    pass


# -- formatting -----------------------------------------------------------------


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def write_csv(rows: list[dict], header: list[str], dest) -> None:
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(row.get(k)) for k in header])


def csv_text(rows: list[dict], header: list[str]) -> str:
    buf = io.StringIO()
    write_csv(rows, header, buf)
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# -- argument types -----------------------------------------------------------------


def probability(s: str) -> float:
    v = float(s)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{s} is not in [0, 1]")
    return v


def positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{s} must be >= 1")
    return v


def sweep_spec(s: str) -> tuple[str, list[float]]:
    try:
        name, a, b, step = s.split(":")
        values = grid(float(a), float(b), float(step))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME:START:STOP:STEP, got {s!r}")
    if name not in ("eps-d", "n"):
        raise argparse.ArgumentTypeError(f"cannot sweep {name!r}; use eps-d or n")
    return name, values


def grid_spec(s: str) -> list[float]:
    try:
        a, b, step = (float(x) for x in s.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP:STEP, got {s!r}")
    return grid(a, b, step)


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# -- parser ----------------------------------------------------------------------------


def _add_code_flags(p, k_required=False):
    p.add_argument("--k", type=positive_int, required=k_required, default=None if k_required else 20,
                   help="source packets per message")
    p.add_argument("--q", type=int, default=2, help="prime field order")


def _add_sim_flags(p):
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--l", type=positive_int, default=128, help="symbols per packet")
    p.add_argument("--trials", type=positive_int, default=1000)
    p.add_argument("--seed", type=int, help="base seed (required unless --nondeterministic)")
    p.add_argument("--nondeterministic", action="store_true", help="draw a fresh base seed")
    p.add_argument("--threads", type=positive_int, help=f"worker processes (env {THREADS_ENV})")
    p.add_argument("--t-max", type=int, help="max error weight searched per column")
    p.add_argument("--budget", type=positive_int, default=2_000_000, help="candidates per column")
    p.add_argument("--verify", choices=[m.value for m in VerifyMode], default="oracle")
    p.add_argument("--iterate", action="store_true", help="repeat PPR while it promotes rows")
    p.add_argument("--safety-cap", type=positive_int, help="max packets without n_max (default 20K)")
    p.add_argument("--cap-tolerance", type=probability, default=0.01,
                   help="fraction of capped trials tolerated before exit 3")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rlcsec", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form probabilities")
    _add_code_flags(p, k_required=True)
    p.add_argument("--eps-d", type=probability, default=0.1)
    p.add_argument("--eps-e", type=probability)
    p.add_argument("--delta", type=float, help="eps_e = eps_d + delta")
    p.add_argument("--nmax", type=positive_int, help="transmission cap (default: planner)")
    p.add_argument("--target", type=probability, default=0.99, help="planner target when --nmax is absent")
    p.add_argument("--sweep", type=sweep_spec, help="eps-d:START:STOP:STEP or n:START:STOP:STEP")
    p.add_argument("--out", "-o")

    p = sub.add_parser("simulate", help="Monte Carlo intercept/decoding estimates")
    _add_code_flags(p)
    _add_sim_flags(p)
    p.add_argument("--eps-d", type=probability, default=0.1)
    p.add_argument("--eps-e", type=probability)
    p.add_argument("--delta", type=float)
    p.add_argument("--nmax", type=positive_int, help="transmission cap; omit to send until decoded")
    p.add_argument("--plan", type=probability, help="choose n_max with the planner at this target")
    p.add_argument("--mode", choices=["rlc", "rlc+sd", "both"], default="both")
    p.add_argument("--sweep", type=sweep_spec, help="eps-d:START:STOP:STEP")
    p.add_argument("--out", "-o")
    p.add_argument("--manifest", help="manifest path (default: OUT.manifest.json)")

    p = sub.add_parser("figure", help="reproduce one figure's grid as CSV + SVG")
    p.add_argument("which", choices=sorted(DEFAULT_GRIDS))
    _add_code_flags(p)
    _add_sim_flags(p)
    p.add_argument("--eps-d-grid", type=grid_spec, help="START:STOP:STEP")
    p.add_argument("--outdir", default=".")
    p.add_argument("--verbose", "-v", action="store_true")

    p = sub.add_parser("plan", help="smallest n_max reaching a decoding probability")
    _add_code_flags(p)
    p.add_argument("--target", type=probability, default=0.99)
    p.add_argument("--eps-d", type=probability, default=0.1)
    p.add_argument("--sweep", type=sweep_spec, help="eps-d:START:STOP:STEP")
    p.add_argument("--out", "-o")
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def load_config(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"bad config {path}: {e}")
    return {k.replace("-", "_"): v for sec in cp.sections() for k, v in cp[sec].items()}


def _apply_config(sub: argparse.ArgumentParser, conf: dict[str, str]) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in conf.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise ConfigError(f"unknown config key {key!r}")
        if action.nargs == 0:
            if value.lower() not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ConfigError(f"config key {key!r} needs a boolean")
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = value
    sub.set_defaults(**defaults)


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = _subparser(parser, args.command)
        try:
            _apply_config(sub, load_config(args.config))
        except ConfigError as e:
            sub.error(str(e))
        args = parser.parse_args(argv)
    return parser, args


# -- commands ------------------------------------------------------------------------


def _eav_eps(args, eps_d: float) -> float:
    if args.delta is not None:
        return round(eps_d + args.delta, 12)
    return eps_d if args.eps_e is None else args.eps_e


def cmd_analytic(args) -> int:
    q, K = args.q, args.k
    rows = []
    sweep_name, values = args.sweep if args.sweep else ("eps-d", [args.eps_d])
    eps_list = values if sweep_name == "eps-d" else [args.eps_d]
    for eps_d in eps_list:
        eps_e = _eav_eps(args, eps_d)
        if not 0.0 <= eps_e <= 1.0:
            raise ConfigError(f"--delta/--eps-e gives eps_e={eps_e} outside [0, 1]")
        dest = analysis.LinkParams(eps_d, K, q)
        eav = analysis.LinkParams(eps_e, K, q)
        n_max = args.nmax if args.nmax is not None else analysis.plan_nmax(args.target, dest).n_max
        if n_max < K:
            raise ConfigError(f"--nmax {n_max} is below --k {K}")
        ns = [int(n) for n in values] if sweep_name == "n" else [n_max]
        p_dec = analysis.decoding_prob(analysis.LinkParams(eps_d, K, q, n_max))
        p_int = analysis.intercept_prob(dest, eav, n_max)
        for n in ns:
            if n < K:
                raise ConfigError(f"--sweep n starts below K={K}")
            rows.append({
                "eps_d": eps_d, "eps_e": eps_e, "n": n, "n_max": n_max,
                "p_ns": analysis.p_ns(n, K, q),
                "p_s": analysis.p_s(max(n, n_max), n, K, q),
                "cdf_d": analysis.cdf(n, dest), "pmf_d": analysis.pmf(n, dest),
                "cdf_e": analysis.cdf(n, eav), "p_dec": p_dec, "p_int": p_int,
            })
    _emit(csv_text(rows, ANALYTIC_HEADER), args.out)
    return 0


def cmd_plan(args) -> int:
    rows = []
    eps_list = args.sweep[1] if args.sweep else [args.eps_d]
    if args.sweep and args.sweep[0] != "eps-d":
        raise ConfigError("plan can only sweep eps-d")
    for eps_d in eps_list:
        if eps_d >= 1.0:
            raise ConfigError("target unreachable at eps_d = 1")
        plan = analysis.plan_nmax(args.target, analysis.LinkParams(eps_d, args.k, args.q))
        rows.append({"eps_d": eps_d, "target": args.target, "n_max": plan.n_max,
                     "achieved_p_dec": plan.p_dec})
    _emit(csv_text(rows, PLAN_HEADER), args.out)
    return 0


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    if args.nondeterministic:
        return int.from_bytes(os.urandom(8), "little")
    raise ConfigError("--seed is required unless --nondeterministic is given")


def _sd_config(args) -> SDConfig:
    return SDConfig(t_max=args.t_max, candidate_budget=args.budget,
                    verify_mode=VerifyMode(args.verify), iterate=args.iterate)


def _cap_check(results, tolerance: float) -> int:
    worst = max((r.cap_hits / r.config.trials for r in results), default=0.0)
    if worst > tolerance:
        print(f"warning: {worst:.3%} of trials hit the safety cap (tolerance {tolerance:.3%})",
              file=sys.stderr)
        return 3
    return 0


def _manifest(args, seed, started, outputs, extra) -> dict:
    snapshot = {k: (v if not isinstance(v, tuple) else list(v)) for k, v in vars(args).items()}
    return {
        "version": __version__,
        "command": args.command,
        "config": snapshot,
        "base_seed": seed,
        "started": started,
        "finished": _now(),
        "outputs": outputs,
        **extra,
    }


def cmd_simulate(args) -> int:
    started = _now()
    seed = _seed(args)
    if args.sweep and args.sweep[0] != "eps-d":
        raise ConfigError("simulate can only sweep eps-d")
    eps_list = args.sweep[1] if args.sweep else [args.eps_d]
    ppr = _sd_config(args) if args.mode != "rlc" else None
    workers = _threads(args)
    rows, results = [], []
    for eps_d in eps_list:
        n_max = args.nmax
        if args.plan is not None:
            n_max = analysis.plan_nmax(args.plan, analysis.LinkParams(eps_d, args.k, args.q)).n_max
        try:
            cfg = ExperimentConfig(K=args.k, L=args.l, q=args.q, eps_d=eps_d,
                                   eps_e=_eav_eps(args, eps_d), n_max=n_max, ppr=ppr,
                                   trials=args.trials, base_seed=seed, safety_cap=args.safety_cap)
        except ValueError as e:
            raise ConfigError(str(e))
        res = run_experiment(cfg, workers)
        results.append(res)
        rows.extend(r for r in result_rows(res) if args.mode == "both" or r["mode"] == args.mode)
    _emit(csv_text(rows, HEADER), args.out)

    manifest_path = args.manifest or (f"{args.out}.manifest.json" if args.out not in (None, "-") else None)
    if manifest_path:
        extra = {"points": [{"eps_d": r.config.eps_d, "cap_hits": r.cap_hits,
                             "lost_intercepts": r.lost_intercepts, "sd_stats": r.sd_stats}
                            for r in results]}
        Path(manifest_path).write_text(
            json.dumps(_manifest(args, seed, started, [args.out] if args.out else [], extra), indent=2) + "\n")
    return _cap_check(results, args.cap_tolerance)


def _series_plot(rows, group_keys, label_fn, y, analytic=None):
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in group_keys), []).append(r)
    series = []
    for key, rs in groups.items():
        rs = sorted(rs, key=lambda r: r["eps_d"])
        series.append(Series(label_fn(key), [r["eps_d"] for r in rs], [r[y] for r in rs]))
        if analytic and rs[0].get("mode") == "rlc" and rs[0].get(analytic) is not None:
            series.append(Series(label_fn(key[:-1] + ("theory",)), [r["eps_d"] for r in rs],
                                 [r[analytic] for r in rs], dashed=True))
    return series


def cmd_figure(args) -> int:
    started = _now()
    seed = _seed(args)
    workers = _threads(args)
    progress = None
    if args.verbose:
        def progress(cfg):
            print(f"{args.which}: eps_d={cfg.eps_d} eps_e={cfg.eav_epsilon} n_max={cfg.n_max}",
                  file=sys.stderr)
    try:
        panels = figure_scenario(args.which, trials=args.trials, base_seed=seed,
                                 eps_d_grid=args.eps_d_grid, K=args.k, L=args.l, q=args.q,
                                 ppr=_sd_config(args), safety_cap=args.safety_cap,
                                 workers=workers, progress=progress)
    except ValueError as e:
        raise ConfigError(str(e))
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = []
    main = panels["p_int"]
    if args.which == "fig2":
        series = _series_plot(main, ["eps_e", "mode"], lambda k: f"eps_E={k[0]:g} {k[1]}", "p_int", "p_int_analytic")
    elif args.which == "fig3":
        series = _series_plot(main, ["delta", "mode"], lambda k: f"delta={k[0]:g} {k[1]}", "p_int", "p_int_analytic")
    else:
        sd_rows = [r for r in main if r["mode"] == "rlc+sd"]
        series = _series_plot(sd_rows, ["n_max", "delta"], lambda k: f"Nmax={k[0]} delta={k[1]:g}", "p_int")
    plots = {"p_int": line_plot(series, "eps_D", "P_int", f"{args.which}: intercept probability", ylim=(0, 1))}
    if "n_max" in panels:
        rows = panels["n_max"]
        plots["n_max"] = line_plot([Series("N_max (P_dec >= 0.99)", [r["eps_d"] for r in rows],
                                           [r["n_max"] for r in rows])], "eps_D", "N_max", "fig3: planned N_max")
    if "p_dec" in panels:
        rows = panels["p_dec"]
        s = []
        for n_max in sorted({r["n_max"] for r in rows}):
            rs = [r for r in rows if r["n_max"] == n_max]
            s.append(Series(f"Nmax={n_max} sim", [r["eps_d"] for r in rs], [r["p_dec"] for r in rs]))
            s.append(Series(f"Nmax={n_max} theory", [r["eps_d"] for r in rs],
                            [r["p_dec_analytic"] for r in rs], dashed=True))
        plots["p_dec"] = line_plot(s, "eps_D", "P_dec", "fig4: decoding probability", ylim=(0, 1))

    headers = {"p_int": FIG_HEADER, "n_max": ["eps_d", "n_max", "p_dec_analytic"],
               "p_dec": ["eps_d", "n_max", "p_dec", "p_dec_analytic"]}
    for name, rows in panels.items():
        csv_path = outdir / f"{args.which}_{name}.csv"
        svg_path = outdir / f"{args.which}_{name}.svg"
        csv_path.write_text(csv_text(rows, headers[name]))
        svg_path.write_text(plots[name])
        outputs += [str(csv_path), str(svg_path)]
    caps = [r["cap_hits"] / r["trials"] for r in main]
    (outdir / f"{args.which}.manifest.json").write_text(
        json.dumps(_manifest(args, seed, started, outputs, {"sd_config": _jsonable(asdict(_sd_config(args)))}),
                   indent=2) + "\n")
    worst = max(caps, default=0.0)
    if worst > args.cap_tolerance:
        print(f"warning: {worst:.3%} of trials hit the safety cap", file=sys.stderr)
        return 3
    return 0


def _jsonable(d: dict) -> dict:
    return {k: (v.value if hasattr(v, "value") else v) for k, v in d.items()}


COMMANDS = {"analytic": cmd_analytic, "simulate": cmd_simulate, "figure": cmd_figure, "plan": cmd_plan}


def main(argv=None) -> int:
    parser, args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        _subparser(parser, args.command).print_usage(sys.stderr)
        print(f"rlcsec {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
