"""Command-line front end: ``raidrel {pdl,mttdl,simulate,delay-trace}``.

Every flag that sets a model parameter accepts a comma list; ``--n`` and
``--m`` also accept ranges such as ``1..64``. The sweep is the Cartesian
product of all lists, emitted in a fixed order. Output is CSV with floats in
``%.8e`` form (nine significant digits).

Exit codes: 0 success, 2 bad flags or config, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import math
import sys
from concurrent.futures import ThreadPoolExecutor

from scipy.linalg import LinAlgError

from .config import CONFIG_KEYS, INT_KEYS, ConfigError, RaidConfig, parse_value, read_config_values
from .delay import build_raid5_delay, count_extrema, dde_integrate, pde_rebuild_integrate
from .models import MODEL_TAGS, check_model, model_mttdl, model_pdl
from .montecarlo import simulate

EXIT_USAGE = 2
EXIT_NUMERIC = 3

# flag name -> config key, in sweep order
SWEEP_FLAGS = (("n", "n"), ("m", "m"), ("lambda", "lambda"), ("mu", "mu"), ("p", "p"),
               ("lambda_s", "lambda_s"), ("mu_s", "mu_s"), ("h", "h"), ("t", "t"))
RATE_COLUMNS = ["lambda_per_yr", "mu_per_yr", "p", "lambda_s_per_yr", "mu_s_per_yr"]


def fmt(x) -> str:
    if isinstance(x, int):
        return str(x)
    return f"{x:.8e}"


def expand(key: str, text: str, raw: bool) -> list:
    """Values of one sweep flag: a comma list, with ``a..b`` ranges for N, M."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if key in INT_KEYS and ".." in item:
            lo, _, hi = item.partition("..")
            lo, hi = parse_value(key, lo, raw), parse_value(key, hi, raw)
            if hi < lo:
                raise ConfigError(f"empty range {item!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(parse_value(key, item, raw))
    if not out:
        raise ConfigError(f"no values for --{key}")
    return out


def sweep_configs(args, defaults: dict | None = None) -> list:
    base = dict(defaults or {})
    if args.config:
        base.update(read_config_values(args.config, raw=args.raw_units))
    lists = []
    for flag, key in SWEEP_FLAGS:
        field = CONFIG_KEYS[key]
        text = getattr(args, flag)
        if text is not None:
            lists.append((field, expand(key, text, args.raw_units)))
        elif field in base:
            lists.append((field, [base[field]]))
    fields_ = [f for f, _ in lists]
    if "n_data" not in fields_ or "m_check" not in fields_:
        raise ConfigError("--n and --m are required (on the command line or in --config)")
    return [RaidConfig(**dict(zip(fields_, combo)))
            for combo in itertools.product(*(v for _, v in lists))]


def _params(tag, cfg) -> list:
    return [tag, cfg.n_data, cfg.m_check, cfg.lam, cfg.mu, cfg.p, cfg.lambda_s, cfg.mu_s]


def run_pdl(args, cfgs):
    header = ["model", "N", "M"] + RATE_COLUMNS + ["t_yr", "pdl"]

    def row(cfg):
        return [_params(args.model, cfg) + [cfg.horizon, model_pdl(args.model, cfg)]]
    return header, row


def run_mttdl(args, cfgs):
    header = ["model", "N", "M"] + RATE_COLUMNS + ["h_yr", "mttdl_yr", "variance_yr2", "method"]

    def row(cfg):
        return [_params(args.model, cfg) + [cfg.h, r.mttdl, r.variance, r.method]
                for r in model_mttdl(args.model, cfg, integral=args.integral)]
    return header, row


def run_simulate(args, cfgs):
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    header = (["model", "N", "M"] + RATE_COLUMNS
              + ["h_yr", "t_yr", "trials", "seed", "failures", "pdl_estimate", "stderr",
                 "mttdl_yr", "mttdl_stderr_yr"])

    def row(cfg):
        r = simulate(args.model, cfg, args.trials, args.seed,
                     collect_ttdl=args.collect_ttdl, jobs=args.jobs)
        return [_params(args.model, cfg)
                + [cfg.h, cfg.horizon, args.trials, args.seed, r.failures_by_horizon,
                   r.pdl_estimate, r.pdl_stderr, r.mttdl_estimate, r.mttdl_stderr]]
    return header, row


def delay_trace(tag: str, cfg: RaidConfig, t_end: float, dt: float | None):
    """Rows (t, q0, q1, q2, in_repair): q2 is the FAIL mass, in_repair the mass
    waiting to rejoin (naive delay) or under rebuild."""
    if dt is None:
        dt = cfg.h / 256 if cfg.h > 0 else t_end / 2000
    if tag == "delay-naive":
        traj = dde_integrate(build_raid5_delay(cfg.n_data, cfg.lam, cfg.mu, cfg.h), t_end, dt)
        cols = (traj.probs[:, 0], traj.probs[:, 1], traj.probs[:, 2], traj.aux["in_transit"])
    else:
        if cfg.h <= 0:
            raise ConfigError("delay-rebuild needs --h > 0")
        traj = pde_rebuild_integrate(cfg.n_data, cfg.lam, cfg.mu, cfg.h, t_end, dt)[0]
        cols = (traj.probs[:, 0], traj.probs[:, 1], traj.probs[:, 3], traj.probs[:, 2])
    return traj.times, cols


def cmd_delay_trace(args, out) -> None:
    if args.model not in ("delay-naive", "delay-rebuild"):
        raise ConfigError("delay-trace supports --model delay-naive or delay-rebuild")
    cfgs = sweep_configs(args, defaults={"m_check": 1})
    if len(cfgs) != 1:
        raise ConfigError("delay-trace takes a single parameter set")
    cfg = cfgs[0]
    check_model(args.model, cfg)
    t_end = parse_value("t", args.t_end, args.raw_units)
    dt = None if args.dt is None else parse_value("t", args.dt, args.raw_units)
    times, cols = delay_trace(args.model, cfg, t_end, dt)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["t", "q0", "q1", "q2", "in_repair"])
    for k, t in enumerate(times):
        writer.writerow([fmt(float(t))] + [fmt(float(c[k])) for c in cols])
    if args.report_extrema:
        print(f"q0 extrema: {count_extrema(cols[0])}", file=sys.stderr)


def cmd_table(args, out, runner) -> None:
    cfgs = sweep_configs(args)
    for cfg in cfgs:
        check_model(args.model, cfg)
    header, row = runner(args, cfgs)
    jobs = 1 if runner is run_simulate else args.jobs
    if jobs > 1 and len(cfgs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(row, cfgs))
    else:
        rows = [row(c) for c in cfgs]
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for group in rows:
        for r in group:
            writer.writerow([fmt(x) if isinstance(x, (int, float)) else x for x in r])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="individual", choices=MODEL_TAGS)
    common.add_argument("--n", help="data drives, e.g. 4, 1..64 or 4,8,16")
    common.add_argument("--m", help="check drives, same syntax as --n")
    common.add_argument("--lambda", dest="lambda", help="drive failure rate, e.g. 1/10y")
    common.add_argument("--mu", help="repair rate, e.g. 1/6h")
    common.add_argument("--p", help="probability a service visit damages a drive")
    common.add_argument("--lambda-s", dest="lambda_s", help="sector error rate per drive")
    common.add_argument("--mu-s", dest="mu_s", help="scrub rate")
    common.add_argument("--h", help="repair delay or rebuild time, e.g. 12h")
    common.add_argument("--t", help="deployment horizon, e.g. 5y")
    common.add_argument("--config", help="key = value parameter file")
    common.add_argument("--raw-units", action="store_true",
                        help="take all numbers as given, with no unit conversion")
    common.add_argument("--out", help="write CSV here instead of standard output")
    common.add_argument("--jobs", type=int, default=1, help="worker threads")

    parser = argparse.ArgumentParser(prog="raidrel", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("pdl", parents=[common], help="probability of data loss at --t")
    p = sub.add_parser("mttdl", parents=[common], help="mean time to data loss")
    p.add_argument("--integral", action="store_true",
                   help="also integrate the survival function numerically")
    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--collect-ttdl", action="store_true",
                   help="run every trial to data loss and report the MTTDL")
    p = sub.add_parser("delay-trace", parents=[common], help="delay model trajectory")
    p.set_defaults(model="delay-naive")
    p.add_argument("--t-end", default="2000", help="end of the trace")
    p.add_argument("--dt", help="step (default h/256)")
    p.add_argument("--report-extrema", action="store_true",
                   help="print the number of extrema of q0 to standard error")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        out = open(args.out, "w", newline="") if args.out else sys.stdout
    except OSError as exc:
        print(f"raidrel: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "delay-trace":
            cmd_delay_trace(args, out)
        else:
            runner = {"pdl": run_pdl, "mttdl": run_mttdl, "simulate": run_simulate}[args.command]
            cmd_table(args, out, runner)
    except (ConfigError, OSError) as exc:
        print(f"raidrel: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, LinAlgError, ValueError) as exc:
        print(f"raidrel: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
