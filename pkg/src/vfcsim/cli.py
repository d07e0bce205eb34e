"""Command-line front end: ``vfc-sim run | sweep | plot``.

Exit codes: 0 ok, 2 missing input file, 3 invalid configuration or
arguments (unknown policy, empty value list, unknown metric).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import BITS_PER_KB, ConfigError, load_config
from .engine import run
from .metrics import SERIES_FIELDS, SUMMARY_FIELDS
from .policies import POLICIES

EXIT_OK, EXIT_MISSING, EXIT_INVALID = 0, 2, 3
SWEEP_COLUMNS = ("param_value", "policy", "seed") + SUMMARY_FIELDS
SWEEP_PARAMS = ("n_tvs", "task_kb", "policy", "seed")

log = logging.getLogger("vfcsim")


class UsageError(Exception):
    pass


def _load(path):
    if not Path(path).is_file():
        raise FileNotFoundError(path)
    return load_config(path)


def _check_policy(name):
    if name.lower() not in POLICIES:
        raise UsageError(f"unknown policy {name!r}; valid: {', '.join(POLICIES)}")
    return name.lower()


def cmd_run(args):
    cfg = _load(args.config)
    if args.seed is not None:
        cfg = cfg.with_overrides(rng_seed=args.seed)
    policy = _check_policy(args.policy)
    metrics = run(cfg, policy)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"policy": policy, "seed": cfg.rng_seed, **metrics.summary(), "violations": metrics.violations}
    (out / "metrics.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    with open(out / "slots.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SERIES_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(metrics.series_rows())
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK


def _parse_value(param, raw):
    if param == "policy":
        return _check_policy(raw)
    try:
        return int(raw) if param in ("n_tvs", "seed") else float(raw)
    except ValueError:
        raise UsageError(f"bad value {raw!r} for {param}") from None


def sweep_jobs(cfg, param, values, policies, seeds):
    """(param_value, policy, seed, config) per row; repetition seeds are base + index."""
    jobs = []
    for val in values:
        for pol in policies if param != "policy" else [val]:
            for i in range(seeds):
                seed = cfg.rng_seed + i
                if param == "n_tvs":
                    c = cfg.with_overrides(n_tvs=val, rng_seed=seed)
                elif param == "task_kb":
                    c = cfg.with_overrides(input_bits=(val * BITS_PER_KB, val * BITS_PER_KB), rng_seed=seed)
                elif param == "seed":
                    seed = int(val) + i
                    c = cfg.with_overrides(rng_seed=seed)
                else:
                    c = cfg.with_overrides(rng_seed=seed)
                jobs.append((val, pol, seed, c))
    return jobs


def cmd_sweep(args):
    cfg = _load(args.config)
    if args.param not in SWEEP_PARAMS:
        raise UsageError(f"unknown sweep parameter {args.param!r}; valid: {', '.join(SWEEP_PARAMS)}")
    values = [v for v in (args.values or "").split(",") if v.strip()]
    if not values:
        raise UsageError("empty value list")
    values = [_parse_value(args.param, v.strip()) for v in values]
    policies = [_check_policy(p.strip()) for p in args.policies.split(",") if p.strip()]
    if not policies and args.param != "policy":
        raise UsageError("empty policy list")
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    jobs = sweep_jobs(cfg, args.param, values, policies, args.seeds)

    def work(job):
        val, pol, seed, c = job
        return (val, pol, seed, run(c, pol).summary())

    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        rows = list(pool.map(work, jobs))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for val, pol, seed, summ in rows:
            w.writerow([val, pol, seed] + [repr(float(summ[k])) for k in SUMMARY_FIELDS])
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def read_sweep(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in SUMMARY_FIELDS:
            r[k] = float(r[k])
        r["seed"] = int(r["seed"])
    return rows


def cmd_plot(args):
    if not Path(args.input).is_file():
        raise FileNotFoundError(args.input)
    metric = args.metric
    if metric not in SUMMARY_FIELDS:
        raise UsageError(f"unknown metric {metric!r}; valid: {', '.join(SUMMARY_FIELDS)}")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    rows = read_sweep(args.input)
    series = {}
    for r in rows:
        series.setdefault(r["policy"], {}).setdefault(r["param_value"], []).append(r[metric])

    def key(v):
        try:
            return (0, float(v), "")
        except ValueError:
            return (1, 0.0, v)

    fig, ax = plt.subplots(figsize=(6, 4))
    for pol, by_val in series.items():
        xs = sorted(by_val, key=key)
        ys = [np.mean(by_val[x]) for x in xs]
        se = [np.std(by_val[x], ddof=1) / np.sqrt(len(by_val[x])) if len(by_val[x]) > 1 else 0.0 for x in xs]
        ax.errorbar(xs, ys, yerr=se, marker="o", capsize=3, label=pol)
    ax.set_xlabel("param_value")
    ax.set_ylabel(metric)
    ax.legend()
    fig.tight_layout()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(args.out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="vfc-sim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one policy and write metrics.json + slots.csv")
    r.add_argument("--config", required=True)
    r.add_argument("--policy", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", default=".", help="output directory")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="one CSV row per (value, policy, seed)")
    s.add_argument("--config", required=True)
    s.add_argument("--param", required=True, help="|".join(SWEEP_PARAMS))
    s.add_argument("--values", required=True, help="comma-separated")
    s.add_argument("--policies", default="jcratoa")
    s.add_argument("--seeds", type=int, default=1)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", default="sweep.csv")
    s.set_defaults(func=cmd_sweep)

    pl = sub.add_parser("plot", help="SVG line plot of a sweep CSV")
    pl.add_argument("--input", required=True)
    pl.add_argument("--metric", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
