"""Command line entry point.

Scenario content comes from a YAML file (``--config``); the only other
options are ``--seed``, ``--out`` and ``--threads``.  The output directory
defaults to ``$FRACHEAT_OUT`` and then to ``./fracheat_out``.

Exit codes: 0 all pass, 1 any check failed, 2 configuration error,
3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import traceback
import warnings
from pathlib import Path

import numpy as np

from . import report
from .config import ConfigError, ScenarioConfig, parse_config
from .duhamel import bound_reports, solve
from .kernels import (
    BaseKernel, FracKernel, SampleSpec, XiProfile, grad_bound_report, two_sided_report,
)
from .subordinator import SubordinatorSpec, density, laplace_report
from .suite import ACCEPTANCE_CHECKS, build_registry, derived_seed, run_suite, scenario_kato_tables

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3
ENV_OUT = "FRACHEAT_OUT"


def _out_dir(args, cfg: ScenarioConfig) -> Path:
    return Path(args.out or cfg.report.out or os.environ.get(ENV_OUT) or "fracheat_out")


def _seed(args, cfg: ScenarioConfig) -> int:
    return cfg.report.seed if args.seed is None else args.seed


def _kernel(cfg: ScenarioConfig) -> FracKernel:
    return FracKernel(BaseKernel(cfg.build_domain()), SubordinatorSpec(cfg.alpha))


def _say(msg: str):
    print(msg, flush=True)


# ---------------------------------------------------------------- subcommands

def cmd_subcheck(cfg, args) -> int:
    spec = SubordinatorSpec(cfg.alpha)
    rep = laplace_report(spec, (0.25, 1.0, 4.0), (0.1, 0.5, 1.0, 2.0, 5.0, 10.0))
    out = _out_dir(args, cfg)
    report.write_table(out / "subordinator.csv", ("t", "lam", "value", "exact", "rel_error"),
                       zip(rep["t"], rep["lam"], rep["value"], rep["exact"], rep["rel_error"]))
    s = np.logspace(-3, 3, 121)
    rows = [(t, si, v) for t in (0.5, 1.0, 2.0) for si, v in zip(s, density(spec, t, s))]
    report.write_table(out / "density.csv", ("t", "s", "density"), rows)
    _say(f"Laplace identity max relative error {rep['max_rel_error']:.3e} ({'pass' if rep['ok'] else 'fail'})")
    return EXIT_OK if rep["ok"] else EXIT_FAIL


def cmd_kernel(cfg, args) -> int:
    k = _kernel(cfg)
    prof = XiProfile.for_kernel(k)
    dom = k.domain
    e1 = np.eye(dom.d)[0]
    span = dom.extent / 2 if dom.is_torus else dom.extent
    r = np.linspace(0.0, span, 201)
    rows = []
    for t in (0.01, 0.1, 1.0):
        p = k.value(t, np.zeros(dom.d), r[:, None] * e1)
        xi = prof(t, r)
        rows += list(zip(np.full(r.size, t), r, p, xi, p / xi))
    out = _out_dir(args, cfg)
    report.write_table(out / "kernel_profile.csv", ("t", "r", "kernel", "profile", "ratio"), rows)
    res = run_suite(["scenario_kernel"], _seed(args, cfg), 1, build_registry(cfg))
    report.write_key_values(out / "kernel.txt", res[0].measured)
    _say(report.console_line(res[0]))
    return EXIT_OK if res[0].passed else EXIT_FAIL


def cmd_bounds(cfg, args) -> int:
    k = _kernel(cfg)
    seed = derived_seed(_seed(args, cfg), "bounds")
    sample = SampleSpec(n=cfg.report.sample_size, seed=seed)
    two = two_sided_report(k, sample=sample)
    items = {"c_low": two["c_low"], "c_high": two["c_high"], "two_sided_drift": two["drift"]}
    ok = two["ok"]
    for order in (1, 2):
        g = grad_bound_report(k, order, sample=sample)
        items[f"grad{order}_constant"] = g["constant"]
        items[f"grad{order}_drift"] = g["drift"]
        ok = ok and g["ok"]
    report.write_key_values(_out_dir(args, cfg) / "bounds.txt", items)
    for key, v in items.items():
        _say(f"{key} = {v:.6g}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_kato(cfg, args) -> int:
    tables = scenario_kato_tables(cfg)
    out = _out_dir(args, cfg)
    report.write_decay(tables, out / "kato.csv")
    items = {}
    for name, tab in tables.items():
        items[f"{name}.rate"] = tab.rate
        items[f"{name}.r2"] = tab.r2
        items[f"{name}.member"] = bool(tab.member)
        _say(f"{name}: rate {tab.rate:.4f}, R^2 {tab.r2:.4f}, member {tab.member}")
    report.write_key_values(out / "kato.txt", items)
    if not tables:
        _say("no perturbation configured")
    failed = cfg.kato.assert_membership and not all(t.member for t in tables.values())
    return EXIT_FAIL if failed else EXIT_OK


def cmd_solve(cfg, args) -> int:
    if cfg.domain.kind != "torus":
        raise ConfigError(["solve: the Duhamel engine runs on the torus only (domain.kind: torus)"])
    k = _kernel(cfg)
    fld = solve(k, cfg.build_drift(), cfg.build_potential(), cfg.solve.s, np.array([cfg.source_point()]),
                cfg.solve.t_max, cfg.solve_config())
    out = _out_dir(args, cfg)
    report.write_field(fld, out / "field.csv")
    items = {**fld.summary(), **{k_: v for k_, v in bound_reports(fld, k).items()}}
    report.write_key_values(out / "solve.txt", items)
    for key, v in items.items():
        _say(f"{key} = {report.fmt(v)}")
    return EXIT_OK


def cmd_verify(cfg, args) -> int:
    names = list(ACCEPTANCE_CHECKS) if cfg.report.checks is None else list(cfg.report.checks)
    if not names:
        warnings.warn("no checks configured; nothing to verify", stacklevel=1)
    results = run_suite(names, _seed(args, cfg), args.threads, build_registry(cfg))
    report.write_results(results, _out_dir(args, cfg))
    for r in results:
        _say(report.console_line(r))
    failed = [r.name for r in results if not r.passed]
    _say(f"{len(results) - len(failed)}/{len(results)} checks passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    return EXIT_FAIL if failed else EXIT_OK


def cmd_report(cfg, args) -> int:
    path = _out_dir(args, cfg) / "results.csv"
    if not path.is_file():
        raise ConfigError([f"report: no results at {path}; run 'verify' first"])
    status: dict[str, str] = {}
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            status.setdefault(row["check"], row["status"])
    for name, st in status.items():
        _say(f"{st.upper():8s} {name}")
    return EXIT_FAIL if "fail" in status.values() else EXIT_OK


COMMANDS = {
    "subcheck": (cmd_subcheck, "subordinator Laplace identity and density table"),
    "kernel": (cmd_kernel, "kernel profile export and normalization check"),
    "bounds": (cmd_bounds, "two-sided and gradient bound constants"),
    "kato": (cmd_kato, "K(eps) decay tables for the configured perturbation"),
    "solve": (cmd_solve, "perturbed kernel by Picard iteration; field export"),
    "verify": (cmd_verify, "run the configured checks and write results"),
    "report": (cmd_report, "summarize an existing results file"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario YAML file (defaults apply when omitted)")
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides report.seed)")
    common.add_argument("--out", default=None, help=f"output directory (default ${ENV_OUT} or ./fracheat_out)")
    common.add_argument("--threads", type=int, default=1, help="maximum concurrent checks")
    parser = argparse.ArgumentParser(prog="fracheat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = parse_config(args.config) if args.config else ScenarioConfig()
        if args.threads < 1:
            raise ConfigError(["--threads must be at least 1"])
        return COMMANDS[args.command][0](cfg, args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
