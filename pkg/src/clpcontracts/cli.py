"""Experiment harness.

Subcommands: solve, sweep, efficiency, mismatch, simulate, audit.  Report
commands write CSV (plus a companion PNG figure unless --no-figures) and every
delimited output gets a run-manifest JSON so any figure datum is reproducible
from config digest + seed + artifact version alone.

Exit codes: 0 success, 2 config/parse error, 3 infeasible, 4 audit failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .benchmarks import linear_pricing, solve_ctwt
from .cic import solve_cic
from .economics import client_utility, cloud_item_utility, effective_factor
from .feasibility import audit, utility_matrix
from .iic import solve_iic
from .market import (
    ConfigError,
    ContractMenu,
    InfeasibleError,
    InfoCase,
    MarketConfig,
    Mechanism,
    config_digest,
    load_config,
    load_menu,
    sample_type_vector,
    save_menu,
    with_overrides,
)
from .simulation import run_simulation, trace_to_jsonl

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_AUDIT = 4


def _write_manifest(out_path: Path, command: str, cfg_path: Path, cfg: MarketConfig, params: dict) -> None:
    manifest = {
        "artifact_version": __version__,
        "command": command,
        "config_path": str(cfg_path),
        "config_sha256": config_digest(cfg_path),
        "rng_seed": cfg.rng_seed,
        "params": params,
        "output": out_path.name,
    }
    manifest_path = out_path.with_suffix(out_path.suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows: list[dict]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[col] for col in header])


def _menu_rows(cfg: MarketConfig, menu: ContractMenu, param: str, value: float) -> list[dict]:
    rows = []
    for item in menu.items:
        theta = cfg.theta(item.type_index)
        h = effective_factor(menu.mechanism, item.join_round, cfg.timeframe, cfg.vartheta)
        rows.append(
            {
                "param": param,
                "value": value,
                "info_case": menu.info_case.value,
                "type_index": item.type_index,
                "theta": theta,
                "join_round": item.join_round,
                "bonus_factor": h,
                "effort": item.effort,
                "salary": item.salary,
                "bonus": item.bonus,
                "reward": item.reward,
                "client_utility": client_utility(theta, h, item.salary, cfg.delta, cfg.beta),
                "cloud_utility": cloud_item_utility(
                    theta, h, item.salary, cfg.delta, cfg.lambda_for(item.join_round)
                ),
            }
        )
    return rows


SWEEP_HEADER = [
    "param",
    "value",
    "info_case",
    "type_index",
    "theta",
    "join_round",
    "bonus_factor",
    "effort",
    "salary",
    "bonus",
    "reward",
    "client_utility",
    "cloud_utility",
]

EFFICIENCY_HEADER = [
    "mechanism",
    "round",
    "regime",
    "cohort_size",
    "spend",
    "cloud_utility",
    "client_utility",
    "cum_spend",
    "cum_cloud_utility",
    "cum_client_utility",
]


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    info_case = InfoCase(args.info_case)
    if args.mechanism == "ctwt":
        menu = solve_ctwt(cfg, info_case)
    elif info_case is InfoCase.CIC:
        menu = solve_cic(cfg)
    else:
        menu = solve_iic(cfg)
    out = Path(args.out)
    save_menu(menu, out)
    report = audit(menu, cfg)
    spend = sum(cfg.multiplicity_of(i.type_index) * i.reward for i in menu.items)
    print(f"menu written to {out}")
    print(f"items: {len(menu.items)}  total spend: {spend:.6f}  budget: {cfg.budget:.6f}")
    print(f"audit: {'pass' if report.passed else 'FAIL'}")
    if not report.passed:
        _print_report(report)
        return EXIT_AUDIT
    return EXIT_OK


def _sweep_config(cfg: MarketConfig, param: str, value: float) -> MarketConfig:
    if param == "delta":
        return with_overrides(cfg, delta=value)
    if param == "budget":
        return with_overrides(cfg, budget=value)
    k = int(value)
    thetas = sample_type_vector(cfg.rng_seed, k, 1.0, 2.0)
    mult = None if cfg.multiplicity is None else cfg.multiplicity[:k]
    return with_overrides(cfg, K=k, thetas=thetas, multiplicity=mult)


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    values = sorted(float(v) for v in args.values.split(","))
    rows: list[dict] = []
    for value in values:
        swept = _sweep_config(cfg, args.param, value)
        for info_case, solver in ((InfoCase.CIC, solve_cic), (InfoCase.IIC, solve_iic)):
            menu = solver(swept)
            rows.extend(_menu_rows(swept, menu, args.param, value))
    rows.sort(key=lambda r: (r["value"], r["info_case"], r["type_index"]))
    out = Path(args.out)
    _write_csv(out, SWEEP_HEADER, rows)
    _write_manifest(out, "sweep", Path(args.config), cfg, {"param": args.param, "values": values})
    if args.figures:
        from .figures import render_sweep_figure

        render_sweep_figure(rows, args.param, out.with_suffix(".png"))
    print(f"{len(rows)} rows written to {out}")
    return EXIT_OK


_EFFICIENCY_RUNS = [
    ("r3t-cic", Mechanism.R3T, InfoCase.CIC),
    ("r3t-iic", Mechanism.R3T, InfoCase.IIC),
    ("ctwt-cic", Mechanism.CTWT, InfoCase.CIC),
    ("ctwt-iic", Mechanism.CTWT, InfoCase.IIC),
    ("linear", Mechanism.LINEAR, InfoCase.IIC),
]


def efficiency_rows(cfg: MarketConfig) -> list[dict]:
    rows = []
    for label, mechanism, info_case in _EFFICIENCY_RUNS:
        trace = run_simulation(cfg, mechanism, info_case, with_ledger=False)
        if not trace.complete:
            raise InfeasibleError(f"{label}: {trace.failure}")
        cum_spend = cum_cloud = cum_client = 0.0
        for state in trace.rounds:
            cum_spend += state.spend
            cum_cloud += state.cloud_utility
            cum_client += state.client_utility
            rows.append(
                {
                    "mechanism": label,
                    "round": state.round,
                    "regime": state.regime.value,
                    "cohort_size": state.cohort_size,
                    "spend": state.spend,
                    "cloud_utility": state.cloud_utility,
                    "client_utility": state.client_utility,
                    "cum_spend": cum_spend,
                    "cum_cloud_utility": cum_cloud,
                    "cum_client_utility": cum_client,
                }
            )
    return rows


def cmd_efficiency(args) -> int:
    cfg = load_config(args.config)
    rows = efficiency_rows(cfg)
    out = Path(args.out)
    _write_csv(out, EFFICIENCY_HEADER, rows)
    _write_manifest(out, "efficiency", Path(args.config), cfg, {})
    if args.figures:
        from .figures import render_efficiency_figure

        render_efficiency_figure(rows, out.with_suffix(".png"))
    totals = {}
    for row in rows:
        totals[row["mechanism"]] = row["cum_cloud_utility"]
    for label, total in totals.items():
        print(f"{label}: cumulative cloud utility {total:.3f}")
    print(f"{len(rows)} rows written to {out}")
    return EXIT_OK


def cmd_mismatch(args) -> int:
    cfg = load_config(args.config)
    menu = solve_iic(cfg)
    matrix = utility_matrix(cfg, menu)
    header = ["type_index"] + [f"item_{j}" for j in range(1, cfg.K + 1)]
    rows = [
        {"type_index": k, **{f"item_{j + 1}": matrix[k - 1][j] for j in range(cfg.K)}}
        for k in range(1, cfg.K + 1)
    ]
    out = Path(args.out)
    _write_csv(out, header, rows)
    _write_manifest(out, "mismatch", Path(args.config), cfg, {})
    if args.figures:
        from .figures import render_mismatch_figure

        render_mismatch_figure(matrix, out.with_suffix(".png"))
    print(f"{cfg.K}x{cfg.K} utility matrix written to {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    mechanism = Mechanism(args.mechanism)
    info_case = InfoCase(args.info_case)
    trace = run_simulation(cfg, mechanism, info_case)
    Path(args.trace).write_text(trace_to_jsonl(trace), encoding="utf-8")
    trace.ledger.save(args.ledger)
    _write_manifest(Path(args.trace), "simulate", Path(args.config), cfg,
                    {"mechanism": args.mechanism, "info_case": args.info_case})
    totals = trace.totals
    print(f"rounds: {len(trace.rounds)}  complete: {trace.complete}")
    print(f"total spend: {totals.spend:.6f}  ({totals.spend_micro} micro-tokens)")
    print(f"total cloud utility: {totals.cloud_utility:.6f}")
    print(f"final performance: {trace.final_performance:.6f}")
    print(f"trace: {args.trace}  ledger: {args.ledger}")
    if not trace.complete:
        print(f"simulation halted: {trace.failure}")
        return EXIT_INFEASIBLE
    return EXIT_OK


def _print_report(report) -> None:
    for k, deficit in report.ir_violations:
        print(f"  IR violated for type {k}: deficit {deficit:.3e}")
    for k, j, gap in report.ic_violations:
        print(f"  IC violated: type {k} prefers item {j} by {gap:.3e}")
    if report.bf_excess > 1e-9:
        print(f"  BF violated: spend exceeds budget by {report.bf_excess:.6f}")
    for name, k in report.monotonicity_failures:
        print(f"  monotonicity violated in {name} at type {k}")


def cmd_audit(args) -> int:
    cfg = load_config(args.config)
    try:
        menu = load_menu(args.menu)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"menu parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = audit(menu, cfg)
    print(f"menu: {args.menu}  mechanism: {menu.mechanism.value}  case: {menu.info_case.value}")
    print(f"audit: {'pass' if report.passed else 'FAIL'}")
    _print_report(report)
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return EXIT_OK if report.passed else EXIT_AUDIT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clpcontracts",
        description="Contract design, audits, sweeps, and settlement simulation "
        "for time-critical federated-learning markets.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one contract menu and audit it")
    p.add_argument("config")
    p.add_argument("--info-case", choices=["cic", "iic"], default="iic")
    p.add_argument("--mechanism", choices=["r3t", "ctwt"], default="r3t")
    p.add_argument("--out", default="menu.json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="per-type menu outcomes while sweeping one parameter")
    p.add_argument("config")
    p.add_argument("--param", choices=["delta", "budget", "K"], required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("efficiency", help="per-round comparison of all mechanisms")
    p.add_argument("config")
    p.add_argument("--out", default="efficiency.csv")
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.set_defaults(func=cmd_efficiency)

    p = sub.add_parser("mismatch", help="cross-type utility matrix of the hidden-type menu")
    p.add_argument("config")
    p.add_argument("--out", default="mismatch.csv")
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.set_defaults(func=cmd_mismatch)

    p = sub.add_parser("simulate", help="run the multi-round game with ledger emission")
    p.add_argument("config")
    p.add_argument("--mechanism", choices=["r3t", "ctwt", "linear"], default="r3t")
    p.add_argument("--info-case", choices=["cic", "iic"], default="iic")
    p.add_argument("--trace", default="trace.jsonl")
    p.add_argument("--ledger", default="ledger.jsonl")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("audit", help="audit an externally supplied menu file")
    p.add_argument("menu")
    p.add_argument("config")
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
