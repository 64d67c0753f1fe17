"""Command-line interface.

Four subcommands wrap the library: ``limits`` (closed-form levels,
asymptotes, and limit calculators), ``simulate`` (Monte Carlo consistency
studies), ``estimate`` (one-shot tail-model fit on a pair file), and
``analyze`` (rolling-window CoVaR reports). Outputs are plot-ready long
CSV plus a JSON summary; every file embeds the run configuration and seed.

Exit codes: 0 success, 2 usage, 3 I/O, 4 data, 5 computation.

Input schemas (v1):
  pairs file       header ``date,value_i,value_s`` (ISO-8601 dates)
  innovations file header with two value columns, e.g. ``u,v`` or
                   ``z_i,z_s`` (an optional leading date column is
                   accepted and ignored for estimation)
  config file      flat JSON object whose keys are long option names with
                   underscores; explicit flags override the file
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from datetime import date as _date
from pathlib import Path

import numpy as np

from . import __version__, copulas, mde, pipeline, tailmodels
from .empirical import pseudo_observations, tail_coefficients
from .errors import ComputationError, DataError
from .mde import adjustment_factor, classify_regime, v_hat_flagged

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DATA, EXIT_COMPUTE = 0, 2, 3, 4, 5

SCHEMA_VERSION = "v1"

_FAMILY_SPECS = {
    "clayton": lambda par: copulas.clayton(par),
    "gumbel-star": lambda par: copulas.gumbel(par, "survival"),
    "ips-star": lambda par: copulas.ips(par, "survival"),
    "frank": lambda par: copulas.frank(par),
    "gumbel-2star": lambda par: copulas.gumbel(par, "reflect2"),
    "clayton-2star": lambda par: copulas.clayton(par, "reflect2"),
    "student-t": None,  # takes (rho, nu); handled separately
}
_CATALOG_NAME = {
    "clayton": "clayton", "gumbel-star": "gumbel_star", "ips-star": "ips_star",
    "frank": "frank", "gumbel-2star": "gumbel_2star", "clayton-2star": "clayton_2star",
}


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return format(x, ".12g")
    return str(x)


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _config_line(config: dict) -> str:
    return "# config: " + json.dumps(config, sort_keys=True, separators=(",", ":"))


def _write_csv(path: Path, schema: str, config: dict, header: list, rows: list) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(f"# covartail {schema} {SCHEMA_VERSION}\n")
            fh.write(_config_line(config) + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(x) for x in row])
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from exc


def _write_json(path: Path, payload: dict) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from exc


class _IOFailure(Exception):
    pass


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".covartail-write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise _IOFailure(f"output directory {out} is not writable: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# input parsing


def _read_pair_csv(path: str, *, want_dates: bool, date_col=None, col_i=None, col_s=None):
    """Read a delimited pair file. Returns (dates or None, x, y, n_dropped)."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if want_dates:
            names = (date_col or "date", col_i or "value_i", col_s or "value_s")
            try:
                idx = [header.index(c) for c in names]
            except ValueError:
                raise DataError(
                    f"{path}: header {header} lacks required columns {names}")
        else:
            value_cols = [i for i, h in enumerate(header)]
            if len(value_cols) == 3:
                value_cols = value_cols[1:]  # leading date column tolerated
            if len(value_cols) != 2:
                raise DataError(
                    f"{path}: expected two value columns (optional leading date), got {header}")
            idx = [None] + value_cols

        dates, xs, ys, dropped = [], [], [], 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            cells = [row[i].strip() if i is not None and i < len(row) else None for i in idx]
            if want_dates:
                d = cells[0]
                try:
                    _date.fromisoformat(d)
                except (TypeError, ValueError):
                    raise DataError(f"{path}:{lineno}: bad ISO-8601 date {d!r}")
            if cells[1] == "" or cells[2] == "" or cells[1] is None or cells[2] is None:
                dropped += 1
                continue
            vals = []
            for pos, cell in ((2, cells[1]), (3, cells[2])):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: column {pos} has non-numeric value {cell!r}")
            if want_dates:
                dates.append(cells[0])
            xs.append(vals[0])
            ys.append(vals[1])
    if len(xs) < 2:
        raise DataError(f"{path}: fewer than two usable rows")
    return (dates if want_dates else None), np.array(xs), np.array(ys), dropped


# ---------------------------------------------------------------------------
# subcommands


def _cmd_limits(args) -> int:
    rows = []
    if args.kappa is not None:
        inputs = tailmodels.LimitInputs(
            kappa=args.kappa, rho_exp=args.rho_exp, xi=args.xi,
            gamma=(math.inf if args.gamma == "inf" else float(args.gamma))
            if args.gamma is not None else None,
            a0=args.a0)
        rate = tailmodels.vp_rate(inputs)
        rows.append(("vp_rate_exponent", rate.exponent if rate.exponent is not None else ""))
        rows.append(("vp_to_one", rate.to_one))
        limit = tailmodels.delta_covar_limit(inputs)
        rows.append(("delta_covar_limit", limit.value))
        rows.append(("delta_covar_label", limit.label))
        if limit.rate_exponent is not None:
            rows.append(("delta_covar_rate_exponent", limit.rate_exponent))
        if limit.gamma_infinite:
            rows.append(("gamma_infinite", True))
    else:
        if args.family is None:
            raise ValueError("either --family or --kappa is required")
        if args.family == "student-t":
            if args.rho is None or args.nu is None:
                raise ValueError("student-t requires --rho and --nu")
            spec = copulas.student_t(args.rho, args.nu)
            params = (args.rho, args.nu)
            row_name = None
        else:
            par = args.theta if args.theta is not None else args.delta
            if par is None:
                raise ValueError(f"{args.family} requires --theta or --delta")
            spec = _FAMILY_SPECS[args.family](par)
            params = (par,)
            row_name = _CATALOG_NAME[args.family]
        info = tailmodels.theoretical_regime(spec)
        rows.append(("family", args.family))
        rows.append(("params", ",".join(_fmt(x) for x in params)))
        rows.append(("regime", info.regime))
        rows.append(("kappa", info.kappa))
        rows.append(("kappa_2star", info.kappa_2star))
        if info.caveat:
            rows.append(("expansion_not_uniform", True))
        if row_name is not None:
            rows.append(("v_qp_asymptotic", tailmodels.catalog_v_qp(row_name, params, args.q, args.p)))
        rows.append(("v_qp_exact", copulas.v_exact(spec, args.q, args.p)))
        if row_name is not None:
            try:
                rows.append(("vp_asymptote", tailmodels.catalog_vp(row_name, params, args.p)))
            except ValueError as exc:
                rows.append(("vp_asymptote_error", str(exc)))
        rows.append(("v_pp_exact", copulas.v_exact(spec, args.p, args.p)))
        rows.append(("q", args.q))
        rows.append(("p", args.p))

    if args.format == "json":
        print(json.dumps({k: v for k, v in rows}, sort_keys=True, default=_fmt))
    else:
        width = max(len(k) for k, _ in rows)
        for k, v in rows:
            print(f"{k:<{width}}  {_fmt(v)}")
    return EXIT_OK


def _spec_from_args(args) -> copulas.CopulaSpec:
    if args.family == "student-t":
        if args.rho is None or args.nu is None:
            raise ValueError("student-t requires --rho and --nu")
        return copulas.student_t(args.rho, args.nu)
    par = args.theta if args.theta is not None else args.delta
    if par is None:
        raise ValueError(f"{args.family} requires --theta or --delta")
    return _FAMILY_SPECS[args.family](par)


def _cmd_simulate(args) -> int:
    out = _out_dir(args)
    spec = _spec_from_args(args)
    config = {
        "command": "simulate", "family": args.family,
        "params": list(spec.params), "n_grid": list(args.n_grid),
        "reps": args.reps, "k_rule": args.k_rule,
        "p_levels": list(args.p_levels), "q_levels": list(args.q_levels),
        "seed": args.seed, "deterministic_only": args.deterministic_only,
    }
    study = pipeline.simulate_study(
        spec, args.n_grid, args.reps, k_rule=args.k_rule,
        p_levels=args.p_levels, q_levels=args.q_levels, seed=args.seed,
        deterministic_only=args.deterministic_only)

    header = ["n", "rep", "k", "p", "q", "metric", "value"]
    rows = []
    for p, ve, vp, ratio in study.theory_ratios:
        rows.append(("", "", "", p, "", "v_exact_pp", ve))
        rows.append(("", "", "", p, "", "vp_asymptote", vp))
        rows.append(("", "", "", p, "", "theory_ratio", ratio))
    for r in study.records:
        for j, th in enumerate(r.theta_hat, start=1):
            rows.append((r.n, r.rep, r.k, "", "", f"theta_hat_{j}", th))
        rows.append((r.n, r.rep, r.k, "", "", "criterion", r.criterion_value))
        rows.append((r.n, r.rep, r.k, "", "", "sup_err", r.sup_err))
        for q, ratio in r.vhat_ratios:
            rows.append((r.n, r.rep, r.k, r.k / r.n, q, "vhat_ratio", ratio))
    _write_csv(out / "report.csv", "simulate-report", config, header, rows)
    summary = {
        "schema": f"simulate-summary {SCHEMA_VERSION}",
        "config": config,
        "regime": study.regime,
        "model_family": study.family,
        "theta_true": list(study.theta_true),
        "k_of_n": list(study.k_of_n),
        "summary": study.summary(),
        "version": __version__,
    }
    _write_json(out / "summary.json", summary)
    print(f"wrote {out / 'report.csv'} and {out / 'summary.json'}")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    out = _out_dir(args)
    _, x, y, dropped = _read_pair_csv(args.input, want_dates=False)
    if len(x) < args.k:
        raise DataError(f"{args.input}: {len(x)} rows is fewer than k={args.k}")
    ps = pseudo_observations(x, y)
    tc = tail_coefficients(ps, args.k)
    if args.regime is not None:
        regime = args.regime
        families = (args.family,) if args.family else pipeline.FAMILY_MENU[regime]
        force = True
    else:
        regime = classify_regime(tc, args.tau)
        families = (args.family,) if args.family else None
        force = False
    best = pipeline._dispatch_fit(ps, args.k, regime, families=families,
                                  seed=args.seed, force=force)
    r_hat = adjustment_factor(best, args.p)
    levels = []
    for q in args.q_levels:
        vh, clamped = v_hat_flagged(best, q, args.p)
        levels.append({"q": q, "v_hat": vh, "clamped": clamped})
    config = {
        "command": "estimate", "input": args.input, "p": args.p, "k": args.k,
        "tau": args.tau, "q_levels": list(args.q_levels), "seed": args.seed,
        "regime_override": args.regime, "family_override": args.family,
    }
    payload = {
        "schema": f"estimate-summary {SCHEMA_VERSION}",
        "config": config,
        "n": ps.n,
        "rows_dropped": dropped,
        "lambda_hat": tc.lambda_hat,
        "lambda_hat_2star": tc.lambda_hat_2star,
        "regime": best.regime,
        "family": best.family,
        "theta_hat": list(best.theta_hat),
        "criterion_value": best.criterion_value,
        "flags": list(best.flags),
        "r_hat": r_hat,
        "r_floor": args.p,
        "r_independence": 1.0,
        "v_hat": levels,
        "version": __version__,
    }
    _write_json(out / "summary.json", payload)
    print(f"wrote {out / 'summary.json'}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    out = _out_dir(args)
    dates, x, y, dropped = _read_pair_csv(
        args.input, want_dates=True, date_col=args.date_col,
        col_i=args.col_i, col_s=args.col_s)
    if args.window > len(x):
        raise DataError(
            f"{args.input}: window {args.window} larger than the {len(x)} data rows")
    if (args.regime is None) != (args.family is None):
        raise ValueError("--regime and --family must be given together")
    override = (args.regime, args.family) if args.regime else None
    result = pipeline.rolling_analysis(
        x, y, dates, window_len=args.window, step=args.step, p=args.p,
        k=args.k, tau=args.tau, seed=args.seed, family_override=override)
    if not result.reports:
        raise ComputationError(
            "every window failed: " + "; ".join(r for _, r in result.skipped))

    config = {
        "command": "analyze", "input": args.input, "window": args.window,
        "step": args.step, "p": args.p, "k": args.k, "tau": args.tau,
        "seed": args.seed, "regime_override": args.regime,
        "family_override": args.family,
        "columns": [args.date_col, args.col_i, args.col_s],
    }
    header = ["window_index", "date_start", "date_end", "start", "end", "n_window",
              "k", "p", "tau", "regime", "family", "theta_1", "theta_2",
              "criterion", "lambda_hat", "lambda_hat_2star", "r_hat", "v_hat_pp",
              "r_floor", "r_independence", "delta_covar",
              "eta_i", "lambda_skew_i", "persistence_i", "loglik_i",
              "eta_s", "lambda_skew_s", "persistence_s", "loglik_s", "flags"]
    rows = []
    for r in result.reports:
        th1 = r.theta_hat[0]
        th2 = r.theta_hat[1] if len(r.theta_hat) > 1 else ""
        rows.append((r.window_index, r.date_start, r.date_end, r.start, r.end,
                     r.n_window, r.k, r.p, r.tau, r.regime, r.family, th1, th2,
                     r.criterion_value, r.lambda_hat, r.lambda_hat_2star,
                     r.r_hat, r.v_hat_pp, r.r_floor, r.r_independence,
                     r.delta_covar,
                     r.marginal_i.eta, r.marginal_i.lambda_skew,
                     r.marginal_i.persistence, r.marginal_i.loglik,
                     r.marginal_s.eta, r.marginal_s.lambda_skew,
                     r.marginal_s.persistence, r.marginal_s.loglik,
                     "|".join(r.flags)))
    _write_csv(out / "report.csv", "analyze-report", config, header, rows)

    series_header = ["window_index", "t", "date", "var", "covar"]
    series_rows = []
    for r in result.reports:
        for t in range(r.n_window):
            d = dates[r.start + t] if dates is not None else ""
            series_rows.append((r.window_index, t, d, r.var_series[t], r.covar_series[t]))
    _write_csv(out / "series.csv", "analyze-series", config, series_header, series_rows)

    summary = {
        "schema": f"analyze-summary {SCHEMA_VERSION}",
        "config": config,
        "n_rows": len(x),
        "rows_dropped": dropped,
        "n_windows": len(result.reports),
        "skipped": [{"window": w, "reason": reason} for w, reason in result.skipped],
        "version": __version__,
    }
    _write_json(out / "summary.json", summary)
    print(f"wrote {out / 'report.csv'}, {out / 'series.csv'} and {out / 'summary.json'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covartail",
        description="Copula-based extreme value inference for CoVaR")
    parser.add_argument("--version", action="version", version=f"covartail {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out-dir", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="root seed")
        p.add_argument("--config", default=None,
                       help="flat JSON file of option defaults; flags override")

    lim = sub.add_parser("limits", help="closed-form levels, asymptotes, limit calculators")
    lim.add_argument("--family", choices=sorted(_FAMILY_SPECS), default=None)
    lim.add_argument("--theta", type=float, default=None)
    lim.add_argument("--delta", type=float, default=None)
    lim.add_argument("--rho", type=float, default=None)
    lim.add_argument("--nu", type=float, default=None)
    lim.add_argument("--q", type=float, default=0.5)
    lim.add_argument("--p", type=float, default=0.05)
    lim.add_argument("--kappa", type=float, default=None, help="limit-calculator mode")
    lim.add_argument("--rho-exp", type=float, default=1.0)
    lim.add_argument("--xi", type=float, default=0.0)
    lim.add_argument("--gamma", default=None, help="number or 'inf'")
    lim.add_argument("--a0", type=float, default=None)
    lim.add_argument("--format", choices=("table", "json"), default="table")
    lim.add_argument("--config", default=None)
    lim.set_defaults(func=_cmd_limits)

    sim = sub.add_parser("simulate", help="Monte Carlo consistency study")
    sim.add_argument("--family", choices=sorted(_FAMILY_SPECS), required=True)
    sim.add_argument("--theta", type=float, default=None)
    sim.add_argument("--delta", type=float, default=None)
    sim.add_argument("--rho", type=float, default=None)
    sim.add_argument("--nu", type=float, default=None)
    sim.add_argument("--n-grid", type=_parse_ints, default=(2000, 8000))
    sim.add_argument("--reps", type=int, default=20)
    sim.add_argument("--k-rule", default="2sqrt", help="'2sqrt', 'sqrt', or 'fixed:<k>'")
    sim.add_argument("--p-levels", type=_parse_floats, default=(1e-2, 1e-3, 1e-4))
    sim.add_argument("--q-levels", type=_parse_floats, default=(0.5,))
    sim.add_argument("--deterministic-only", action="store_true")
    add_common(sim)
    sim.set_defaults(func=_cmd_simulate)

    est = sub.add_parser("estimate", help="fit a tail model to a pair file")
    est.add_argument("--input", required=True)
    est.add_argument("--p", type=float, default=0.05)
    est.add_argument("--k", type=int, default=100)
    est.add_argument("--tau", type=float, default=0.1)
    est.add_argument("--q-levels", type=_parse_floats, default=(0.25, 0.5, 0.75))
    est.add_argument("--regime", choices=tailmodels.REGIMES, default=None)
    est.add_argument("--family", choices=sorted(mde._BOXES), default=None)
    add_common(est)
    est.set_defaults(func=_cmd_estimate)

    ana = sub.add_parser("analyze", help="rolling-window CoVaR reports")
    ana.add_argument("--input", required=True)
    ana.add_argument("--date-col", default="date")
    ana.add_argument("--col-i", default="value_i")
    ana.add_argument("--col-s", default="value_s")
    ana.add_argument("--window", type=int, default=pipeline.DEFAULT_WINDOW)
    ana.add_argument("--step", type=int, default=pipeline.DEFAULT_STEP)
    ana.add_argument("--p", type=float, default=0.05)
    ana.add_argument("--k", type=int, default=100)
    ana.add_argument("--tau", type=float, default=0.1)
    ana.add_argument("--regime", choices=tailmodels.REGIMES, default=None)
    ana.add_argument("--family", choices=sorted(mde._BOXES), default=None)
    add_common(ana)
    ana.set_defaults(func=_cmd_analyze)
    return parser


def _apply_config_file(parser, argv):
    """Pre-scan for --config and install its values as parser defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return
    try:
        with open(known.config) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise _IOFailure(f"cannot read config {known.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"config {known.config} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise DataError(f"config {known.config} must be a flat JSON object")
    for sub_action in parser._subparsers._group_actions:
        for sp in sub_action.choices.values():
            defaults = {k: v for k, v in payload.items()
                        if any(a.dest == k for a in sp._actions)}
            sp.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
