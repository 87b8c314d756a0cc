"""Command-line surface binding the pipeline together.

Subcommands: run (one session, one agent), compare (learner vs random vs
buy-and-hold), sweep (threshold grid), synth (planted-model session CSV),
estimate (correlation matrix for one window), oracle (exhaustive vs GA on
a matrix), distance (both metric modes for two label strings). Every
subcommand accepts --config, --seed and --out; the default output
directory is $LOBSTATES_OUT or ./out. Exit codes: 0 ok, 1 input error,
2 config error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from lobstates import backtest, clustering, synth
from lobstates.config import parse_config, run_config_from
from lobstates.distance import DistanceMode, config_distance
from lobstates.errors import ConfigError, DataError
from lobstates.market_data import ingest_events, session_windows, \
    extract_features, to_increments
from lobstates.fourier import correlation_matrix


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="lobstates", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="flat YAML config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory")

    p_run = sub.add_parser("run", help="replay one session with one agent")
    p_run.add_argument("--data", required=True, help="tick CSV file")
    common(p_run)

    p_cmp = sub.add_parser("compare",
                           help="learner vs random vs buy-and-hold")
    p_cmp.add_argument("--data", required=True)
    p_cmp.add_argument("--seeds", help="comma-separated agent seeds")
    common(p_cmp)

    p_swp = sub.add_parser("sweep", help="state-threshold grid search")
    p_swp.add_argument("--data", required=True)
    p_swp.add_argument("--thresholds", required=True,
                       help="comma-separated threshold values")
    common(p_swp)

    p_syn = sub.add_parser("synth", help="emit a planted-model session CSV")
    p_syn.add_argument("--clusters", default="1,2,1,2,1,2",
                       help="planted labels for the six features")
    p_syn.add_argument("--g", default="0.95",
                       help="coupling per cluster (scalar or comma list)")
    p_syn.add_argument("--alt-clusters", help="second regime labels")
    p_syn.add_argument("--alt-g", help="second regime couplings")
    p_syn.add_argument("--block", type=int, default=10,
                       help="windows per regime block")
    p_syn.add_argument("--windows", type=int, default=89)
    p_syn.add_argument("--drift", type=float, default=0.0,
                       help="per-window log price drift in regime one "
                            "(negated in regime two)")
    p_syn.add_argument("--quote-rate", type=float, default=300.0)
    p_syn.add_argument("--trade-rate", type=float, default=100.0)
    common(p_syn)

    p_est = sub.add_parser("estimate",
                           help="correlation matrix for one window")
    p_est.add_argument("--data", required=True)
    p_est.add_argument("--window", type=int, default=0,
                       help="window index within the session")
    common(p_est)

    p_orc = sub.add_parser("oracle",
                           help="exhaustive vs GA clustering on a matrix")
    p_orc.add_argument("--matrix", required=True,
                       help="square correlation matrix CSV (no header)")
    common(p_orc)

    p_dst = sub.add_parser("distance",
                           help="both metric modes for two label strings")
    p_dst.add_argument("labels1")
    p_dst.add_argument("labels2")
    common(p_dst)

    return parser


def _load_config(args) -> tuple[dict, "backtest.RunConfig"]:
    text = None
    if getattr(args, "config", None):
        text = Path(args.config).read_text()
    resolved = parse_config(text)
    if getattr(args, "seed", None) is not None:
        resolved["seed"] = args.seed
    return resolved, run_config_from(resolved)


def _out_dir(args) -> Path:
    out = getattr(args, "out", None) or os.environ.get("LOBSTATES_OUT", "out")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _ingest(path: str):
    result = ingest_events(path)
    if result.rows_skipped:
        print(f"skipped {result.rows_skipped} invalid rows", file=sys.stderr)
    if result.out_of_order:
        print("input rows re-sorted into timestamp order", file=sys.stderr)
    return result.events


def _labels(text: str) -> clustering.ClusterConfiguration:
    try:
        return clustering.canonicalize(
            [int(x) for x in text.split(",") if x != ""])
    except ValueError:
        raise DataError(f"bad label string {text!r}") from None


def _couplings(text: str, n_clusters: int) -> tuple[float, ...]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) == 1:
        parts = parts * n_clusters
    if len(parts) != n_clusters:
        raise DataError("need one coupling per cluster")
    return tuple(parts)


def _cmd_run(args) -> int:
    resolved, cfg = _load_config(args)
    events = _ingest(args.data)
    day = backtest.run_day(events, cfg)
    out = _out_dir(args)
    (out / "periods.csv").write_text(backtest.periods_csv(day))
    (out / "summary.json").write_text(backtest.summary_json(day))
    worst = max(r.corr_seconds + r.cluster_seconds for r in day.records)
    print(f"{len(day.records)} periods, {len(day.registry)} states, "
          f"EOD PnL {day.eod_pnl_pct:.4f}% "
          f"(max stage time {worst * 1000:.1f} ms)")
    return 0


def _cmd_compare(args) -> int:
    resolved, cfg = _load_config(args)
    events = _ingest(args.data)
    if args.seeds:
        seeds = [int(s) for s in args.seeds.split(",")]
    else:
        seeds = [resolved["seed"]]
    table = backtest.compare_agents(events, cfg, seeds)
    out = _out_dir(args)
    (out / "comparison.csv").write_text(backtest.comparison_csv(table))
    payload = {
        "config": backtest.config_dict(cfg, resolved["seed"]),
        "seeds": seeds,
        "stats": {name: dict(zip(backtest.COMPARISON_COLUMNS[1:],
                                 stats.row()))
                  for name, stats in table.items()},
    }
    (out / "comparison.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n")
    for name, stats in table.items():
        print(f"{name}: mean {stats.mean:.4f}% median {stats.median:.4f}%")
    return 0


def _cmd_sweep(args) -> int:
    resolved, cfg = _load_config(args)
    events = _ingest(args.data)
    thresholds = [float(t) for t in args.thresholds.split(",")]
    rows, best = backtest.sweep_threshold(events, cfg, thresholds)
    out = _out_dir(args)
    (out / "sweep.csv").write_text(backtest.sweep_csv(rows, best))
    payload = {"config": backtest.config_dict(cfg, resolved["seed"]),
               "rows": rows, "selected_threshold": best}
    (out / "sweep.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n")
    print(f"selected threshold {best}")
    return 0


def _cmd_synth(args) -> int:
    resolved, _ = _load_config(args)
    labels = _labels(args.clusters)
    regimes = [synth.RegimeSpec(labels,
                                _couplings(args.g, labels.n_clusters),
                                args.drift)]
    if args.alt_clusters:
        alt = _labels(args.alt_clusters)
        alt_g = _couplings(args.alt_g or args.g, alt.n_clusters)
        regimes.append(synth.RegimeSpec(alt, alt_g, -args.drift))
    spec = synth.SessionSpec(regimes=tuple(regimes),
                             block_windows=args.block,
                             n_windows=args.windows,
                             quote_rate=args.quote_rate,
                             trade_rate=args.trade_rate,
                             rng_seed=resolved["seed"])
    result = synth.generate_session(spec)
    if args.out:
        path = _out_dir(args) / "session.csv"
        path.write_text(result.csv_text)
        print(f"wrote {result.n_rows} rows to {path}")
    else:
        sys.stdout.write(result.csv_text)
    if result.n_crossed_dropped:
        print(f"dropped {result.n_crossed_dropped} crossed quotes",
              file=sys.stderr)
    return 0


def _cmd_estimate(args) -> int:
    resolved, cfg = _load_config(args)
    events = _ingest(args.data)
    windows = session_windows(cfg.session_start_us, cfg.session_end_us,
                              cfg.period_us)
    if not 0 <= args.window < len(windows):
        raise DataError(f"window index {args.window} outside session "
                        f"(0..{len(windows) - 1})")
    window = windows[args.window]
    series = extract_features(events, window)
    increments = tuple(to_increments(s, window) for s in series)
    corr = correlation_matrix(increments, cfg.coefficient_policy)
    lines = [",".join(str(v) for v in row) for row in corr.rho]
    text = "\n".join(lines) + "\n"
    if args.out:
        (_out_dir(args) / "correlation.csv").write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_oracle(args) -> int:
    resolved, cfg = _load_config(args)
    try:
        matrix = np.loadtxt(args.matrix, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read matrix: {exc}") from None
    if matrix.shape[0] != matrix.shape[1]:
        raise DataError("matrix must be square")
    payload: dict = {"n_objects": int(matrix.shape[0])}
    if matrix.shape[0] <= cfg.exhaustive_limit:
        config, score = clustering.exhaustive_search(matrix,
                                                     cfg.exhaustive_limit)
        payload["exhaustive"] = {"labels": list(config.labels),
                                 "log_likelihood": score}
    ga_params = dataclasses.replace(cfg.ga_params, rng_seed=resolved["seed"])
    config, score, generations = clustering.ga_search(matrix, ga_params)
    payload["ga"] = {"labels": list(config.labels),
                     "log_likelihood": score,
                     "generations": generations}
    if "exhaustive" in payload:
        payload["agree"] = payload["exhaustive"]["log_likelihood"] \
            == payload["ga"]["log_likelihood"]
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        (_out_dir(args) / "oracle.json").write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_distance(args) -> int:
    c1 = _labels(args.labels1)
    c2 = _labels(args.labels2)
    paired = config_distance(c1, c2, DistanceMode.INDEX_PAIRED)
    best = config_distance(c1, c2, DistanceMode.BEST_MATCH)
    print(f"index_paired {paired:.2f}")
    print(f"best_match {best:.2f}")
    if args.out:
        payload = {"index_paired": paired, "best_match": best}
        (_out_dir(args) / "distance.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "synth": _cmd_synth,
    "estimate": _cmd_estimate,
    "oracle": _cmd_oracle,
    "distance": _cmd_distance,
}


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
