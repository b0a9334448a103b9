"""Command-line entry point: ``stabsim <subcommand> ...``.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from . import __version__
from .core import ExecutionCounter, SimulatorParams, make_stream
from .data import DatasetLoadError, SynthConfig, load_csv, save_csv, synth_generate
from .estimation import DEFAULT_CURVE_M_ENSEMBLE, DEFAULT_P_GRID, CalibrationConfig, full_calibration, naive_real_stability_runs
from .experiments import bench, linear_fit_r2, ntarget_scan, stability_sweep
from .forest import FitError, ForestConfig
from .report import csv_text, dumps, envelope, validate_report, write_text
from .selectors import ForestSelector, SimulatedSelector
from .theory import Theorem1Inputs, theorem_check

# stream ids under the master seed, one per subcommand
STREAM_DATA = 0
STREAM_MAIN = 1

SPLIT_STRATEGY = "leave-one-out; remaining rows shuffled (unstratified) and alternated into train1/train2"


class UsageError(Exception):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("STABSIM_SEED")
    if env is None:
        raise UsageError("a master seed is required: pass --seed or set STABSIM_SEED")
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"STABSIM_SEED must be an integer, got {env!r}") from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed (falls back to $STABSIM_SEED)")
    p.add_argument("--workers", type=int, default=1)


def _add_dataset(p: argparse.ArgumentParser, with_csv: bool = True) -> None:
    g = p.add_argument_group("dataset source (one of)" if with_csv else "synthetic dataset")
    if with_csv:
        g.add_argument("--csv", help="CSV file with one label column")
        g.add_argument("--label", default="-1", help="label column name or index (default: last)")
        g.add_argument("--no-header", action="store_true")
        g.add_argument("--synth", action="store_true", help="generate a synthetic dataset from --synth-* flags")
    g.add_argument("--synth-config", help="JSON file with SynthConfig fields")
    g.add_argument("--synth-n-sample", type=int, default=60)
    g.add_argument("--synth-n-feature", type=int, default=200)
    g.add_argument("--synth-n-informative", type=int, default=10)
    g.add_argument("--synth-n-class", type=int, default=2)
    g.add_argument("--synth-noise", type=float, default=1.0)
    g.add_argument("--synth-discretize", type=int, default=None)


def _add_forest(p: argparse.ArgumentParser, n_tree_list: bool = False) -> None:
    g = p.add_argument_group("random forest")
    if n_tree_list:
        g.add_argument("--n-tree", type=_ints, default=[50, 100])
    else:
        g.add_argument("--n-tree", type=int, default=100)
    g.add_argument("--mtry", type=int, default=None)
    g.add_argument("--normalized-mtry", type=float, default=None)
    g.add_argument("--max-depth", type=int, default=None)
    g.add_argument("--min-samples-split", type=int, default=2)
    g.add_argument("--subsample", type=float, default=1.0, help="row fraction per weak selector")


def _forest_config(args, n_tree=None) -> ForestConfig:
    return ForestConfig(
        n_tree=args.n_tree if n_tree is None else n_tree,
        mtry=args.mtry,
        normalized_mtry=args.normalized_mtry,
        max_depth=args.max_depth,
        min_samples_split=args.min_samples_split,
        subsample_fraction=args.subsample,
    )


def _dataset_source(args):
    sources = [bool(args.csv), bool(args.synth_config), bool(args.synth)]
    if sum(sources) != 1:
        raise UsageError("give exactly one dataset source: --csv, --synth-config or --synth")
    return sources.index(True)


def _load_dataset(args, seed: int):
    kind = _dataset_source(args)
    if kind == 0:
        return load_csv(args.csv, args.label, not args.no_header), {"csv": args.csv, "label": args.label}
    cfg = _synth_config(args)
    return synth_generate(cfg, make_stream(seed, STREAM_DATA)), {"synth": cfg.to_dict()}


def _synth_config(args) -> SynthConfig:
    if args.synth_config:
        return SynthConfig.from_json(args.synth_config)
    return SynthConfig(
        args.synth_n_sample,
        args.synth_n_feature,
        args.synth_n_informative,
        args.synth_n_class,
        args.synth_noise,
        args.synth_discretize,
    )


def _emit(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        write_text(path, text)


# -- subcommands ----------------------------------------------------------------


def cmd_simulate_stability(args) -> int:
    seed = _seed(args)
    base = SimulatorParams(args.n_feature, args.n_target, args.n_useful, args.p[0])
    for p in args.p:
        base.with_(p=p)  # validate every p up front
    rows = stability_sweep(base, args.p, args.m_ensemble, args.m_stability, make_stream(seed, STREAM_MAIN), args.workers)
    _emit(args.out, csv_text(["p", "m_ensemble", "m_stability", "J", "seed"], [r + (seed,) for r in rows]))
    if args.json:
        config = {k: v for k, v in vars(args).items() if k not in ("func", "workers")}
        result = {"rows": [dict(zip(("p", "m_ensemble", "m_stability", "J"), r)) for r in rows]}
        write_text(args.json, dumps(envelope("simulate_stability", seed, config, result)))
    return 0


def cmd_calibrate(args) -> int:
    seed = _seed(args)
    counter = ExecutionCounter()
    m_list = args.m_ensemble
    if args.truth_n_useful is not None:
        if args.truth_p is None or args.n_feature is None:
            raise UsageError("--truth-n-useful needs --truth-p and --n-feature")
        truth = SimulatorParams(args.n_feature, args.n_target, args.truth_n_useful, args.truth_p)
        selector = SimulatedSelector(truth, counter, as_real=True)
        source = {"simulated_truth": asdict(truth)}
    else:
        dataset, source = _load_dataset(args, seed)
        selector = ForestSelector(dataset, list(range(dataset.n_sample)), _forest_config(args), counter)
        source["forest"] = selector.config.to_dict()
        source["forest"]["resolved_mtry"] = selector.config.resolve_mtry(dataset.n_feature)
    config = CalibrationConfig(
        n_target=args.n_target,
        m_ensemble=max(m_list),
        m_stability=args.m_stability,
        p_grid=tuple(args.p_grid),
        p_search=args.p_search,
        bs_tolerance=args.bs_tolerance,
        target_m_ensemble=args.target_m_ensemble,
        t_reps=args.t_reps,
        fp_max_iter=args.fp_max_iter,
        curve_m_ensemble=tuple(m_list),
        curve_all_p=args.curve_all_p,
    )
    report = full_calibration(selector, config, make_stream(seed, STREAM_MAIN), counter, args.workers)
    doc = envelope(
        "calibration",
        seed,
        {**source, "calibration": report.config, "split_strategy": "all rows; forest bootstrap per weak selector"},
        report.to_dict(),
    )
    validate_report(doc)
    _emit(args.out_json, dumps(doc))
    if args.out_csv:
        rows = [(p, config.target_m_ensemble, j, "grid") for p, j in report.grid]
        rows += [(p, m, j, "curve") for p, m, j in report.curve]
        write_text(args.out_csv, csv_text(["p", "m_ensemble", "J", "kind"], rows))
    ec = report.execution_counts
    naive = naive_real_stability_runs(config.m_stability, m_list)
    print(
        f"real_runs={ec['real_runs']} (m_ensemble + m_stability = {config.expected_real_runs}); "
        f"simulated_runs={ec['simulated_runs']}; naive real sweep would need {naive} real runs; "
        f"n_useful_hat={report.n_useful_hat} p_hat={report.p_hat} n_useful_v={report.n_useful_v}",
        file=sys.stderr,
    )
    return 0


def cmd_theorem_check(args) -> int:
    seed = _seed(args)
    inp = Theorem1Inputs(args.n_feature, args.n_target, args.n_useful, args.p)
    result = theorem_check(inp, args.trials, make_stream(seed, STREAM_MAIN))
    config = {"n_feature": inp.n_f, "n_target": inp.n_t, "n_useful": inp.n_m, "p": float(inp.p), "trials": args.trials}
    doc = envelope("theorem_check", seed, config, result)
    validate_report(doc)
    _emit(args.out, dumps(doc))
    return 0


def cmd_bench(args) -> int:
    seed = _seed(args)
    dataset, source = _load_dataset(args, seed)
    params = SimulatorParams(dataset.n_feature, args.n_target, args.n_useful, args.p)
    rows = bench(
        dataset, _forest_config(args), params, args.m_ensemble, args.m_stability,
        make_stream(seed, STREAM_MAIN), args.workers, args.modes,
    )
    header = ["mode", "m_ensemble", "m_stability", "seconds", "workers"]
    _emit(args.out, csv_text(header, rows))
    fits = {}
    for mode in args.modes:
        pts = [(r[1], r[3]) for r in rows if r[0] == mode]
        if len(pts) >= 2:
            fits[mode] = linear_fit_r2(*zip(*pts))
            print(f"{mode}: linear fit R^2 = {fits[mode]:.3f}", file=sys.stderr)
    if args.json:
        config = {**source, "forest": _forest_config(args).to_dict(), "simulator": asdict(params),
                  "m_ensemble": args.m_ensemble, "m_stability": args.m_stability, "workers": args.workers}
        result = {"rows": [dict(zip(header, r)) for r in rows], "linear_fit_r2": fits}
        write_text(args.json, dumps(envelope("bench", seed, config, result)))
    return 0


def cmd_ntarget_scan(args) -> int:
    seed = _seed(args)
    dataset, source = _load_dataset(args, seed)
    fconfig = _forest_config(args, n_tree=args.n_tree[0])
    rows = ntarget_scan(dataset, args.n_target, args.n_tree, args.m_ensemble, fconfig, make_stream(seed, STREAM_MAIN))
    header = ["n_target", "n_tree", "accuracy"]
    _emit(args.out, csv_text(header, rows))
    if args.json:
        config = {**source, "forest": fconfig.to_dict(), "n_target": args.n_target, "n_tree": args.n_tree,
                  "m_ensemble": args.m_ensemble, "split_strategy": SPLIT_STRATEGY}
        write_text(args.json, dumps(envelope("ntarget_scan", seed, config, {"rows": [dict(zip(header, r)) for r in rows]})))
    return 0


def cmd_synth(args) -> int:
    seed = _seed(args)
    save_csv(synth_generate(_synth_config(args), make_stream(seed, STREAM_DATA)), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stabsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"stabsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-stability", help="stability of simulated ensembles over a (p, m_ensemble) sweep")
    p.add_argument("--n-feature", type=int, required=True)
    p.add_argument("--n-target", type=int, required=True)
    p.add_argument("--n-useful", type=int, required=True)
    p.add_argument("--p", type=_floats, default=list(DEFAULT_P_GRID))
    p.add_argument("--m-ensemble", type=_ints, default=list(DEFAULT_CURVE_M_ENSEMBLE))
    p.add_argument("--m-stability", type=int, default=30)
    p.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    p.add_argument("--json", default=None, help="optional JSON report path")
    _add_common(p)
    p.set_defaults(func=cmd_simulate_stability)

    p = sub.add_parser("calibrate", help="estimate t_uniform, n_useful, p and n_useful_v")
    p.add_argument("--n-target", type=int, required=True)
    p.add_argument("--m-ensemble", type=_ints, default=[50], help="max is used for n_useful; the list is the curve")
    p.add_argument("--m-stability", type=int, default=30)
    p.add_argument("--p-grid", type=_floats, default=list(DEFAULT_P_GRID))
    p.add_argument("--p-search", choices=("grid", "binary"), default="grid")
    p.add_argument("--bs-tolerance", type=float, default=0.02)
    p.add_argument("--target-m-ensemble", type=int, default=1)
    p.add_argument("--t-reps", type=int, default=1)
    p.add_argument("--fp-max-iter", type=int, default=1)
    p.add_argument("--curve-all-p", action="store_true")
    p.add_argument("--truth-n-useful", type=int, default=None, help="use a simulated selector as ground truth")
    p.add_argument("--truth-p", type=float, default=None)
    p.add_argument("--n-feature", type=int, default=None, help="feature count for a simulated ground truth")
    p.add_argument("--out-json", default="-")
    p.add_argument("--out-csv", default=None)
    _add_dataset(p)
    _add_forest(p)
    _add_common(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("theorem-check", help="closed form vs Monte Carlo first-draw probability")
    p.add_argument("--n-feature", type=int, required=True)
    p.add_argument("--n-target", type=int, required=True)
    p.add_argument("--n-useful", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--out", default="-", help="JSON report path ('-' for stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_theorem_check)

    p = sub.add_parser("bench", help="wall-clock of real vs simulated ensemble stability")
    p.add_argument("--n-target", type=int, default=20)
    p.add_argument("--n-useful", type=int, default=60)
    p.add_argument("--p", type=float, default=0.7)
    p.add_argument("--m-ensemble", type=_ints, default=[1, 10, 20, 30, 40, 50])
    p.add_argument("--m-stability", type=int, default=2)
    p.add_argument("--modes", type=lambda s: s.split(","), default=["real", "simulated"])
    p.add_argument("--out", default="-")
    p.add_argument("--json", default=None, help="optional JSON report path")
    _add_dataset(p)
    _add_forest(p)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ntarget-scan", help="leave-one-out accuracy over n_target and n_tree")
    p.add_argument("--n-target", type=_ints, required=True)
    p.add_argument("--m-ensemble", type=int, default=5)
    p.add_argument("--out", default="-")
    p.add_argument("--json", default=None, help="optional JSON report path")
    _add_dataset(p)
    _add_forest(p, n_tree_list=True)
    _add_common(p)
    p.set_defaults(func=cmd_ntarget_scan)

    p = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    p.add_argument("--out", required=True)
    _add_dataset(p, with_csv=False)
    _add_common(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        if isinstance(exc, FitError):
            print(f"stabsim: error: {exc}", file=sys.stderr)
            return 1
        print(f"stabsim: usage error: {exc}", file=sys.stderr)
        return 2
    except (DatasetLoadError, OSError) as exc:
        print(f"stabsim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
