"""Command-line front end.

Subcommands: route (compute and export a route), graph (export the full
graph for a terminal pair), bench (run both algorithms over random terminal
pairs), compare (score candidate routes against an observed trajectory),
fit (train cost coefficients from scored segments).

Exit codes: 0 success, 2 input or validation problems, 3 no path,
4 internal error. With --json-errors failures are reported as one JSON
object on stderr. Outputs are deterministic for a fixed --seed; wall-clock
fields are only emitted under --timings.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .costs import CostModel, load_cost_config
from .errors import (
    NoPathExists,
    OpenAreaError,
    ParseError,
    TerminalUnreachable,
    ValidationError,
)
from .geometry import Containment, Point, point_in_polygon
from .hierarchical import compare_algorithms
from .learning import (
    cross_validate,
    feature_importance,
    fit_lasso,
    fit_ols,
    fit_ridge,
    load_training_csv,
    standardize,
    to_cost_coefficients,
)
from .routing import ExternalNetwork, route
from .scene import dump_geojson, export_geometry, load_scene
from .trajectories import compare_routes, load_trajectory_csv, trajectory_from_points
from .visibility import build_full_graph

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_PATH = 3
EXIT_INTERNAL = 4

# rows kept for table parity with the surveyed model families
UNIMPLEMENTED_MODELS = ("LARS", "SVM (linear kernel)", "SVM (polynomial kernel)",
                        "SVM (RBF kernel)", "Random Forest", "Gradient Boosting")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="openarea",
                                     description="Open-area wheelchair routing")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=42,
                        help="seed for randomized subcommands (default 42)")
    parser.add_argument("--json-errors", action="store_true",
                        help="report failures as JSON on stderr")
    parser.add_argument("--crs", choices=["local-m", "wgs84"], default="local-m",
                        help="coordinate system of --from/--to arguments")
    # the global flags are also accepted after the subcommand; SUPPRESS keeps
    # the subparser from clobbering values parsed by the main parser
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--json-errors", action="store_true",
                        default=argparse.SUPPRESS)
    common.add_argument("--crs", choices=["local-m", "wgs84"],
                        default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p_route = sub.add_parser("route", help="compute a route", parents=[common])
    p_route.add_argument("scene")
    p_route.add_argument("--from", dest="origin", required=True, metavar="X,Y")
    p_route.add_argument("--to", dest="destination", required=True, metavar="X,Y")
    p_route.add_argument("--algorithm", choices=["full", "hier"], default="full")
    p_route.add_argument("--cost-config")
    p_route.add_argument("--network")
    p_route.add_argument("--out", help="route GeoJSON output path")

    p_graph = sub.add_parser("graph", help="export the full graph", parents=[common])
    p_graph.add_argument("scene")
    p_graph.add_argument("--from", dest="origin", required=True, metavar="X,Y")
    p_graph.add_argument("--to", dest="destination", required=True, metavar="X,Y")
    p_graph.add_argument("--cost-config")
    p_graph.add_argument("--out", help="graph GeoJSON output path")

    p_bench = sub.add_parser("bench", help="compare both algorithms on random pairs", parents=[common])
    p_bench.add_argument("scene")
    p_bench.add_argument("--trials", type=int, default=10)
    p_bench.add_argument("--cost-config")
    p_bench.add_argument("--timings", action="store_true",
                         help="include wall-clock fields (non-deterministic)")
    p_bench.add_argument("--out", help="bench report JSON path")

    p_cmp = sub.add_parser("compare", help="score routes against a trajectory", parents=[common])
    p_cmp.add_argument("actual", help="observed trajectory CSV")
    p_cmp.add_argument("--routes", nargs="+", required=True,
                       help="candidate files (CSV trajectory or route GeoJSON)")
    p_cmp.add_argument("--baseline", required=True)
    p_cmp.add_argument("--lcss-eps", type=float, default=2.0)
    p_cmp.add_argument("--share-tol", type=float, default=1.0)
    p_cmp.add_argument("--out", help="similarity report JSON path")

    p_fit = sub.add_parser("fit", help="fit cost coefficients", parents=[common])
    p_fit.add_argument("training", help="scored-segment CSV")
    p_fit.add_argument("--model", choices=["ols", "ridge", "lasso", "all"],
                       default="all")
    p_fit.add_argument("--lam", type=float, default=None,
                       help="penalty; default: CV grid search")
    p_fit.add_argument("--folds", type=int, default=10)
    p_fit.add_argument("--timings", action="store_true",
                       help="include wall-clock fields (non-deterministic)")
    p_fit.add_argument("--out", help="fit result JSON path")
    p_fit.add_argument("--emit-cost-config",
                       help="write a cost-model config from the fit")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        handler = {
            "route": cmd_route,
            "graph": cmd_graph,
            "bench": cmd_bench,
            "compare": cmd_compare,
            "fit": cmd_fit,
        }[args.command]
        return handler(args)
    except OpenAreaError as exc:
        _report_error(exc, args.json_errors)
        if isinstance(exc, (NoPathExists, TerminalUnreachable)):
            return EXIT_NO_PATH
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        _report_error(exc, args.json_errors)
        return EXIT_INTERNAL


def _report_error(exc: Exception, as_json: bool) -> None:
    if as_json:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)},
                         sort_keys=True), file=sys.stderr)
    else:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)


def _parse_xy(text: str, scene, crs: str) -> Point:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise ParseError(f"coordinates must be X,Y; got {text!r}") from exc
    if crs == "wgs84":
        return scene.project(x, y)
    return Point(x, y)


def _load_scene_file(path: str):
    if not Path(path).exists():
        raise ParseError(f"scene file {path!r} does not exist")
    return load_scene(path)


def _load_model(path) -> CostModel:
    if not path:
        return CostModel()
    if not Path(path).exists():
        raise ParseError(f"cost config {path!r} does not exist")
    return load_cost_config(path)


def _write_json(doc: dict, path) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        print(text, end="")


def cmd_route(args) -> int:
    scene = _load_scene_file(args.scene)
    model = _load_model(args.cost_config)
    origin = _parse_xy(args.origin, scene, args.crs)
    destination = _parse_xy(args.destination, scene, args.crs)
    network = ExternalNetwork.load(args.network) if args.network else None
    result = route(scene, origin, destination, args.algorithm, model, network)
    if args.out:
        dump_geojson(export_geometry(result), args.out)
    gates = ",".join(result.gates_used) if result.gates_used else "-"
    print(f"route cost={result.total_cost:.6f} length_m={result.total_length_m:.6f} "
          f"nodes={result.graph_nodes} links={result.graph_links} "
          f"iterations={result.iterations} algorithm={result.algorithm} gates={gates}")
    return EXIT_OK


def cmd_graph(args) -> int:
    scene = _load_scene_file(args.scene)
    model = _load_model(args.cost_config)
    origin = _parse_xy(args.origin, scene, args.crs)
    destination = _parse_xy(args.destination, scene, args.crs)
    graph = build_full_graph(scene, 0, origin, destination, model)
    if args.out:
        dump_geojson(export_geometry(graph), args.out)
    print(f"graph nodes={len(graph.nodes)} links={len(graph.links)}")
    return EXIT_OK


def _random_terminals(scene, rng):
    area = scene.areas[0]
    m = area.mbr()
    pts = []
    while len(pts) < 2:
        p = Point(rng.uniform(m.lo.x, m.hi.x), rng.uniform(m.lo.y, m.hi.y))
        if point_in_polygon(p, area) is not Containment.INSIDE:
            continue
        if pts and pts[0].distance_to(p) < 1e-3 * (1 + m.diameter):
            continue
        pts.append(p)
    return pts


def cmd_bench(args) -> int:
    if args.trials < 1:
        raise ValidationError("--trials must be >= 1")
    scene = _load_scene_file(args.scene)
    model = _load_model(args.cost_config)
    rng = np.random.default_rng(args.seed)
    rows = []
    for i in range(args.trials):
        s, t = _random_terminals(scene, rng)
        rep = compare_algorithms(scene, s, t, model)
        for row in rep.to_rows(include_ms=args.timings):
            row["trial"] = i
            row["from"] = [round(s.x, 9), round(s.y, 9)]
            row["to"] = [round(t.x, 9), round(t.y, 9)]
            rows.append(row)
    full_costs = {r["trial"]: r["cost"] for r in rows if r["algorithm"] == "full"}
    hier_costs = {r["trial"]: r["cost"] for r in rows if r["algorithm"] == "hier"}
    ratios = [hier_costs[i] / full_costs[i] for i in full_costs if full_costs[i] > 0]
    summary = {
        "mean_full_nodes": _mean(rows, "full", "nodes"),
        "mean_hier_nodes": _mean(rows, "hier", "nodes"),
        "mean_full_links": _mean(rows, "full", "links"),
        "mean_hier_links": _mean(rows, "hier", "links"),
        "mean_hier_iterations": _mean(rows, "hier", "iterations"),
        "mean_cost_ratio": round(sum(ratios) / max(len(ratios), 1), 9),
    }
    doc = {"seed": args.seed, "rows": rows, "summary": summary}
    _write_json(doc, args.out)
    if args.out:
        print(f"bench trials={args.trials} mean_full_nodes={summary['mean_full_nodes']} "
              f"mean_hier_nodes={summary['mean_hier_nodes']}")
    return EXIT_OK


def _mean(rows, algorithm, key) -> float:
    vals = [r[key] for r in rows if r["algorithm"] == algorithm]
    return round(sum(vals) / len(vals), 9)


def _load_candidate(path: str, projector=None):
    p = Path(path)
    if not p.exists():
        raise ParseError(f"route file {path!r} does not exist")
    if p.suffix.lower() == ".csv":
        return p.stem, load_trajectory_csv(p, projector)
    doc = json.loads(p.read_text())
    for feat in doc.get("features", []):
        if feat.get("geometry", {}).get("type") == "LineString":
            pts = [tuple(c[:2]) for c in feat["geometry"]["coordinates"]]
            if projector:
                pts = [projector(x, y) for x, y in pts]
            return p.stem, trajectory_from_points(pts)
    raise ParseError(f"{path!r} contains no LineString feature")


def _wgs84_projector(csv_path):
    """Tangent-plane projection about the trajectory's own centroid; the
    similarity measures are rigid-invariant, so the origin choice is free."""
    import csv as csv_mod
    import math

    with open(csv_path, newline="") as fh:
        rows = list(csv_mod.reader(fh))[1:]
    lons = [float(r[1]) for r in rows if r and r[0].strip()]
    lats = [float(r[2]) for r in rows if r and r[0].strip()]
    if not lons:
        raise ParseError(f"no coordinates in {csv_path!r}")
    lon0, lat0 = sum(lons) / len(lons), sum(lats) / len(lats)
    radius = 6_371_000.0

    def project(lon, lat):
        return Point(math.radians(lon - lon0) * math.cos(math.radians(lat0)) * radius,
                     math.radians(lat - lat0) * radius)

    return project


def cmd_compare(args) -> int:
    if not Path(args.actual).exists():
        raise ParseError(f"trajectory {args.actual!r} does not exist")
    projector = _wgs84_projector(args.actual) if args.crs == "wgs84" else None
    actual = load_trajectory_csv(args.actual, projector)
    candidates = dict(_load_candidate(p, projector) for p in args.routes)
    if args.baseline not in candidates:
        raise ValidationError(
            f"--baseline {args.baseline!r} is not among {sorted(candidates)}")
    report = compare_routes(actual, candidates, args.baseline,
                            lcss_eps=args.lcss_eps, share_tol=args.share_tol)
    _write_json(report.to_dict(), args.out)
    if args.out:
        print(f"compare baseline={args.baseline} candidates={len(candidates)}")
    return EXIT_OK


_LAMBDA_GRID = tuple(float(10 ** e) for e in np.linspace(-4, 1, 11))


def _pick_lambda(fitter_for, X, y, k, seed) -> float:
    best_lam, best_r2 = None, -np.inf
    for lam in _LAMBDA_GRID:
        res = cross_validate(fitter_for(lam), X, y, k, seed)
        if res.r2_cv_mean > best_r2:
            best_lam, best_r2 = lam, res.r2_cv_mean
    return best_lam


def cmd_fit(args) -> int:
    if not Path(args.training).exists():
        raise ParseError(f"training file {args.training!r} does not exist")
    X_raw, y, names = load_training_csv(args.training)
    X, _, _ = standardize(X_raw)
    models = ["ols", "ridge", "lasso"] if args.model == "all" else [args.model]
    results = {}
    for name in models:
        if name == "ols":
            fitter = lambda A, b: fit_ols(A, b)
            lam = None
        else:
            fit_fn = fit_ridge if name == "ridge" else fit_lasso
            lam = args.lam
            if lam is None:
                lam = _pick_lambda(lambda l: (lambda A, b: fit_fn(A, b, l)),
                                   X, y, args.folds, args.seed)
            fitter = (lambda l: (lambda A, b: fit_fn(A, b, l)))(lam)
        res = cross_validate(fitter, X, y, args.folds, args.seed)
        res.feature_names = names
        entry = res.to_dict(include_ms=args.timings)
        if lam is not None:
            entry["lambda"] = lam
        imp = feature_importance(res)
        entry["importance"] = {n: round(v, 9)
                               for n, v in zip(imp.feature_names, imp.importances)}
        results[name] = entry
    doc = {"folds": args.folds, "seed": args.seed, "models": results}
    _write_json(doc, args.out)
    _print_table(results, args.timings, args.folds)
    if args.emit_cost_config:
        primary = models[-1]
        imp = feature_importance(_result_stub(results[primary], names))
        coeffs = to_cost_coefficients(imp)
        cfg = CostModel(coefficients=coeffs).to_dict()
        Path(args.emit_cost_config).write_text(json.dumps(cfg, sort_keys=True, indent=2) + "\n")
        print(f"cost config written to {args.emit_cost_config}")
    return EXIT_OK


def _result_stub(entry: dict, names):
    from .learning import FitResult

    return FitResult(np.array(entry["coefficients"]), entry["intercept"],
                     entry["r2_train"], 0.0, tuple(names))


def _print_table(results: dict, timings: bool, folds: int) -> None:
    rows = []
    label = {"ols": "OLS (Ordinary Least Squares)", "lasso": "LASSO",
             "ridge": "Ridge Regression"}
    for key in ("ols", "lasso", "ridge"):
        if key in results:
            r = results[key]
            ms = f"{r['train_ms']:.0f}" if timings and "train_ms" in r else "-"
            rows.append((label[key], f"{r['r2_cv_mean']:.4f}", ms))
    for name in UNIMPLEMENTED_MODELS:
        rows.append((name, "not implemented", "-"))
    width = max(len(r[0]) for r in rows) + 2
    header = f"R2 ({folds}-fold CV)"
    print(f"{'Prediction Method':<{width}}{header:<18}Training ms")
    for name, r2v, ms in rows:
        print(f"{name:<{width}}{r2v:<18}{ms}")


if __name__ == "__main__":
    sys.exit(main())
