"""Command-line interface: pricing, bounds on strike sweeps, figure reproduction."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import datasets
from .market import (MarketDataError, load_market_data, save_market_data, save_results,
                     write_results)
from .model_bounds import build_variance_constraints, model_variance_bounds, prices_from_variance
from .moments import moment_bound
from .pricing import (Basket, CovarianceModel, PriceOutOfRange, basket_call_price, bs_call,
                      implied_variance)
from .solver import DEFAULT_TOL, Status
from .static_bounds import GridSpec, InnerProgram, StaticDataError, outer_bounds

log = logging.getLogger("basket_bounds")

TOL_ENV = "ARB_BOUNDS_TOL"
FIG1_SWEEP = "0:2:0.05"
FIG4_SWEEP = "0:6:0.25"
FIG3_POINTS = 21


def tolerance() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_TOL
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{TOL_ENV} must be positive")
    return value


def parse_vector(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.replace(" ", "").split(",") if v])


def parse_sweep(text: str) -> list:
    """'a:b:h' -> [a, a+h, ..., b] (inclusive, rounded to suppress float drift)."""
    try:
        a, b, h = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"sweep must look like start:stop:step, got {text!r}")
    if not h > 0 or b < a:
        raise argparse.ArgumentTypeError("sweep needs step > 0 and start <= stop")
    count = int(np.floor((b - a) / h + 1e-9)) + 1
    return [round(a + k * h, 12) for k in range(count)]


def _strikes(args) -> list:
    if args.sweep is not None:
        return parse_sweep(args.sweep)
    if args.strike is not None:
        return [args.strike]
    raise SystemExit("error: give --strike or --sweep")


def _map(fn, items, jobs: int):
    """Order-preserving map, optionally on a thread pool."""
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- row builders (shared by `bounds` and `reproduce`) --------------------------------

def _status(*parts) -> str:
    bad = [p for p in parts if p != "Optimal"]
    return "Optimal" if not bad else ";".join(bad)


def static_rows(data, weights, strikes, tol, jobs=1):
    def row(K):
        o = outer_bounds(data, Basket(weights, K), tol)
        return {"strike": K, "outer_lower": o.lower, "outer_upper": o.upper,
                "status": _status("outer " + o.status if not o.optimal else "Optimal")}
    return _map(row, strikes, jobs)


def inner_rows(data, weights, strikes, grid, tol, jobs=1):
    prog = InnerProgram(data, GridSpec(grid))

    def row(K):
        b = prog.bounds(Basket(weights, K), tolerance=tol)
        st = "Optimal" if b.optimal else "inner " + b.status
        if b.note:
            log.warning("strike %s: %s", K, b.note)
        return {"strike": K, "inner_lower": b.lower, "inner_upper": b.upper, "status": st}
    return _map(row, strikes, jobs)


def model_rows(data, weights, strikes, tol):
    constraints = build_variance_constraints(data)
    lo, hi = model_variance_bounds(data, weights, tol, constraints)
    fwd = float(np.asarray(weights) @ data.forwards)
    rows = []
    for K in strikes:
        r = prices_from_variance(lo, hi, fwd, K, data.maturity)
        rows.append({"strike": K, "model_lower": r.price_lower, "model_upper": r.price_upper,
                     "status": r.status if r.status == "Optimal" else "model " + r.status})
    return rows


def moment_rows(data, weights, strikes, degree, box, tol, jobs=1, relations=True,
                localize="all"):
    def row(K):
        r = moment_bound(data, weights, K, degree=degree, box=box, relations=relations,
                         localize=localize, tolerance=tol)
        for note in r.notes:
            log.warning("strike %s: %s", K, note)
        return {"strike": K, "outer_lower": r.lower, "outer_upper": r.upper,
                "status": "Optimal" if r.optimal else "moment " + r.status}
    return _map(row, strikes, jobs)


def merge_rows(*tables):
    """Combine per-strike rows from several bound computations."""
    out = []
    for parts in zip(*tables):
        row = {}
        statuses = []
        for p in parts:
            statuses.append(p.get("status", "Optimal"))
            row.update({k: v for k, v in p.items() if k != "status"})
        row["status"] = _status(*statuses)
        out.append(row)
    return out


def _ok(rows) -> bool:
    return all(r.get("status") == "Optimal" for r in rows)


def _emit(rows, out, columns=None):
    kwargs = {} if columns is None else {"columns": columns}
    if out:
        save_results(out, rows, **kwargs)
    else:
        write_results(sys.stdout, rows, **kwargs)


# -- commands --------------------------------------------------------------------------

def cmd_price(args) -> int:
    if args.model_file:
        raw = json.loads(Path(args.model_file).read_text())
        model = CovarianceModel(raw["forwards"], raw["covariance"])
        if args.weights is None or args.strike is None:
            raise SystemExit("error: --model-file needs --weights and --strike")
        maturity = args.maturity if args.maturity is not None else raw.get("maturity", 1.0)
        price = basket_call_price(Basket(parse_vector(args.weights), args.strike, maturity), model)
    else:
        if None in (args.forward, args.strike, args.variance):
            raise SystemExit("error: give --forward, --strike and --variance, or --model-file")
        price = bs_call(args.forward, args.strike, args.variance)
    print(f"{price:.12g}")
    return 0


def cmd_implied(args) -> int:
    try:
        v = implied_variance(args.price, args.forward, args.strike)
    except PriceOutOfRange as exc:
        print(f"PriceOutOfRange: {exc}", file=sys.stderr)
        return 1
    print(f"{v:.12g}")
    return 0


def cmd_bounds(args) -> int:
    tol = tolerance()
    data = load_market_data(args.data)
    weights = parse_vector(args.target_weights)
    if weights.size != data.n:
        raise SystemExit(f"error: target has {weights.size} weights, data has {data.n} assets")
    strikes = _strikes(args)
    if args.kind == "static":
        rows = static_rows(data, weights, strikes, tol, args.jobs)
    elif args.kind == "inner":
        rows = inner_rows(data, weights, strikes, args.grid, tol, args.jobs)
    elif args.kind == "model":
        rows = model_rows(data, weights, strikes, tol)
    else:
        rows = moment_rows(data, weights, strikes, args.degree, args.box, tol, args.jobs,
                           relations=not args.free_semigroup,
                           localize="assets" if args.assets_only else "all")
    _emit(rows, args.out)
    return 0 if _ok(rows) else 1


def reproduce(figure: str, out_dir: Path, grid: int = 50, degree: int = 1, jobs: int = 1,
              tol: float | None = None):
    """Write the dataset and results table for one figure; returns the rows."""
    tol = tolerance() if tol is None else tol
    out_dir.mkdir(parents=True, exist_ok=True)
    if figure == "fig1":
        data = datasets.discrete_dataset()
        w = datasets.INDEX_WEIGHTS_2
        strikes = parse_sweep(FIG1_SWEEP)
        rows = merge_rows(static_rows(data, w, strikes, tol, jobs),
                          inner_rows(data, w, strikes, grid, tol, jobs))
        columns = None
    elif figure == "fig2":
        data = datasets.discrete_dataset()
        w = datasets.INDEX_WEIGHTS_2
        rows = []
        for k in range(2, len(datasets.DISCRETE_CALLS) + 1):
            sub = datasets.discrete_dataset(k)
            row = merge_rows(static_rows(sub, w, [1.0], tol),
                             inner_rows(sub, w, [1.0], grid, tol))[0]
            rows.append({"instruments": k, **row})
        columns = ["instruments", "strike", "outer_lower", "inner_lower",
                   "inner_upper", "outer_upper"]
    elif figure == "fig3":
        data = datasets.lognormal_dataset()
        w = datasets.INDEX_WEIGHTS_5
        atm = float(w @ data.forwards)
        strikes = [round(v, 12) for v in np.linspace(0.5 * atm, 1.5 * atm, FIG3_POINTS)]
        rows = merge_rows(static_rows(data, w, strikes, tol, jobs),
                          model_rows(data, w, strikes, tol))
        columns = None
    elif figure == "fig4":
        data = datasets.straddle_dataset()
        w = datasets.INDEX_WEIGHTS_2
        strikes = parse_sweep(FIG4_SWEEP)
        rows = moment_rows(data, w, strikes, degree, datasets.STRADDLE_BOX, tol, jobs)
        columns = None
    else:
        raise ValueError(f"unknown figure {figure!r}")
    save_market_data(out_dir / f"{figure}.json", data)
    kwargs = {} if columns is None else {"columns": columns}
    save_results(out_dir / f"{figure}.csv", rows, **kwargs)
    return rows


def cmd_reproduce(args) -> int:
    rows = reproduce(args.figure, Path(args.out_dir), args.grid, args.degree, args.jobs)
    print(f"wrote {Path(args.out_dir) / (args.figure + '.csv')} ({len(rows)} rows)")
    return 0 if _ok(rows) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="basket-bounds", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("price", help="Black price, or the lognormal basket approximation")
    pr.add_argument("--forward", type=float)
    pr.add_argument("--strike", type=float)
    pr.add_argument("--variance", type=float, help="total variance V_T")
    pr.add_argument("--model-file", help="JSON with forwards, covariance and optional maturity")
    pr.add_argument("--weights", help="comma-separated basket weights")
    pr.add_argument("--maturity", type=float)
    pr.set_defaults(func=cmd_price)

    im = sub.add_parser("implied", help="implied total variance of a call price")
    im.add_argument("--price", type=float, required=True)
    im.add_argument("--forward", type=float, required=True)
    im.add_argument("--strike", type=float, required=True)
    im.set_defaults(func=cmd_implied)

    bd = sub.add_parser("bounds", help="price bounds on a target basket, one CSV row per strike")
    bd.add_argument("kind", choices=["static", "inner", "model", "moment"])
    bd.add_argument("--data", required=True, help="market data JSON")
    bd.add_argument("--target-weights", required=True)
    bd.add_argument("--strike", type=float)
    bd.add_argument("--sweep", help="start:stop:step")
    bd.add_argument("--grid", type=int, default=50, help="bins per asset (inner)")
    bd.add_argument("--degree", type=int, default=1, help="relaxation order (moment)")
    bd.add_argument("--box", type=float, default=10.0, help="support box [0, B]^n (moment)")
    bd.add_argument("--free-semigroup", action="store_true",
                    help="moment: drop the straddle identities and dominance constraints")
    bd.add_argument("--assets-only", action="store_true",
                    help="moment: localizing constraints on the asset generators only")
    bd.add_argument("--jobs", type=int, default=1)
    bd.add_argument("--out", help="CSV path (default: stdout)")
    bd.set_defaults(func=cmd_bounds)

    rp = sub.add_parser("reproduce", help="dataset and results table for one figure")
    rp.add_argument("figure", choices=["fig1", "fig2", "fig3", "fig4"])
    rp.add_argument("--out-dir", default=".")
    rp.add_argument("--grid", type=int, default=50)
    rp.add_argument("--degree", type=int, default=1)
    rp.add_argument("--jobs", type=int, default=1)
    rp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (MarketDataError, StaticDataError, PriceOutOfRange, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
