"""Command line front-end.

    python3 -m boundarykit sample    --kind annulus --n 3000 --seed 7 --out cloud.csv
    python3 -m boundarykit calibrate --input cloud.csv --d 2 --out-dir run/
    python3 -m boundarykit detect    --input cloud.csv --d 2 --out-dir run/
    python3 -m boundarykit estimate  --input cloud.csv --d 2 --out-dir run/
    python3 -m boundarykit rates     --kind annulus --n-list 500,1000,2000 --seeds 0,1 --out-dir run/

Exit codes: 0 success, 2 configuration error, 3 numerical or degeneracy
error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import calibrate as cal
from . import errors as E
from . import formats as fmt
from . import pipeline as pl
from .numerics import THREADS_ENV
from .patches import hausdorff_to_truth
from .synth import KINDS, make_manifold

log = logging.getLogger("boundarykit")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

_CONFIG_ERRORS = (
    E.InvalidParams,
    E.ParamsOutOfRange,
    E.InvalidK,
    E.DimensionMismatch,
    E.DimensionTooHigh,
    E.EmptyInput,
    E.EmptyCloud,
    E.IndexOutOfRange,
    E.OutsideDomain,
)
_NUMERIC_ERRORS = (
    E.InsufficientNeighbors,
    E.DegenerateSpectrum,
    E.RankDeficient,
    E.NoAdmissibleScale,
    E.DegenerateNormal,
    E.TooFewRadii,
    E.EmptyComplex,
    E.EmptySet,
)


class ConfigError(Exception):
    pass


def _params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = int(v)
        except ValueError:
            try:
                out[k] = float(v)
            except ValueError:
                raise ConfigError(f"--param {k}: {v!r} is not a number") from None
    return out


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated integer list, got {text!r}") from None


def _sidecar_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".json")


def _load_input(args):
    """(cloud, manifold or None) from --input or a --kind request."""
    if (args.input is None) == (args.kind is None):
        raise ConfigError("give exactly one of --input or --kind")
    if args.kind is not None:
        if args.n is None:
            raise ConfigError("--kind needs --n")
        manifold = make_manifold(args.kind, **_params(args.param))
        return manifold.sample_uniform(args.n, args.seed), manifold
    path = Path(args.input)
    manifold = None
    side = _sidecar_path(path)
    if side.exists() and not args.no_truth:
        meta = fmt.read_json(side)
        if meta.get("kind") in KINDS:
            manifold = make_manifold(meta["kind"], **meta.get("params", {}))
    d = args.d if args.d is not None else (manifold.intrinsic_dim if manifold else None)
    if d is None:
        raise ConfigError("--d is required for an input file without a synth sidecar")
    return fmt.read_cloud_csv(path, d), manifold


def _calib_kwargs(args) -> dict:
    return {
        "k": args.k,
        "delta": args.delta,
        "jump_rule": args.jump_rule,
        "factor": args.factor,
        "h": args.h,
        "R0": args.R0,
        "rho": args.rho,
    }


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_calibration(out: Path, report: cal.CalibrationReport, cloud, tangents) -> None:
    report.distortion_pairs = cal.distortion_curve(cloud, tangents)
    fmt.write_json(out / "calibration.json", fmt.calibration_doc(report), "calibration")
    fmt.write_calibration_csvs(out / "calibration", report)


def cmd_sample(args) -> int:
    manifold = make_manifold(args.kind, **_params(args.param))
    if args.n is None:
        raise ConfigError("--n is required")
    cloud = manifold.sample_uniform(args.n, args.seed)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt.write_cloud_csv(path, cloud)
    fmt.write_json(_sidecar_path(path), fmt.synth_sidecar(manifold, args.n, args.seed), "synth")
    log.info("wrote %d points to %s", cloud.n, path)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cloud, manifold = _load_input(args)
    out = _out_dir(args)
    report, tangents, _ = pl.calibrate_cloud(cloud, manifold=manifold, threads=args.threads, **_calib_kwargs(args))
    _write_calibration(out, report, cloud, tangents)
    print(json.dumps(fmt.calibration_doc(report), sort_keys=True))
    return EXIT_OK


def _detect(args):
    cloud, manifold = _load_input(args)
    out = _out_dir(args)
    run = pl.run_detection(cloud, r=args.r, manifold=manifold, threads=args.threads, **_calib_kwargs(args))
    _write_calibration(out, run.report, cloud, run.tangents)
    fmt.write_json(out / "boundary.json", fmt.boundary_result_doc(run.result), "boundary_result")
    fmt.write_boundary_csv(out / "boundary.csv", run.result, cloud.ambient_dim)
    if args.save_tangents:
        fmt.write_json(out / "tangents.json", fmt.tangent_field_doc(run.tangents), "tangent_field")
    return cloud, manifold, run, out


def cmd_detect(args) -> int:
    cloud, manifold, run, out = _detect(args)
    summary = {"n": cloud.n, "detected": len(run.result.detected), "rho": None if math.isinf(run.report.rho) else run.report.rho}
    if manifold is not None:
        summary.update(pl.boundary_metrics(cloud, run.result, manifold))
    print(json.dumps(summary, sort_keys=True, default=_json_default))
    return EXIT_OK


def cmd_estimate(args) -> int:
    cloud, manifold, run, out = _detect(args)
    cx = pl.estimate(cloud, run, args.eps_int, args.eps_bd, adaptive=not args.no_adapt)
    fmt.write_json(out / "patches.json", fmt.patch_complex_doc(cx), "patch_complex")
    metrics = {"n": cloud.n, "n_inner": cx.n_inner, "n_boundary": cx.n_boundary, **cx.params()}
    if manifold is not None:
        rep = hausdorff_to_truth(cx, manifold, m_truth=args.m_truth, per_patch=args.per_patch, seed=args.seed)
        fmt.write_json(out / "hausdorff.json", fmt.hausdorff_doc(rep), "hausdorff")
        metrics.update({k: rep[k] for k in ("sup_M_to_Mhat", "sup_Mhat_to_M", "d_H", "truth_resolution")})
        metrics.update(pl.boundary_metrics(cloud, run.result, manifold))
    metrics = {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in metrics.items()}
    fmt.write_json(out / "metrics.json", metrics, "metrics")
    print(json.dumps(metrics, sort_keys=True))
    return EXIT_OK


def cmd_rates(args) -> int:
    if args.kind is None:
        raise ConfigError("rates needs --kind")
    n_list, seeds = _int_list(args.n_list), _int_list(args.seeds)
    out = _out_dir(args)
    rows, slopes = pl.rates(
        args.kind,
        n_list,
        seeds,
        manifold_params=_params(args.param),
        with_manifold=args.with_manifold,
        threads=args.threads,
        **{k: v for k, v in _calib_kwargs(args).items() if k in ("k", "delta", "jump_rule", "factor")},
    )
    cols = ["n", "seed", "dH_boundary_cover", "dH_boundary_excess"]
    if args.with_manifold:
        cols.append("dH_manifold")
    cols += ["n_detected", "h", "R0", "rho", "r_eff"]
    clean = [{k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in r.items()} for r in rows]
    fmt.write_rows_csv(out / "rates.csv", clean, cols)
    doc = {"kind": args.kind, "n_list": n_list, "seeds": seeds, "slopes": slopes}
    fmt.write_json(out / "rates.json", doc, "rates")
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK


def _json_default(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    raise TypeError(type(v))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boundarykit", description="Boundary detection and boundary-adaptive manifold estimation.")
    p.add_argument("--threads", type=int, default=None, help=f"worker threads (fallback: ${THREADS_ENV}, then 1)")
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", required=True)

    def synth_flags(sp, required_kind=False):
        sp.add_argument("--kind", choices=KINDS, required=required_kind)
        sp.add_argument("--n", type=int)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--param", action="append", metavar="KEY=VALUE", help="manifold parameter (repeatable)")

    def run_flags(sp):
        synth_flags(sp)
        sp.add_argument("--input", help="point cloud CSV (header x0,...)")
        sp.add_argument("--d", type=int, help="intrinsic dimension of the input cloud")
        sp.add_argument("--no-truth", action="store_true", help="ignore a synth sidecar next to --input")
        sp.add_argument("--out-dir", default=".")
        sp.add_argument("--k", type=int, help="neighbour count for the bandwidth h")
        sp.add_argument("--h", type=float)
        sp.add_argument("--R0", type=float)
        sp.add_argument("--rho", type=float)
        sp.add_argument("--r", type=float, default=0.0)
        sp.add_argument("--delta", type=float, default=cal.DEFAULT_DELTA)
        sp.add_argument("--jump-rule", choices=cal.JUMP_RULES, default=pl.DEFAULT_JUMP_RULE)
        sp.add_argument("--factor", type=float, default=cal.DEFAULT_JUMP_FACTOR)
        sp.add_argument("--save-tangents", action="store_true")

    sp = sub.add_parser("sample", help="sample a synthetic manifold to CSV")
    synth_flags(sp, required_kind=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sample)

    for name, func, text in (
        ("calibrate", cmd_calibrate, "data-driven h, R0, rho"),
        ("detect", cmd_detect, "boundary observations and normals"),
        ("estimate", cmd_estimate, "boundary-adaptive patch estimator"),
    ):
        sp = sub.add_parser(name, help=text)
        run_flags(sp)
        if name == "estimate":
            sp.add_argument("--eps-int", type=float)
            sp.add_argument("--eps-bd", type=float)
            sp.add_argument("--no-adapt", action="store_true", help="all-inner baseline")
            sp.add_argument("--m-truth", type=int, default=20000)
            sp.add_argument("--per-patch", type=int, default=8)
        sp.set_defaults(func=func)

    sp = sub.add_parser("rates", help="rate sweep over sample sizes and seeds")
    sp.add_argument("--kind", choices=KINDS, required=True)
    sp.add_argument("--n-list", required=True)
    sp.add_argument("--seeds", default="0")
    sp.add_argument("--param", action="append", metavar="KEY=VALUE")
    sp.add_argument("--out-dir", default=".")
    sp.add_argument("--with-manifold", action="store_true", help="also evaluate the patch estimator")
    sp.add_argument("--k", type=int)
    sp.add_argument("--delta", type=float, default=cal.DEFAULT_DELTA)
    sp.add_argument("--jump-rule", choices=cal.JUMP_RULES, default=pl.DEFAULT_JUMP_RULE)
    sp.add_argument("--factor", type=float, default=cal.DEFAULT_JUMP_FACTOR)
    sp.add_argument("--h", type=float)
    sp.add_argument("--R0", type=float)
    sp.add_argument("--rho", type=float)
    sp.set_defaults(func=cmd_rates)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, *_CONFIG_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, fmt.FormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
