"""Command-line surface: sampling, evaluation, and analytics over JSON models.

Exit codes: 0 success, 2 configuration error (bad flags, specs, or
unsupported requests), 3 runtime/sampling error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analytics import (
    empirical_kendall_tau,
    empirical_tail_dep,
    kendall_dist_truncated,
    tail_dep_exchangeable_equal_t,
    tail_dep_tilted,
)
from .copulas import (
    ArchimedeanCopula,
    ModelTruncation,
    ProductTruncation,
    TiltedArchimedeanTruncation,
    TruncationPoint,
    truncate_general,
)
from .frailty import rng_stream
from .modelspec import SCHEMA, load_model, model_to_dict
from .sampling import (
    SamplingError,
    empirical_copula_distance,
    oracle_sample,
    pseudo_observations,
    sample_truncated,
    transform_margins,
    write_csv,
    write_meta,
)

_FAST_FORMS = (TiltedArchimedeanTruncation, ModelTruncation, ProductTruncation)

# data behind the sample-cloud figures: (model spec, list of truncation points)
FIGURES = {
    "mo": (
        {"kind": "marshall_olkin", "alpha1": 0.2, "alpha2": 0.7},
        [(1.0, 1.0), (0.5, 0.8), (0.8, 0.5), (0.3, 0.3)],
    ),
    "survival-gumbel": (
        {
            "kind": "survival",
            "inner": {
                "kind": "archimedean",
                "generator": {"family": "gumbel", "theta": 2.0},
                "d": 2,
            },
        },
        [(1.0, 1.0), (0.5, 0.5), (0.3, 0.7), (0.7, 0.3)],
    ),
    # parameters chosen so Kendall's tau is 0.5 at the root, 0.75 in the sector
    "nested-clayton": (
        {
            "kind": "nested_archimedean",
            "root": {"family": "clayton", "theta": 2.0},
            "sectors": [
                {"generator": {"family": "clayton", "theta": 2.0}, "d": 1},
                {"generator": {"family": "clayton", "theta": 6.0}, "d": 2},
            ],
        },
        [(1.0, 1.0, 1.0), (0.2, 0.5, 0.5), (0.2, 0.1, 0.9)],
    ),
    "nested-gumbel": (
        {
            "kind": "nested_archimedean",
            "root": {"family": "gumbel", "theta": 2.0},
            "sectors": [
                {"generator": {"family": "gumbel", "theta": 2.0}, "d": 1},
                {"generator": {"family": "gumbel", "theta": 4.0}, "d": 2},
            ],
        },
        [(1.0, 1.0, 1.0), (0.9, 0.9, 0.9), (0.5, 0.5, 0.5)],
    ),
}


class ConfigError(Exception):
    pass


def _add_common(sp, model_required=True):
    sp.add_argument("--model", required=model_required, help="path to a model-spec JSON file")
    sp.add_argument("--t", help="truncation point, comma-separated reals in (0,1]")
    sp.add_argument("--n", type=int, default=1000, help="number of rows/samples")
    sp.add_argument("--seed", type=int, default=0, help="RNG seed")
    sp.add_argument(
        "--method",
        choices=("auto", "tilted", "oracle"),
        default="auto",
        help="sampling route: fast dispatch, forced tilted/closed path, or oracle",
    )
    sp.add_argument("--out", help="output path (CSV or JSON depending on command)")


def build_parser():
    p = argparse.ArgumentParser(
        prog="trunca",
        description="Right-truncated copulas: sampling, evaluation, tail analytics.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="sample a (truncated) copula to CSV")
    _add_common(sp)
    sp.add_argument("--raw", action="store_true", help="skip the rank (pseudo-observation) transform")

    sp = sub.add_parser("cdf", help="evaluate the model CDF at points")
    _add_common(sp)
    sp.add_argument("--u", action="append", required=True, help="evaluation point, comma-separated; repeatable")

    sp = sub.add_parser("truncate-eval", help="evaluate the truncated copula at points")
    _add_common(sp)
    sp.add_argument("--u", action="append", required=True, help="evaluation point, comma-separated; repeatable")

    sp = sub.add_parser("taildep", help="tail-dependence report for a truncated model")
    _add_common(sp)
    sp.add_argument("--q", type=float, help="threshold for an additional empirical estimate")

    sp = sub.add_parser("kendall", help="empirical Kendall tau matrix of truncated samples")
    _add_common(sp)
    sp.add_argument("--u", action="append", help="also tabulate the Kendall distribution at these u")

    sp = sub.add_parser("oracle-compare", help="fast path vs rejection oracle, sup distance")
    _add_common(sp)
    sp.add_argument("--threshold", type=float, default=0.015, help="pass/fail sup-distance threshold")

    sp = sub.add_parser("figure-data", help="write the CSV panels behind the sample figures")
    sp.add_argument("--figure", required=True, choices=sorted(FIGURES))
    sp.add_argument("--n", type=int, default=5000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="output directory")
    return p


def _parse_vector(text, d, what):
    try:
        vec = np.asarray([float(tok) for tok in text.split(",")], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {what} {text!r}: {exc}") from None
    if vec.size != d:
        raise ConfigError(f"{what} must have {d} components, got {vec.size}")
    return vec


def _load(args):
    path = Path(args.model)
    if not path.exists():
        raise ConfigError(f"model file not found: {path}")
    try:
        model = load_model(path)
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"invalid model spec: {exc}") from None
    return model


def _truncation(args, model):
    if args.t is None:
        raise ConfigError("this command requires --t")
    t = _parse_vector(args.t, model.d, "--t")
    try:
        return TruncationPoint.make(model, t)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _sample(model, tp, args, rng):
    tc = truncate_general(model, tp)
    if args.method == "oracle":
        return transform_margins(oracle_sample(model, tp, args.n, rng), model, tp)
    if args.method == "tilted" and not isinstance(tc, _FAST_FORMS):
        raise ConfigError(
            f"model of kind {model.kind!r} has no tilted/closed sampling path; "
            "use --method auto or oracle"
        )
    return sample_truncated(tc, args.n, rng)


def _emit_json(payload, out):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_sample(args):
    model = _load(args)
    tp = _truncation(args, model)
    if args.n < 1:
        raise ConfigError("--n must be at least 1")
    if not args.out:
        raise ConfigError("sample requires --out")
    rng = rng_stream(args.seed)
    sm = _sample(model, tp, args, rng)
    if not args.raw:
        sm = pseudo_observations(sm)
    sm.meta.update(
        {
            "schema": SCHEMA,
            "model": model_to_dict(model, schema=False),
            "t": tp.t.tolist(),
            "c_of_t": tp.c_of_t,
            "seed": args.seed,
            "n": sm.n,
            "raw": bool(args.raw),
        }
    )
    write_csv(sm, args.out)
    write_meta(sm, str(args.out) + ".meta.json")
    return 0


def cmd_cdf(args):
    model = _load(args)
    pts = np.vstack([_parse_vector(u, model.d, "--u") for u in args.u])
    vals = np.atleast_1d(model.cdf(pts))
    _emit_json(
        {"schema": SCHEMA, "points": pts.tolist(), "values": vals.tolist()}, args.out
    )
    return 0


def cmd_truncate_eval(args):
    model = _load(args)
    tp = _truncation(args, model)
    tc = truncate_general(model, tp)
    pts = np.vstack([_parse_vector(u, model.d, "--u") for u in args.u])
    vals = np.atleast_1d(tc.cdf(pts))
    _emit_json(
        {
            "schema": SCHEMA,
            "t": tp.t.tolist(),
            "c_of_t": tp.c_of_t,
            "form": tc.form,
            "points": pts.tolist(),
            "values": vals.tolist(),
        },
        args.out,
    )
    return 0


def cmd_taildep(args):
    model = _load(args)
    tp = _truncation(args, model)
    if isinstance(model, ArchimedeanCopula):
        h = float(model.generator.psi_inv(tp.c_of_t))
        report = tail_dep_tilted(model.generator, h)
    elif np.all(tp.t == tp.t[0]) and model.d == 2:
        report = tail_dep_exchangeable_equal_t(model, float(tp.t[0]))
    else:
        raise ConfigError(
            "tail dependence needs an Archimedean model or an exchangeable "
            "bivariate model truncated at equal thresholds"
        )
    payload = report.to_dict()
    if args.q is not None:
        rng = rng_stream(args.seed)
        sm = _sample(model, tp, args, rng)
        emp = empirical_tail_dep(sm, args.q)
        payload["empirical"] = emp.to_dict()
    _emit_json({"schema": SCHEMA, "t": tp.t.tolist(), **payload}, args.out)
    return 0


def cmd_kendall(args):
    model = _load(args)
    tp = _truncation(args, model)
    rng = rng_stream(args.seed)
    sm = _sample(model, tp, args, rng)
    d = sm.dim
    tau = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            tau[i, j] = tau[j, i] = empirical_kendall_tau(sm, i, j)
    payload = {"schema": SCHEMA, "t": tp.t.tolist(), "n": sm.n, "tau": tau.tolist()}
    if args.u and isinstance(model, ArchimedeanCopula):
        us = np.asarray([float(tok) for text in args.u for tok in text.split(",")])
        payload["kendall_dist"] = {
            "u": us.tolist(),
            "K": np.atleast_1d(
                kendall_dist_truncated(model.generator, tp.t, us, d=model.d)
            ).tolist(),
        }
    _emit_json(payload, args.out)
    return 0


def cmd_oracle_compare(args):
    model = _load(args)
    tp = _truncation(args, model)
    tc = truncate_general(model, tp)
    if not isinstance(tc, _FAST_FORMS):
        raise ConfigError(
            f"model of kind {model.kind!r} has no closed-form sampling path to compare"
        )
    fast = sample_truncated(tc, args.n, rng_stream(args.seed, stream=0))
    raw = oracle_sample(model, tp, args.n, rng_stream(args.seed, stream=1))
    orc = transform_margins(raw, model, tp)
    dist = empirical_copula_distance(fast, orc)
    rate = raw.meta["accept_rate"]
    se = np.sqrt(tp.c_of_t * (1.0 - tp.c_of_t) / raw.meta["proposals"])
    payload = {
        "schema": SCHEMA,
        "t": tp.t.tolist(),
        "n": args.n,
        "sup_distance": dist,
        "threshold": args.threshold,
        "pass": bool(dist <= args.threshold),
        "accept_rate": rate,
        "c_of_t": tp.c_of_t,
        "accept_rate_z": float((rate - tp.c_of_t) / se) if se > 0 else 0.0,
    }
    _emit_json(payload, args.out)
    return 0


def cmd_figure_data(args):
    from .modelspec import model_from_dict

    spec, points = FIGURES[args.figure]
    model = model_from_dict(spec)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for k, t in enumerate(points):
        tp = TruncationPoint.make(model, np.asarray(t, dtype=float))
        rng = rng_stream(args.seed, stream=k)
        tc = truncate_general(model, tp)
        sm = pseudo_observations(sample_truncated(tc, args.n, rng))
        sm.meta.update(
            {
                "schema": SCHEMA,
                "figure": args.figure,
                "model": model_to_dict(model, schema=False),
                "t": tp.t.tolist(),
                "seed": args.seed,
                "panel": k,
            }
        )
        stem = outdir / f"{args.figure}_panel{k}"
        write_csv(sm, f"{stem}.csv")
        write_meta(sm, f"{stem}.csv.meta.json")
    return 0


_COMMANDS = {
    "sample": cmd_sample,
    "cdf": cmd_cdf,
    "truncate-eval": cmd_truncate_eval,
    "taildep": cmd_taildep,
    "kendall": cmd_kendall,
    "oracle-compare": cmd_oracle_compare,
    "figure-data": cmd_figure_data,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SamplingError as exc:
        print(f"sampling error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
