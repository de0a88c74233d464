"""Command-line front door.

Exit codes are the machine contract: 0 when the run passes (or the bound
is vacuous), 1 when an experiment verdict is fail, 2 on usage or parse
errors.  Human-readable text goes to stderr; structured results go to
the report file named in the config (or --out).

Seeds are mandatory everywhere: reproducibility is the product, so
nothing ever falls back to wall-clock entropy.  The --threads flag only
partitions sampling work and can never change a reported value.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import io
from .chaos import ChaosElement, evaluate, linear_combine, moment, sample, single_integral
from .experiments import (ExperimentReport, MultilinearSpec, SequenceSpec,
                          carbery_wright_probe, d12_rate_probe,
                          df_small_ball_probe, dm_rate,
                          fourth_moment_certificate, identity_suite,
                          moo_invariance, pair_sum_element, pair_sum_vector,
                          peccati_tudor_run, rademacher_average,
                          shigekawa_rate)
from .kernels import SymmetricKernel

VERIFY_EXPERIMENTS = ("fourth-moment", "shigekawa", "dm", "cw", "dball",
                      "pt", "moo", "d12")


class ConfigError(ValueError):
    pass


def _cfg(cfg: dict, key: str, kind=None, where: str = "config"):
    if key not in cfg:
        raise ConfigError(f"{where}/{key}: missing required field")
    val = cfg[key]
    if kind is int and isinstance(val, bool):
        raise ConfigError(f"{where}/{key}: expected an integer")
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"{where}/{key}: expected {getattr(kind, '__name__', kind)}")
    return val


def _cfg_samples(cfg: dict, minimum: int = 1000) -> int:
    n = int(_cfg(cfg, "n_samples", int))
    if n < minimum:
        raise ConfigError(f"config/n_samples: need at least {minimum} for distance estimation")
    return n


def _kernel_from_config(cfg: dict, key: str) -> SymmetricKernel:
    obj = _cfg(cfg, key)
    if isinstance(obj, str):
        return io.load_kernel(obj)
    if isinstance(obj, dict) and "file" in obj:
        return io.load_kernel(obj["file"])
    return io.kernel_from_dict(obj, where=f"config/{key}")


def _chaos_from_config(cfg: dict, key: str) -> ChaosElement:
    obj = _cfg(cfg, key)
    if isinstance(obj, str):
        return io.load_chaos(obj)
    if isinstance(obj, dict) and "file" in obj:
        return io.load_chaos(obj["file"])
    return io.chaos_from_dict(obj, where=f"config/{key}")


def _members_from_config(cfg: dict):
    """Family members as (label, element) pairs: pair-sum sizes or chaos files."""
    if "indices" in cfg:
        return [(float(n), pair_sum_element(int(n)))
                for n in _cfg(cfg, "indices", list)]
    files = _cfg(cfg, "members", list)
    out = []
    for i, path in enumerate(files):
        if not isinstance(path, str):
            raise ConfigError(f"config/members/{i}: expected a file path")
        out.append((float(i), io.load_chaos(path)))
    return out


def _limit_from_config(cfg: dict) -> ChaosElement:
    obj = _cfg(cfg, "limit")
    if obj == "standard-gaussian":
        return ChaosElement(1, 0.0, {1: SymmetricKernel(1, 1, {(1,): 1.0})})
    return _chaos_from_config(cfg, "limit")


def _run_verify(name: str, cfg: dict, workers: int) -> ExperimentReport:
    seed = int(_cfg(cfg, "seed", int))
    if name == "fourth-moment":
        spec = SequenceSpec("pair-sum",
                            indices=tuple(int(n) for n in _cfg(cfg, "indices", list)))
        return fourth_moment_certificate(int(cfg.get("k", 2)), spec,
                                         _cfg_samples(cfg), seed, workers=workers)
    if name == "shigekawa":
        members = _members_from_config(cfg)
        return shigekawa_rate(int(_cfg(cfg, "p", int)), members,
                              _limit_from_config(cfg), _cfg_samples(cfg), seed,
                              workers=workers)
    if name == "dm":
        base = _kernel_from_config(cfg, "base")
        direction = _kernel_from_config(cfg, "direction")
        scales = [float(t) for t in _cfg(cfg, "scales", list)]
        return dm_rate(int(_cfg(cfg, "k", int)), base,
                       [(t, direction) for t in scales],
                       _cfg_samples(cfg), seed, workers=workers)
    if name == "cw":
        return carbery_wright_probe(_chaos_from_config(cfg, "chaos"),
                                    [float(a) for a in _cfg(cfg, "alphas", list)],
                                    _cfg_samples(cfg, 10_000), seed, workers=workers)
    if name == "dball":
        return df_small_ball_probe(_chaos_from_config(cfg, "chaos"),
                                   [float(v) for v in _cfg(cfg, "lambdas", list)],
                                   _cfg_samples(cfg, 10_000), seed, workers=workers)
    if name == "pt":
        cov = np.asarray(cfg.get("covariance", [[1.0, 0.0], [0.0, 1.0]]), dtype=float)
        vectors = [(float(n), pair_sum_vector(int(n)))
                   for n in _cfg(cfg, "indices", list)]
        return peccati_tudor_run([1, 2], vectors, cov, _cfg_samples(cfg, 10_000),
                                 seed, workers=workers)
    if name == "moo":
        specs = _moo_specs(cfg)
        return moo_invariance(specs, _cfg_samples(cfg), seed)
    if name == "d12":
        alpha = float(_cfg(cfg, "alpha", (int, float)))
        if "base" in cfg:
            # perturbation family: members I(base + t direction), limit I(base)
            base = single_integral(_kernel_from_config(cfg, "base"))
            direction = single_integral(_kernel_from_config(cfg, "direction"))
            members = [(float(t), linear_combine([(1.0, base), (float(t), direction)]))
                       for t in _cfg(cfg, "scales", list)]
            limit = base
        else:
            members = [(float(i), io.load_chaos(p))
                       for i, p in enumerate(_cfg(cfg, "members", list))]
            limit = _chaos_from_config(cfg, "limit")
        return d12_rate_probe(members, limit, alpha,
                              _cfg_samples(cfg), seed, workers=workers)
    raise ConfigError(f"config/experiment: unknown experiment {name!r}")


def _moo_specs(cfg: dict) -> list[MultilinearSpec]:
    if "sizes" in cfg:
        return [rademacher_average(int(n)) for n in _cfg(cfg, "sizes", list)]
    specs = []
    for i, raw in enumerate(_cfg(cfg, "specs", list)):
        where = f"config/specs/{i}"
        coeffs = {}
        for j, ent in enumerate(_cfg(raw, "coeffs", list, where)):
            subset = tuple(_cfg(ent, "subset", list, f"{where}/coeffs/{j}"))
            coeffs[subset] = float(_cfg(ent, "c", (int, float), f"{where}/coeffs/{j}"))
        specs.append(MultilinearSpec(
            coeffs, law=raw.get("law", "rademacher"),
            law_values=tuple(raw.get("values", ())),
            law_probs=tuple(raw.get("probs", ()))))
    return specs


def _parse_point(text: str, dim: int) -> list[float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    vals = [float(p) for p in parts]
    if len(vals) != dim:
        raise ConfigError(f"point has {len(vals)} coordinates, element has dim {dim}")
    return vals


def _report_summary(rep: ExperimentReport) -> str:
    lines = [f"{rep.experiment}: verdict {rep.verdict} "
             f"({len(rep.rows)} rows, {rep.wall_clock:.2f}s)"]
    lines += [f"  note: {n}" for n in rep.notes]
    return "\n".join(lines)


def _write_rows_csv(rep: ExperimentReport, path: str) -> None:
    cols: list[str] = []
    for row in rep.rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in rep.rows:
            writer.writerow([json.dumps(row.get(c), sort_keys=True) for c in cols])


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaoslab",
        description="Wiener chaos laboratory: exact moments, Malliavin "
                    "operators, and Monte Carlo distance experiments.")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for sampling; never changes values")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate a chaos file at a point")
    p_eval.add_argument("--chaos", required=True)
    p_eval.add_argument("--point", required=True,
                        help="comma-separated coordinates, e.g. '0.3,-1.2'")

    p_mom = sub.add_parser("moments", help="exact moments of a chaos file")
    p_mom.add_argument("--chaos", required=True)
    p_mom.add_argument("--max", type=int, default=4, dest="max_order")

    p_sam = sub.add_parser("sample", help="draw Monte Carlo samples to CSV")
    p_sam.add_argument("--chaos", required=True)
    p_sam.add_argument("-n", type=int, required=True, dest="count")
    p_sam.add_argument("--seed", type=int, required=True)
    p_sam.add_argument("--out", required=True)

    p_ver = sub.add_parser("verify", help="run a theorem experiment from a config")
    p_ver.add_argument("experiment", choices=VERIFY_EXPERIMENTS)
    p_ver.add_argument("--config", required=True)
    p_ver.add_argument("--out", default=None,
                       help="report path (overrides config 'output')")

    p_chk = sub.add_parser("check", help="run the exact-identity suite")
    p_chk.add_argument("what", choices=["identities"])
    p_chk.add_argument("--trials", type=int, default=100)
    p_chk.add_argument("--seed", type=int, required=True)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        if args.command == "eval":
            fel = io.load_chaos(args.chaos)
            print(f"{evaluate(fel, _parse_point(args.point, fel.dim)):.12g}")
            return 0

        if args.command == "moments":
            fel = io.load_chaos(args.chaos)
            if args.max_order < 1:
                raise ConfigError("--max must be >= 1")
            for m in range(1, args.max_order + 1):
                print(f"m{m}={moment(fel, m):.12g}")
            return 0

        if args.command == "sample":
            fel = io.load_chaos(args.chaos)
            batch = sample(fel, args.count, args.seed, workers=args.threads)
            io.save_samples_csv(batch, args.out)
            print(f"wrote {batch.n} samples to {args.out}", file=sys.stderr)
            return 0

        if args.command == "check":
            rep = identity_suite(args.trials, args.seed)
            print(_report_summary(rep), file=sys.stderr)
            for row in rep.rows:
                print(f"  {row['identity']}: max deviation {row['max_deviation']:.3e}",
                      file=sys.stderr)
            return 0 if rep.verdict in ("pass", "vacuous") else 1

        # verify
        cfg = io.load_json(args.config)
        rep = _run_verify(args.experiment, cfg, workers=args.threads)
        out = args.out or cfg.get("output")
        if out:
            if cfg.get("format", "json") == "csv":
                _write_rows_csv(rep, out)
            else:
                io.save_report(rep, out)
        print(_report_summary(rep), file=sys.stderr)
        return 0 if rep.verdict in ("pass", "vacuous") else 1

    except (ConfigError, io.SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
