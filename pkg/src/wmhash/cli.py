"""Command line interface: ``wmhash {layout,sketch,estimate,bench,stats}``.

Exit codes: 0 success, 1 domain/data error, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

from . import bench as _bench
from .config import DEFAULT_DELTA, SCHEMES, SchemeConfig
from .errors import LayoutMismatchError, UsageError, WMHError
from .estimate import (
    error_samples,
    estimate_from_sketches,
    estimate_samples,
    exact_jaccard,
    hash_stats,
    sketch_fn,
)
from .redgreen import (
    RedGreenLayout,
    build_layout,
    load_layout,
    mean_sparsity,
    optimize_alpha,
)
from .sketchio import read_sketches, write_sketches
from .vectors import Dataset, load_dataset, load_dataset_with_lines

log = logging.getLogger("wmhash")

__all__ = ["SchemeConfig", "main", "build_parser"]


def _alpha(text: str) -> float | str:
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be a number or 'auto', got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("alpha must be positive")
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(",")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"pairs look like I,J; got {text!r}") from None


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("data", help="sparse text file: 'label idx:val ...' per line")
    p.add_argument("--base", type=int, choices=(0, 1), default=0, help="index origin (default 0)")
    p.add_argument("--dim", type=int, default=None, help="dimension D (default: max index + 1)")


def _resolve_alpha(ds: Dataset, alpha: float | str) -> float:
    return optimize_alpha(ds) if alpha == "auto" else float(alpha)


def cmd_layout(args: argparse.Namespace) -> int:
    ds = load_dataset(args.data, base=args.base, dim=args.dim)
    alpha = _resolve_alpha(ds, args.alpha)
    layout = build_layout(ds.maxima, alpha, low_mem=args.low_mem)
    layout.save(args.output)
    s = mean_sparsity(ds, alpha)
    print(f"D={layout.dim} M={layout.M} components={layout.n_components} "
          f"alpha={alpha:g} mean_s={s:.6g} layout_id={layout.layout_id:016x}")
    return 0


def _layout_for(args: argparse.Namespace, ds: Dataset) -> RedGreenLayout:
    if args.layout:
        return load_layout(args.layout, low_mem=args.low_mem)
    return build_layout(ds.maxima, _resolve_alpha(ds, args.alpha), low_mem=args.low_mem)


def cmd_sketch(args: argparse.Namespace) -> int:
    ds, linenos = load_dataset_with_lines(args.data, base=args.base, dim=args.dim)
    cfg = SchemeConfig(
        scheme=args.scheme,
        k=args.k,
        master_seed=args.seed,
        alpha=args.alpha,
        delta=args.delta,
        low_mem=args.low_mem,
    )
    layout = _layout_for(args, ds) if cfg.scheme == "redgreen" else None
    fn = sketch_fn(cfg.scheme, layout)

    def one(i: int):
        try:
            return fn(ds[i], cfg)
        except LayoutMismatchError as exc:
            raise LayoutMismatchError(f"line {linenos[i]}: {exc}") from None
        except UsageError as exc:
            raise UsageError(f"line {linenos[i]}: {exc}") from None

    if args.threads > 1:
        with ThreadPoolExecutor(args.threads) as pool:
            sketches = list(pool.map(one, range(len(ds))))
    else:
        sketches = [one(i) for i in range(len(ds))]
    log.debug("sketched %d vectors, scheme=%s k=%d", len(sketches), cfg.scheme, cfg.k)
    labels = [v.label for v in ds]
    if args.output == "-":
        write_sketches(sys.stdout.buffer, sketches, fmt=args.format, labels=labels)
    else:
        write_sketches(args.output, sketches, fmt=args.format, labels=labels)
    return 0


def _read_pairs(args: argparse.Namespace) -> list[tuple[int, int]]:
    pairs = list(args.pairs or [])
    if args.pairs_file:
        for line in Path(args.pairs_file).read_text().splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                pairs.append(_pair(line.replace(" ", ",") if "," not in line else line))
    if not pairs:
        raise UsageError("no pairs given; use --pairs I,J or --pairs-file")
    return pairs


def cmd_estimate(args: argparse.Namespace) -> int:
    sketches = read_sketches(args.sketches)
    pairs = _read_pairs(args)
    ds = load_dataset(args.exact, base=args.base, dim=args.dim) if args.exact else None
    if ds is not None and len(ds) != len(sketches):
        raise UsageError(f"--exact data has {len(ds)} vectors but there are {len(sketches)} sketches")
    rows = []
    for i, j in pairs:
        for idx in (i, j):
            if not 0 <= idx < len(sketches):
                raise UsageError(f"pair index {idx} out of range [0, {len(sketches)})")
        rep = estimate_from_sketches(sketches[i], sketches[j])
        row = {"i": i, "j": j, "j_hat": rep.j_hat, "std_err": rep.std_err, "k": rep.k, "scheme": rep.scheme}
        if ds is not None:
            exact = exact_jaccard(ds[i], ds[j])
            row["j_exact"] = exact
            row["abs_err"] = abs(rep.j_hat - exact)
        rows.append(row)
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        sys.stdout.write(out.getvalue())
    return 0


def _curve_csv(ds: Dataset, pair: tuple[int, int], args: argparse.Namespace) -> str:
    i, j = pair
    for idx in pair:
        if not 0 <= idx < len(ds):
            raise UsageError(f"pair index {idx} out of range [0, {len(ds)})")
    x, y = ds[i], ds[j]
    truth = exact_jaccard(x, y)
    layout = build_layout(ds.maxima, _resolve_alpha(ds, args.alpha))
    cols = {}
    for scheme in SCHEMES:
        m = estimate_samples((x, y), scheme, args.k_max, args.reps, layout=layout, base_seed=args.seed)
        cols[scheme] = error_samples(m, truth).mean(axis=0)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["k", "mae_redgreen", "mae_ioffe", "mae_reduction"])
    for k in range(args.k_max):
        w.writerow([k + 1] + [f"{cols[s][k]:.6f}" for s in SCHEMES])
    return out.getvalue()


def cmd_bench(args: argparse.Namespace) -> int:
    if args.reps < 1:
        raise UsageError("--reps must be at least 1")
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    ds = load_dataset(args.data, base=args.base, dim=args.dim)
    if args.curve:
        text = _curve_csv(ds, args.curve, args)
        if args.curve_out:
            Path(args.curve_out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    for s in schemes:
        if s not in SCHEMES:
            raise UsageError(f"unknown scheme {s!r}")
    rows = _bench.bench_dataset(
        ds, schemes, k=args.k, reps=args.reps, master_seed=args.seed, alpha=args.alpha, low_mem=args.low_mem
    )
    print(_bench.format_table(rows))
    if args.json:
        Path(args.json).write_text(json.dumps([r.to_dict() for r in rows], indent=2) + "\n")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    sketches = read_sketches(args.sketches)
    mean, vmax, bits = hash_stats(sketches)
    doc = {"scheme": sketches[0].scheme, "sketches": len(sketches), "k": sketches[0].k,
           "mean": mean, "max": vmax, "bits_needed": bits}
    if args.json:
        print(json.dumps(doc))
    else:
        for key, value in doc.items():
            print(f"{key}: {value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wmhash", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layout", help="build the red-green layout for a dataset")
    _add_data_args(p)
    p.add_argument("-o", "--output", required=True, help="layout file to write")
    p.add_argument("--alpha", type=_alpha, default=1.0, help="scale factor or 'auto'")
    p.add_argument("--low-mem", action="store_true", help="skip the O(M) lookup-table budget check")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("sketch", help="compute k hashes per vector")
    _add_data_args(p)
    p.add_argument("-o", "--output", required=True, help="sketch file to write ('-' for stdout)")
    p.add_argument("--layout", help="layout file from 'wmhash layout' (red-green only)")
    p.add_argument("--scheme", choices=SCHEMES, default="redgreen")
    p.add_argument("--k", type=int, default=500)
    p.add_argument("--seed", type=_seed, default=0, help="64-bit master seed")
    p.add_argument("--alpha", type=_alpha, default=1.0, help="used when no --layout is given")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="tail probability for the iteration cap")
    p.add_argument("--low-mem", action="store_true", help="binary-search lookups, no O(M) table")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=("wmhs", "json"), default="wmhs")
    p.set_defaults(func=cmd_sketch)

    p = sub.add_parser("estimate", help="estimate Jaccard similarity for pairs of sketches")
    p.add_argument("sketches")
    p.add_argument("--pairs", type=_pair, nargs="+", metavar="I,J")
    p.add_argument("--pairs-file")
    p.add_argument("--exact", metavar="DATA", help="dataset to add exact Jaccard and error columns")
    p.add_argument("--base", type=int, choices=(0, 1), default=0)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--json", action="store_true", help="JSON instead of CSV")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bench", help="time the schemes, or emit an error curve")
    _add_data_args(p)
    p.add_argument("--schemes", default=",".join(SCHEMES))
    p.add_argument("--k", type=int, default=500)
    p.add_argument("--reps", type=int, default=3, help="timing repeats, or curve repetitions")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--alpha", type=_alpha, default=1.0)
    p.add_argument("--low-mem", action="store_true")
    p.add_argument("--json", metavar="FILE", help="also write results as JSON")
    p.add_argument("--curve", type=_pair, metavar="I,J", help="error curve for one pair instead of timing")
    p.add_argument("--k-max", type=int, default=50)
    p.add_argument("--curve-out", metavar="FILE")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="mean, max and bit width of stored hash values")
    p.add_argument("sketches")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, OSError) as exc:
        print(f"wmhash: error: {exc}", file=sys.stderr)
        return 2
    except WMHError as exc:
        print(f"wmhash: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
