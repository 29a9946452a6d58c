"""Command-line entry point: ``rockentropy {rank,stats,glcm,phantom,inspect}``.

Options may also come from a JSON config file (``--config``) whose keys are
the long option names with dashes replaced by underscores; flags given on
the command line win over the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
import time
from typing import List, Optional

import numpy as np

from . import __version__, _kernels
from .attributes import AttributeKind, write_attribute_csv
from .entropy import KdeConfig, write_entropy_csv
from .errors import NoSurvivors, RockEntropyError
from .glcm import DEFAULT_LEVELS, SLICES_PER_VIEW, volume_glcm_features, write_glcm_csv
from .phantom import KINDS, PhantomSpec, graded_suite, ordering_suite, write_phantom
from .ranking import HighDensityFilter, rank_many, write_coefficients_csv, write_skip_log
from .stats import LabeledValues, box_summary, ccdf_points, report
from .volume_io import (
    HD_MAX_FRACTION,
    HD_THRESHOLD,
    crop_voi,
    high_density_fraction,
    load_volume,
    read_manifest,
)

log = logging.getLogger("rockentropy")

RANK_DEFAULTS = {
    "divisions": 5,
    "attribute": ["std_dev"],
    "bandwidth": 1.0,
    "grid_points": 4097,
    "grid_pad": 8.0,
    "convergence_tol": 1e-4,
    "hd_threshold": HD_THRESHOLD,
    "hd_fraction": HD_MAX_FRACTION,
    "no_hd_filter": False,
    "jobs": 1,
    "seed": 0,
    "min_divisions": 2,
    "max_divisions": 10,
    "write_attributes": False,
}


class UsageError(Exception):
    """Invalid configuration; reported with exit status 2."""


def read_manifest_list(path: str) -> List[str]:
    """Manifest paths from a list file (one per line, ``#`` comments) or a single manifest."""
    if path.endswith(".json"):
        return [path]
    base = os.path.dirname(os.path.abspath(path))
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                out.append(line if os.path.isabs(line) else os.path.join(base, line))
    return out


def _merge_config(args, defaults):
    cfg = dict(defaults)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(loaded) - set(defaults) - {"manifests", "out"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
        for key in ("manifests", "out"):
            if key in loaded and getattr(args, key, None) is None:
                setattr(args, key, loaded[key])
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    return cfg


def _parse_attributes(values) -> List[AttributeKind]:
    if isinstance(values, str):
        values = [values]
    names = [n for v in values for n in str(v).split(",") if n.strip()]
    if names == ["all"]:
        return list(AttributeKind)
    try:
        kinds = [AttributeKind.parse(n) for n in names]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not kinds:
        raise UsageError("no attribute given")
    return list(dict.fromkeys(kinds))


def cmd_rank(args) -> int:
    cfg = _merge_config(args, RANK_DEFAULTS)
    d = int(cfg["divisions"])
    if not cfg["min_divisions"] <= d <= cfg["max_divisions"]:
        raise UsageError(f"--divisions {d} outside supported range "
                         f"[{cfg['min_divisions']}, {cfg['max_divisions']}]")
    kinds = _parse_attributes(cfg["attribute"])
    try:
        kde = KdeConfig(float(cfg["bandwidth"]), float(cfg["grid_pad"]),
                        int(cfg["grid_points"]), float(cfg["convergence_tol"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not 0 <= float(cfg["hd_fraction"]) <= 1:
        raise UsageError("--hd-fraction must lie in [0, 1]")
    hd = HighDensityFilter(not cfg["no_hd_filter"], int(cfg["hd_threshold"]), float(cfg["hd_fraction"]))
    if not args.manifests or not args.out:
        raise UsageError("rank needs --manifests and --out")

    t0 = time.perf_counter()
    try:
        paths = read_manifest_list(args.manifests)
    except OSError as exc:
        raise UsageError(f"cannot read manifest list: {exc}") from exc
    manifests, load_failures = [], []
    for p in paths:
        try:
            manifests.append(read_manifest(p))
        except RockEntropyError as exc:
            load_failures.append(f"{p}: {exc}")
    for msg in load_failures:
        log.error("unreadable manifest %s", msg)
    t1 = time.perf_counter()
    try:
        results = rank_many(manifests, d, kinds, kde, hd, jobs=int(cfg["jobs"]))
    except NoSurvivors as exc:
        log.error("%s", exc)
        return 1
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    t2 = time.perf_counter()

    os.makedirs(args.out, exist_ok=True)
    write_coefficients_csv(os.path.join(args.out, "coefficients.csv"), results)
    write_entropy_csv(os.path.join(args.out, "entropy.csv"),
                      [e for r in results for e in sorted(r.entropies, key=lambda e: e.sample_id)])
    write_skip_log(os.path.join(args.out, "skip_log.csv"), results)
    if cfg["write_attributes"]:
        write_attribute_csv(os.path.join(args.out, "attributes.csv"),
                            [t for r in results for t in r.tables])
    summary = {
        "version": __version__,
        "backend": _kernels.backend(),
        "inputs": {"manifest_list": os.path.abspath(args.manifests),
                   "manifests": [os.path.relpath(p, os.path.dirname(os.path.abspath(args.manifests)))
                                 for p in paths],
                   "unreadable_manifests": load_failures},
        "parameters": {"divisions": d, "attributes": [k.value for k in kinds],
                       "bandwidth": kde.bandwidth, "grid_pad": kde.grid_pad,
                       "grid_points": kde.grid_points, "convergence_tol": kde.convergence_tol,
                       "hd_filter": hd.enabled, "hd_threshold": hd.threshold,
                       "hd_fraction": hd.max_fraction, "seed": int(cfg["seed"])},
        "results": [{"attribute": r.attribute.value, "ranked": len(r.coefficients),
                     "skipped": len(r.skipped),
                     "pooled_mu": None if r.standardization is None else r.standardization.mu,
                     "pooled_sigma": None if r.standardization is None else r.standardization.sigma}
                    for r in results],
        "timings_s": {"read_manifests": t1 - t0, "rank": t2 - t1,
                      "write": time.perf_counter() - t2},
        "platform": platform.platform(),
    }
    with open(os.path.join(args.out, "run_summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    for r in results:
        print(f"{r.attribute.value}: {len(r.coefficients)} ranked, {len(r.skipped)} skipped")
    return 0


def _read_stats_csv(path):
    values, labels, ref, groups = [], [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"value", "label"} - set(reader.fieldnames or ())
        if missing:
            raise UsageError(f"{path}: missing column(s) {', '.join(sorted(missing))}")
        has_ref = "label2" in reader.fieldnames
        group_col = "group" if "group" in reader.fieldnames else "label"
        for row in reader:
            values.append(float(row["value"]))
            labels.append(int(row["label"]))
            groups.append(row[group_col])
            if has_ref:
                ref.append(int(row["label2"]))
    return values, labels, (ref if has_ref else None), groups


def write_plot_data(out_dir, values, groups):
    """``ccdf.csv`` and ``boxplot.csv`` per group, for external plotting."""
    os.makedirs(out_dir, exist_ok=True)
    values = np.asarray(values, dtype=np.float64)
    groups = np.asarray(groups, dtype=object)
    names = sorted(set(groups.tolist()))
    with open(os.path.join(out_dir, "ccdf.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("group", "value", "ccdf"))
        for g in names:
            xs, ps = ccdf_points(values[groups == g])
            for x, p in zip(xs, ps):
                w.writerow((g, repr(float(x)), repr(float(p))))
    fields = ("n", "min", "q1", "median", "q3", "max")
    with open(os.path.join(out_dir, "boxplot.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("group",) + fields)
        for g in names:
            b = box_summary(values[groups == g])
            w.writerow([g] + [b["n"]] + [repr(b[k]) for k in fields[1:]])


def cmd_stats(args) -> int:
    try:
        values, labels, ref, groups = _read_stats_csv(args.input)
        data = LabeledValues(values, labels)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    try:
        rep = report(data, ref, args.threshold)
    except RockEntropyError as exc:
        log.error("%s", exc)
        return 1
    if args.plot_data:
        write_plot_data(args.plot_data, values, groups)
    text = json.dumps(rep, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_glcm(args) -> int:
    try:
        paths = read_manifest_list(args.manifests)
    except OSError as exc:
        raise UsageError(f"cannot read manifest list: {exc}") from exc
    rows, status = [], 0
    for p in paths:
        try:
            m = read_manifest(p)
            vol = crop_voi(load_volume(m), m.resolve_voi())
            rows.append((m.sample_id, volume_glcm_features(vol, args.levels, args.slices)))
        except RockEntropyError as exc:
            log.error("%s: %s", p, exc)
            status = 1
    rows.sort(key=lambda r: r[0])
    write_glcm_csv(args.out or sys.stdout, rows)
    return status if rows else 1


def _parse_param(text):
    key, sep, val = text.partition("=")
    if not sep:
        raise UsageError(f"--param expects key=value, got {text!r}")
    try:
        return key, json.loads(val)
    except json.JSONDecodeError:
        return key, val


def cmd_phantom(args) -> int:
    dims = tuple(args.dims)
    written = []
    try:
        if args.suite:
            maker = ordering_suite if args.suite == "ordering" else graded_suite
            for seed in args.seeds:
                for sid, spec in maker(seed, dims, args.bit_depth):
                    written.append(write_phantom(spec, args.out, sid))
        else:
            if not args.kind:
                raise UsageError("phantom needs --kind or --suite")
            params = dict(_parse_param(p) for p in args.param)
            spec = PhantomSpec(args.kind, dims, args.bit_depth, args.seed, params)
            sid = args.sample_id or f"{args.kind}_s{args.seed}"
            written.append(write_phantom(spec, args.out, sid))
    except (RockEntropyError, KeyError) as exc:
        raise UsageError(str(exc)) from exc
    list_path = os.path.join(args.out, "manifests.txt")
    listed = read_manifest_list(list_path) if os.path.exists(list_path) else []
    listed = [os.path.basename(p) for p in listed]
    with open(list_path, "a") as fh:
        for p in written:
            if os.path.basename(p) not in listed:
                fh.write(os.path.basename(p) + "\n")
    for p in written:
        print(p)
    return 0


def cmd_inspect(args) -> int:
    try:
        m = read_manifest(args.manifest)
        voi = m.resolve_voi()
        vol = load_volume(m)
        roi = crop_voi(vol, voi)
    except RockEntropyError as exc:
        log.error("%s", exc)
        return 1
    v = roi.voxels
    print(f"sample_id:     {m.sample_id}")
    print(f"dims:          {' x '.join(map(str, vol.dims))}")
    print(f"bit_depth:     {vol.bit_depth}")
    print(f"voxel_size_um: {vol.voxel_size_um}")
    print(f"voi:           origin={voi.origin} extent={voi.extent}")
    print(f"min:           {int(v.min())}")
    print(f"max:           {int(v.max())}")
    print(f"mean:          {float(np.mean(v, dtype=np.float64))}")
    if args.hd_threshold < (1 << vol.bit_depth):
        frac = high_density_fraction(roi, args.hd_threshold)
        flag = frac > args.hd_fraction
        print(f"high_density:  fraction={frac} above {args.hd_threshold}"
              f"{'  FLAGGED' if flag else ''}")
    else:
        print(f"high_density:  n/a (threshold {args.hd_threshold} beyond {vol.bit_depth}-bit range)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rockentropy", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rank", help="entropy heterogeneity coefficients for a manifest list")
    r.add_argument("--config")
    r.add_argument("--manifests", help="text file of manifest paths, or one manifest .json")
    r.add_argument("--out", help="output directory")
    r.add_argument("-d", "--divisions", type=int)
    r.add_argument("-a", "--attribute", action="append",
                   help="attribute name, comma list, or 'all'; repeatable")
    r.add_argument("--bandwidth", type=float)
    r.add_argument("--grid-points", type=int)
    r.add_argument("--grid-pad", type=float)
    r.add_argument("--convergence-tol", type=float)
    r.add_argument("--hd-threshold", type=int)
    r.add_argument("--hd-fraction", type=float)
    r.add_argument("--no-hd-filter", action="store_true")
    r.add_argument("--jobs", type=int)
    r.add_argument("--seed", type=int, help="recorded in the run summary; ranking is deterministic")
    r.add_argument("--write-attributes", action="store_true")
    r.set_defaults(func=cmd_rank)

    s = sub.add_parser("stats", help="rank-biserial, MWU, Spearman and phi for a labelled CSV")
    s.add_argument("--input", required=True, help="CSV with sample_id,value,label[,label2][,group]")
    s.add_argument("--threshold", type=float, help="value cut for phi when no label2 column")
    s.add_argument("--plot-data", help="directory for ccdf.csv and boxplot.csv (per group column, else per label)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)

    g = sub.add_parser("glcm", help="GLCM baseline features per volume")
    g.add_argument("--manifests", required=True)
    g.add_argument("--levels", type=int, default=DEFAULT_LEVELS)
    g.add_argument("--slices", type=int, default=SLICES_PER_VIEW)
    g.add_argument("--out")
    g.set_defaults(func=cmd_glcm)

    ph = sub.add_parser("phantom", help="write synthetic raw volumes with manifests")
    ph.add_argument("--out", required=True)
    ph.add_argument("--kind", choices=KINDS)
    ph.add_argument("--suite", choices=("ordering", "graded"))
    ph.add_argument("--seeds", type=int, nargs="+", default=[0])
    ph.add_argument("--seed", type=int, default=0)
    ph.add_argument("--dims", type=int, nargs=3, default=[64, 64, 64])
    ph.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    ph.add_argument("--param", action="append", default=[], help="key=value (JSON value)")
    ph.add_argument("--sample-id")
    ph.set_defaults(func=cmd_phantom)

    i = sub.add_parser("inspect", help="print a volume summary")
    i.add_argument("manifest")
    i.add_argument("--hd-threshold", type=int, default=HD_THRESHOLD)
    i.add_argument("--hd-fraction", type=float, default=HD_MAX_FRACTION)
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rockentropy {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
