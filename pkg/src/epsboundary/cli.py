"""Command-line front end: `epsb <subcommand> ...`.

Exit codes: 0 success, 1 invariant failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import export
from .analysis import contributors, extremal_pairs, local_rep, outward_arc, with_extremal_flags
from .arrangement import disk_union_boundary, sample_boundary
from .classify import classify_boundary, exact_singular_candidates
from .invariants import lipschitz_check, orientation_check, partition_check, run_suite
from .setmodel import (GENERATORS, SetSpec, finite_approximating_set, level_threshold, load_spec,
                       spec_to_dict)
from .topology import complement_components, padded_bbox

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
EMIT_ALL = ("json", "csv", "svg", "pgm")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    spec: SetSpec
    eps: float
    level: int
    spacing: float
    raster_h: float
    out_dir: Path
    emit: set = field(default_factory=lambda: set(EMIT_ALL))
    threads: int = 1


def _threads(arg: int | None) -> int:
    env = os.environ.get("EPSB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"EPSB_THREADS must be an integer, got {env!r}") from exc
    return max(1, arg or 1)


def _gen_kwargs(a) -> dict:
    kw = {}
    for k in ("depth", "sep", "seed", "terms"):
        v = getattr(a, k, None)
        if v is not None:
            kw[k] = v
    if getattr(a, "eps", None) is not None:
        kw["eps"] = a.eps
    return kw


def _load(a) -> SetSpec:
    if a.input and a.gen:
        raise UsageError("give either --input or --gen, not both")
    if a.input:
        try:
            return load_spec(a.input)
        except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read set spec {a.input}: {exc}") from exc
    if a.gen:
        if a.gen not in GENERATORS:
            raise UsageError(f"unknown generator {a.gen!r}; choose from {', '.join(GENERATORS)}")
        return GENERATORS[a.gen](**_gen_kwargs(a))
    raise UsageError("an input set is required: --input FILE or --gen NAME")


def make_config(a) -> RunConfig:
    if a.eps is None or not a.eps > 0:
        raise UsageError("--eps must be positive")
    if not a.spacing > 0:
        raise UsageError("--spacing must be positive")
    spec = _load(a)
    n0 = level_threshold(a.eps)
    level = a.level if a.level is not None else max(8, n0 + 1)
    if level <= n0:
        raise UsageError(f"--level {level} is below the admissible threshold: need level > {n0}")
    h = a.raster_h if a.raster_h is not None else a.eps / 64
    if not 0 < h <= a.eps / 8:
        raise UsageError("--raster-h must lie in (0, eps/8]")
    emit = set(a.emit.split(",")) if a.emit else set(EMIT_ALL)
    if not emit <= set(EMIT_ALL):
        raise UsageError(f"--emit accepts {','.join(EMIT_ALL)}")
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    return RunConfig(spec, a.eps, level, a.spacing, h, out, emit, _threads(a.threads))


# ---------------------------------------------------------------------------
# subcommands

def cmd_boundary(cfg: RunConfig) -> int:
    D = finite_approximating_set(cfg.spec, cfg.level, cfg.eps)
    bas = disk_union_boundary(D.points, cfg.eps, level=cfg.level)
    samples = sample_boundary(bas, cfg.spacing)
    if "csv" in cfg.emit:
        export.write_arcs_csv(bas, cfg.out_dir / "arcs.csv")
        export.write_vertices_csv(bas, cfg.out_dir / "vertices.csv")
        export.write_samples_csv(samples, cfg.out_dir / "samples.csv")
    if "svg" in cfg.emit:
        export.write_svg(bas, cfg.out_dir / "boundary.svg")
    print(f"centers: {len(D.points)}\narcs: {len(bas.arcs)}\nvertices: {len(bas.vertices)}\n"
          f"samples: {len(samples)}")
    return EXIT_OK


def _analysis_record(spec, x, eps, level, num_samples) -> dict:
    pi = contributors(spec, x, eps, tol=1e-8)
    rec = {"point": [pi.point.x, pi.point.y]}
    try:
        oa = outward_arc(pi.point, pi)
    except ValueError as exc:
        rec.update(members=[[m.x, m.y] for m in pi.members], error=str(exc))
        return rec
    pairs = extremal_pairs(pi.point, pi, oa)
    pi = with_extremal_flags(pi, pairs)
    reps = []
    for p in pairs:
        lr = local_rep(spec, pi.point, p, eps, n=level, num_samples=num_samples)
        reps.append({"xi": [p.xi.ux, p.xi.uy], "y": [p.y.x, p.y.y], "level": level,
                     "s": lr.s.tolist(),
                     "f": [v if v > -float("inf") else None for v in lr.f.tolist()]})
    rec.update(
        contributors=[{"y": [m.x, m.y], "extremal": e} for m, e in zip(pi.members, pi.extremal)],
        arc={"kind": oa.kind.value, "xi1": [oa.xi1.ux, oa.xi1.uy], "xi2": [oa.xi2.ux, oa.xi2.uy]},
        local_reps=reps)
    return rec


def cmd_analyze(cfg: RunConfig, points, num_samples: int) -> int:
    if not points:
        points = exact_singular_candidates(cfg.spec, cfg.eps).tolist()
    recs = []
    for x in points:
        try:
            recs.append(_analysis_record(cfg.spec, x, cfg.eps, cfg.level, num_samples))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    doc = {"schema": export.SCHEMA_VERSION, "eps": cfg.eps, "level": cfg.level, "points": recs}
    if "json" in cfg.emit:
        export.write_json(doc, cfg.out_dir / "analysis.json")
    print(f"analysed points: {len(recs)}")
    return EXIT_OK


def cmd_classify(cfg: RunConfig) -> int:
    inv = classify_boundary(cfg.spec, cfg.eps, cfg.level, cfg.spacing, workers=cfg.threads)
    if "json" in cfg.emit:
        export.write_json(export.inventory_to_dict(inv), cfg.out_dir / "inventory.json")
    if "csv" in cfg.emit:
        export.write_counts_csv(inv, cfg.out_dir / "counts.csv")
    if "svg" in cfg.emit:
        D = finite_approximating_set(cfg.spec, cfg.level, cfg.eps)
        export.write_svg(disk_union_boundary(D.points, cfg.eps), cfg.out_dir / "labels.svg",
                         inv.records)
    print(export.format_counts(inv))
    if inv.pruned:
        print(f"pruned: {len(inv.pruned)}")
    return EXIT_OK


def cmd_components(cfg: RunConfig) -> int:
    D = finite_approximating_set(cfg.spec, cfg.level, cfg.eps)
    bas = disk_union_boundary(D.points, cfg.eps)
    try:
        cmap = complement_components(cfg.spec, cfg.eps, padded_bbox(cfg.spec, cfg.eps),
                                     cfg.raster_h, arcs=bas)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if "pgm" in cfg.emit:
        export.write_pgm(cmap, cfg.out_dir / "components.pgm")
    if "json" in cfg.emit:
        export.write_json(export.components_summary(cmap, cfg.eps), cfg.out_dir / "components.json")
    print(f"components: {len(cmap)}\nbounded: {len(cmap.bounded)}")
    return EXIT_OK


def _report(checks: dict, out_dir: Path, emit, elapsed: float) -> int:
    ok = all(c.ok for c in checks.values())
    doc = {"schema": export.SCHEMA_VERSION, "ok": ok,
           "checks": {k: c.as_dict() for k, c in checks.items()}}
    if "json" in emit:
        export.write_json(doc, out_dir / "verify.json")
    for k, c in checks.items():
        print(f"{'PASS' if c.ok else 'FAIL'} {k} (checked {c.checked})")
    if not ok:
        json.dump({k: c.as_dict() for k, c in checks.items() if not c.ok}, sys.stderr,
                  default=export._jsonable)
        sys.stderr.write("\n")
    print(f"elapsed: {elapsed:.2f}s")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(cfg: RunConfig, replay: str | None = None) -> int:
    t0 = time.perf_counter()
    if replay:
        try:
            inv = export.inventory_from_dict(json.loads(Path(replay).read_text()))
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"cannot replay {replay}: {exc}") from exc
        checks = {c.name: c for c in (partition_check(inv), orientation_check(inv.records),
                                      lipschitz_check(cfg.spec, inv.records, inv.eps, limit=200))}
    else:
        inv = classify_boundary(cfg.spec, cfg.eps, cfg.level, cfg.spacing, workers=cfg.threads)
        checks = run_suite(cfg.spec, cfg.eps, cfg.level, cfg.spacing, cfg.raster_h, inv=inv)
    return _report(checks, cfg.out_dir, cfg.emit, time.perf_counter() - t0)


def cmd_gen(a) -> int:
    if a.name not in GENERATORS:
        raise UsageError(f"unknown generator {a.name!r}; choose from {', '.join(GENERATORS)}")
    try:
        spec = GENERATORS[a.name](**_gen_kwargs(a))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = export.dumps(spec_to_dict(spec))
    if a.output:
        Path(a.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _gen_params(p) -> None:
    p.add_argument("--depth", type=int, help="fat-cantor depth")
    p.add_argument("--sep", type=float, help="point-pair separation")
    p.add_argument("--seed", type=int, help="random cloud seed")
    p.add_argument("--terms", type=int, help="jump-integral term count")


def _run_params(p) -> None:
    p.add_argument("--input", help="set spec JSON file")
    p.add_argument("--gen", help=f"generator name ({', '.join(GENERATORS)})")
    _gen_params(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--level", type=int, help="approximation level n (default max(8, n0+1))")
    p.add_argument("--spacing", type=float, default=0.01)
    p.add_argument("--raster-h", type=float, help="raster step (default eps/64)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--emit", help="comma list from json,csv,svg,pgm (default all)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (EPSB_THREADS overrides)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="epsb", description="Boundaries of planar eps-neighbourhoods "
                                                         "and their singularities.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    for name, hlp in (("boundary", "arc set of the disk union"),
                      ("classify", "label boundary points S0..S8"),
                      ("components", "complement components on a raster"),
                      ("verify", "run the invariant suite")):
        p = sub.add_parser(name, help=hlp)
        _run_params(p)
        if name == "verify":
            p.add_argument("--replay", help="check a saved inventory JSON instead of recomputing")
    p = sub.add_parser("analyze", help="per-point contributors, outward arcs, local graphs")
    _run_params(p)
    p.add_argument("--point", type=float, nargs=2, action="append", metavar=("X", "Y"))
    p.add_argument("--samples", type=int, default=257)
    p = sub.add_parser("gen", help="write a generated set spec as JSON")
    p.add_argument("name")
    _gen_params(p)
    p.add_argument("--eps", type=float, help="jump-integral eps")
    p.add_argument("-o", "--output")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        if a.cmd == "gen":
            return cmd_gen(a)
        cfg = make_config(a)
        if a.cmd == "boundary":
            return cmd_boundary(cfg)
        if a.cmd == "analyze":
            return cmd_analyze(cfg, a.point, a.samples)
        if a.cmd == "classify":
            return cmd_classify(cfg)
        if a.cmd == "components":
            return cmd_components(cfg)
        return cmd_verify(cfg, a.replay)
    except UsageError as exc:
        print(f"epsb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"epsb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
