"""Scenario-driven command line: verify, sample, iterate, rasterize.

Exit-code contract (scriptable CI gating):

* 0 — everything ran and every enabled check passed;
* 1 — a check failed or an iteration did not converge; the report or
  table is still written;
* 2 — configuration or validation error (bad scenario file, bad flag,
  violated precondition); nothing half-written is trusted.

Every command writes a ``manifest.json`` next to its outputs: config
hash, tool version, seed, generator identifier, and a checksum for each
output file.  Runs are byte-identical for a fixed (scenario, seed,
``--deterministic-sum``) triple; no timestamps are embedded anywhere.
Floats are printed with 17 significant digits so they round-trip.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys as _sys
from fractions import Fraction

from .errors import (
    BranchwalkError,
    BudgetExceeded,
    ConfigError,
    EigenvalueMismatch,
    EigenvalueNotOne,
    GridIncompatible,
    InvalidPoint,
    NoConvergence,
    NotNonnegative,
    NotPositive,
    QmfViolation,
    WordTooShort,
)

TOOL = "branchwalk"
VERSION = "0.1.0"

# Failures of these kinds mean the run was mis-specified, not that a
# mathematical check came out false.
_CONFIG_FAULTS = (
    ConfigError,
    NotNonnegative,
    EigenvalueNotOne,
    EigenvalueMismatch,
    QmfViolation,
    GridIncompatible,
    NotPositive,
    InvalidPoint,
    WordTooShort,
    BudgetExceeded,
)


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _sha256(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      default=str)


def _write_text(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _write_bytes(out_dir: str, name: str, data: bytes) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "wb") as fh:
        fh.write(data)
    return path


def _write_manifest(out_dir: str, *, command: str, config: dict,
                    seed, outputs: dict, extra: dict = None) -> str:
    from .rng import ALGORITHM
    checksums = {}
    for name in sorted(outputs):
        with open(outputs[name], "rb") as fh:
            checksums[name] = _sha256(fh.read())
    manifest = {
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "config_hash": _sha256(_canonical_json(config).encode()),
        "seed": seed,
        "generator": ALGORITHM,
        "outputs": checksums,
    }
    if extra:
        manifest.update(extra)
    text = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    return _write_text(out_dir, "manifest.json", text)


# ---------------------------------------------------------------------------
# value parsing and formatting


def _parse_x0(sys_obj, text: str):
    from .systems import CircleMap, QuadraticJulia, Subshift
    s = text.strip().replace(" ", "")
    if isinstance(sys_obj, CircleMap):
        x = float(Fraction(s)) if "/" in s else float(s)
        sys_obj.validate(x)
        return x
    if isinstance(sys_obj, Subshift):
        parts = s.split(",") if "," in s else list(s)
        try:
            word = tuple(int(p) for p in parts)
        except ValueError as e:
            raise ConfigError("--x0", f"not a symbol word: {text!r}") from e
        if not word:
            raise ConfigError("--x0", "word must have at least one symbol")
        sys_obj.validate(word)
        return word
    if isinstance(sys_obj, QuadraticJulia):
        if "," in s:
            re, im = s.split(",")
            z = complex(float(re), float(im))
        else:
            try:
                z = complex(s)
            except ValueError as e:
                raise ConfigError("--x0", f"not a complex number: {text!r}") \
                    from e
        sys_obj.validate(z)
        return z
    raise ConfigError("--x0", f"unsupported system {type(sys_obj).__name__}")


def _format_point(sys_obj, x) -> str:
    from .systems import Subshift
    if isinstance(sys_obj, Subshift):
        return "".join(str(a) for a in x)
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    return _fmt(x)


def _mass_text(m) -> str:
    from . import exactnum as xn
    if xn.is_exact(m):
        return str(xn.canon(m))
    return _fmt(m)


# ---------------------------------------------------------------------------
# subcommand bodies


def cmd_verify(args) -> int:
    from .disintegration import verify_bundle
    from .scenarios import build_bundle, load_scenario
    cfg = load_scenario(args.scenario)
    bundle = build_bundle(cfg, seed=args.seed, budget=args.budget)
    reports = verify_bundle(bundle)
    passed = all(r.passed for r in reports)
    payload = {
        "scenario": bundle.name,
        "passed": passed,
        "max_discrepancy": max(r.max_discrepancy for r in reports),
        "checks": [r.payload() for r in reports],
    }
    report_path = _write_text(
        args.out, "report.json",
        json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n")
    _write_manifest(
        args.out, command="verify",
        config={"scenario": cfg.as_dict(),
                "overrides": {"seed": args.seed, "budget": args.budget,
                              "deterministic_sum": args.deterministic_sum}},
        seed=bundle.seed, outputs={"report.json": report_path},
        extra={"passed": passed})
    for r in reports:
        print(r.summary())
    print(f"{bundle.name}: {'PASS' if passed else 'FAIL'}")
    return 0 if passed else 1


def cmd_sample_paths(args) -> int:
    from .pathspace import sample_path
    from .scenarios import build_bundle, load_scenario
    cfg = load_scenario(args.scenario)
    bundle = build_bundle(cfg, seed=args.seed, budget=args.budget)
    x0 = _parse_x0(bundle.sys, args.x0)
    seed = bundle.seed if args.seed is None else args.seed
    depth, count = args.depth, args.count
    if depth < 1:
        raise ConfigError("--depth", "must be >= 1")
    if count < 0:
        raise ConfigError("--count", "must be >= 0")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "seed", "index", "labels", "points"])
    tallies = {k: {} for k in range(1, min(3, depth) + 1)}
    for i in range(count):
        p = sample_path(bundle.sys, bundle.delta, x0, depth,
                        seed=seed, index=i)
        labels = "".join(str(a) for a in p.labels)
        points = "|".join(_format_point(bundle.sys, pt) for pt in p.points)
        writer.writerow(["path", str(seed), str(i), labels, points])
        for k in tallies:
            key = labels[:k]
            tallies[k][key] = tallies[k].get(key, 0) + 1
    if count > 0:
        for k in sorted(tallies):
            for key in sorted(tallies[k]):
                writer.writerow([f"freq{k}", str(seed), "", key,
                                 _fmt(tallies[k][key] / count)])
    csv_path = _write_text(args.out, "paths.csv", buf.getvalue())
    _write_manifest(
        args.out, command="sample-paths",
        config={"scenario": cfg.as_dict(),
                "overrides": {"x0": args.x0, "depth": depth, "count": count,
                              "seed": seed}},
        seed=seed, outputs={"paths.csv": csv_path},
        extra={"paths": count, "depth": depth})
    print(f"wrote {count} paths of depth {depth} to {csv_path}")
    return 0


def cmd_h_function(args) -> int:
    from .measures import CylinderTable, GridDensity
    from .scenarios import build_bundle, load_scenario
    from .weights import fixed_point_h
    cfg = load_scenario(args.scenario)
    bundle = build_bundle(cfg, seed=args.seed, budget=args.budget)

    grid = args.grid
    if grid is None:
        grid = bundle.mu0.size if isinstance(bundle.mu0, GridDensity) else 4096
    depth = bundle.mu0.depth if isinstance(bundle.mu0, CylinderTable) else 6
    res = fixed_point_h(bundle.sys, bundle.delta, grid=grid, depth=depth,
                        tol=args.tol, max_iterations=args.max_iters,
                        mu0=bundle.mu0)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "h"])
    if res.grid is not None:
        for x, h in zip(res.grid, res.values):
            writer.writerow([_fmt(x), _fmt(h)])
    else:
        for w in res.words:
            writer.writerow(["".join(str(a) for a in w),
                             _mass_text(res.values[w])])
    buf.write(f"# residual = {_fmt(res.residual)}\n")
    buf.write(f"# iterations = {res.iterations}\n")
    buf.write(f"# selection = {res.selection}\n")
    buf.write(f"# converged = {str(res.converged).lower()}\n")
    csv_path = _write_text(args.out, "h_function.csv", buf.getvalue())
    _write_manifest(
        args.out, command="h-function",
        config={"scenario": cfg.as_dict(),
                "overrides": {"grid": grid, "tol": args.tol,
                              "max_iters": args.max_iters,
                              "seed": args.seed}},
        seed=bundle.seed, outputs={"h_function.csv": csv_path},
        extra={"residual": res.residual, "iterations": res.iterations,
               "selection": res.selection, "converged": res.converged})
    ok = res.converged and res.residual <= args.tol
    print(f"h-function: residual {_fmt(res.residual)} after "
          f"{res.iterations} iterations ({res.selection})")
    if not ok:
        print(f"h-function: no convergence to {_fmt(args.tol)}; "
              f"table written to {csv_path}", file=_sys.stderr)
    return 0 if ok else 1


def _raster_pgm(points, size: int, bound: float) -> bytes:
    import numpy as np
    counts = np.zeros((size, size), dtype=float)
    if len(points):
        xs = np.clip(((np.real(points) + bound) / (2 * bound) * size)
                     .astype(int), 0, size - 1)
        ys = np.clip(((np.imag(points) + bound) / (2 * bound) * size)
                     .astype(int), 0, size - 1)
        np.add.at(counts, (ys, xs), 1.0)
    peak = counts.max()
    img = np.zeros((size, size), dtype=np.uint8)
    if peak > 0:
        img = np.round(counts / peak * 255.0).astype(np.uint8)
    header = (f"P5\n# bounding box [-{bound:.17g}, {bound:.17g}]^2, "
              f"row 0 = top (max imaginary part); "
              f"pixel = round(count/max_count*255)\n{size} {size}\n255\n")
    return header.encode("ascii") + img[::-1].tobytes()


def cmd_brolin(args) -> int:
    from .measures import brolin_sample, moment_functions
    from .systems import QuadraticJulia
    s = args.c.strip().replace(" ", "")
    try:
        if "," in s:
            re, im = s.split(",")
            c = complex(float(re), float(im))
        else:
            c = complex(s)
    except ValueError as e:
        raise ConfigError("--c", f"not a complex number: {args.c!r}") from e
    if abs(c) > 4.0:
        raise ConfigError("--c", "|c| <= 4 is the supported envelope")
    if args.samples < 0:
        raise ConfigError("--samples", "must be >= 0")
    if args.burn < 1:
        raise ConfigError("--burn", "must be >= 1")

    jul = QuadraticJulia(c)
    seed = 0 if args.seed is None else args.seed
    cloud = brolin_sample(jul, args.samples, seed, burn_in=args.burn)
    bound = jul.escape_radius * 1.05
    pgm_path = _write_bytes(args.out, "brolin.pgm",
                            _raster_pgm(cloud.points, args.grid, bound))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "value"])
    for name, fn in moment_functions(2).functions:
        writer.writerow([name, _fmt(cloud.expect(fn))])
    csv_path = _write_text(args.out, "moments.csv", buf.getvalue())

    max_abs = float(max(abs(z) for z in cloud.points)) if len(cloud) else 0.0
    _write_manifest(
        args.out, command="brolin",
        config={"c": [c.real, c.imag], "samples": args.samples,
                "burn": args.burn, "grid": args.grid, "seed": seed},
        seed=seed,
        outputs={"brolin.pgm": pgm_path, "moments.csv": csv_path},
        extra={"samples": args.samples, "max_abs": max_abs,
               "escape_radius": jul.escape_radius})
    print(f"sampled {args.samples} points for c = {c}; "
          f"max |z| = {_fmt(max_abs)} (escape radius "
          f"{_fmt(jul.escape_radius)})")
    return 0


def cmd_eigmeasure(args) -> int:
    from . import exactnum as xn
    from .measures import CylinderTable, perron_fixed_measure
    from .scenarios import build_bundle, load_scenario
    from .systems import Subshift
    cfg = load_scenario(args.scenario)
    bundle = build_bundle(cfg, seed=args.seed, budget=args.budget)
    if not isinstance(bundle.sys, Subshift):
        raise ConfigError("scenario",
                          "eigenmeasure dump needs a subshift scenario")
    if args.depth is not None and args.depth != getattr(
            bundle.mu0, "depth", None):
        table = perron_fixed_measure(bundle.sys, bundle.delta,
                                     depth=args.depth)
    elif isinstance(bundle.mu0, CylinderTable):
        table = bundle.mu0
    else:
        table = perron_fixed_measure(bundle.sys, bundle.delta)

    perron = bundle.delta.perron
    lines = [f"# cylinder table for scenario {bundle.name}",
             f"# depth = {table.depth}, exact = {str(table.exact).lower()}"]
    if perron is not None:
        lines.append(f"# eigenvalue = {_mass_text(perron.eigenvalue)}")
        lines.append(
            f"# eigenvalue_scaled = {_mass_text(perron.eigenvalue_scaled)}")
    for d in range(1, table.depth + 1):
        lines.append(f"# depth {d}")
        for w in sorted(table.level(d)):
            word = "".join(str(a) for a in w)
            m = table.level(d)[w]
            lines.append(f"{word}\t{_mass_text(m)}\t{_fmt(xn.to_float(m))}")
    text = "\n".join(lines) + "\n"
    txt_path = _write_text(args.out, "eigmeasure.txt", text)
    _write_manifest(
        args.out, command="eigmeasure",
        config={"scenario": cfg.as_dict(),
                "overrides": {"depth": args.depth, "seed": args.seed}},
        seed=bundle.seed, outputs={"eigmeasure.txt": txt_path},
        extra={"depth": table.depth, "exact": table.exact})
    print(f"wrote cylinder table (depth {table.depth}) to {txt_path}")
    return 0


# ---------------------------------------------------------------------------
# wiring


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help="64-bit unsigned seed override")
    p.add_argument("--budget", type=int, default=None,
                   help="max preimage-tree nodes")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="thread cap for numeric backends")
    p.add_argument("--deterministic-sum", action="store_true",
                   help="force sequential compensated reductions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL,
        description="verify transfer-operator scenarios and sample "
                    "path-space measures")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("verify", help="run the full check battery")
    p.add_argument("scenario", help="scenario file or bundled name")
    _add_common(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("sample-paths", help="draw random backward paths")
    p.add_argument("scenario")
    p.add_argument("--x0", required=True, help="base point")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    _add_common(p)
    p.set_defaults(handler=cmd_sample_paths)

    p = sub.add_parser("h-function", help="iterate to a fixed function")
    p.add_argument("scenario")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=2000)
    _add_common(p)
    p.set_defaults(handler=cmd_h_function)

    p = sub.add_parser("brolin", help="sample a backward-orbit cloud")
    p.add_argument("--c", required=True, help="parameter, e.g. '-1' or "
                   "'0.3,0.5' or '0.3+0.5j'")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--burn", type=int, default=64)
    p.add_argument("--grid", type=int, default=512,
                   help="raster size in pixels")
    _add_common(p)
    p.set_defaults(handler=cmd_brolin)

    p = sub.add_parser("eigmeasure", help="dump the fixed cylinder measure")
    p.add_argument("scenario")
    p.add_argument("--depth", type=int, default=None)
    _add_common(p)
    p.set_defaults(handler=cmd_eigmeasure)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_help()
        return 2
    if getattr(args, "seed", None) is not None and not (
            0 <= args.seed < 2 ** 64):
        print("error: --seed must fit in 64 unsigned bits", file=_sys.stderr)
        return 2
    if getattr(args, "threads", None) is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    if getattr(args, "deterministic_sum", False):
        from .measures import set_deterministic_sums
        set_deterministic_sums(True)
    try:
        return args.handler(args)
    except _CONFIG_FAULTS as e:
        print(f"error: {type(e).__name__}: {e}", file=_sys.stderr)
        return 2
    except NoConvergence as e:
        print(f"error: NoConvergence: {e}", file=_sys.stderr)
        return 1
    except BranchwalkError as e:
        print(f"error: {type(e).__name__}: {e}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
