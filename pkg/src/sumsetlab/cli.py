"""Batch command-line front end.

Every subcommand writes one document to stdout (JSON unless ``--format``
says otherwise) and exits with 0 on success, 2 on a parse or validation
error, 3 on a window overflow and 4 when a bound or budget is exceeded.

Defaults can come from a flat ``key = value`` config file, named by
``--config`` or the ``SUMSETLAB_CONFIG`` environment variable. Flags
override the file; the file overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import correspondence, cube, dynsys, measure, setspec, sumset
from .errors import SpecError, SumsetLabError

CONFIG_ENV = "SUMSETLAB_CONFIG"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    eps: float | None = None
    horizon: int | None = None
    min_hits: int = 2
    tol: float = 1e-12
    candidate_bound: int = 10**4
    max_candidates: int = 10**4
    max_extensions: int = 10**4
    time_limit: float | None = None
    anchor_bound: int = 64
    space_limit: int = sumset.DEFAULT_SPACE_LIMIT
    node_limit: int = sumset.DEFAULT_NODE_LIMIT
    max_atoms: int = measure.DEFAULT_MAX_SIZE
    format: str | None = None
    plot_data: str | None = None

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("format", "plot_data") or value is None:
                continue
            if f.name == "tol" and value == 0:
                continue
            if value <= 0:
                raise SpecError(f"config value {f.name} must be positive, got {value}")
        if self.format not in (None, "json", "csv", "plain"):
            raise SpecError(f"format must be json, csv or plain, got {self.format!r}")

    @classmethod
    def from_text(cls, text: str) -> RunConfig:
        types = {f.name: f.type for f in fields(cls)}
        values: dict[str, Any] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, raw = line.partition("=")
            key, raw = key.strip().replace("-", "_"), raw.strip()
            if not sep or key not in types:
                raise SpecError(f"config line {lineno}: unknown or malformed entry {line!r}")
            values[key] = _convert(key, types[key], raw)
        return cls(**values)

    @classmethod
    def load(cls, path: str | None) -> RunConfig:
        path = path or os.environ.get(CONFIG_ENV)
        if not path:
            return cls()
        try:
            return cls.from_text(Path(path).read_text())
        except OSError as exc:
            raise SpecError(f"cannot read config {path}: {exc}") from None


def _convert(key: str, type_: str, raw: str) -> Any:
    try:
        if "int" in type_:
            # accept integral scientific notation such as 1e12
            value = Fraction(raw)
            if value.denominator != 1:
                raise SpecError(f"config value {key}={raw!r} is not an integer")
            return int(value)
        if "float" in type_:
            return float(raw)
    except ValueError:
        raise SpecError(f"config value {key}={raw!r} is not a number") from None
    return raw


# ------------------------------------------------------------------ helpers

def _emit(doc: Any, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(doc))
    elif isinstance(doc, str):
        sys.stdout.write(doc)
    else:
        for key, value in doc.items():
            print(f"{key}: {value if not isinstance(value, (list, dict)) else json.dumps(value)}")


def _point(system: dynsys.SystemSpec, raw: str) -> Any:
    text = raw.strip()
    if text.startswith("["):
        try:
            return system.parse_point(_tuples(json.loads(text)) if system.discrete
                                      else json.loads(text))
        except json.JSONDecodeError as exc:
            raise SpecError(f"bad point {raw!r}: {exc}") from None
    return system.parse_point(text)


def _tuples(raw: Any) -> Any:
    return [_tuples(r) for r in raw] if isinstance(raw, list) else raw


def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise SpecError(f"bad {what} {text!r}") from None


def _read_doc(text: str) -> str:
    """Inline JSON, or ``@path`` for a file."""
    if text.startswith("@"):
        try:
            return Path(text[1:]).read_text()
        except OSError as exc:
            raise SpecError(f"cannot read {text[1:]}: {exc}") from None
    return text


def _required(args, cfg: RunConfig, name: str):
    value = getattr(args, name, None)
    if value is None:
        value = getattr(cfg, name)
    if value is None:
        raise SpecError(f"--{name.replace('_', '-')} is required (flag or config file)")
    return value


def _setting(args, cfg: RunConfig, name: str):
    value = getattr(args, name, None)
    return getattr(cfg, name) if value is None else value


def _positive(value: Any, name: str) -> Any:
    if value <= 0:
        raise SpecError(f"{name} must be positive, got {value}")
    return value


# ---------------------------------------------------------------- commands

def cmd_density(args, cfg: RunConfig, fmt: str):
    set_ = setspec.parse_set_spec(args.set)
    windows = setspec.parse_window_spec(args.windows)
    report = setspec.density_along(set_, windows)
    if fmt == "csv":
        return "lo,hi,density\n" + "".join(
            f"{lo},{hi},{v}\n" for (lo, hi), v in zip(windows, report.values))
    if fmt == "plain":
        return f"{report.estimate}\n"
    return {"schema_version": SCHEMA_VERSION, "set": setspec.format_set_spec(set_),
            "windows": [{"lo": lo, "hi": hi, "density": str(v)}
                        for (lo, hi), v in zip(windows, report.values)],
            "estimate": str(report.estimate), "non_monotone": report.non_monotone}


def cmd_folner_defect(args, cfg: RunConfig, fmt: str):
    windows = setspec.parse_window_spec(args.windows)
    ratios = setspec.folner_defect(windows, args.t)
    if fmt == "csv":
        return "lo,hi,overlap\n" + "".join(
            f"{lo},{hi},{v}\n" for (lo, hi), v in zip(windows, ratios))
    return {"schema_version": SCHEMA_VERSION, "t": args.t,
            "windows": [{"lo": lo, "hi": hi, "overlap": str(v), "defect": str(1 - v)}
                        for (lo, hi), v in zip(windows, ratios)]}


def cmd_correspond(args, cfg: RunConfig, fmt: str):
    set_ = setspec.parse_set_spec(args.set)
    point, cylinder = correspondence.build_correspondence(set_, args.radius)
    windows = list(setspec.parse_window_spec(args.windows)) if args.windows else []
    doc = json.loads(correspondence.export_json(point, cylinder, windows))
    if args.reconstruct:
        lo, hi = _int_list(args.reconstruct, "window")
        doc["reconstructed"] = setspec.format_set_spec(
            correspondence.reconstruct(point, cylinder, (lo, hi)))
    return doc


def cmd_orbit(args, cfg: RunConfig, fmt: str):
    system = dynsys.parse_system_spec(args.system)
    start, target = _point(system, args.start), _point(system, args.target)
    eps = _positive(_required(args, cfg, "eps"), "eps")
    horizon = _positive(_required(args, cfg, "horizon"), "horizon")
    doc = {"schema_version": SCHEMA_VERSION, "system": system.spec()}
    if args.min_hits is not None:
        verdict = dynsys.omega_member_approx(system, start, target, eps, horizon,
                                             args.min_hits)
        doc.update(verdict.to_dict())
    else:
        doc.update({"eps": eps, "horizon": horizon,
                    "hits": dynsys.orbit_hits(system, start, target, eps, horizon)})
    return doc


def _cube(args) -> cube.CubeConfig:
    system = dynsys.parse_system_spec(args.system) if args.system else None
    return cube.CubeConfig.from_json(_read_doc(args.cube), system)


def cmd_cube_verify(args, cfg: RunConfig, fmt: str):
    x = _cube(args)
    eps = _positive(_required(args, cfg, "eps"), "eps")
    horizon = _positive(_required(args, cfg, "horizon"), "horizon")
    min_hits = _positive(_setting(args, cfg, "min_hits"), "min_hits")
    doc = cube.verify_erdos_cube(x, eps, horizon, min_hits).to_dict()
    doc["system"] = x.system.spec()
    return doc


def cmd_qk_test(args, cfg: RunConfig, fmt: str):
    x = _cube(args)
    tol = _setting(args, cfg, "tol")
    if isinstance(x.system, dynsys.SkewProduct):
        member = cube.q2_membership_skew(x, tol)
    else:
        member = cube.qk_membership_rotation(x, tol)
    return {"schema_version": SCHEMA_VERSION, "system": x.system.spec(), "k": x.k,
            "tol": tol, "dynamical": member}


def _measure_doc(m: measure.DiscreteMeasure, **extra) -> dict:
    doc = m.to_dict(lambda p: list(p) if isinstance(p, tuple) else p)
    doc.update(extra)
    return doc


def _parse_box(text: str) -> list[tuple[str, str]]:
    ranges = []
    for part in text.split(";"):
        lo, sep, hi = part.partition(",")
        if not sep:
            raise SpecError(f"box range {part!r} must be lo,hi")
        ranges.append((lo.strip(), hi.strip()))
    return ranges


def cmd_measure(args, cfg: RunConfig, fmt: str):
    system = dynsys.parse_system_spec(args.system)
    max_atoms = _setting(args, cfg, "max_atoms")
    if args.op == "cubic":
        build = measure.cubic_measure_alt if args.alt else measure.cubic_measure
        return _measure_doc(build(system, args.k, max_atoms), system=system.spec(), k=args.k)
    if args.op == "sigma":
        if args.t is None:
            raise SpecError("sigma needs --t")
        return _measure_doc(measure.sigma_k(system, args.t, args.k),
                            system=system.spec(), k=args.k, t=args.t)
    if args.op == "decompose":
        if args.point is None:
            raise SpecError("decompose needs --point")
        kernel = measure.ergodic_decomposition_finite(system, max_atoms)
        p = _point(system, args.point)
        return _measure_doc(kernel(p), system=system.spec(),
                            point=system.format_point(p))
    # birkhoff
    if not args.box:
        raise SpecError("birkhoff needs at least one --box")
    observable = None
    for text in args.box:
        term = measure.BoxObservable.box(system, _parse_box(text))
        observable = term if observable is None else observable + term
    start = _point(system, args.start) if args.start else system.validate(
        _origin(system))
    n = _positive(args.n, "n")
    result = measure.birkhoff_average(system, start, observable, n,
                                      args.trace_every or max(1, n // 100))
    plot = _setting(args, cfg, "plot_data")
    if plot:
        Path(plot).write_text(result.to_csv())
    if fmt == "csv":
        return result.to_csv()
    return {"schema_version": SCHEMA_VERSION, "system": system.spec(), "n": n,
            "average": result.value,
            "trace": [{"n": m, "average": v} for m, v in result.trace]}


def _origin(system: dynsys.SystemSpec) -> Any:
    if isinstance(system, dynsys.ProductPower):
        return tuple(_origin(system.base) for _ in range(system.copies))
    if system.discrete:
        return 0
    return (0,) * system.ncoords


def cmd_find_sumset(args, cfg: RunConfig, fmt: str):
    target = setspec.parse_set_spec(args.set)
    if args.k < 1:
        raise SpecError(f"order k must be >= 1, got {args.k}")
    sizes = _int_list(args.sizes, "sizes")
    if len(sizes) != args.k:
        raise SpecError(f"--sizes needs {args.k} entries, got {len(sizes)}")
    if args.oracle:
        if args.bound is None:
            raise SpecError("--oracle needs --bound")
        space = _setting(args, cfg, "space_limit")
        nodes = _setting(args, cfg, "node_limit")
        if args.variant == "union":
            if args.k != 2:
                raise SpecError("the union variant needs --k 2")
            witness = sumset.find_union_sumset_oracle(target, sizes, args.bound, space, nodes)
        else:
            witness = sumset.find_sumset_oracle(target, args.k, sizes, args.bound,
                                                space, nodes)
        return json.loads(sumset.oracle_report(target, args.k, sizes, args.bound,
                                               args.variant, witness))
    if args.variant == "union":
        raise SpecError("the union variant is only available with --oracle")
    budget = sumset.SearchBudget(_setting(args, cfg, "candidate_bound"),
                                 _setting(args, cfg, "max_candidates"),
                                 _setting(args, cfg, "max_extensions"),
                                 _setting(args, cfg, "time_limit"))
    result = sumset.find_sumset_greedy(target, args.k, sizes, budget,
                                       _setting(args, cfg, "anchor_bound"))
    return result.to_dict()


def cmd_verify_sumset(args, cfg: RunConfig, fmt: str):
    target = setspec.parse_set_spec(args.set)
    sets = [_int_list(part, "set") for part in args.sets.split(";")]
    check = sumset.verify_sumset(target, sets)
    if fmt == "plain":
        return "ok\n" if check.ok else f"violation {check.violation}\n"
    return {"schema_version": SCHEMA_VERSION, "set": setspec.format_set_spec(target),
            "sets": sets, "ok": check.ok, "violation": check.violation,
            "witness": None if check.witness is None else list(check.witness)}


# ------------------------------------------------------------------ parser

def _eps_horizon(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, help="closeness threshold (required here or in config)")
    p.add_argument("--horizon", type=int, help="orbit length (required here or in config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sumsetlab", description=__doc__.split("\n")[0])
    parser.add_argument("--config", help=f"config file (default: ${CONFIG_ENV})")
    parser.add_argument("--format", choices=("json", "csv", "plain"))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="density of a set along interval windows")
    p.add_argument("set")
    p.add_argument("windows")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("folner-defect", help="overlap ratios |(W - t) ∩ W| / |W|")
    p.add_argument("windows")
    p.add_argument("--t", type=int, default=1)
    p.set_defaults(func=cmd_folner_defect)

    p = sub.add_parser("correspond", help="symbolic point and cylinder of a set")
    p.add_argument("set")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--windows", help="intervals:L-M,... for empirical frequencies")
    p.add_argument("--reconstruct", help="lo,hi window to read the set back")
    p.set_defaults(func=cmd_correspond)

    p = sub.add_parser("orbit", help="times the orbit comes within eps of a target")
    p.add_argument("system")
    p.add_argument("--start", required=True)
    p.add_argument("--target", required=True)
    _eps_horizon(p)
    p.add_argument("--min-hits", type=int, help="report an omega-limit verdict instead")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("cube-verify", help="approximate Erdős-cube test")
    p.add_argument("system", nargs="?")
    p.add_argument("--cube", required=True, help="cube JSON, or @path")
    _eps_horizon(p)
    p.add_argument("--min-hits", type=int)
    p.set_defaults(func=cmd_cube_verify)

    p = sub.add_parser("qk-test", help="dynamical-cube membership")
    p.add_argument("system", nargs="?")
    p.add_argument("--cube", required=True, help="cube JSON, or @path")
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_qk_test)

    p = sub.add_parser("measure", help="exact cube measures and Birkhoff averages")
    p.add_argument("system")
    p.add_argument("op", choices=("cubic", "sigma", "decompose", "birkhoff"))
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--t", type=int)
    p.add_argument("--alt", action="store_true", help="cubic: use the delta_x recursion")
    p.add_argument("--point", help="decompose: the point to query")
    p.add_argument("--box", action="append",
                   help="birkhoff: lo,hi;lo,hi per coordinate (repeat to add boxes)")
    p.add_argument("--start", help="birkhoff: start point (default: origin)")
    p.add_argument("--n", type=int, default=10**6)
    p.add_argument("--trace-every", type=int)
    p.add_argument("--plot-data", help="also write the CSV trace here")
    p.add_argument("--max-atoms", type=int)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("find-sumset", help="greedy or exhaustive sumset search")
    p.add_argument("set")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sizes", required=True)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--bound", type=int, help="oracle: largest element considered")
    p.add_argument("--variant", choices=("plain", "union"), default="plain")
    for name in ("candidate-bound", "max-candidates", "max-extensions", "anchor-bound",
                 "space-limit", "node-limit"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--time-limit", type=float)
    p.set_defaults(func=cmd_find_sumset)

    p = sub.add_parser("verify-sumset", help="check B_1 + ... + B_k inside a set")
    p.add_argument("set")
    p.add_argument("--sets", required=True, help="semicolon-separated lists, e.g. 1,3;2,4")
    p.set_defaults(func=cmd_verify_sumset)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        fmt = args.format or cfg.format
        if fmt is None:
            fmt = "csv" if args.command == "measure" and args.op == "birkhoff" else "json"
        out = args.func(args, cfg, fmt)
    except SumsetLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    _emit(out, fmt)
    return 0


if __name__ == "__main__":
    sys.exit(main())
