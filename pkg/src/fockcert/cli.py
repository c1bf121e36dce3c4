"""Command-line interface: ``fockcert {certify,sweep,boundary,wigner}``.

Exit status: 0 when the input is compatible with a classical state, 1 when it
is certified nonclassical (or its Wigner function is negative), 2 on input
errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Any, Sequence

import numpy as np

from . import criteria, geometry, phasespace
from ._jsonio import dumps
from ._numerics import VIOLATION_RTOL, DimensionError, DomainError, bisect_predicate, fmt_float
from .fockstates import FAMILIES, FockDistribution, TruncationError, make_family

THREADS_ENV = "FOCKCERT_THREADS"
CSV_DIGITS = 12
THRESHOLD_XTOL = 1e-9
FAMILY_PARAMS = ("mu", "n", "k", "ell", "p", "xi")

EXIT_CLASSICAL, EXIT_NONCLASSICAL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Malformed command-line input."""


# -- argument parsing ------------------------------------------------------------


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--out", default=default, help="write output here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default=default, help="output format")
    parser.add_argument("--tol", type=float, default=default, help="relative violation tolerance (default 1e-12)")
    parser.add_argument("--config", default=default, help="file of key=value lines mirroring the long flags")


def _family_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=sorted(FAMILIES), help="state family")
    for name in FAMILY_PARAMS:
        parser.add_argument(f"--{name}", type=float, help=f"family parameter {name}")
    parser.add_argument("--n-max", type=int, help="truncation index N (default: automatic)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockcert", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="evaluate all criteria on one distribution")
    _global_options(p, suppress=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--probs", help="comma-separated P_0,...,P_N")
    src.add_argument("--input", help="distribution JSON file")
    _family_options(p)
    p.add_argument("--max-s", type=int, default=4, help="longest majorization tuple")
    p.add_argument("--maj-nmax", type=int, help="largest index in majorization pairs")
    p.add_argument("--no-majorization", action="store_true", help="skip majorization pairs")
    p.add_argument("--no-triples", action="store_true", help="skip the general triples")

    p = sub.add_parser("sweep", help="evaluate criteria along a family parameter")
    _global_options(p, suppress=True)
    _family_options(p)
    p.add_argument("--param", default="mu", help="swept parameter name")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--param2", help="optional second swept parameter")
    p.add_argument("--start2", type=float)
    p.add_argument("--stop2", type=float)
    p.add_argument("--step2", type=float)
    p.add_argument("--criteria", default="K1,Kinf:2", help="comma-separated criterion ids")

    p = sub.add_parser("boundary", help="sample the boundary of the classical set")
    _global_options(p, suppress=True)
    p.add_argument("--slice", default="0,1,2", help="indices spanning the slice, e.g. 0,2")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--lam-max", type=float, default=10.0)

    p = sub.add_parser("wigner", help="Wigner function grid and negativity")
    _global_options(p, suppress=True)
    p.add_argument("--probs", help="comma-separated P_0,...,P_N of a diagonal state")
    _family_options(p)
    p.add_argument("--radius", type=float, default=phasespace.DEFAULT_RADIUS)
    p.add_argument("--grid", type=int, default=phasespace.DEFAULT_RADIAL, help="radial samples")
    return parser


def _read_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("_", "-")] = value
    return out


def _merge_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Insert config entries right after the subcommand so that explicit flags override them."""
    finder = argparse.ArgumentParser(add_help=False)
    finder.add_argument("--config")
    known, _ = finder.parse_known_args(argv)
    if not known.config:
        return argv
    entries = _read_config(known.config)
    commands = {"certify", "sweep", "boundary", "wigner"}
    pos = next((i for i, a in enumerate(argv) if a in commands), None)
    if pos is None:
        raise InputError("no subcommand given")
    sub = parser._subparsers._group_actions[0].choices[argv[pos]]  # noqa: SLF001
    flags = {opt: act for act in sub._actions for opt in act.option_strings}  # noqa: SLF001
    extra: list[str] = []
    for key, value in entries.items():
        if key == "config":
            continue
        act = flags.get(f"--{key}")
        if act is None:
            raise InputError(f"unknown config key {key!r}")
        if act.nargs == 0:
            if value.lower() in ("1", "true", "yes", "on"):
                extra.append(f"--{key}")
        else:
            extra += [f"--{key}", value]
    return argv[: pos + 1] + extra + argv[pos + 1 :]


# -- helpers -------------------------------------------------------------------


def _parse_probs(text: str) -> FockDistribution:
    try:
        vals = [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise InputError(f"cannot parse probabilities {text!r}: {exc}") from None
    if not vals:
        raise InputError("empty probability vector")
    total = math.fsum(vals)
    return FockDistribution(np.array(vals), truncated=abs(total - 1.0) > 1e-12)


def _family_params(args: argparse.Namespace) -> dict[str, Any]:
    return {k: getattr(args, k) for k in FAMILY_PARAMS if getattr(args, k, None) is not None}


def _distribution(args: argparse.Namespace) -> FockDistribution:
    if getattr(args, "probs", None):
        return _parse_probs(args.probs)
    if getattr(args, "input", None):
        with open(args.input, encoding="utf-8") as fh:
            return FockDistribution.from_json(fh.read())
    if args.family:
        return make_family(args.family, **_family_params(args)).distribution(args.n_max)
    raise InputError("give --probs, --input or --family")


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    if not step > 0 or start > stop:
        raise InputError("sweep ranges need step > 0 and start <= stop")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    for line in comments:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def _cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v), CSV_DIGITS)
    return str(v)


def _emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands -----------------------------------------------------------------


def cmd_certify(args: argparse.Namespace) -> int:
    dist = _distribution(args)
    opts = criteria.CertifyOptions(
        max_s=args.max_s,
        maj_n_max=args.maj_nmax,
        tol=args.tol,
        majorization=not args.no_majorization,
        triples=not args.no_triples,
    )
    report = criteria.certify(dist, opts)
    if args.format == "csv":
        rows = [(v.id, v.margin, v.violated, v.diverged) for v in report.verdicts]
        _emit(_csv_text(["id", "margin", "violated", "diverged"], rows), args.out)
    else:
        _emit(report.to_json(), args.out)
    return EXIT_NONCLASSICAL if report.nonclassical else EXIT_CLASSICAL


@dataclass(frozen=True)
class SweepSpec:
    family: str
    fixed: dict
    params: tuple[str, ...]
    grids: tuple[np.ndarray, ...]
    n_max: int | None
    criteria: tuple[str, ...]
    tol: float = VIOLATION_RTOL

    def __post_init__(self) -> None:
        cls = FAMILIES.get(self.family)
        if cls is None:
            raise InputError(f"unknown family {self.family!r}")
        names = {f.name for f in fields(cls)}
        for p in self.params:
            if p not in names:
                raise InputError(f"family {self.family!r} has no parameter {p!r}")
        if not self.criteria:
            raise InputError("no criteria selected")
        for cid in self.criteria:
            if not criteria.is_valid_id(cid):
                raise InputError(f"unknown criterion id {cid!r}")

    def verdicts(self, values: Sequence[float]) -> list[criteria.CriterionVerdict]:
        params = dict(self.fixed)
        params.update(zip(self.params, values))
        dist = make_family(self.family, **params).distribution(self.n_max)
        return [criteria.evaluate(dist, cid, self.tol) for cid in self.criteria]


def _needed_n(ids: Sequence[str]) -> int:
    return max([2] + [criteria.highest_index(cid) for cid in ids])


def _detection_intervals(spec: SweepSpec, grid: np.ndarray, flags: list[list[bool | None]]) -> dict[str, list[list[float]]]:
    out: dict[str, list[list[float]]] = {}
    for c, cid in enumerate(spec.criteria):
        col = [row[c] for row in flags]

        def violated(x: float, c=c) -> bool:
            return spec.verdicts([x])[c].violated

        def edge(i: int) -> float:
            # flag differs between grid[i] and grid[i + 1]
            return bisect_predicate(violated, float(grid[i]), float(grid[i + 1]), THRESHOLD_XTOL)

        intervals: list[list[float]] = []
        start = None
        for i, flag in enumerate(col):
            if flag and start is None:
                start = float(grid[0]) if i == 0 else (edge(i - 1) if col[i - 1] is not None else float(grid[i]))
            if flag and (i == len(col) - 1 or not col[i + 1]):
                end = float(grid[i]) if i == len(col) - 1 or col[i + 1] is None else edge(i)
                intervals.append([start, end])
                start = None
        out[cid] = intervals
    return out


def run_sweep(spec: SweepSpec) -> tuple[list[list[Any]], dict[str, list[list[float]]]]:
    """Rows ``[params..., margin, violated, ...]`` and, for 1D sweeps, detection intervals."""
    points = [tuple(v) for v in np.array(np.meshgrid(*spec.grids, indexing="ij")).reshape(len(spec.grids), -1).T]

    def row(values):
        try:
            vs = spec.verdicts([float(v) for v in values])
            cells = [x for v in vs for x in (v.margin, v.violated)]
            return list(values) + cells, [v.violated for v in vs]
        except (DomainError, DimensionError, TruncationError, ValueError) as exc:
            marker = f"error: {exc}"
            return list(values) + [x for _ in spec.criteria for x in (math.nan, marker)], [None] * len(spec.criteria)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(row, points))
    rows = [r for r, _ in results]
    intervals = {}
    if len(spec.grids) == 1:
        intervals = _detection_intervals(spec, spec.grids[0], [f for _, f in results])
    return rows, intervals


def cmd_sweep(args: argparse.Namespace) -> int:
    if not args.family:
        raise InputError("sweep needs --family")
    ids = tuple(s.strip() for s in args.criteria.split(",") if s.strip())
    params = [args.param]
    grids = [_grid(args.start, args.stop, args.step)]
    if args.param2:
        if None in (args.start2, args.stop2, args.step2):
            raise InputError("--param2 needs --start2, --stop2 and --step2")
        params.append(args.param2)
        grids.append(_grid(args.start2, args.stop2, args.step2))
    fixed = {k: v for k, v in _family_params(args).items() if k not in params}
    n_max = args.n_max if args.n_max is not None else _needed_n(ids)
    spec = SweepSpec(args.family, fixed, tuple(params), tuple(grids), n_max, ids, args.tol)
    rows, intervals = run_sweep(spec)

    header = ["param"] if len(params) == 1 else ["param", "param2"]
    for cid in ids:
        header += [f"{cid}_margin", f"{cid}_violated"]
    if args.format == "json":
        doc = {
            "family": spec.family,
            "params": list(params),
            "fixed": fixed,
            "n_max": n_max,
            "criteria": list(ids),
            "rows": [dict(zip(header, r)) for r in rows],
            "intervals": intervals,
        }
        _emit(dumps(doc), args.out)
    else:
        comments = [
            f"interval {cid} " + " ".join(f"[{fmt_float(a, CSV_DIGITS)},{fmt_float(b, CSV_DIGITS)}]" for a, b in iv)
            for cid, iv in intervals.items()
        ]
        _emit(_csv_text(header, rows, comments), args.out)
    detected = any(flag is True for r in rows for flag in r[len(params) + 1 :: 2])
    return EXIT_NONCLASSICAL if detected else EXIT_CLASSICAL


def cmd_boundary(args: argparse.Namespace) -> int:
    try:
        indices = tuple(int(x) for x in args.slice.split(","))
        samples = geometry.boundary_samples(indices, args.samples, args.lam_max)
    except (ValueError, DomainError) as exc:
        raise InputError(str(exc)) from None
    coord_names = [f"P{i}" for i in indices]
    if args.format == "json":
        doc = [
            {"param": s.param, "t": s.t, **dict(zip(coord_names, s.coords)), "branch": s.branch}
            for s in samples
        ]
        _emit(dumps(doc), args.out)
    else:
        rows = [[s.param, s.t, *s.coords, s.branch] for s in samples]
        _emit(_csv_text(["param", "t", *coord_names, "branch"], rows), args.out)
    return EXIT_CLASSICAL


def cmd_wigner(args: argparse.Namespace) -> int:
    dist = _distribution(args)
    report = phasespace.min_wigner(dist, radius=args.radius, radial_n=args.grid)
    if args.format == "csv":
        r, w = phasespace.radial_profile(dist, args.radius, args.grid)
        comments = [f"min_value={fmt_float(report.min_value, CSV_DIGITS)} r={fmt_float(report.argmin.x, CSV_DIGITS)} negative={_cell(report.negative)}"]
        _emit(_csv_text(["r", "W"], list(zip(r, w)), comments), args.out)
    else:
        doc = report.to_dict()
        check = phasespace.wigner_diagonal(dist, 0.0)
        doc["tail_bound"] = check.error_bound
        if check.warning:
            doc["warning"] = check.warning
        _emit(dumps(doc), args.out)
    return EXIT_NONCLASSICAL if report.negative else EXIT_CLASSICAL


COMMANDS = {"certify": cmd_certify, "sweep": cmd_sweep, "boundary": cmd_boundary, "wigner": cmd_wigner}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _merge_config(parser, argv)
        args = parser.parse_args(argv)
    except InputError as exc:
        print(f"fockcert: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"fockcert: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # argparse reports usage errors this way
        return EXIT_INPUT if exc.code else EXIT_CLASSICAL
    default_format = "csv" if args.command in ("sweep", "boundary") else "json"
    for name, default in (("out", None), ("format", default_format), ("tol", VIOLATION_RTOL), ("config", None)):
        if getattr(args, name, None) is None:
            setattr(args, name, default)
    try:
        return COMMANDS[args.command](args)
    except (InputError, DomainError, DimensionError, TruncationError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"fockcert: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
