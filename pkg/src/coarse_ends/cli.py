"""Command-line entry point: ``coarse-ends <command> [options]``.

Exit codes: 0 success, 2 invalid input, 3 inconclusive at the horizon.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from . import __version__
from .coarsemaps import (
    MapTrace,
    check_controlled,
    check_proper,
    estimate_affine_bound,
    geodesic_interpolate,
)
from .cones import FiniteComplex, planted_complex, verify_cone_bijection
from .ends import ProfileTooShort, ends_profile, same_end, stabilized_end_count
from .obstruction import (
    GENERATORS,
    NoRefutation,
    candidate_family,
    format_word,
    refute_properness,
    stability_scan,
)
from .homotopy import LatticeHomotopy
from .space import SpaceError, SpaceOracle, StaircaseSpace, VertexRay, build_space, to_dot
from .trees import TreeOracle, pi0_equivalent

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE = 0, 2, 3


class InvalidInput(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    space: Any = None
    params: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        for key, val in self.params.items():
            if isinstance(val, int) and not isinstance(val, bool) and val <= 0 and key not in ("seed",):
                raise InvalidInput(f"--{key.replace('_', '-')} must be positive")


@dataclass
class Result:
    report: dict
    rows: list
    header: list
    code: int = EXIT_OK


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------


def _space_from_args(args) -> SpaceOracle:
    if getattr(args, "spec", None):
        return build_space(Path(args.spec))
    kind = getattr(args, "kind", None)
    if not kind:
        raise InvalidInput("give --kind or --spec")
    if kind == "staircase":
        return StaircaseSpace(args.nmax, getattr(args, "steps", "square"))
    return build_space(kind)


def _children(space: SpaceOracle, v) -> list:
    d = space.depth(v)
    return [w for w in space.neighbors(v) if space.depth(w) == d + 1]


def parse_ray(space: SpaceOracle, text: str, length: int) -> VertexRay:
    """Ray shorthand.

    ``geodesic:<digits>`` walks outward choosing the child with the given
    index, cycling through the digits.  ``detour:<digits>:<n>`` follows the
    same geodesic with an out-and-back excursion of n edges after every
    step.  ``alpha`` and ``alpha-prime`` are the staircase rays.  A JSON
    list of vertices, or ``@file.json`` holding one, is taken literally.
    """
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    if text in ("alpha", "alpha-prime"):
        if not isinstance(space, StaircaseSpace):
            raise InvalidInput(f"{text} is a staircase ray")
        f = space.alpha if text == "alpha" else space.alpha_prime
        return VertexRay(tuple(f(t) for t in range(min(length, space.n_max + 1))))
    if text.startswith(("geodesic:", "detour:")):
        parts = text.split(":")
        pattern = parts[1]
        if not pattern or not pattern.isdigit():
            raise InvalidInput(f"bad ray pattern {pattern!r}")
        detour = int(parts[2]) if parts[0] == "detour" and len(parts) > 2 else 0
        spine = [space.basepoint]
        for t in range(length - 1):
            kids = _children(space, spine[-1])
            if not kids:
                break
            spine.append(kids[int(pattern[t % len(pattern)]) % len(kids)])
        if not detour:
            return VertexRay(tuple(spine))
        out = [spine[0]]
        for a, b in zip(spine, spine[1:]):
            walk = [a]
            for _ in range(detour):
                options = [w for w in space.neighbors(walk[-1])
                           if w != b and w not in walk and space.depth(w) > space.depth(walk[-1])]
                if not options:
                    break
                walk.append(options[0])
            if len(walk) > 1:
                out.extend(walk[1:])
                out.extend(walk[-2::-1])
            out.append(b)
        return VertexRay(tuple(out))
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        raise InvalidInput(f"cannot read ray {text!r}") from None
    return VertexRay(tuple(space.parse(v) for v in doc))


def _rows_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split("-"))
    except ValueError:
        raise InvalidInput(f"--rows expects LO-HI, got {text!r}") from None
    if not 0 < lo <= hi:
        raise InvalidInput("--rows needs 0 < LO <= HI")
    return lo, hi


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def run_ends(args, config: RunConfig) -> Result:
    space = _space_from_args(args)
    horizon = args.horizon or space.default_horizon(args.rmax)
    profile = ends_profile(space, space.basepoint, args.rmax, horizon)
    code = EXIT_OK
    try:
        count = stabilized_end_count(profile, min_radii=args.min_radii).to_dict()
    except ProfileTooShort as exc:
        count = {"stabilized": False, "inconclusive": str(exc)}
        code = EXIT_INCONCLUSIVE
    report = {"profile": profile.to_dict(), "end_count": count, "horizon": horizon}
    return Result(report, list(zip(profile.radii, profile.counts)), ["R", "count"], code)


def run_same_end(args, config: RunConfig) -> Result:
    space = _space_from_args(args)
    r1 = parse_ray(space, args.ray1, args.length)
    r2 = parse_ray(space, args.ray2, args.length)
    verdict = same_end(space, r1, r2, args.rmax, k=args.k, horizon=args.horizon)
    rows = [(R, "same" if R in verdict.witnesses else "different" if R in verdict.separating else "inconclusive")
            for R in range(1, args.rmax + 1)]
    code = EXIT_INCONCLUSIVE if verdict.relation == "inconclusive" else EXIT_OK
    report = verdict.to_dict(space)
    return Result(report, rows, ["R", "relation"], code)


def run_tree_pi0(args, config: RunConfig) -> Result:
    space = _space_from_args(args)
    try:
        tree = TreeOracle(space)
    except SpaceError as exc:
        raise InvalidInput(f"not a tree: {exc}") from None
    r1 = parse_ray(space, args.ray1, args.length)
    r2 = parse_ray(space, args.ray2, args.length)
    try:
        verdict = pi0_equivalent(tree, r1, r2)
    except SpaceError as exc:
        report = {"relation": "inconclusive", "reason": str(exc)}
        return Result(report, [("relation", "inconclusive")], ["key", "value"], EXIT_INCONCLUSIVE)
    ca, cb = verdict.chains
    report = {
        "relation": verdict.relation,
        "divergence_height": verdict.divergence_height,
        "window_depth": verdict.window_depth,
        "shared_prefix": [space.serialize(v) for v, w in zip(ca.samples, cb.samples) if v == w],
        "oracle_horizon": space.horizon,
    }
    if verdict.window_depth > 1:
        s1 = geodesic_interpolate(r1, space, root=tree.root)
        s2 = geodesic_interpolate(r2, space, root=tree.root)
        R_check = min(verdict.window_depth - 1, args.check_rmax)
        check = same_end(space, s1, s2, R_check, paths=False)
        report["check_rmax"] = R_check
        expected = "same" if verdict.equivalent else "different"
        report["same_end"] = check.relation
        report["cross_check"] = check.relation == expected
    rows = [(k, v) for k, v in report.items() if not isinstance(v, list)]
    return Result(report, rows, ["key", "value"])


def run_cone_check(args, config: RunConfig) -> Result:
    if args.complex:
        X = FiniteComplex.load(args.complex)
    elif args.planted:
        X = planted_complex(args.planted)
    else:
        raise InvalidInput("give --complex FILE or --planted K")
    rep = verify_cone_bijection(X, R_max=args.rmax)
    code = EXIT_OK if rep.ends is not None else EXIT_INCONCLUSIVE
    return Result(rep.to_dict(), list(enumerate(rep.counts, start=1)), ["R", "count"], code)


def run_staircase_refute(args, config: RunConfig) -> Result:
    lo, hi = _rows_range(args.rows)
    space = StaircaseSpace(max(args.nmax, hi), args.steps)
    if args.rows_file:
        candidate = LatticeHomotopy.from_dict(json.loads(Path(args.rows_file).read_text()), space)
    else:
        candidate = candidate_family(space, args.generator, hi, j0=args.j0)
    endrays = (space.alpha, space.alpha) if args.generator == "constant" and not args.rows_file else None
    try:
        scan = stability_scan(space, candidate, args.A, (lo, hi), interpolate=not args.raw, endrays=endrays)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    report = {"scan": scan.to_dict(), "refuted": False, "oracle_horizon": space.horizon}
    try:
        witness = refute_properness(space, candidate, scan)
        report["refuted"] = True
        report["witness"] = witness.to_dict()
    except NoRefutation as exc:
        report["refutation"] = f"unavailable: {exc}"
    rows = [(h, format_word(r.behav)) for h, r in scan.rows.items() if r.behav is not None]
    return Result(report, rows, ["h", "word"])


def run_map_check(args, config: RunConfig) -> Result:
    trace = MapTrace.from_dict(json.loads(Path(args.trace).read_text()))
    radii = [int(x) for x in args.radii.split(",")]
    ctl = check_controlled(trace, radii)
    report = {
        "window": str(ctl.window),
        "modulus": {str(R): str(S) for R, S in ctl.modulus.items()},
        "controlled_on_trace": ctl.controlled,
        "growing_radii": ctl.growing,
    }
    if args.balls:
        balls = [(trace.codomain.parse(c), r) for c, r in json.loads(args.balls)]
        prop = check_proper(trace, balls)
        report["preimage_diameters"] = [
            {"center": trace.codomain.serialize(c), "radius": r, "diameter": str(d)}
            for (c, r), d in prop.diameters.items()
        ]
        report["proper_on_trace"] = prop.proper
    bound = estimate_affine_bound(trace)
    report["affine_bound"] = {"A": str(bound.A), "B": str(bound.B)}
    return Result(report, [(R, str(S)) for R, S in ctl.modulus.items()], ["R", "S"])


def run_export_dot(args, config: RunConfig) -> Result:
    space = _space_from_args(args)
    text = to_dot(space, space.basepoint, args.radius)
    return Result({"dot": text}, [], [], EXIT_OK)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _space_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", help="space kind, e.g. line, grid-2, regular-tree-4, staircase")
    p.add_argument("--spec", help="JSON space spec file")
    p.add_argument("--nmax", type=int, default=200, help="staircase truncation height")
    p.add_argument("--steps", choices=("square", "constant"), default="square")


def _output_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="directory for <command>.json and <command>.csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coarse-ends", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ends", help="ends profile and stabilized count")
    _space_options(p)
    p.add_argument("--rmax", type=int, default=20)
    p.add_argument("--horizon", type=int)
    p.add_argument("--min-radii", type=int, default=10)
    _output_options(p)
    p.set_defaults(func=run_ends)

    p = sub.add_parser("same-end", help="compare two rays radius by radius")
    _space_options(p)
    p.add_argument("--ray1", required=True)
    p.add_argument("--ray2", required=True)
    p.add_argument("--rmax", type=int, default=10)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--horizon", type=int)
    p.add_argument("--length", type=int, default=40, help="samples per ray")
    _output_options(p)
    p.set_defaults(func=run_same_end)

    p = sub.add_parser("tree-pi0", help="coarse path component comparison on a tree")
    _space_options(p)
    p.add_argument("--ray1", required=True)
    p.add_argument("--ray2", required=True)
    p.add_argument("--length", type=int, default=40)
    p.add_argument("--check-rmax", type=int, default=8,
                   help="largest radius for the same-end cross-check")
    _output_options(p)
    p.set_defaults(func=run_tree_pi0)

    p = sub.add_parser("cone-check", help="ends of a cone against components of its base")
    p.add_argument("--complex", help="complex JSON with vertices and simplices")
    p.add_argument("--planted", type=int, help="use K planted components instead")
    p.add_argument("--rmax", type=int, default=10)
    _output_options(p)
    p.set_defaults(func=run_cone_check)

    p = sub.add_parser("staircase-refute", help="refute properness of a staircase candidate")
    p.add_argument("--nmax", type=int, default=200)
    p.add_argument("--steps", choices=("square", "constant"), default="square")
    p.add_argument("--generator", choices=sorted(GENERATORS), default="direct")
    p.add_argument("--rows-file", help="candidate as a JSON row table")
    p.add_argument("--A", type=int, default=1)
    p.add_argument("--rows", default="20-70")
    p.add_argument("--j0", type=int, default=4, help="crossing step of the shipped generators")
    p.add_argument("--raw", action="store_true", help="read rows as A-paths without interpolation")
    _output_options(p)
    p.set_defaults(func=run_staircase_refute)

    p = sub.add_parser("map-check", help="controlled/proper/affine checks on a map trace")
    p.add_argument("--trace", required=True, help="MapTrace JSON")
    p.add_argument("--radii", default="1,2,4,8")
    p.add_argument("--balls", help='JSON list of [center, radius] target balls')
    _output_options(p)
    p.set_defaults(func=run_map_check)

    p = sub.add_parser("export-dot", help="Graphviz DOT of a ball about the basepoint")
    _space_options(p)
    p.add_argument("--radius", type=int, default=3)
    _output_options(p)
    p.set_defaults(func=run_export_dot)
    return parser


def _csv_text(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items()
              if k not in ("func", "command", "out", "format", "kind", "spec")}
    try:
        config = RunConfig(args.command, getattr(args, "spec", None) or getattr(args, "kind", None),
                           params, args.out, args.format)
        result = args.func(args, config)
    except (InvalidInput, SpaceError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.command == "export-dot":
        text = result.report["dot"]
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "export-dot.dot").write_text(text)
        sys.stdout.write(text)
        return result.code
    doc = {"config": asdict(config), **result.report}
    json_text = json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
    csv_text = _csv_text(result.header, result.rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.json").write_text(json_text)
        (out / f"{args.command}.csv").write_text(csv_text)
    sys.stdout.write(json_text if args.format == "json" else csv_text)
    return result.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
