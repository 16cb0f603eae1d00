"""``coarsekit``: JSON in, JSON reports with embedded certificates out.

Exit codes: 0 ok, 2 malformed input, 3 failed precondition, 4 capacity.
With ``--out DIR`` the report and a run manifest are written there;
otherwise the report goes to stdout.
"""
from __future__ import annotations

import os

# cap native thread pools before numpy/scipy are imported
_THREADS = os.environ.get("COARSEKIT_THREADS")
if _THREADS:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _THREADS)

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .errors import CoarseKitError, MalformedInputError, PreconditionError
from .io import dumps, parse_complex, parse_cover, parse_covers, parse_rationals, parse_space, point_label, read_json

__all__ = ["RunManifest", "main", "build_parser"]


@dataclass
class RunManifest:
    command: str
    arguments: dict
    inputs: dict = field(default_factory=dict)  # path -> sha256
    seed: int = 0
    version: str = __version__
    threads: str | None = None
    outputs: dict = field(default_factory=dict)  # path -> sha256

    def to_json(self) -> dict:
        return asdict(self)


class _Inputs:
    """Reads input files and remembers their hashes for the manifest."""

    def __init__(self):
        self.hashes: dict = {}

    def load(self, path):
        if path is None:
            raise MalformedInputError("a required input file was not given")
        data, raw = read_json(path)
        self.hashes[str(path)] = hashlib.sha256(raw).hexdigest()
        return data


# commands ---------------------------------------------------------------


def cmd_nerve(args, inputs: _Inputs) -> dict:
    from .complexes import nerve
    from .spaces import degree

    space = parse_space(inputs.load(args.space))
    cover = parse_cover(inputs.load(args.cover), space)
    K = nerve(cover)
    return {
        "complex": K.to_json(),
        "dimension": K.dim,
        "vertices": len(K.vertices),
        "simplices_by_dim": [len(K.simplices_of_dim(k)) for k in range(K.dim + 1)],
        "degree": degree(cover),
    }


def cmd_anticech(args, inputs: _Inputs) -> dict:
    from .spaces import build_anticech

    space = parse_space(inputs.load(args.space))
    seq = build_anticech(space, _required_numbers(args.schedule, "--schedule"), max_retries=args.retries)
    return {"space": space.to_json(), **seq.to_json()}


def _coarsening_from(args, inputs: _Inputs):
    from .coarsening import build_coarsening
    from .spaces import build_anticech

    space = parse_space(inputs.load(args.space))
    if args.cover is not None:
        covers = parse_covers(inputs.load(args.cover), space)
        return space, build_coarsening(covers, depth=args.depth)
    seq = build_anticech(space, _required_numbers(args.schedule, "--schedule"))
    return space, build_coarsening(seq, depth=args.depth)


def cmd_coarsen(args, inputs: _Inputs) -> dict:
    space, X = _coarsening_from(args, inputs)
    out = X.to_json()
    out["space"] = space.to_json()
    out["covers"] = [c.to_json() for c in X.covers]
    out["level_vertex_consistency"] = X.level_vertex_consistency()
    return out


def cmd_check_swindle(args, inputs: _Inputs) -> dict:
    from .coarsening import build_coarsening, check_swindle_hypotheses, swindle_sequence

    data = inputs.load(args.coarsening)
    for key in ("space", "covers", "depth"):
        if key not in data:
            raise MalformedInputError(f"coarsening file is missing {key!r}; write it with 'coarsekit coarsen'")
    space = parse_space(data["space"])
    covers = [parse_cover(c, space) for c in data["covers"]]
    X = build_coarsening(covers, depth=int(data["depth"]))
    if not 0 <= args.basepoint < len(X):
        raise PreconditionError(f"basepoint {args.basepoint} is not a node id (0..{len(X) - 1})")
    maps = swindle_sequence(X, args.basepoint, args.kmax)
    radii = parse_rationals(args.radii) if args.radii else None
    scales = parse_rationals(args.scales) if args.scales else None
    return check_swindle_hypotheses(maps, X, args.basepoint, radii=radii, control_radii=scales)


def cmd_classify(args, inputs: _Inputs) -> dict:
    from .coarse import Entourage, band, classify_c0, classify_fusion, classify_hybrid, control_profile

    space = parse_space(inputs.load(args.space))
    data = inputs.load(args.entourage)
    if isinstance(data, dict) and "band" in data:
        E = band(space, parse_rationals(str(data["band"]))[0])
    elif isinstance(data, dict) and isinstance(data.get("pairs"), list):
        pairs = []
        for pr in data["pairs"]:
            if not isinstance(pr, list) or len(pr) != 2:
                raise MalformedInputError(f"pairs are [a, b] lists, got {pr!r}")
            pairs.append((point_label(pr[0]), point_label(pr[1])))
        try:
            E = Entourage.from_labels(space, pairs)
        except PreconditionError as exc:
            raise MalformedInputError(str(exc)) from None
    else:
        raise MalformedInputError("an entourage needs 'pairs' or 'band'")
    levels = {p: space.level_of(i) for i, p in enumerate(space.points)}
    out = {"pairs": len(E.pairs), "profile": control_profile(E).to_json(space)}
    if args.schedule:
        out["c0"] = classify_c0(E, parse_rationals(args.schedule)).to_json()
    if args.level_schedule:
        sched = parse_rationals(args.level_schedule)
        fusion = classify_fusion(E, levels, sched)
        out["fusion"] = fusion.to_json()
        start = fusion.extra.get("cut") or 1
        out["hybrid"] = classify_hybrid(E, levels, sched, start_level=start).to_json()
    return out


def cmd_kpipeline(args, inputs: _Inputs) -> dict:
    from .kgroups import theorem317_report

    if args.points:
        pts = [_token(t) for t in args.points.split(",") if t.strip()]
    elif args.space:
        pts = list(parse_space(inputs.load(args.space)).points)
    else:
        raise MalformedInputError("give --points or --space")
    try:
        chain = json.loads(args.chain)
    except json.JSONDecodeError:
        raise MalformedInputError("--chain must be a JSON list of point lists") from None
    if not isinstance(chain, list) or not all(isinstance(c, list) for c in chain):
        raise MalformedInputError("--chain must be a JSON list of point lists")
    chain = [[point_label(p) for p in c] for c in chain]
    if len(set(pts)) != len(pts):
        raise MalformedInputError("duplicate points")
    unknown = [p for c in chain for p in c if p not in set(pts)]
    if unknown:
        raise MalformedInputError(f"chain uses unknown point {unknown[0]!r}")
    rep = theorem317_report(pts, chain)
    rep["chain"] = [sorted(c, key=repr) for c in chain]
    return rep


def cmd_decompose(args, inputs: _Inputs) -> dict:
    from .decomposition import admissibility_report, build_canonical_tree

    K = parse_complex(inputs.load(args.complex))
    tree = build_canonical_tree(K)
    scales = [int(s) for s in _required_numbers(args.scales or "1,2,3,6", "--scales")]
    return {"tree": tree.to_json(), "report": admissibility_report(tree, scales)}


def _token(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return text


def _required_numbers(text, flag):
    if not text:
        raise MalformedInputError(f"{flag} is required")
    return parse_rationals(text)


COMMANDS = {
    "nerve": cmd_nerve,
    "anticech": cmd_anticech,
    "coarsen": cmd_coarsen,
    "check-swindle": cmd_check_swindle,
    "classify": cmd_classify,
    "kpipeline": cmd_kpipeline,
    "decompose": cmd_decompose,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise MalformedInputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="coarsekit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"coarsekit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="directory for report.json and manifest.json")
        sp.add_argument("--seed", type=int, default=0, help="recorded in the manifest")
        return sp

    sp = common(sub.add_parser("nerve", help="nerve of a cover"))
    sp.add_argument("--space", required=True)
    sp.add_argument("--cover", required=True)

    sp = common(sub.add_parser("anticech", help="certified anti-Čech sequence of net covers"))
    sp.add_argument("--space", required=True)
    sp.add_argument("--schedule", required=True, help="increasing radii, e.g. 1,4,16")
    sp.add_argument("--retries", type=int, default=6)

    sp = common(sub.add_parser("coarsen", help="graph model of the coarsening space"))
    sp.add_argument("--space", required=True)
    sp.add_argument("--cover", help="covers file (as written by anticech) instead of --schedule")
    sp.add_argument("--schedule")
    sp.add_argument("--depth", type=int, default=0)

    sp = common(sub.add_parser("check-swindle", help="swindle hypotheses on a coarsening"))
    sp.add_argument("--coarsening", required=True)
    sp.add_argument("--basepoint", type=int, default=0)
    sp.add_argument("--kmax", type=int, default=1000)
    sp.add_argument("--radii", help="test-ball radii for the escape table")
    sp.add_argument("--scales", help="control radii")

    sp = common(sub.add_parser("classify", help="C0 / fusion / hybrid verdicts for an entourage"))
    sp.add_argument("--space", required=True)
    sp.add_argument("--entourage", required=True)
    sp.add_argument("--schedule", help="C0 tolerances, one per filtration set")
    sp.add_argument("--level-schedule", help="tolerances per level for fusion and hybrid")

    sp = common(sub.add_parser("kpipeline", help="collapsing-chain kernel and quotient report"))
    sp.add_argument("--points", help="comma-separated point ids")
    sp.add_argument("--space")
    sp.add_argument("--chain", required=True, help='JSON, e.g. [[0],[0,1]]')

    sp = common(sub.add_parser("decompose", help="canonical decomposition tree and premises"))
    sp.add_argument("--complex", required=True)
    sp.add_argument("--scales", help="excisiveness scales in thirds of an edge")
    return p


def _emit(report: dict, manifest: RunManifest, out: str | None) -> None:
    text = dumps(report)
    if out is None:
        sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    path = d / "report.json"
    path.write_text(text, encoding="utf-8")
    manifest.outputs = {str(path): hashlib.sha256(text.encode("utf-8")).hexdigest()}
    (d / "manifest.json").write_text(dumps(manifest.to_json()), encoding="utf-8")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        inputs = _Inputs()
        report = COMMANDS[args.command](args, inputs)
        arguments = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "out")}
        manifest = RunManifest(args.command, arguments, inputs.hashes, args.seed, threads=_THREADS)
        _emit(report, manifest, args.out)
        return 0
    except CoarseKitError as exc:
        err = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}}
        if getattr(exc, "report", None):
            err["error"]["report"] = exc.report
        sys.stdout.write(dumps(err))
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
