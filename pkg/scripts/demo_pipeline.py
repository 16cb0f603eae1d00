#!/usr/bin/env python3
"""Drive every ``coarsekit`` subcommand on the bundled inputs.

Reports and run manifests land in ``--out`` (default ``runs/``), one
directory per step.  Exit status is nonzero if any step fails.
"""
import argparse
import json
import sys
from pathlib import Path

from coarsekit.cli import main as coarsekit

INPUTS = Path(__file__).resolve().parent / "inputs"


def steps(out: Path):
    i = str(INPUTS)
    return [
        ("nerve-interval", ["nerve", "--space", f"{i}/unit_interval.json", "--cover", f"{i}/unit_interval_cover.json"]),
        ("nerve-circle", ["nerve", "--space", f"{i}/circle.json", "--cover", f"{i}/circle_arcs.json"]),
        ("anticech", ["anticech", "--space", f"{i}/z50.json", "--schedule", "1,4,16"]),
        ("coarsen", ["coarsen", "--space", f"{i}/z50.json", "--schedule", "1,4,16"]),
        ("check-swindle", ["check-swindle", "--coarsening", str(out / "coarsen" / "report.json"), "--kmax", "2000"]),
        ("classify", ["classify", "--space", f"{i}/z10.json", "--entourage", f"{i}/band2.json",
                      "--schedule", "3,3,3", "--level-schedule", "3,3,3"]),
        ("kpipeline", ["kpipeline", "--points", "a,b,c,d,e,f", "--chain", '[["a"],["a","b","c"]]']),
        ("decompose", ["decompose", "--complex", f"{i}/triangle.json"]),
    ]


def summary(name: str, report: dict) -> str:
    if name.startswith("nerve"):
        return f"dimension {report['dimension']}, simplices by dimension {report['simplices_by_dim']}"
    if name == "anticech":
        return f"radii {report['radii']}, certificate holds: {all(c['holds'] for c in report['certificate'])}"
    if name == "coarsen":
        return f"{report['levels']} levels, nodes per level {report['node_counts']}"
    if name == "check-swindle":
        return f"hypotheses {[c['holds'] for c in report['certificate']]}"
    if name == "classify":
        return f"C0 {report['c0']['passed']}, fusion {report['fusion']['passed']}, hybrid {report['hybrid']['passed']}"
    if name == "kpipeline":
        return f"quotient {report['quotient']['pretty']} = {report['quotient_expected']}: {report['quotient_matches']}"
    return f"{len(report['report']['forks'])} forks, {len(report['report']['leaves'])} leaves"


def run(out: Path) -> int:
    failed = 0
    for name, argv in steps(out):
        code = coarsekit(argv + ["--out", str(out / name)])
        if code:
            print(f"{name:14s} exit {code}")
            failed += 1
            continue
        report = json.loads((out / name / "report.json").read_text())
        print(f"{name:14s} {summary(name, report)}")
    return 1 if failed else 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs", type=Path)
    sys.exit(run(ap.parse_args().out))
