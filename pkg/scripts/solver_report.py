"""Discharge every corpus VC with the configured solver and tabulate the outcome."""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from timebound.emit import default_solver, is_linear, make_goal, run_solver_all
from timebound.parser import parse_program
from timebound.vcg import vcg

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@dataclass(frozen=True)
class SolverConfig:
    solver: str = default_solver()
    timeout: float = 10.0
    jobs: int = 4


def main(cfg: SolverConfig) -> None:
    for path in sorted(CORPUS.glob("*.imp")):
        p = parse_program(path.read_text())
        vcs = vcg(p)
        goals = run_solver_all([make_goal(v) for v in vcs], cfg.solver, cfg.timeout, cfg.jobs)
        print(f"== {path.stem} ({p.mode})")
        for v, g in zip(vcs, goals):
            print(f"   {g.vc_name:<32} {g.status:<10} {'linear' if is_linear(v) else ''}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--solver", default=default_solver())
    ap.add_argument("--timeout", type=float, default=10.0)
    ap.add_argument("--jobs", type=int, default=4)
    a = ap.parse_args()
    main(SolverConfig(a.solver, a.timeout, a.jobs))
