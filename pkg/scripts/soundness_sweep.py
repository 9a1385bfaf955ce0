"""Run the bound checker over the corpus for several seeds and cost models."""

from __future__ import annotations

import argparse
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from timebound.core import CostModel
from timebound.harness import check_amortized_telescoping, check_bound
from timebound.parser import parse_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@dataclass(frozen=True)
class SweepConfig:
    trials: int = 200
    seeds: tuple[int, ...] = (0, 1, 2)
    # Bounds and oracle cost functions are written for unit costs, so the
    # heavier model is a negative control: violations are expected there.
    # Exact mode derives loop costs from the code, so its static cost stays sound.
    models: dict = field(default_factory=lambda: {"unit": {}, "assign3": {"C_ASSIGN_V": 3}})
    out: Path | None = None


def main(cfg: SweepConfig) -> None:
    rows = []
    for name, overrides in cfg.models.items():
        m = CostModel.from_mapping(overrides)
        for path in sorted(CORPUS.glob("*.imp")):
            p = parse_program(path.read_text())
            for seed in cfg.seeds:
                t0 = time.perf_counter()
                reports = [check_bound(p, m, cfg.trials, seed, name=path.stem)]
                if p.mode == "amortized":
                    reports.append(check_amortized_telescoping(p, m, cfg.trials, seed, name=path.stem))
                kinds = sorted({v.kind for r in reports for v in r.violations})
                row = {"model": name, "program": path.stem, "seed": seed,
                       "violations": sum(len(r.violations) for r in reports), "kinds": kinds,
                       "seconds": round(time.perf_counter() - t0, 3)}
                rows.append(row)
                print(f"{name:<6} {path.stem:<16} seed {seed}: {row['violations']:>4} violations {kinds}")
    if cfg.out:
        cfg.out.write_text(json.dumps(rows, indent=2))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--out", type=Path)
    a = ap.parse_args()
    main(SweepConfig(trials=a.trials, seeds=tuple(a.seeds), out=a.out))
