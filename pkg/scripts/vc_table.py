"""Print the number of VCs per corpus program, by mode and rule."""

from __future__ import annotations

import argparse
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from timebound.parser import parse_program
from timebound.vcg import vcg

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@dataclass(frozen=True)
class TableConfig:
    corpus: Path = CORPUS
    by_rule: bool = False


def main(cfg: TableConfig) -> None:
    print(f"{'program':<16} {'mode':<10} {'VCs':>4}  time")
    for path in sorted(cfg.corpus.glob("*.imp")):
        t0 = time.perf_counter()
        p = parse_program(path.read_text())
        vcs = vcg(p)
        dt = time.perf_counter() - t0
        print(f"{path.stem:<16} {p.mode:<10} {len(vcs):>4}  {dt * 1000:.1f} ms")
        if cfg.by_rule:
            for rule, n in sorted(Counter(v.provenance for v in vcs).items()):
                print(f"    {rule:<24} {n}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--by-rule", action="store_true")
    main(TableConfig(by_rule=ap.parse_args().by_rule))
