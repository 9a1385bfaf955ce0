"""Per-n amortized accounting for the binary counter: total amortized vs actual cost."""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from timebound.core import CostModel, While
from timebound.interp import ProgramState, eval_aexp, exec_stmt
from timebound.parser import parse_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@dataclass(frozen=True)
class TelescopeConfig:
    n_max: int = 64
    credit: int = 13


class _Totals:
    def __init__(self, p):
        self.info = p.oracle_map
        self.a = {}
        self.sums = {}

    def loop_entry(self, loop, state):
        if isinstance(loop, While):
            self.a[loop.loop_id] = eval_aexp(self.info[loop.loop_id].amortized, state)

    def loop_iteration(self, loop, before, after, cost):
        s = self.sums.setdefault(loop.loop_id, [0, 0, 0])
        s[0] += self.a[loop.loop_id]
        s[1] += cost
        s[2] += 1

    def branch(self, *_):
        pass


def main(cfg: TelescopeConfig) -> None:
    p = parse_program((CORPUS / "binary_counter.imp").read_text())
    m = CostModel.unit()
    print(f"{'n':>3} {'iters':>6} {'sum a':>7} {'sum t':>7} {'total cost':>10} {'T':>6}")
    for n in range(1, cfg.n_max + 1):
        size = n.bit_length() - 1
        s0 = ProgramState({"n": n, "size": size, "c": cfg.credit})
        tr = _Totals(p)
        out = exec_stmt(p.body, s0, m, tracer=tr)
        a, t, k = tr.sums.get(0, [0, 0, 0])
        bound = eval_aexp(p.cost_bound, s0)
        print(f"{n:>3} {k:>6} {a:>7} {t:>7} {out.cost:>10} {bound:>6}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=64)
    ap.add_argument("--credit", type=int, default=13)
    a = ap.parse_args()
    main(TelescopeConfig(a.n_max, a.credit))
