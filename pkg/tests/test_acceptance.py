"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL verdict with its runtime; the
verdicts are printed at the end of the pytest run (see conftest) and when
this file is executed directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import random
import sys
import time
from contextlib import redirect_stdout
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from timebound.cli import main as cli_main  # noqa: E402
from timebound.core import CostModel, loops  # noqa: E402
from timebound.costsem import cost_value  # noqa: E402
from timebound.emit import brute_force_check, is_linear, make_goal, run_solver_all  # noqa: E402
from timebound.harness import (  # noqa: E402
    RandomGen, check_amortized_telescoping, check_bound, check_interpreter_differential,
    check_substitution_lemma, states_for_values,
)
from timebound.interp import ProgramState, exec_stmt  # noqa: E402
from timebound.parser import parse_program, parse_stmt, pretty_print  # noqa: E402
from timebound.reference import reference_exec  # noqa: E402
from timebound.vcg import PROVENANCES, vcg, wpc_classic  # noqa: E402

from conftest import CORPUS, HAVE_Z3, load  # noqa: E402

UNIT = CostModel.unit()
RESULTS: list[str] = []


def _record(number: int, title: str, limit: float, body) -> None:
    start = time.perf_counter()
    detail = ""
    try:
        ok, detail = body()
    except Exception as e:  # recorded, then re-raised below
        ok, detail = False, f"{type(e).__name__}: {e}"
        raise
    finally:
        elapsed = time.perf_counter() - start
        in_time = elapsed < limit
        verdict = "PASS" if ok and in_time else "FAIL"
        if ok and not in_time:
            detail += f"; over the {limit:g}s limit"
        RESULTS.append(f"criterion {number:2d} {verdict}  {title}: {detail} [{elapsed:.2f}s < {limit:g}s]")
    assert ok, detail
    assert in_time, f"took {elapsed:.2f}s, limit {limit}s"


def test_criterion_01_vc_counts():
    def body():
        expected = {"insertion_sort": 10, "binary_search": 6, "range_filter": 5}
        counts = {n: len(vcg(load(n))) for n in expected}
        bc = vcg(load("binary_counter"))
        prov_ok = all(v.provenance in PROVENANCES for v in bc)
        ok = counts == expected and len(bc) == 12 and prov_ok
        return ok, f"{counts}, binary_counter={len(bc)} with provenance={prov_ok}"
    _record(1, "VC counts", 1.0, body)


def test_criterion_02_division_bound():
    def body():
        p = load("division")
        loop = loops(p.body)[0]
        cost = wpc_classic(loop, p.postcondition, UNIT, p.oracle).cost
        mismatches = [x for x in range(21) if cost_value(cost, ProgramState({"x": x})) != 13 * x + 3]
        top = next(v for v in vcg(p) if v.name == "cost-bound")
        res = brute_force_check(top, {"x": range(0, 21), "y": range(-8, 9)})
        ok = not mismatches and res.status == "Valid"
        return ok, f"loop cost = 13x+3 on x in 0..20 ({21 - len(mismatches)}/21); top-level VC {res.status} over {res.checked} points"
    _record(2, "division loop cost and bound", 1.0, body)


def test_criterion_03_swap():
    def body():
        s = parse_stmt("z = x; x = y; y = z")
        sigma = ProgramState({"x": 3, "y": 10, "z": 0})
        a, b = exec_stmt(s, sigma, UNIT), reference_exec(s, sigma, UNIT)
        expected = 3 * (UNIT["C_VAR"] + UNIT["C_ASSIGN_V"])
        ok = a.cost == b.cost == expected == 6 and a.final_state.same_as(b.final_state)
        return ok, f"exec cost {a.cost}, reference cost {b.cost}"
    _record(3, "swap cost", 1.0, body)


def test_criterion_04_exact_soundness():
    def body():
        p = load("range_filter")
        r = check_bound(p, UNIT, trials=250, seed=2024, name="range_filter")
        kinds = {v.kind for v in r.violations}
        ok = r.ok and r.trials >= 200 and r.stats["branches_probed"] > 0
        return ok, (f"{r.trials} states, {len(r.violations)} violations {sorted(kinds)}, "
                    f"{r.stats['branches_probed']} conditionals balanced")
    _record(4, "exact-mode soundness (range filter)", 10.0, body)


def test_criterion_05_classic_amortized_soundness():
    def body():
        parts, ok = [], True
        for name in ("division", "insertion_sort", "binary_search", "binary_counter"):
            r = check_bound(load(name), UNIT, trials=200, seed=17, name=name)
            ok &= r.ok and r.trials >= 200
            parts.append(f"{name} {len(r.violations)}")
        return ok, "violations: " + ", ".join(parts)
    _record(5, "classic/amortized soundness", 60.0, body)


def test_criterion_06_telescoping():
    def body():
        p = load("binary_counter")
        states = states_for_values(p, "n", range(1, 65), seed=5)
        ns = sorted(s.get("n") for s in states)
        r = check_amortized_telescoping(p, UNIT, states=states, name="binary_counter")
        ok = r.ok and ns == list(range(1, 65))
        return ok, f"n = 1..64, {r.stats['iterations']} iterations, {len(r.violations)} violations"
    _record(6, "amortized telescoping (binary counter)", 10.0, body)


def test_criterion_07_substitution_lemma():
    def body():
        r = check_substitution_lemma(10_000, seed=7)
        return r.ok, f"10000 cases, {len(r.violations)} violations, {r.stats['skipped_undefined']} skipped as undefined"
    _record(7, "substitution lemma", 30.0, body)


def test_criterion_08_interpreter_differential():
    def body():
        r = check_interpreter_differential(10_000, seed=8)
        return r.ok, f"10000 programs, {len(r.violations)} mismatches ({r.stats['both_raised']} raised identically)"
    _record(8, "interpreter differential", 30.0, body)


def test_criterion_09_roundtrip():
    def body():
        files = sorted(CORPUS.glob("*.imp"))
        bad = [f.stem for f in files if parse_program(pretty_print(load(f.stem))) != load(f.stem)]
        gen = RandomGen(random.Random(9))
        fails = 0
        for _ in range(1000):
            p = gen.program()
            fails += parse_program(pretty_print(p)) != p
        return not bad and not fails, f"{len(files)} corpus files ({len(bad)} differ), 1000 random ASTs ({fails} differ)"
    _record(9, "parser round-trip", 10.0, body)


@pytest.mark.skipif(not HAVE_Z3, reason="no integer-arithmetic solver on PATH")
def test_criterion_10_solver():
    def body():
        p = load("division")
        vcs = vcg(p)
        goals = run_solver_all([make_goal(v) for v in vcs], timeout=20, jobs=4)
        linear = {v.name for v in vcs if is_linear(v)}
        lin_ok = all(g.status == "Valid" for g in goals if g.vc_name in linear)
        buf = io.StringIO()
        with redirect_stdout(buf):
            code = cli_main(["check", str(CORPUS / "division.imp"), "--jobs", "4", "--timeout", "20"])
        table = ", ".join(f"{g.vc_name}={g.status}" for g in goals)
        ok = bool(linear) and lin_ok and code in (0, 5)
        return ok, f"linear {sorted(linear)} all Valid={lin_ok}; cmd_check exit {code}; {table}"
    _record(10, "solver discharge of division", 60.0, body)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
