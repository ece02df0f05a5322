"""Acceptance criteria 1-10, one test and one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the verdict lines.
The seed is fixed at 0 for every run.
"""

from __future__ import annotations

import json

import pytest

from biham.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from biham.simulate import DEMO_CONFIG, SimConfig, run_simulation
from biham.suites import SuiteSpec, run_suite

SEED = 0
SIZES = (2, 3, 4)
VERDICTS: list[str] = []  # echoed in the terminal summary by conftest


def _run(runs, only=None):
    """Run (suite, n, trials) triples; return (ok, detail) over the selected checks."""
    ok, worst, failures = True, [], []
    for suite, n, trials in runs:
        report = run_suite(SuiteSpec(suite, n=n, trials=trials, seed=SEED))
        for c in report.checks:
            if only is not None and c.name not in only:
                continue
            worst.append((c.max_residual / c.tolerance if c.tolerance else c.max_residual,
                          f"{suite}/{c.name} n={n}: {c.max_residual:.2e} (tol {c.tolerance:.0e})"))
            if not c.passed:
                ok = False
                failures.append(f"{suite}/{c.name} n={n} "
                                f"{c.max_residual:.2e} > {c.tolerance:.0e} {c.errors[:1]}")
    detail = "worst " + max(worst)[1]
    if failures:
        detail += "; failing: " + ", ".join(failures)
    return ok, detail


def _verdict(k: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {title}; {detail}"
    VERDICTS.append(line)
    print("\n" + line)
    assert ok, detail


def test_criterion_01_factorization():
    ok, d = _run([("factorization", n, 100) for n in SIZES])
    _verdict(1, "factorization round-trips, 100 K per n", ok, d)


def test_criterion_02_gradients():
    ok, d = _run([("gradients", n, 20) for n in SIZES])
    _verdict(2, "gradient pairings 1e-10, FD vs exact 1e-7", ok, d)


def test_criterion_03_ladder():
    ok, d = _run([("ladder", n, 50) for n in SIZES])
    _verdict(3, "bi-Hamiltonian ladder, 50 points x 10 f, k <= 3", ok, d)


def test_criterion_04_jacobi_compatibility():
    ok, d = _run([(s, n, 20) for s in ("jacobi", "compatibility") for n in SIZES])
    _verdict(4, "Jacobi for ctb1, ctb2, red1, red2 and the pencil", ok, d)


def test_criterion_05_exactness():
    ok, d = _run([("exactness", n, 50) for n in SIZES])
    _verdict(5, "exactness relations between the two brackets, 50 points", ok, d)


def test_criterion_06_reduction():
    ok, d = _run([("reduction-oracle", n, 50) for n in SIZES])
    _verdict(6, "reduced brackets vs invariant extensions, gradient extension relations", ok, d)


def test_criterion_07_heisenberg():
    ok1, d1 = _run([("heisenberg", n, 20) for n in SIZES])
    ok2, d2 = _run([("actions", n, 20) for n in SIZES], only={"model2_closure"})
    _verdict(7, "Heisenberg double consistency and A2 invariance", ok1 and ok2, f"{d1}; {d2}")


def test_criterion_08_dynamics(tmp_path):
    ok1, d1 = _run([("flows", n, 20) for n in SIZES])
    ok2, d2 = _run([("conservation", 3, 5)])
    side, code = run_simulation(SimConfig.model_validate(DEMO_CONFIG), tmp_path)
    ok3 = code == 0 and side["max_drift"] <= 1e-7 and side["min_gap"] > 0
    d3 = f"demo drift {side['max_drift']:.2e}, min gap {side['min_gap']:.3f}"
    _verdict(8, "flows, reduced field and RK4 conservation (n=3)", ok1 and ok2 and ok3,
             f"{d1}; {d2}; {d3}")


def test_criterion_09_coords():
    ok, d = _run([("coords", n, 20) for n in SIZES])
    _verdict(9, "Sutherland and RS coordinates, decoupled bracket", ok, d)


def test_criterion_10_cli(tmp_path, capsys):
    files = [tmp_path / f"r{i}.json" for i in range(2)]
    codes = [main(["verify", "ladder", "--n", "3", "--trials", "10", "--seed", str(SEED),
                   "--json", str(f), "-q"]) for f in files]
    identical = files[0].read_bytes() == files[1].read_bytes()
    fail_code = main(["verify", "ladder", "--trials", "2", "--tol", "ladder=0", "-q"])
    usage_code = main(["verify", "unknown"])
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  \"n\": 3,\n}\n")
    config_code = main(["simulate", "--config", str(bad)])
    capsys.readouterr()
    ok = (identical and codes == [EXIT_OK, EXIT_OK] and fail_code == EXIT_FAIL
          and usage_code == EXIT_USAGE and config_code == EXIT_USAGE
          and json.loads(files[0].read_text())["pass"])
    with capsys.disabled():
        _verdict(10, "byte-identical reports and exit codes 0/1/2", ok,
                 f"identical={identical}, codes={codes + [fail_code, usage_code, config_code]}")
