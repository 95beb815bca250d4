"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

from __future__ import annotations

import io
import time

from onebit_mbqc import cli
from onebit_mbqc.circuit import format_circuit
from onebit_mbqc.verify import ACCEPTANCE_CHECKS, CheckResult, random_circuits


def report(result: CheckResult, elapsed: float, budget: float | None = None) -> None:
    suffix = f" [{elapsed:.1f}s" + (f" of {budget:.0f}s]" if budget else "]")
    print(result.line() + suffix)


def timed(name: str, **kwargs) -> tuple[CheckResult, float]:
    start = time.perf_counter()
    result = ACCEPTANCE_CHECKS[name](**kwargs)
    return result, time.perf_counter() - start


def test_identity_suite():
    result, elapsed = timed("identities", states=50)
    report(result, elapsed, 5)
    assert result.passed, result.detail
    assert result.metrics["matrix"] <= 1e-12
    assert result.metrics["fidelity"] >= 1 - 1e-10
    assert elapsed < 5


def test_primitive_branch_oracles():
    result, elapsed = timed("primitives", inputs=20, tolerance=1e-10)
    report(result, elapsed, 60)
    assert result.passed, result.detail
    assert elapsed < 60


def test_end_to_end_equivalence():
    result, elapsed = timed("end-to-end", circuits=25, trials=200, tolerance=1e-9)
    report(result, elapsed, 600)
    assert result.passed, result.detail
    assert len(result.metrics) == 7
    assert all(f >= 1 - 1e-9 for f in result.metrics.values())
    assert elapsed < 600


def test_resource_counts():
    result, elapsed = timed("resources", max_n=4, max_m=5)
    report(result, elapsed)
    assert result.passed, result.detail


def test_deletion_principle():
    result, elapsed = timed("deletion", max_vertices=5, tolerance=1e-10)
    report(result, elapsed, 30)
    assert result.passed, result.detail
    assert elapsed < 30


def test_cluster_embedding():
    result, elapsed = timed("embedding", tolerance=1e-10)
    report(result, elapsed)
    assert result.passed, result.detail
    assert set(result.metrics) == {"RemoteCZ_I", "RemoteCZ_II"}


def test_determinism(tmp_path):
    result, elapsed = timed("determinism")
    # The same contract through the command line, byte for byte.
    path = tmp_path / "circuit.mbq"
    path.write_text(format_circuit(random_circuits(1, 7, widths=(3,), max_cycles=3)[0]))
    argv = ["verify", "--scheme", "all", "--seed", "7", "--trials", "20", str(path)]
    runs = []
    for _ in range(2):
        out = io.StringIO()
        runs.append((cli.run(argv, out, io.StringIO()), out.getvalue()))
    cli_ok = runs[0] == runs[1] and runs[0][0] == 0
    combined = CheckResult(
        result.name, result.passed and cli_ok, result.detail + ("" if cli_ok else "; CLI output differs")
    )
    report(combined, elapsed)
    assert combined.passed, combined.detail
