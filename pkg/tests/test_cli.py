from __future__ import annotations

import io
import json

import pytest

from onebit_mbqc import cli
from onebit_mbqc.verify import VerificationReport

CIRCUIT = """\
qubits 2
# one cycle with an entangling gate
xrot 0 0.4
zrot 1 -0.3
cz 0 1
xrot 1 1.1
"""


def invoke(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def circuit_file(tmp_path):
    p = tmp_path / "small.mbq"
    p.write_text(CIRCUIT)
    return str(p)


def test_compile_tg_gives_pattern_and_dot(circuit_file):
    code, out, _ = invoke("compile", "--scheme", "tg", circuit_file)
    assert code == 0
    assert "graph G {" in out


def test_compile_pseudo_resource_footer(circuit_file):
    code, out, _ = invoke("compile", "--scheme", "tqc-pseudo", circuit_file)
    assert code == 0 and out.strip()
    code, out, _ = invoke("compile", "--scheme", "tqc-pseudo", "--format", "json", circuit_file)
    doc = json.loads(out)
    assert doc["resources"]["ancillas"] == 1
    assert doc["resources"]["two_qubit"] == 2
    assert doc["resources"]["single_qubit"] == 4


def test_compile_remote2_emits_cluster(circuit_file):
    code, out, _ = invoke("compile", "--scheme", "remote2", "--emit-cluster", circuit_file)
    assert code == 0
    assert "# cluster" in out
    assert "vertex " in out and "delete " in out


@pytest.mark.parametrize("scheme", ["tqc-full", "route"])
def test_emit_cluster_rejected_without_embedding(scheme, circuit_file):
    code, _, err = invoke("compile", "--scheme", scheme, "--emit-cluster", circuit_file)
    assert code == 2 and "error" in err


def test_compile_all_json(circuit_file):
    code, out, _ = invoke("compile", "--scheme", "all", "--format", "json", circuit_file)
    assert code == 0
    assert out.count('"scheme"') == 7


def test_verify_all_passes(circuit_file):
    code, out, _ = invoke("verify", "--scheme", "all", "--seed", "7", "--trials", "20", circuit_file)
    assert code == 0
    assert out.count("status: PASS") == 7


def test_verify_generated_circuit_json():
    code, out, _ = invoke("verify", "--scheme", "tg", "--n", "3", "--m", "2", "--trials", "10", "--format", "json")
    assert code == 0
    (report,) = json.loads(out)
    assert report["passed"] and report["trials"] == 10


def test_verify_branches_xtcz4():
    code, out, _ = invoke("verify", "--branches", "primitive:xtcz4")
    assert code == 0
    rows = [ln for ln in out.splitlines() if ln.strip().startswith("0 ")]
    assert len(rows) == 4
    assert out.endswith("status: PASS\n")


def test_verify_resources_table():
    code, out, _ = invoke("verify", "--resources", "--n", "2", "--m", "3")
    assert code == 0 and "MISMATCH" not in out
    code, out, _ = invoke("verify", "--resources", "--n", "2", "--m", "3", "--format", "json")
    checks = json.loads(out)
    pseudo = next(c for c in checks if "pseudo" in c["subject"])
    full = next(c for c in checks if "full" in c["subject"])
    assert [r["actual"] for r in pseudo["rows"][:3]] == [3, 6, 8]
    assert [r["actual"] for r in full["rows"][:3]] == [9, 12, 20]


def test_verify_failure_exit_code(monkeypatch, circuit_file):
    def failing(c, scheme, trials, seed, **kw):
        return VerificationReport(scheme, "x", trials, 0.5, 0.5, 1e-9, seed)

    monkeypatch.setattr(cli, "verify_random", failing)
    code, out, _ = invoke("verify", "--scheme", "tg", circuit_file)
    assert code == 1 and "status: FAIL" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("verify", "--trials", "0", "--n", "2", "--m", "1"),
        ("verify", "--resources", "--n", "2"),
        ("verify", "--resources", "--n", "1", "--m", "2"),
        ("verify", "--branches", "primitive:nope"),
        ("verify", "--scheme", "tg"),
        ("verify", "--scheme", "bogus", "--n", "2", "--m", "1"),
        ("diagram", "--scheme", "tqc-full", "--n", "2", "--m", "1"),
        ("compile", "/nonexistent/file.mbq"),
        ("frobnicate",),
    ],
)
def test_usage_errors(argv, capsys):
    code, _, _ = invoke(*argv)
    assert code == 2


def test_parse_error_reports_line(tmp_path):
    p = tmp_path / "bad.mbq"
    p.write_text("qubits 1\nh 0\nwibble 0\n")
    code, _, err = invoke("compile", str(p))
    assert code == 2 and "line 3" in err


def test_diagram_ascii_layout():
    code, out, _ = invoke("diagram", "--scheme", "tg", "--n", "2", "--m", "1", "--format", "ascii")
    assert code == 0
    assert out == "M1 — N1 — out1\n     :\nM2 — N2 — out2\n"


def test_diagram_empty_circuit(tmp_path):
    p = tmp_path / "empty.mbq"
    p.write_text("qubits 2\n")
    code, out, _ = invoke("diagram", "--scheme", "tg", str(p), "--format", "ascii")
    assert code == 0
    assert out == "out1\n\nout2\n"


def test_diagram_routing_dot():
    code, out, _ = invoke("diagram", "--scheme", "route", "--n", "5", "--m", "4", "--format", "dot")
    assert code == 0 and out.startswith("graph G {")


def test_output_file(tmp_path, circuit_file):
    target = tmp_path / "report.txt"
    code, out, _ = invoke("verify", "--scheme", "tg", "--trials", "5", circuit_file, "-o", str(target))
    assert code == 0 and out == ""
    assert target.read_text().endswith("status: PASS\n")


@pytest.mark.parametrize(
    "argv",
    [
        ("verify", "--scheme", "all", "--seed", "7", "--trials", "10"),
        ("compile", "--scheme", "all"),
        ("diagram", "--scheme", "cancel", "--format", "dot"),
    ],
)
def test_byte_deterministic(argv, circuit_file):
    first = invoke(*argv, circuit_file)
    second = invoke(*argv, circuit_file)
    assert first == second and first[0] == 0


def test_timing_flag_adds_wall_time(circuit_file):
    _, out, _ = invoke("verify", "--scheme", "tg", "--trials", "2", "--timing", circuit_file)
    assert "wall_time:" in out
