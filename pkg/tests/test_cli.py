import io
import json
import subprocess
import sys
from importlib import resources

import pytest

from reductlab import checks, cli, lattice, orbits, transforms
from reductlab.structures import n_types


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def fixture_path():
    return str(resources.files("reductlab").joinpath("fixtures/preservation_table.tsv"))


def test_table_tsv_shape():
    code, text = run("table", "--skip-sd")
    lines = text.splitlines()
    assert code == 0
    assert len(lines) == 43
    assert all(len(ln.split("\t")) == 15 for ln in lines)


def test_table_diff_expected(fixture_path):
    assert run("table", "--skip-sd", "--diff-expected", fixture_path)[0] == 0


def test_table_diff_detects_change(tmp_path, fixture_path, capsys):
    text = open(fixture_path).read().replace("\ndgh\t", "\ndgh\tx", 1)
    bad = tmp_path / "bad.tsv"
    bad.write_text(text)
    code, _ = run("table", "--skip-sd", "--diff-expected", str(bad))
    assert code == 1
    assert "mismatch\tdgh\tE" in capsys.readouterr().err


def test_table_with_sd_reports_surrogate_failure(capsys):
    code, text = run("table")
    assert code == 1 and text == ""
    assert "SD column unavailable" in capsys.readouterr().err


def test_table_json():
    code, text = run("table", "--skip-sd", "--format", "json")
    data = json.loads(text)
    assert code == 0
    assert len(data["columns"]) == 14 and len(data["rows"]) == 42
    row = next(r for r in data["rows"] if r["label"] == "k")
    assert row["preserved"] == ["T", "BetwT", "CyclT", "SepT"]


def test_lattice_listing(tmp_path):
    dot = tmp_path / "l.dot"
    code, text = run("lattice", "--dot", str(dot))
    assert code == 0
    assert "atoms\ta,b,c,d,e,f" in text
    assert text.splitlines()[0] == "nodes 42"
    body = dot.read_text()
    assert body.startswith("digraph") and "rankdir=BT" in body


def test_dot_acyclic(tmp_path):
    dot = tmp_path / "l.dot"
    run("lattice", "--dot", str(dot))
    edges = [ln.strip().rstrip(";").replace('"', "").split(" -> ")
             for ln in dot.read_text().splitlines() if "->" in ln]
    nodes = {x for e in edges for x in e}
    order, indeg = [], {n: 0 for n in nodes}
    for a, b in edges:
        indeg[b] += 1
    ready = [n for n in nodes if indeg[n] == 0]
    while ready:
        n = ready.pop()
        order.append(n)
        for a, b in edges:
            if a == n:
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
    assert len(order) == len(nodes)


def test_deterministic_output(tmp_path):
    for argv in (("lattice",), ("table", "--skip-sd"), ("lattice", "--format", "json"),
                 ("orbits", "--group", "dgh", "--arity", "3")):
        assert run(*argv) == run(*argv)
    a, b = tmp_path / "a.dot", tmp_path / "b.dot"
    run("lattice", "--dot", str(a))
    run("lattice", "--dot", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_orbits_command():
    code, text = run("orbits", "--group", "c", "--arity", "2")
    assert code == 0
    assert text == "k=2 size=2: 0,1\nk=2 size=2: 2,3\n"


@pytest.mark.parametrize("argv", [
    ("orbits", "--group", "zz", "--arity", "2"),
    ("orbits", "--group", "c", "--arity", "9"),
    ("check", "--case", "nope"),
    ("bogus",),
    ("--max-arity", "7", "check", "--case", "C2:a2"),
])
def test_usage_errors(argv):
    assert run(*argv)[0] == 2


def test_check_case_text():
    code, text = run("check", "--case", "C2:a2")
    assert code == 0
    assert "slot X level=0 on=keep" in text
    assert "compatible\td\tyes" in text and "compatible\tbottom\tno" in text
    assert "result\tpass" in text


def test_check_case_json():
    code, text = run("check", "--case", "C2:b3", "--json")
    data = json.loads(text)
    assert code == 0 and data["ok"]
    assert data["compatibility"]["g"] and not data["compatibility"]["bottom"]
    assert data["witness"]["target"] == "g"


def test_find_sd():
    code, text = run("find-sd", "--json")
    data = json.loads(text)
    assert code == 1
    assert data["surrogate"] is None and data["bg_closure"] == "bcdfghj"


def test_verify_all_report():
    code, text = run("verify-all", "--json")
    data = json.loads(text)
    status = {s["name"]: s["passed"] for s in data["sections"]}
    assert "sd-surrogate" in status
    for name in ("preservation-table", "automorphisms", "atoms", "composition",
                 "oracle", "constellations", "determination"):
        assert status[name], name
    # the node count and g/h family come out differently, so the run fails
    assert not status["lattice-count"] and not status["ideal-families"]
    assert code == 1 and not data["ok"]


@pytest.fixture
def fresh_caches():
    orbits.clear_cache()
    lattice.reset()
    yield
    orbits.clear_cache()
    lattice.reset()


def _corrupt(monkeypatch, bad_label):
    real = transforms.label_edges

    def broken(label, k):
        src, dst = real(label, k)
        if label == bad_label:
            # send every move one code too far
            return src, (dst + 1) % n_types(k)
        return src, dst

    monkeypatch.setattr(transforms, "label_edges", broken)


def test_fault_injection(monkeypatch, fresh_caches):
    _corrupt(monkeypatch, "c")
    sections = checks.run_all(cli.Config(), sections=(checks.table_section, checks.oracle_section))
    assert [s.name for s in sections if not s.passed] == ["preservation-table", "oracle"]


def test_fault_injection_exit_code(monkeypatch, fresh_caches):
    _corrupt(monkeypatch, "g")
    monkeypatch.setattr(checks, "SECTIONS", (checks.oracle_section, checks.automorphism_section))
    code, text = run("verify-all")
    assert code == 1
    assert "FAIL\toracle\tmismatches: ['g/k=2', 'g/k=3']" in text
    assert text.splitlines()[-1] == "overall\tFAIL"


def test_config_validation():
    with pytest.raises(ValueError):
        cli.Config(max_arity=6)
    with pytest.raises(ValueError):
        cli.Config(witness_depth=9)
    assert cli.Config().parallelism >= 1


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "reductlab.cli", "orbits", "--group", "j", "--arity", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.count("\n") == 2
