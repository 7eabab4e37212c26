from __future__ import annotations

import json
import shutil
import subprocess
import sys

import pytest

from tgm.abstraction import LossyUnfold
from tgm.cli import main
from tgm.instance import load_instance, validate_instance
from tgm.schema import load_schema


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_exit_codes(capsys, tmp_path, fixtures):
    code, out, _ = run(capsys, "validate", "--schema", fixtures / "review.tgs.json",
                       "--instance", fixtures / "review.tgm.json")
    assert code == 0 and json.loads(out)["ok"]
    doc = json.loads((fixtures / "review.tgm.json").read_text())
    doc["edges"] = [e for e in doc["edges"] if e["id"] != "w1"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "validate", "--schema", fixtures / "review.tgs.json", "--instance", bad)
    assert code == 1 and any(v["rule"] == "Multiplicity" for v in json.loads(out)["violations"])
    code, _, _ = run(capsys, "validate", "--schema", tmp_path / "missing.json")
    assert code == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    code, out, _ = run(capsys, "validate", "--schema", broken)
    assert code == 2 and not json.loads(out)["ok"]


def test_translate_writes_report_next_to_output(capsys, tmp_path, fixtures):
    out_path = tmp_path / "out" / "hidders.tgs.json"
    code, _, err = run(capsys, "translate", "--from", "er", fixtures / "hidders.er", "--output", out_path,
                       "--supermodel", tmp_path / "sm.json")
    assert code == 0 and "2 node type(s)" in err
    assert load_schema(out_path).node_types.keys() == {"Employee", "Department"}
    assert (tmp_path / "out" / "hidders.tgs.report.json").exists()
    assert json.loads((tmp_path / "sm.json").read_text())["source_model"] == "er"


def test_translate_to_stdout_and_input_errors(capsys, tmp_path, fixtures):
    code, out, _ = run(capsys, "translate", "--from", "relational", fixtures / "relational.sql")
    assert code == 0 and "RST" in json.loads(out)["edges"][0]["label"] + out
    bad = tmp_path / "bad.sql"
    bad.write_text("CREATE TABLE (")
    assert run(capsys, "translate", "--from", "relational", bad)[0] == 2
    assert run(capsys, "translate", "--from", "er", tmp_path / "nothing.er")[0] == 2
    assert run(capsys, "translate", "--from", "er", fixtures / "hidders.er", "--type-overrides", "a=b")[0] == 2


def test_roundtrip(capsys, tmp_path, fixtures):
    assert run(capsys, "roundtrip", "--from", "xsd", fixtures / "bookstore.xsd")[0] == 0
    assert run(capsys, "roundtrip", "--random", 20, "--seed", 5)[0] == 0
    assert run(capsys, "roundtrip")[0] == 2
    report = tmp_path / "r.json"
    report.write_text("[]")
    assert run(capsys, "roundtrip", "--from", "xsd", fixtures / "bookstore.xsd", "--report", report)[0] == 2
    # a report from a different source does not replay
    run(capsys, "translate", "--from", "er", fixtures / "hidders.er", "--output", tmp_path / "h.json")
    code, out, _ = run(capsys, "roundtrip", "--from", "er", fixtures / "hidders_isa.er",
                       "--report", tmp_path / "h.report.json")
    assert code == 1 and not json.loads(out)["ok"]


def test_fold_and_unfold(capsys, tmp_path, fixtures):
    folded = tmp_path / "f.json"
    assert run(capsys, "fold", "--schema", fixtures / "enterprise.tgs.json",
               "--groups", fixtures / "enterprise.groups.json", "--output", folded)[0] == 0
    assert "fold_report" in json.loads(folded.read_text())
    once = tmp_path / "u1.json"
    assert run(capsys, "unfold", "--schema", folded, "--group", "Sales", "--output", once)[0] == 0
    assert "fold_report" in json.loads(once.read_text())
    with pytest.warns(LossyUnfold):
        code, _, err = run(capsys, "unfold", "--schema", folded, "--group", "Sales", "--lossy",
                           "--output", tmp_path / "l.json")
    assert code == 0 and "lossy" in err
    assert run(capsys, "unfold", "--schema", folded, "--group", "Customer")[0] == 1
    assert run(capsys, "fold", "--schema", fixtures / "enterprise.tgs.json", "--groups", tmp_path / "no.json")[0] == 2


def test_export_dot(capsys, tmp_path, fixtures):
    code, out, _ = run(capsys, "export-dot", "--schema", fixtures / "bom.tgs.json")
    assert code == 0 and out.startswith("digraph")
    doc = json.loads((fixtures / "bom.tgs.json").read_text())
    doc["edges"][0]["kind"] = "mystery"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert run(capsys, "export-dot", "--schema", bad)[0] == 2


def test_gen_instance(capsys, tmp_path, fixtures):
    schema = tmp_path / "s.json"
    shutil.copy(fixtures / "enterprise.tgs.json", schema)
    out = tmp_path / "g" / "inst.json"
    assert run(capsys, "gen-instance", "--schema", schema, "--seed", 3, "--output", out)[0] == 0
    assert json.loads(out.read_text())["schema"] == "../s.json"
    assert validate_instance(load_instance(out, load_schema(schema))).ok
    code, out_text, _ = run(capsys, "gen-instance", "--schema", schema, "--size", 2)
    assert code == 1 and json.loads(out_text)["violations"][0]["rule"] == "UnsatisfiableSchema"


def test_console_script_entry_point(fixtures):
    exe = shutil.which("tgm")
    cmd = [exe] if exe else [sys.executable, "-m", "tgm.cli"]
    proc = subprocess.run([*cmd, "validate", "--schema", str(fixtures / "bom.tgs.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["translate", "--from", "cobol", "x"])
    assert info.value.code == 2
