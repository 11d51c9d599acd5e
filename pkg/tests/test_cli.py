from __future__ import annotations

import json
import subprocess
import sys

import pytest

from memconsist import oracle
from memconsist.cli import main
from memconsist.models import Classification, ModelId, classify


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_holds(capsys):
    code, out, _ = run(capsys, "check", "@fig2-sequential", "--model", "sequential", "--witness")
    assert code == 0
    assert "w(2,x,2) w(1,x,1) r(1,x,1) r(2,x,1)" in out


def test_check_fails(capsys):
    code, out, _ = run(capsys, "check", "@fig3-nonsequential", "--model", "sequential")
    assert code == 1 and "✗" in out


def test_missing_file(capsys, tmp_path):
    code, out, err = run(capsys, "check", str(tmp_path / "missing.mem"), "--model", "pram")
    assert code == 3 and not out and "missing.mem" in err


def test_parse_error(capsys, tmp_path):
    path = tmp_path / "bad.mem"
    path.write_text("process 1: w x\n")
    code, out, err = run(capsys, "check", str(path), "--model", "pram")
    assert code == 3 and not out and "line 1" in err


def test_invalid_trace(capsys, tmp_path):
    path = tmp_path / "bad.mem"
    path.write_text("process 1: r x 5\n")
    code, out, err = run(capsys, "check", str(path), "--model", "pram")
    assert code == 2 and not out and "DanglingRead" in err


def test_invalid_trace_json(capsys, tmp_path):
    path = tmp_path / "bad.mem"
    path.write_text("process 1: r x 5\n")
    code, out, _ = run(capsys, "classify", str(path), "--json")
    assert code == 2
    doc = json.loads(out)
    assert doc["valid"] is False and "models" not in doc


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["check", "@fig2-sequential", "--model", "nope"])
    assert info.value.code == 3
    with pytest.raises(SystemExit) as info:
        main(["check", "@fig2-sequential"])
    assert info.value.code == 3
    assert main([]) == 3


def test_budget_exit(capsys):
    code, out, _ = run(capsys, "check", "@fig2-sequential", "--model", "sequential", "--budget", "1")
    assert code == 4 and "budget" in out


def test_fixtures_listing(capsys):
    code, out, _ = run(capsys, "--fixtures")
    assert code == 0
    assert "@fig2-sequential" in out and "@fig4-causal" in out


def test_json_schema(capsys):
    code, out, _ = run(capsys, "check", "@fig2-sequential", "--model", "causal", "--json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) >= {"trace", "valid", "models", "co"}
    assert doc["valid"] is True and doc["trace"] == "@fig2-sequential"
    causal = doc["models"]["causal"]
    assert causal["holds"] is True and causal["failing_instance"] is None
    assert {w["instance"] for w in causal["witnesses"]} == {"P1", "P2"}
    assert doc["co"] == {"edges": [["w(2,x,2)", "w(1,x,1)"]], "acyclic": True,
                         "steps": [{"ww": [["w(2,x,2)", "w(1,x,1)"]], "rw": []}]}


def test_json_unknown(capsys):
    code, out, _ = run(capsys, "check", "@fig2-sequential", "--model", "sequential", "--json", "--budget", "1")
    assert code == 4
    assert json.loads(out)["models"]["sequential"]["holds"] == "unknown"


def test_classify_processor_row(capsys):
    code, out, _ = run(capsys, "classify", "@fig-processor", "--json")
    assert code == 0
    holds = {k: v["holds"] for k, v in json.loads(out)["models"].items()}
    assert holds["processor"] is True and holds["causal"] is False
    assert holds["pram"] is True and holds["cache"] is True


def test_classify_slow_only(capsys):
    code, out, _ = run(capsys, "classify", "@fig-slow")
    rows = dict(line.split() for line in out.splitlines())
    assert code == 0
    assert rows["slow"] == "✓"
    assert all(rows[m] == "✗" for m in ("sequential", "causal", "pram", "cache", "processor"))


def test_classify_empty_trace(capsys, tmp_path):
    path = tmp_path / "empty.mem"
    path.write_text("")
    code, out, _ = run(capsys, "classify", str(path), "--all")
    assert code == 0 and "✗" not in out


def test_classify_sync_trace_includes_sync_models(capsys, tmp_path):
    path = tmp_path / "s.mem"
    path.write_text("process 1: acq s ; w x 1 ; rel s\nprocess 2: acq s ; r x 1 ; rel s\nsyncorder s: 1 2\n")
    code, out, _ = run(capsys, "classify", str(path), "--json")
    doc = json.loads(out)
    assert set(doc["models"]) >= {"weak", "release", "lazy-release", "entry"}
    assert doc["models"]["entry"]["warnings"]


def test_lazy_flag_marks_extension(capsys):
    code, out, _ = run(capsys, "check", "@lazy-po-example", "--model", "causal", "--po", "lazy", "--json")
    assert json.loads(out)["models"]["causal"]["extension"] is True


def test_co_fig3(capsys):
    code, out, _ = run(capsys, "co", "@fig3-nonsequential")
    assert code == 0
    assert out.count(" WW ") == 2 and "cycle:" in out


def test_co_cache(capsys):
    code, out, _ = run(capsys, "co", "@fig-cache", "--json")
    co = json.loads(out)["co"]
    assert co["edges"] == [["r(2,x,1)", "w(1,x,2)"]] and co["acyclic"] is False
    assert co["steps"][0]["rw"] == co["edges"]


def test_co_one_op(capsys, tmp_path):
    path = tmp_path / "one.mem"
    path.write_text("process 1: w x 1\n")
    code, out, _ = run(capsys, "co", str(path), "--relation", "cr")
    assert code == 0 and "no CO dependencies" in out and "acyclic" in out


def test_fuzz_corpus(capsys, tmp_path):
    code, out, _ = run(capsys, "fuzz", "--seeds", "100", "--ops", "7", "--out", str(tmp_path))
    assert code == 0
    assert len(list(tmp_path.glob("*.mem"))) == 100
    assert len(json.loads((tmp_path / "manifest.json").read_text())) == 100


def test_fuzz_empty(capsys, tmp_path):
    code, out, _ = run(capsys, "fuzz", "--seeds", "1", "--ops", "0", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "seed-00000.mem").read_text() == "# memtrace v1\n"


def test_fuzz_detects_injected_bug(capsys, monkeypatch):
    def broken(e, opts=None, models=()):
        result = classify(e, models=models)
        result.verdicts[ModelId.SLOW].holds = False
        return Classification(result.verdicts, result.conjunctions)

    monkeypatch.setattr(oracle, "classify", broken)
    code, out, _ = run(capsys, "fuzz", "--seeds", "5", "--ops", "4", "--no-oracle")
    assert code == 1
    assert "Violation:" in out


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "memconsist.cli", "check", "@fig2-sequential", "--model", "pram"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
