import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from vccts.cli import main
from vccts.corpus import EXPANSION_PAR, EXPANSION_SUM, SB_LITMUS

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text + "\n")
        return str(p)
    return write


@pytest.mark.parametrize("stem, extra", [("inert", []), ("two_writes", []), ("handshake_depth0", ["--depth", "0"])])
def test_lts_golden(capsys, stem, extra):
    src = GOLDEN / f"{stem.replace('_depth0', '')}.proc"
    code, text = run(capsys, "lts", str(src), "--format", "json", *extra)
    assert code == 0
    assert json.loads(text) == json.loads((GOLDEN / f"{stem}.lts.json").read_text())


def test_lts_is_byte_identical_across_runs(capsys):
    src = str(GOLDEN / "handshake.proc")
    outs = {run(capsys, "lts", src, "--format", "json")[1] for _ in range(3)}
    assert len(outs) == 1


def test_lts_dot(capsys):
    code, text = run(capsys, "lts", str(GOLDEN / "two_writes.proc"), "--format", "dot")
    assert code == 0 and text.startswith("digraph") and "->" in text


def test_parse_and_validate(capsys, files):
    code, text = run(capsys, "parse", files("a.proc", "~f(1).(0)  |  ~g(2).(0)"))
    assert code == 0 and text.strip() == "par { 0: ~f(1).(0); 1: ~g(2).(0) } edges { (0,1) }"
    code, text = run(capsys, "validate", files("b.proc", "0 + (~a(0).(*) | ~b(0).(*))"), "--format", "json")
    assert code == 1 and json.loads(text)["executable"] is False
    assert run(capsys, "validate", files("c.proc", "mu X. ~f(1).(X)"))[0] == 0


def test_parse_error_exit_code(capsys, files):
    assert main(["parse", files("bad.proc", "f(x).(")]) == 2
    assert "line 2, column 1" in capsys.readouterr().err


def test_missing_file_exit_code(capsys, tmp_path):
    assert main(["parse", str(tmp_path / "missing.proc")]) == 2


def test_reduce(capsys, files):
    code, text = run(capsys, "reduce", files("h.proc", "f(x).(~g(x).(*)) | ~f(1).(g(y).(*))"), "--format", "json")
    assert code == 0 and len(json.loads(text)) == 1
    assert "no reductions" in run(capsys, "reduce", files("i.proc", "*"))[1]


def test_barbs_check(capsys, files):
    f = files("p.proc", EXPANSION_PAR)
    assert run(capsys, "barbs", f, "--check", "~f,~g")[0] == 0
    assert run(capsys, "barbs", files("s.proc", EXPANSION_SUM), "--check", "~f,~g")[0] == 1


def test_barbs_env(capsys, files):
    code, text = run(capsys, "barbs", files("c.proc", "if x = 1 then ~a(1).(*) else ~b(1).(*)"),
                     "--env", "x=1", "--format", "json")
    assert code == 0 and json.loads(text)["barbs"] == {"0": ["~a"]}


def test_bisim_expansion_law(capsys, files):
    par, summ = files("par.proc", EXPANSION_PAR), files("sum.proc", EXPANSION_SUM)
    code, text = run(capsys, "bisim", par, summ, "--format", "json")
    assert code == 1
    assert any(len(m["labels"]) == 2 for m in json.loads(text)["witness"])
    assert run(capsys, "bisim", par, par)[0] == 0
    assert run(capsys, "bisim", par, par, "--relation", "0:0,1:1")[0] == 0
    assert run(capsys, "bisim", par, summ, "--barbed")[0] == 1


def test_compile_and_run(capsys, files):
    prog = files("p.prog", "[r1 = 2] print r1 || print 3")
    code, text = run(capsys, "compile", prog, "--format", "json")
    assert code == 0 and json.loads(text)["env"] == {"r1": 2}
    code, text = run(capsys, "run", prog, "--format", "json")
    assert json.loads(text)["traces"] == [[["out", 2], ["out", 3]], [["out", 3], ["out", 2]]]


def test_program_error_exit_code(capsys, files):
    assert main(["compile", files("bad.prog", "r1 := x || r1 := y")]) == 2


def test_cosim_and_race(capsys, files):
    good = files("w.prog", "x := 1 || y := 2")
    racy = files("r.prog", "x := 1 || r1 := x")
    assert run(capsys, "cosim", good)[0] == 0
    assert run(capsys, "race", good)[0] == 0
    code, text = run(capsys, "race", good, racy, "--format", "json", "--jobs", "2")
    assert code == 1
    doc = json.loads(text)
    assert set(doc) == {good, racy} and all(rep["agree"] for rep in doc.values())


def test_transform_and_behaviors(capsys, files):
    sb = files("sb.prog", SB_LITMUS)
    code, text = run(capsys, "transform", sb, "--kind", "tso", "--bound", "1", "--format", "json")
    assert code == 0 and len(json.loads(text)["members"]) > 1
    assert run(capsys, "transform", sb, "--kind", "tso", "--check")[0] == 1
    code, text = run(capsys, "behaviors", sb, "--format", "json")
    assert [0, 0] not in json.loads(text)["behaviors"]
    code, text = run(capsys, "behaviors", sb, "--kind", "tso", "--format", "json")
    assert [0, 0] in json.loads(text)["behaviors"]


def test_transform_process_input(capsys, files):
    f = files("w.proc", "~write_x(1).(~write_y(2).(*))")
    code, text = run(capsys, "transform", f, "--process", "--format", "json")
    assert code == 0 and len(json.loads(text)["members"]) == 2


def test_depth_environment_variable(files):
    env = dict(os.environ, VCCTS_DEPTH="0")
    f = files("h.proc", "f(x).(~g(x).(*)) | ~f(1).(g(y).(*))")
    res = subprocess.run([sys.executable, "-m", "vccts.cli", "lts", f, "--format", "json"],
                         capture_output=True, text=True, env=env, check=True)
    assert json.loads(res.stdout)["transitions"] == []


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bisim"])
    assert exc.value.code == 2
