import json

import pytest

from hyperrepair.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_OK, build_parser, main

NI = "int h, l, o; output o; @repair o = l + h; observe;\n"
FIXED = "int h, l, o; output o; o = l; observe;\n"
SPEC = "forall p1. forall p2. (l[p1] == l[p2]) -> (o[p1] == o[p2])\n"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return {
        "ni": write("ni.imp", NI),
        "fixed": write("fixed.imp", FIXED),
        "spec": write("ni.hltl", SPEC),
        "bad": write("bad.imp", "int x; x = ;"),
        "loop": write("loop.imp", "int x; output x; while (x >= 0) { x = x + 1; } observe;\n"),
        "loopspec": write("loop.hltl", "forall p. x[p] == 0\n"),
        "dir": tmp_path,
    }


def test_oracle_verdicts(files, capsys):
    assert main(["oracle", "--program", files["ni"], "--spec", files["spec"], "--domain", "int:0..1"]) == EXIT_FAIL
    out = json.loads(capsys.readouterr().out)
    assert out == {"verdict": "violated", "stores": 8, "violating_inputs": 8}
    assert main(["oracle", "--program", files["fixed"], "--spec", files["spec"]]) == EXIT_OK


def test_oracle_inconclusive_on_divergence(files, capsys):
    code = main(["oracle", "--program", files["loop"], "--spec", files["loopspec"], "--domain", "int:0..0"])
    assert code == EXIT_INCONCLUSIVE
    assert json.loads(capsys.readouterr().out)["verdict"] == "inconclusive"


def test_verify_and_dumps(files, capsys):
    out = files["dir"] / "dumps"
    code = main(["verify", "--program", files["fixed"], "--spec", files["spec"], "--dump-paths",
                 "--dump-automaton", "--out", str(out)])
    assert code == EXIT_OK
    assert json.loads(capsys.readouterr().out)["status"] == "holds-bounded"
    assert (out / "automaton.txt").read_text().startswith("atoms:")
    assert (out / "paths.txt").read_text().startswith("PATH 0")
    assert main(["verify", "--program", files["ni"], "--spec", files["spec"]]) == EXIT_FAIL


def test_emit_sygus_encodings(files, capsys):
    for enc in ("enc", "trans"):
        assert main(["emit-sygus", "--program", files["ni"], "--spec", files["spec"], "--encoding", enc]) == EXIT_OK
        text = capsys.readouterr().out
        assert text.startswith("(set-logic ALL)") and "(synth-fun f1 ((h Int) (l Int)) Int" in text
    target = files["dir"] / "q" / "iter.sy"
    code = main(["emit-sygus", "--program", files["ni"], "--spec", files["spec"], "--encoding", "iter",
                 "--patch", "0", "--out", str(target)])
    assert code == EXIT_OK and "(check-synth)" in target.read_text()
    code = main(["emit-sygus", "--program", files["ni"], "--spec", files["spec"], "--encoding", "iter"])
    assert code == EXIT_CONFIG


def test_configuration_errors(files, capsys):
    assert main(["verify", "--program", files["bad"], "--spec", files["spec"]]) == EXIT_CONFIG
    assert main(["verify", "--program", str(files["dir"] / "missing.imp"), "--spec", files["spec"]]) == EXIT_CONFIG
    assert main(["oracle", "--program", files["ni"], "--spec", files["spec"], "--domain", "real:1"]) == EXIT_CONFIG
    assert main(["repair", "--program", files["ni"], "--spec", files["spec"], "--grammar", "x"]) == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_parser_lists_subcommands():
    help_text = build_parser().format_help()
    for cmd in ("repair", "verify", "oracle", "emit-sygus", "bench"):
        assert cmd in help_text
    with pytest.raises(SystemExit):
        build_parser().parse_args(["bench", "nonsense"])


@pytest.mark.solver
def test_repair_writes_report_and_program(files):
    out = files["dir"] / "run"
    code = main(["repair", "--program", files["ni"], "--spec", files["spec"], "--timeout", "20",
                 "--domain", "int:0..1", "--out", str(out), "--emit-constraints"])
    assert code == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "repaired" and report["oracle"] == "satisfied"
    assert "@repair" not in (out / "repaired.imp").read_text()
    assert (out / "iter0.sy").exists()


@pytest.mark.solver
def test_bench_on_one_benchmark(tmp_path, capsys):
    code = main(["bench", "functional", "--only", "stray_update", "--out", str(tmp_path)])
    assert code == EXIT_OK
    table = capsys.readouterr().out
    assert table.splitlines()[0].split()[0] == "Instance" and "stray_update" in table
    data = json.loads((tmp_path / "bench.json").read_text())
    assert data[0]["name"] == "stray_update" and data[0]["oracle"] == "satisfied"
