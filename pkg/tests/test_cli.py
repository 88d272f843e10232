import json

import pytest

from twistgap.cli import main

OK_RUNS = [
    ["lgt2d", "--group", "su2", "--beta", "2.0", "--size", "4x4", "--j", "0.5"],
    ["lgt2d", "--group", "u1", "--beta", "1.0", "--size", "4x4", "--charge", "1", "--sectors"],
    ["lgt2d", "--group", "z3", "--beta", "0.7", "--size", "2x4", "--charge", "1", "--areas", "1,2,4,8"],
    ["tri", "--t1", "0.2", "--t", "0.15", "--rho"],
    ["tri", "--t1", "0.2", "--t", "0.15", "--size", "16x4"],
    ["tri", "--t", "0.1", "--kink"],
    ["tri", "--heatmap", "11x11"],
    ["square", "--a", "0.3", "--b", "0.2", "--size", "8x4"],
    ["square", "--a", "0.3", "--b", "0.2", "--decay"],
    ["square", "--a", "0.3", "--b", "0.2", "--spectrum"],
    ["pcm", "--group", "su2", "--beta", "1.0", "--L", "16", "--j", "0.5"],
    ["pcm", "--group", "z4", "--beta", "0.5", "--L", "8", "--charge", "2", "--subgroup", "full"],
    ["oracle", "enumerate", "--size", "4x3", "--a", "0.3", "--b", "0.2", "--ns", "1,2"],
    ["oracle", "transfer", "--lattice", "triangular-fig1", "--size", "6x2", "--t1", "0.2", "--t", "0.1"],
    ["oracle", "check-inequality", "--size", "8x2", "--a", "0.3", "--b", "0.3"],
    ["oracle", "wall-mod2", "--size", "4x3", "--a", "0.3", "--b", "0.2"],
    ["oracle", "deform", "--size", "4x3", "--a", "0.3", "--b", "0.2", "--sites", "0,5"],
    ["oracle", "equivalence", "--size", "8x2", "--t1", "0.2", "--t", "0.1"],
    ["oracle", "sce", "--size", "6x4", "--ts", "0.05,0.025"],
    ["mc", "--size", "4x4", "--a", "0.3", "--b", "0.3", "--sweeps", "3000", "--thermalization", "100"],
]


@pytest.mark.parametrize("argv", OK_RUNS, ids=lambda a: "-".join(a[:2]))
def test_subcommands_succeed(argv, capsys):
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert out.startswith("# config: ")
    assert len(out.splitlines()) >= 3


@pytest.mark.parametrize("argv", OK_RUNS[:6] + OK_RUNS[12:16], ids=lambda a: "-".join(a[:2]))
def test_json_output_parses(argv, capsys):
    assert main(argv + ["--format", "json"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["rows"] and "config" in body


def test_config_echo_holds_the_inputs(capsys):
    main(["square", "--a", "0.3", "--b", "0.2", "--size", "8x4", "--format", "json"])
    cfg = json.loads(capsys.readouterr().out)["config"]
    assert cfg["a"] == 0.3 and cfg["size"] == [8, 4] and cfg["command"] == "square"


def test_mc_is_deterministic(capsys):
    argv = ["mc", "--size", "4x4", "--a", "0.3", "--b", "0.3", "--sweeps", "3000", "--thermalization", "100",
            "--seed", "7", "--format", "json"]
    main(argv)
    a = json.loads(capsys.readouterr().out)
    main(argv)
    b = json.loads(capsys.readouterr().out)
    assert a["ratio"] == b["ratio"] and "exact" in a


def test_inequality_rows_carry_the_regime_flag(capsys):
    main(["oracle", "check-inequality", "--size", "8x2", "--a", "0.3", "--b", "0.3", "--format", "json"])
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert all("regime_flag" in r for r in rows)
    assert [r["regime_flag"] for r in rows][:3] == [True, True, False]


@pytest.mark.parametrize("argv,code", [
    (["tri", "--t1", "0.2", "--t", "0.9"], 3),
    (["oracle", "transfer", "--size", "2x13", "--a", "0.1", "--b", "0.1"], 4),
    (["oracle", "enumerate", "--size", "6x5", "--a", "0.1", "--b", "0.1"], 4),
    (["lgt2d", "--group", "su2", "--size", "4x4", "--j", "0.5"], 2),
    (["lgt2d", "--group", "su2", "--beta", "1", "--size", "4by4", "--j", "0.5"], 2),
    (["lgt2d", "--group", "su2", "--beta", "1", "--size", "4x4", "--j", "1"], 2),
    (["lgt2d", "--group", "z3", "--beta", "1", "--size", "4x4", "--charge", "3"], 2),
    (["lgt2d", "--group", "so7", "--beta", "1", "--j", "0.5"], 2),
    (["lgt2d", "--group", "z3", "--beta", "0.7", "--size", "2x4", "--charge", "1"], 3),
    (["pcm", "--beta", "0.5", "--L", "8"], 2),
    (["square", "--a", "-0.3", "--b", "0.2"], 3),
    (["mc", "--size", "4x4", "--a", "0.3", "--b", "0.3", "--sweeps", "100", "--thermalization", "200"], 3),
])
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code
    capsys.readouterr()


def test_config_file_supplies_flags(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# square run\na = 0.3\nb: 0.2\nsize = 8x4\nformat = json\n")
    assert main(["square", "--config", str(cfg)]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["config"]["b"] == 0.2
    # command-line flags win over the file
    assert main(["square", "--config", str(cfg), "--b", "0.1"]) == 0
    assert json.loads(capsys.readouterr().out)["config"]["b"] == 0.1


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("a = 0.3\nbogus = 1\n")
    assert main(["square", "--config", str(cfg), "--b", "0.2"]) == 2
    assert "bogus" in capsys.readouterr().err


def test_thread_variable(monkeypatch, capsys):
    argv = ["oracle", "enumerate", "--size", "4x4", "--a", "0.3", "--b", "0.2", "--format", "json"]
    main(argv)
    one = json.loads(capsys.readouterr().out)["rows"][0]
    monkeypatch.setenv("TWISTGAP_THREADS", "2")
    main(argv)
    two = json.loads(capsys.readouterr().out)["rows"][0]
    assert two["log_Z"] == pytest.approx(one["log_Z"], abs=1e-13)


def test_output_and_svg_files(tmp_path):
    out, svg = tmp_path / "b.csv", tmp_path / "b.svg"
    assert main(["lgt2d", "--group", "su2", "--beta", "2", "--size", "4x4", "--j", "0.5",
                 "-o", str(out), "--svg", str(svg)]) == 0
    assert out.read_text().startswith("# config:")
    assert svg.read_text().startswith("<svg")


def test_heatmap_svg(tmp_path, capsys):
    svg = tmp_path / "h.svg"
    assert main(["tri", "--heatmap", "21x21", "--svg", str(svg)]) == 0
    capsys.readouterr()
    assert svg.read_text().startswith("<svg")
