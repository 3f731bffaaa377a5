import json

import pytest

from ptlab import cli
from ptlab import perms as pm
from ptlab.perms import PartialTranspose, Side


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_perm_literals(tmp_path):
    assert isinstance(cli.parse_perm_literal("I", 6), pm.Identity)
    assert isinstance(cli.parse_perm_literal("T", 6), pm.Transpose)
    g = cli.parse_perm_literal("G(2,3)", 6)
    assert isinstance(g, PartialTranspose) and g.side is Side.RIGHT
    lg = cli.parse_perm_literal("LG(3,2)", 6)
    assert lg.side is Side.LEFT
    assert cli.parse_perm_literal("G(2,M/2)", 8).d == 4
    assert cli.parse_perm_literal("G(M,1)", 8).b == 8
    with pytest.raises(ValueError):
        cli.parse_perm_literal("G(3,3)", 8)
    with pytest.raises(ValueError):
        cli.parse_perm_literal("Q(2,2)", 4)

    dfile = tmp_path / "theta.txt"
    dfile.write_text("2\n3\n1\n4\n")
    theta = cli.parse_perm_literal(f"D({dfile})", 4)
    assert isinstance(theta, pm.InducedDiagonal) and theta(1, 4) == (2, 4)

    pfile = tmp_path / "table.txt"
    lines = []
    for i in range(1, 4):
        for j in range(1, 4):
            u, v = pm.Transpose(3)(i, j)
            lines.append(f"{i} {j} {u} {v}")
    pfile.write_text("\n".join(lines) + "\n")
    table = cli.parse_perm_literal(f"P({pfile})", 3)
    assert pm.extensionally_equal(table, pm.Transpose(3))


def test_parse_word():
    perms = cli.parse_word("G(2,4),G(4,2),I", 8)
    assert len(perms) == 3
    assert isinstance(perms[2], pm.Identity)


def test_count_command(capsys):
    code, out, _ = run(capsys, "count", "--M", "12", "--a", "G(6,2)", "--b", "G(4,3)", "--all")
    assert code == 0
    payload = json.loads(out)
    assert payload["c"] == 40 and payload["j"] == 40
    assert payload["bounds"] == {"lower": 16, "upper": 48}
    assert payload["lcm"] == {"Q": 6, "L": 3, "l": 2}
    assert payload["c1"] == 40
    assert {"c2", "c3", "c2_sharesecond", "c3_sharesecond"} <= payload.keys()


def test_moment_command(capsys):
    code, out, _ = run(capsys, "moment", "--M", "4", "--P", "4", "--word", "I,I", "--exact")
    assert code == 0
    assert json.loads(out)["exact"] == "2"
    code, out, _ = run(capsys, "moment", "--M", "8", "--word", "G(2,4),G(4,2)",
                       "--exact", "--breakdown")
    payload = json.loads(out)
    assert payload["exact"] == "3/2"
    assert [row["pairing"] for row in payload["breakdown"]] == ["(1,2)(3,4)", "(1,4)(2,3)"]


def test_cumulant_and_limit_commands(capsys):
    code, out, _ = run(capsys, "cumulant", "--M", "12", "--word", "G(6,2),G(4,3)", "--exact")
    assert code == 0
    assert json.loads(out)["exact"] == "5/18"
    code, out, _ = run(capsys, "limit", "--b", "2", "--d", "3", "--c", "1", "--orders", "4")
    payload = json.loads(out)
    assert payload["cumulants"][3] == "13/36"
    code, out, _ = run(capsys, "limit", "--b", "inf", "--d", "inf", "--orders", "4")
    assert json.loads(out)["moments"] == ["1", "2", "4", "9"]


def test_covariance_command(capsys):
    code, out, _ = run(capsys, "covariance", "--M", "8", "--word1", "I", "--word2", "I")
    assert code == 0
    assert json.loads(out)["exact"] == "1"


def test_simulate_csv_and_seed_required(capsys):
    code, out, _ = run(capsys, "simulate", "--M", "4", "--P", "4", "--word", "I",
                       "--samples", "200", "--seed", "42", "--format", "csv")
    assert code == 0
    header, row = out.strip().split("\n")
    assert header == "word,M,P,samples,seed,mean,std_error"
    assert row.startswith("I,4,4,200,42,")
    # argparse enforces --seed (exit 2)
    assert cli.main(["simulate", "--M", "4", "--word", "I"]) == 2


def test_mc_seed_required_for_mc_flag(capsys):
    code = cli.main(["moment", "--M", "4", "--word", "I", "--mc", "--samples", "10"])
    assert code == 2


def test_exit_codes(capsys):
    assert cli.main(["moment", "--M", "8", "--word", "G(3,3)"]) == 2
    code = cli.main(["covariance", "--M", "256", "--word1", "I,I,I", "--word2", "I,I,I"])
    assert code == 3
    capsys.readouterr()


def test_budget_message_includes_cost(capsys):
    code = cli.main(["covariance", "--M", "256", "--word1", "I,I,I", "--word2", "I,I,I"])
    err = capsys.readouterr().err
    assert code == 3
    assert str(256**6) in err


def test_verdict_command(capsys):
    code, out, _ = run(capsys, "verdict", "--family", "G(N,N);LG(N,N);G(N^2,1)",
                       "--grid", "N=2,4,8,16", "--probe")
    assert code == 0
    payload = json.loads(out)
    assert payload["overall_free"] is True
    assert len(payload["pairs"]) == 3
    for entry in payload["pairs"]:
        assert entry["free"] is True
        assert entry["rule"] in ("W1", "LTR")
        assert entry["density_probe"]["nonincreasing"] is True
    # identical families: not free overall
    code, out, _ = run(capsys, "verdict", "--family", "G(N,N);G(N,N)",
                       "--grid", "N=2,4,8")
    assert json.loads(out)["overall_free"] is False
    # grid must be pinned by a concrete family
    assert cli.main(["verdict", "--family", "G(M/2,2);G(2,M/2)", "--grid", "N=2,4"]) == 2


def test_verdict_mixed_expressions(capsys):
    code, out, _ = run(capsys, "verdict", "--family", "G(N^2,1);G(M/2,2);G(2,M/2)",
                       "--grid", "N=4,8,16")
    assert code == 0
    payload = json.loads(out)
    labels = payload["families"]
    assert labels == ["G(N^2,1)", "G(M/2,2)", "G(2,M/2)"]
    by_pair = {tuple(e["pair"]): e for e in payload["pairs"]}
    assert by_pair[(1, 2)]["free"] is True    # d-limits (2, inf)
    assert by_pair[(0, 1)]["free"] is False   # d-limits (1, 2): L = 2
    # 2^k walks the 1-based grid position: on N=2,4,8 it coincides with N
    code, out, _ = run(capsys, "verdict", "--family", "G(2^k,N);G(N^2,1)",
                       "--grid", "N=2,4,8")
    assert code == 0
    assert json.loads(out)["overall_free"] is True


def test_sweep_round_trip(tmp_path, capsys, monkeypatch):
    config = {
        "command": "simulate",
        "word": "G(2,M/2)",
        "samples": 300,
        "seed": 42,
        "grid": [{"M": 4, "P": 4}, {"M": 8, "P": 8}, {"M": 16, "P": 16}],
    }
    cfg_path = tmp_path / "sweep.json"
    cfg_path.write_text(json.dumps(config))
    out1 = tmp_path / "out1.csv"
    out2 = tmp_path / "out2.csv"
    monkeypatch.setenv("PTLAB_THREADS", "2")
    assert cli.main(["sweep", "--config", str(cfg_path), "--out", str(out1)]) == 0
    assert cli.main(["sweep", "--config", str(cfg_path), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().strip().split("\n")
    assert len(lines) == 4  # header + 3 grid rows
    assert lines[0].startswith("command,")


def test_emit_config_reruns_identically(tmp_path, capsys):
    cfg_path = tmp_path / "sim.json"
    code, out1, _ = run(capsys, "simulate", "--M", "8", "--word", "I", "--samples",
                        "200", "--seed", "13", "--emit-config", str(cfg_path))
    assert code == 0
    emitted = json.loads(cfg_path.read_text())
    assert emitted["command"] == "simulate" and emitted["seed"] == 13
    code, out2, _ = run(capsys, "simulate", "--M", str(emitted["M"]), "--word",
                        emitted["word"], "--samples", str(emitted["samples"]),
                        "--seed", str(emitted["seed"]))
    assert out1 == out2


def test_exact_and_mc_paths_agree_through_cli(capsys):
    code, out, _ = run(capsys, "moment", "--M", "8", "--word", "G(2,4),G(4,2)", "--exact")
    num, den = (json.loads(out)["exact"] + "/1").split("/")[:2]
    exact = int(num) / int(den)
    code, out, _ = run(capsys, "moment", "--M", "8", "--word", "G(2,4),G(4,2)",
                       "--mc", "--samples", "20000", "--seed", "42")
    payload = json.loads(out)
    assert abs(payload["mean"] - exact) <= 5 * payload["std_error"]


def test_sweep_covariance_and_count(tmp_path):
    config = {
        "command": "covariance",
        "word1": "I",
        "word2": "I",
        "grid": [{"M": 4}, {"M": 8}],
    }
    cfg_path = tmp_path / "cov.json"
    cfg_path.write_text(json.dumps(config))
    out = tmp_path / "cov.csv"
    assert cli.main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
    rows = out.read_text().strip().split("\n")
    assert len(rows) == 3 and "exact" in rows[0]
    config = {"command": "count", "a": "G(2,M/2)", "b": "G(M/2,2)",
              "grid": [{"M": 8}, {"M": 16}]}
    cfg_path.write_text(json.dumps(config))
    assert cli.main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert len(out.read_text().strip().split("\n")) == 3


def test_selftest_subset(capsys):
    code, out, _ = run(capsys, "selftest", "--criteria", "9")
    assert code == 0
    assert "criterion 9: PASS" in out
    assert cli.main(["selftest", "--criteria", "12"]) == 2
