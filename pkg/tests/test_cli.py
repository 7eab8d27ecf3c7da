import json
import subprocess
import sys

import pytest

from sumsetlab.cli import RunConfig, main
from sumsetlab.errors import SpecError

SKEW_HALF = json.dumps({"k": 2, "system": "skew:golden",
                        "entries": [["0", "0"], ["0", "0"], ["0", "0"], ["0", "1/2"]]})


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_density(capsys):
    doc = run_json(capsys, "density", "periodic:3:0", "intervals:0-27")
    assert doc["estimate"] == "1/3" and doc["schema_version"] == 1
    code, out, _ = run(capsys, "--format", "plain", "density", "list:0,1,4,9@16",
                       "intervals:0-16")
    # four members in [0, 16)
    assert code == 0 and out.strip() == "1/4"
    code, out, _ = run(capsys, "--format", "csv", "density", "periodic:2:1",
                       "intervals:0-2,0-5")
    assert out.splitlines() == ["lo,hi,density", "0,2,1/2", "0,5,2/5"]


@pytest.mark.parametrize("argv,code", [
    (["density", "periodic:x", "intervals:0-5"], 2),
    (["density", "periodic:3:0", "intervals:0-5,0-5"], 2),
    (["density", "list:1@4", "intervals:0-10"], 3),
    (["find-sumset", "periodic:2:1", "--k", "0", "--sizes", "1"], 2),
    (["find-sumset", "periodic:2:1", "--k", "2", "--sizes", "1"], 2),
    (["find-sumset", "periodic:2:1", "--k", "3", "--sizes", "30,30,30", "--oracle",
      "--bound", "200"], 4),
    (["find-sumset", "periodic:2:1", "--k", "2", "--sizes", "1,1", "--oracle"], 2),
    (["cube-verify", "finrot:5:1", "--cube", "{bad", "--eps", "0.5", "--horizon", "20"], 2),
    (["cube-verify", "finrot:5:1", "--cube", '{"entries": [0, 1, 2, 3]}'], 2),
    (["orbit", "finrot:5:1", "--start", "0", "--target", "1", "--eps", "0.5"], 2),
    (["verify-sumset", "list:1@5", "--sets", "2;3"], 3),
    (["measure", "finrot:6:2", "cubic", "--k", "2"], 2),
    (["measure", "finrot:50:1", "cubic", "--k", "3"], 4),
    (["correspond", "list:1@5", "--radius", "9"], 3),
])
def test_exit_codes(capsys, argv, code):
    got, out, err = run(capsys, *argv)
    assert got == code
    assert out == "" and err.startswith("error:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_find_sumset(capsys):
    doc = run_json(capsys, "find-sumset", "periodic:2:1", "--k", "2", "--sizes", "3,3")
    assert doc["target_met"] is True
    assert doc["checks"] == {"acceptable": True, "all_sums_verified": True}
    assert set(doc) >= {"anchors", "sets", "achieved_sizes", "budget_spent"}
    doc = run_json(capsys, "find-sumset", "periodic:2:1", "--k", "2", "--sizes", "1,1",
                   "--variant", "union", "--oracle", "--bound", "50")
    assert doc["witness"] is None
    doc = run_json(capsys, "find-sumset", "periodic:2:1", "--k", "2", "--sizes", "3,3",
                   "--oracle", "--bound", "20")
    assert doc["witness"] is not None
    assert all((a + b) % 2 == 1 for a in doc["witness"][0] for b in doc["witness"][1])


def test_find_sumset_budget_flags(capsys):
    doc = run_json(capsys, "find-sumset", "periodic:3:0", "--k", "3", "--sizes",
                   "40,40,40", "--max-candidates", "20")
    assert doc["target_met"] is False
    assert doc["stop_reason"] == "candidate budget exhausted"


def test_measure(capsys):
    doc = run_json(capsys, "measure", "finrot:5:1", "cubic", "--k", "2")
    assert len(doc["atoms"]) == 125 and doc["atoms"][0]["weight"] == "1/125"
    alt = run_json(capsys, "measure", "finrot:5:1", "cubic", "--k", "2", "--alt")
    assert alt["atoms"] == doc["atoms"]
    doc = run_json(capsys, "measure", "finrot:5:1", "sigma", "--t", "2", "--k", "1")
    assert [a["point"] for a in doc["atoms"]] == [[2, x] for x in range(5)]
    doc = run_json(capsys, "measure", "finrot:6:2", "decompose", "--point", "1")
    assert [a["point"] for a in doc["atoms"]] == [1, 3, 5]
    doc = run_json(capsys, "measure", "power:finrot:5:1^2", "decompose", "--point", "[1, 4]")
    assert len(doc["atoms"]) == 5


def test_birkhoff_csv_and_plot_data(capsys, tmp_path):
    plot = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "measure", "skew:0.6180339887", "birkhoff", "--box",
                       "0,0.25", "--n", "1000000", "--plot-data", str(plot))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,average"
    n, avg = lines[-1].split(",")
    assert n == "1000000" and abs(float(avg) - 0.25) < 5e-3
    assert plot.read_text() == out
    doc = run_json(capsys, "--format", "json", "measure", "finrot:5:1", "birkhoff",
                   "--box", "2,3", "--n", "1000")
    assert doc["average"] == pytest.approx(0.2)


def test_cube_verify_and_qk(capsys, tmp_path):
    cube = {"k": 2, "system": "finrot:5:1", "entries": [0, 1, 2, 3]}
    doc = run_json(capsys, "cube-verify", "--cube", json.dumps(cube), "--eps", "0.5",
                   "--horizon", "20", "--min-hits", "2")
    assert doc["erdos"] is True
    assert [a["witnesses"] for a in doc["axes"]] == [[2, 7], [1, 6]]
    cube["entries"] = [0, 1, 2, 4]
    path = tmp_path / "cube.json"
    path.write_text(json.dumps(cube))
    doc = run_json(capsys, "cube-verify", "finrot:5:1", "--cube", f"@{path}", "--eps",
                   "0.5", "--horizon", "20")
    assert doc["erdos"] is False
    doc = run_json(capsys, "cube-verify", "--cube", SKEW_HALF, "--eps", "0.2",
                   "--horizon", "1000000")
    assert doc["erdos"] is False
    doc = run_json(capsys, "qk-test", "--cube", SKEW_HALF)
    assert doc["dynamical"] is True
    doc = run_json(capsys, "qk-test", "finrot:5:1", "--cube", f"@{path}")
    assert doc["dynamical"] is False


def test_orbit(capsys):
    doc = run_json(capsys, "orbit", "torus:1:1/8", "--start", "0", "--target", "1/2",
                   "--eps", "1e-9", "--horizon", "16")
    assert doc["hits"] == [4, 12]
    doc = run_json(capsys, "orbit", "finrot:5:1", "--start", "0", "--target", "2",
                   "--eps", "0.5", "--horizon", "20", "--min-hits", "3")
    assert doc["member"] and doc["witnesses"] == [2, 7, 12]
    doc = run_json(capsys, "orbit", "skew:golden", "--start", "0,0", "--target", "0,0",
                   "--eps", "0.05", "--horizon", "1000000", "--min-hits", "2")
    assert doc["member"]


def test_correspond_folner_verify(capsys):
    doc = run_json(capsys, "correspond", "periodic:2:1", "--radius", "4",
                   "--windows", "intervals:0-4", "--reconstruct", "0,5")
    assert doc["point"] == "bits:000001010@origin=-4"
    assert doc["frequencies"][0]["frequency"] == "1/2"
    assert doc["reconstructed"] == "list:1,3@5"
    doc = run_json(capsys, "folner-defect", "intervals:5-25", "--t", "4")
    assert doc["windows"][0]["overlap"] == "4/5"
    doc = run_json(capsys, "verify-sumset", "periodic:2:1", "--sets", "1;1")
    assert doc["ok"] is False and doc["violation"] == 2
    code, out, _ = run(capsys, "--format", "plain", "verify-sumset", "periodic:3:0",
                       "--sets", "3,6;0,3;0,9")
    assert out == "ok\n"


def test_config_file_and_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\neps = 0.5\nhorizon = 11\nformat = json\n")
    monkeypatch.setenv("SUMSETLAB_CONFIG", str(cfg))
    doc = run_json(capsys, "orbit", "finrot:5:1", "--start", "0", "--target", "3")
    assert doc["hits"] == [3, 8]
    doc = run_json(capsys, "orbit", "finrot:5:1", "--start", "0", "--target", "3",
                   "--horizon", "20")
    assert doc["hits"] == [3, 8, 13, 18]
    cfg.write_text("epsilon = 0.5\n")
    code, _, err = run(capsys, "orbit", "finrot:5:1", "--start", "0", "--target", "3")
    assert code == 2 and "unknown" in err


def test_run_config_validation():
    assert RunConfig.from_text("max-candidates = 7").max_candidates == 7
    assert RunConfig.from_text("space_limit = 1e12").space_limit == 10**12
    for text in ("horizon = -1", "eps = abc", "format = xml", "junk", "node_limit = 2.5"):
        with pytest.raises(SpecError):
            RunConfig.from_text(text)


def test_console_entry_point_runs():
    out = subprocess.run([sys.executable, "-m", "sumsetlab", "density", "periodic:4:0,1",
                          "intervals:0-8"], capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["estimate"] == "1/2"


def test_commands_are_deterministic(capsys):
    argv = ["find-sumset", "list:1,3,5,6,7,9,11,12,13,15,17,19@40", "--k", "2",
            "--sizes", "2,2"]
    first = run_json(capsys, *argv)
    second = run_json(capsys, *argv)
    first["budget_spent"].pop("seconds")
    second["budget_spent"].pop("seconds")
    assert first == second
