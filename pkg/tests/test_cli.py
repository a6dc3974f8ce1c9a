import csv
import io
import json
import math
import subprocess
import sys

import pytest

from faraday_teleport import cli
from faraday_teleport.cavity import CavityParams
from faraday_teleport.teleport import InputState, Outcome, run_protocol


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    return json.loads(out)


def test_reflection_operating_point(capsys):
    d = run_json(capsys, "reflection", "--omega-p", "-0.5", "--g", "0.5", "--gamma", "0", "--detuning0", "0")
    assert d["coupled"]["r_re"] == -1.0 and d["coupled"]["r_im"] == 0.0
    assert d["coupled"]["magnitude"] == 1.0
    assert abs(d["coupled"]["phase"] - math.pi) < 1e-15
    assert abs(d["empty"]["phase"] - math.pi / 2) < 1e-15


def test_reflection_sweep_csv(capsys):
    code, out, _ = run(capsys, "reflection", "--sweep", "--sweep-min", "-1", "--sweep-max", "1", "--sweep-points", "5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 5
    assert [float(r["omega_p"]) for r in rows] == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert float(rows[1]["coupled_re"]) == -1.0


def test_teleport_example(capsys):
    d = run_json(capsys, "teleport", "--n", "2", "--state", "random", "--outcome", "RR:11", "--seed", "7")
    assert d["correction"] == "I.I"
    assert abs(d["fidelity"] - 1) < 1e-12
    assert d["seed"] == 7 and d["outcome"] == "RR:11"


def test_teleport_round_trip(capsys):
    d = run_json(capsys, "teleport", "--n", "2", "--state", "random", "--seed", "31")
    # re-run from the emitted amplitudes and outcome
    again = run_json(capsys, "teleport", "--n", "2", f"--state={d['state']}", "--outcome", d["outcome"], "--seed", "31")
    assert again["fidelity"] == pytest.approx(d["fidelity"], abs=1e-12)
    assert again["probability"] == pytest.approx(d["probability"], abs=1e-12)
    amps = [complex(float(a), float(b)) for a, b in (z.split(":") for z in d["state"].split(","))]
    rep = run_protocol(InputState.from_amplitudes(amps), CavityParams.operating_point(), forced=Outcome.parse(d["outcome"]))
    assert rep.fidelity == pytest.approx(d["fidelity"], abs=1e-12)
    assert rep.probability == pytest.approx(d["probability"], abs=1e-12)


def test_teleport_amplitude_list(capsys):
    # alpha |01> maps to index 1
    d = run_json(capsys, "teleport", "--n", "2", "--state", "0:0,1:0,0:0,0:0", "--outcome", "LL:00")
    assert d["state"].split(",")[1].startswith("1.0")
    assert abs(d["fidelity"] - 1) < 1e-12


def test_teleport_ghz(capsys):
    d = run_json(capsys, "teleport", "--n", "3", "--state", "ghz3", "--seed", "2")
    assert abs(d["fidelity"] - 1) < 1e-12


def test_channel(capsys):
    d = run_json(capsys, "channel")
    assert abs(d["entropy"] - 1) < 1e-12
    assert d["branch_overlap"] < 1e-12


def test_timing(capsys):
    d = run_json(capsys, "timing", "--n", "2")
    assert round(d["seconds"], -1) == 12270
    assert round(d["hours"], 2) == 3.41


def test_timing_figure2(capsys):
    code, out, _ = run(capsys, "timing", "--figure2", "--n-range", "1:3", "--etas", "1e-4,1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,eta,seconds" and len(lines) == 7


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "1", "--param", "gamma=0:0.1:3", "--samples", "16")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["gamma"]) for r in rows] == [0.0, 0.05, 0.1]
    assert abs(float(rows[0]["mean_fidelity"]) - 1) < 1e-9
    assert float(rows[2]["mean_fidelity"]) < 1


def test_montecarlo(capsys):
    d = run_json(capsys, "montecarlo", "--n", "1", "--trials", "5000", "--eta", "0.5")
    assert d["trials"] == 5000 and d["seed"] == cli.DEFAULT_SEED
    assert abs(d["conditional_fidelity"] - 1) < 1e-9


def test_tables(capsys):
    d = run_json(capsys, "tables", "--n-inputs", "3")
    assert len(d["tables"]["n2"]) == 16 and len(d["tables"]["n3"]) == 16
    assert not d["verification"]["all_corrections_recover"]


def test_usage_errors(capsys):
    assert run(capsys, "bogus")[0] == 1
    assert run(capsys, "teleport", "--frobnicate")[0] == 1
    assert run(capsys, "sweep", "--param", "nope=1:2:3")[0] == 1
    assert run(capsys, "teleport", "--n", "2", "--state", "1:0,0:0")[0] == 1
    code, out, err = run(capsys)
    assert code == 1 and "usage" in err


def test_domain_errors(capsys):
    code, out, err = run(capsys, "teleport", "--n", "1", "--g", "0", "--outcome", "R:1")
    assert code == 2 and out == "" and "error" in err
    assert run(capsys, "teleport", "--n", "7")[0] == 2
    assert run(capsys, "teleport", "--n", "2", "--state", "0:0,0:0,0:0,0:0")[0] == 2


def test_output_file_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["teleport", "--n", "3", "--state", "random", "--seed", "5"]
    assert cli.main(args + ["-o", str(a)]) == 0
    assert cli.main(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_console_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "faraday_teleport", "timing", "--n", "1"], capture_output=True, text=True
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["n"] == 1
