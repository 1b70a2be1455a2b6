import csv
import io
import json
import math

from kappacost import cli


def run_cli(capsys, *args):
    code = cli.main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_state_measure_json_report(capsys):
    code, out, _ = run_cli(
        capsys,
        "state-measure",
        "--input",
        '{"kind": "isotropic", "params": {"t": 0.9, "d": 2}}',
        "--quantities",
        "e_kappa",
        "e_n",
    )
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == "kappa-cost/1"
    assert report["command"] == "state-measure"
    expected = math.log2(1.8)
    assert abs(report["results"]["e_kappa"]["value_bits"] - expected) <= 1e-5
    assert abs(report["results"]["e_n"]["value_bits"] - expected) <= 1e-5
    assert report["results"]["e_kappa"]["closed_form_agrees"]
    assert "witness_primal" not in report["results"]["e_kappa"]


def test_state_measure_witnesses_flag(capsys):
    code, out, _ = run_cli(
        capsys,
        "state-measure",
        "--input",
        '{"kind": "isotropic", "params": {"t": 0.9, "d": 2}}',
        "--quantities",
        "e_kappa",
        "--witnesses",
    )
    assert code == 0
    report = json.loads(out)
    w = report["results"]["e_kappa"]["witness_s"]
    assert len(w) == 4 and len(w[0]) == 4
    assert "witness_v" in report["results"]["e_kappa"]
    assert "witness_w" in report["results"]["e_kappa"]


def test_state_measure_file_input_and_output(tmp_path, capsys):
    src = tmp_path / "state.json"
    src.write_text(json.dumps({"kind": "werner", "params": {"p": 1.0, "d": 2}}))
    dst = tmp_path / "out.json"
    code, _, _ = run_cli(
        capsys,
        "state-measure",
        "--input",
        str(src),
        "--quantities",
        "e_kappa",
        "--output",
        str(dst),
    )
    assert code == 0
    report = json.loads(dst.read_text())
    assert abs(report["results"]["e_kappa"]["value_bits"] - 1.0) <= 1e-5


def test_csv_format(capsys):
    code, out, _ = run_cli(
        capsys,
        "state-measure",
        "--input",
        '{"kind": "isotropic", "params": {"t": 1.0, "d": 2}}',
        "--quantities",
        "e_kappa",
        "e_n",
        "--format",
        "csv",
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    vals = {r["quantity"]: r["value"] for r in rows}
    assert {"e_kappa.value_bits", "e_n.value_bits"} <= vals.keys()
    assert abs(float(vals["e_kappa.value_bits"]) - 1.0) <= 1e-5
    assert abs(float(vals["e_n.value_bits"]) - 1.0) <= 1e-5


def test_parse_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "state-measure", "--input", "{not json")
    assert code == cli.EXIT_PARSE
    assert err.strip()


def test_validation_error_exit_code(capsys):
    bad = json.dumps({"kind": "isotropic", "params": {"t": 2.0, "d": 2}})
    code, _, _ = run_cli(capsys, "state-measure", "--input", bad)
    assert code == cli.EXIT_PARSE


def test_dimension_error_exit_code(capsys):
    bad = json.dumps(
        {
            "kind": "explicit",
            "dims": [2, 2],
            "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
        }
    )
    code, _, _ = run_cli(capsys, "state-measure", "--input", bad)
    assert code == cli.EXIT_DIMENSION


def test_channel_measure_report(capsys):
    code, out, _ = run_cli(
        capsys,
        "channel-measure",
        "--input",
        '{"kind": "depolarizing", "params": {"p": 0.2, "d": 2}}',
        "--quantities",
        "e_kappa",
        "q_theta",
    )
    assert code == 0
    report = json.loads(out)
    expected = math.log2(1.6)
    assert abs(report["results"]["e_kappa"]["value_bits"] - expected) <= 1e-5
    assert abs(report["results"]["q_theta"]["value_bits"] - expected) <= 1e-4


def test_channel_measure_gaussian(capsys):
    code, out, _ = run_cli(
        capsys,
        "channel-measure",
        "--input",
        '{"kind": "gaussian", "params": {"name": "thermal", "eta": 0.6, "n_b": 0.5}}',
    )
    assert code == 0
    report = json.loads(out)
    g = report["results"]["gaussian"]
    assert g["tag"] == "Value"
    assert abs(g["value_bits"] - math.log2(1.6 / 0.8)) <= 1e-9


def test_one_shot_state_and_channel(capsys):
    code, out, _ = run_cli(
        capsys,
        "one-shot",
        "--input",
        '{"kind": "isotropic", "params": {"t": 1.0, "d": 2}}',
    )
    assert code == 0
    report = json.loads(out)
    assert report["results"]["one_shot"]["m_integer"] == 2
    code, out, _ = run_cli(
        capsys,
        "one-shot",
        "--input",
        '{"kind": "dephasing", "params": {"q": 0.25}}',
    )
    assert code == 0
    report = json.loads(out)
    assert report["results"]["one_shot"]["m_integer"] == 2
    assert abs(report["results"]["one_shot"]["parallel_asymptotic_bits"] - math.log2(1.5)) <= 1e-5


def test_sweep_endpoints_and_csv(tmp_path, capsys):
    dst = tmp_path / "sweep.csv"
    code, _, _ = run_cli(
        capsys,
        "sweep",
        "--steps",
        "5",
        "--format",
        "csv",
        "--output",
        str(dst),
    )
    assert code == 0
    rows = list(csv.DictReader(dst.open()))
    assert len(rows) == 5
    rs = [float(r["r"]) for r in rows]
    assert rs == sorted(rs) and rs[0] == 0.0 and rs[-1] == 1.0
    costs = [float(r["e_kappa_bits"]) for r in rows]
    assert abs(costs[0] - 1.0) <= 1e-5
    assert abs(costs[-1]) <= 1e-5
    assert all(a >= b - 1e-6 for a, b in zip(costs, costs[1:]))


def test_sweep_plot(tmp_path, capsys):
    png = tmp_path / "curve.png"
    code, _, _ = run_cli(
        capsys, "sweep", "--steps", "3", "--plot", str(png), "--format", "csv"
    )
    assert code == 0
    assert png.stat().st_size > 0


def test_env_tolerance_override(capsys, monkeypatch):
    monkeypatch.setenv(cli.ENV_GAP_TOL, "1e-7")
    code, out, _ = run_cli(
        capsys,
        "state-measure",
        "--input",
        '{"kind": "isotropic", "params": {"t": 1.0, "d": 2}}',
        "--quantities",
        "e_n",
    )
    assert code == 0
    assert json.loads(out)["tolerances"]["gap_tol"] == 1e-7


def test_unknown_quantity_rejected(capsys):
    code, _, err = run_cli(
        capsys,
        "state-measure",
        "--input",
        '{"kind": "isotropic", "params": {"t": 1.0, "d": 2}}',
        "--quantities",
        "bogus",
    )
    assert code == cli.EXIT_PARSE
    assert "bogus" in err
