import json
import math

import numpy as np
import pytest
from helpers import KET0, bloch_state, ketbra

from qrobust.cli import main
from qrobust.opio import emit_csv, operator_to_json, read_operator_file, write_operator_file


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def state_json(matrix):
    return operator_to_json(np.asarray(matrix, dtype=complex), "state")


DEMO_SCENARIO = {
    "state": state_json(bloch_state(0.3, 0.4, 0.5)),
    "free_set": {"subsets": [{"variant": "incoherent_basis", "axis": a, "label": a} for a in "xyz"]},
    "mode": "robustness",
    "s": 0.45,
    "tol": 1e-7,
    "seed": 0,
}


def test_operator_file_round_trip(tmp_path):
    rho = bloch_state(0.2, -0.3, 0.4)
    path = tmp_path / "rho.json"
    write_operator_file(path, rho, "state")
    kind, value = read_operator_file(path)
    assert kind == "state"
    assert np.array_equal(value, rho)  # bit-identical in value


def test_operator_file_diagnostics(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"kind": "state", "dim": 2, "re": [[1, 0], [0, 0]]}')
    with pytest.raises(Exception) as excinfo:
        read_operator_file(path)
    assert "im" in str(excinfo.value)


def test_unknown_subcommand_exit_64(capsys):
    code, _, err = run(capsys, "no-such-command")
    assert code == 64
    assert "usage" in err


def test_help_exit_zero(capsys):
    code, out, _ = run(capsys)
    assert code == 0
    assert "commands:" in out


def test_psd_check(tmp_path, capsys):
    path = tmp_path / "state.json"
    write_operator_file(path, np.diag([0.25, 0.75]).astype(complex), "state")
    code, out, _ = run(capsys, "psd-check", "--operator", str(path))
    assert code == 0
    report = json.loads(out)
    assert report["psd"] is True
    assert abs(report["s_values"][0] - 1.0) < 1e-12  # S_1 = trace = 1
    hermit = tmp_path / "h.json"
    write_operator_file(hermit, np.diag([-0.5, 1.5]).astype(complex), "hermitian")
    code, out, _ = run(capsys, "psd-check", "--operator", str(hermit))
    report = json.loads(out)
    assert report["psd"] is False and report["psd_eigen"] is False


def test_psd_check_missing_file_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "psd-check", "--operator", str(tmp_path / "missing.json"))
    assert code == 2
    assert "missing.json" in err


def test_demo_subcommand_values(capsys):
    code, out, _ = run(capsys, "demo-appendix-d", "--bloch", "0.3,0.4,0.5")
    assert code == 0
    report = json.loads(out)
    per_axis = {row["axis"]: row for row in report["rows"]}
    assert per_axis["x"]["closed"] == pytest.approx(math.sqrt(0.41), abs=1e-6)
    assert per_axis["y"]["closed"] == pytest.approx(math.sqrt(0.34), abs=1e-6)
    assert per_axis["z"]["closed"] == pytest.approx(0.5, abs=1e-6)
    for row in report["rows"]:
        assert row["difference"] < 1e-5
    assert report["union"]["value"] == pytest.approx(0.5, abs=1e-6)
    assert report["union"]["achieving_subset"] == "z"


def test_demo_subcommand_rejects_bad_bloch(capsys):
    code, _, _ = run(capsys, "demo-appendix-d", "--bloch", "1.0,1.0,1.0")
    assert code == 2
    code, _, _ = run(capsys, "demo-appendix-d", "--bloch", "nope")
    assert code == 2


def test_robustness_command(tmp_path, capsys):
    scenario = write_json(tmp_path / "sc.json", DEMO_SCENARIO)
    code, out, _ = run(capsys, "robustness", "--scenario", scenario)
    assert code == 0
    report = json.loads(out)
    assert report["union"]["value"] == pytest.approx(0.5, abs=1e-6)
    values = {row["subset"]: row["value"] for row in report["rows"]}
    assert values["x"] == pytest.approx(math.sqrt(0.41), abs=1e-6)


def test_weight_command(tmp_path, capsys):
    scenario = write_json(
        tmp_path / "sc.json",
        {
            "state": state_json(np.diag([0.75, 0.25])),
            "free_set": {"subsets": [{"variant": "singleton", "state": state_json(np.eye(2) / 2), "label": "mixed"}]},
            "mode": "weight",
            "tol": 1e-8,
        },
    )
    code, out, _ = run(capsys, "weight", "--scenario", scenario)
    report = json.loads(out)
    assert code == 0
    assert report["union"]["value"] == pytest.approx(0.5, abs=1e-7)


def test_witness_verify_and_sweep(tmp_path, capsys):
    scenario = write_json(tmp_path / "sc.json", DEMO_SCENARIO)
    code, out, _ = run(capsys, "witness-verify", "--scenario", scenario)
    assert code == 0
    assert json.loads(out)["verdict"] is True
    above = dict(DEMO_SCENARIO)
    above["s"] = 0.55
    scenario2 = write_json(tmp_path / "sc2.json", above)
    code, out, _ = run(capsys, "witness-verify", "--scenario", scenario2)
    assert json.loads(out)["verdict"] is False
    code, out, _ = run(capsys, "witness-sweep", "--scenario", scenario, "--sweep-tol", "1e-3")
    report = json.loads(out)
    assert report["estimate"] == pytest.approx(0.5, abs=1e-3)
    assert report["difference"] < 2e-3


def test_witness_build_and_export(tmp_path, capsys):
    scenario = write_json(tmp_path / "sc.json", DEMO_SCENARIO)
    out_path = tmp_path / "witness.json"
    code, out, _ = run(capsys, "witness-build", "--scenario", scenario, "--m", "2", "--out", str(out_path))
    assert code == 0
    kind, member = read_operator_file(out_path)
    assert kind == "hermitian"
    assert member.shape == (4, 4)
    report = json.loads(out)
    assert report["member_dim"] == 4


def test_witness_build_scan_rows(tmp_path, capsys):
    scenario = write_json(tmp_path / "sc.json", DEMO_SCENARIO)
    csv_path = tmp_path / "scan.csv"
    code, out, _ = run(
        capsys, "witness-build", "--scenario", scenario, "--m", "2", "--scan", "7", "--csv", str(csv_path)
    )
    assert code == 0
    report = json.loads(out)
    assert len(report["rows"]) == 49
    header = csv_path.read_text().splitlines()[0]
    assert header == "s2,sign,x1,x2,x3"


def test_discriminate_exclude_commands(tmp_path, capsys):
    scenario = write_json(tmp_path / "sc.json", {**DEMO_SCENARIO, "s": None, "sample_budget": 16})
    code, out, _ = run(capsys, "discriminate", "--scenario", scenario)
    assert code == 0
    assert json.loads(out)["ratio_bound"] > 1
    excl = write_json(
        tmp_path / "excl.json",
        {
            "state": state_json(np.array([[0.75, 0.2], [0.2, 0.25]])),
            "free_set": {"subsets": [{"variant": "incoherent_basis", "axis": "z", "label": "z"}]},
            "mode": "weight",
            "tol": 1e-7,
            "sample_budget": 16,
        },
    )
    code, out, _ = run(capsys, "exclude", "--scenario", excl)
    assert code == 0
    assert json.loads(out)["ratio_bound"] < 1


def test_discriminate_free_state_exit_2(tmp_path, capsys):
    scenario = write_json(
        tmp_path / "sc.json",
        {
            "state": state_json(np.eye(2) / 2),
            "free_set": {"subsets": [{"variant": "singleton", "state": state_json(np.eye(2) / 2)}]},
        },
    )
    code, _, err = run(capsys, "discriminate", "--scenario", scenario)
    assert code == 2
    assert "free" in err


def test_worst_case_command(tmp_path, capsys):
    scenario = write_json(
        tmp_path / "sc.json",
        {
            "state": state_json(ketbra(KET0)),
            "free_set": {"subsets": [{"variant": "singleton", "state": state_json(np.eye(2) / 2), "label": "mixed"}]},
            "tol": 1e-7,
        },
    )
    code, out, _ = run(capsys, "worst-case", "--scenario", scenario, "--trials", "50")
    assert code == 0
    report = json.loads(out)
    assert report["achieved_ratio"] == pytest.approx(2.0, abs=1e-8)
    assert report["bound_violations"] == 0


def test_channel_robustness_command(tmp_path, capsys):
    from qrobust.channels import depolarizing_choi, identity_choi

    scenario = write_json(
        tmp_path / "sc.json",
        {
            "channel": operator_to_json(identity_choi(2).matrix, "choi", 2, 2, True),
            "free_set": {
                "subsets": [
                    {
                        "variant": "singleton",
                        "channel": operator_to_json(depolarizing_choi(2).matrix, "choi", 2, 2, True),
                        "label": "depolarizing",
                    }
                ]
            },
            "tol": 1e-7,
        },
    )
    code, out, _ = run(capsys, "channel-robustness", "--scenario", scenario, "--sweep")
    assert code == 0
    report = json.loads(out)
    assert report["union"]["value"] == pytest.approx(3.0, abs=1e-6)
    assert report["sweep"]["estimate"] == pytest.approx(3.0, abs=1e-3)


def test_instrument_robustness_command(tmp_path, capsys):
    from qrobust.channels import measurement_instrument

    z_inst = measurement_instrument(np.eye(2))
    noise = [np.eye(4).tolist()]

    def inst_json(inst):
        return {
            "d1": 2,
            "d2": 2,
            "elements": [
                {"re": np.real(e).tolist(), "im": np.imag(e).tolist()} for e in inst.elements
            ],
        }

    from qrobust.channels import Instrument

    white = Instrument(2, 2, [np.eye(4, dtype=complex) / 4, np.eye(4, dtype=complex) / 4])
    scenario = write_json(
        tmp_path / "sc.json",
        {
            "instrument": inst_json(z_inst),
            "free_set": {
                "subsets": [
                    {"variant": "hull", "generators": [inst_json(white), inst_json(z_inst)], "label": "noisy"}
                ]
            },
            "tol": 1e-7,
        },
    )
    code, out, _ = run(capsys, "instrument-robustness", "--scenario", scenario)
    assert code == 0
    report = json.loads(out)
    assert report["difference"] <= 5e-7
    assert report["direct"]["value"] == pytest.approx(0.0, abs=1e-6)


def test_determinism_byte_identical(tmp_path, capsys):
    scenario = write_json(tmp_path / "sc.json", {**DEMO_SCENARIO, "sample_budget": 16})
    outputs = []
    for _ in range(2):
        code, out, _ = run(capsys, "witness-verify", "--scenario", scenario)
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]


def test_csv_deterministic_and_header_only(tmp_path, capsys):
    scenario = write_json(tmp_path / "sc.json", DEMO_SCENARIO)
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        code, _, _ = run(capsys, "robustness", "--scenario", scenario, "--csv", str(p))
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    # empty report gives a header-only CSV
    empty = tmp_path / "empty.csv"
    emit_csv({"rows": []}, empty)
    assert empty.read_text().strip() == ""


def test_csv_unwritable_exit_74(tmp_path, capsys):
    scenario = write_json(tmp_path / "sc.json", DEMO_SCENARIO)
    code, _, err = run(capsys, "robustness", "--scenario", scenario, "--csv", str(tmp_path / "nodir" / "x.csv"))
    assert code == 74
    assert "CSV" in err


def test_witness_build_cap_exit_3(tmp_path, capsys):
    rng = np.random.default_rng(1)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    scenario = write_json(
        tmp_path / "sc.json",
        {
            "state": state_json(rho),
            "free_set": {"subsets": [{"variant": "singleton", "state": state_json(np.eye(4) / 4)}]},
            "s": 0.5,
        },
    )
    code, _, err = run(capsys, "witness-build", "--scenario", scenario, "--m", "4", "--builder", "monomial")
    assert code == 3
    assert "build_witness_exact" in err


def test_cli_is_thin_wrapper(tmp_path, capsys):
    # CLI numbers equal the library results exactly.
    from qrobust.freesets import qubit_axis_union
    from qrobust.measures import robustness_union

    scenario = write_json(tmp_path / "sc.json", DEMO_SCENARIO)
    code, out, _ = run(capsys, "robustness", "--scenario", scenario)
    assert code == 0
    report = json.loads(out)
    lib = robustness_union(bloch_state(0.3, 0.4, 0.5), qubit_axis_union("xyz"), tol=1e-7)
    assert report["union"]["value"] == lib.value


def test_witness_build_qubit_builder_guard(tmp_path, capsys):
    weight_scenario = dict(DEMO_SCENARIO)
    weight_scenario["mode"] = "weight"
    weight_scenario["s"] = 0.3
    scenario = write_json(tmp_path / "sc.json", weight_scenario)
    code, _, err = run(capsys, "witness-build", "--scenario", scenario, "--m", "2", "--builder", "qubit")
    assert code == 2
    assert "robustness" in err
