import json

import numpy as np
import pytest

import povmkit as pk
from povmkit import serialize as ser
from povmkit.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def coin_flip_file(tmp_path):
    path = tmp_path / "coin_flip.json"
    ser.save_povm(path, pk.coin_flip_povm())
    return str(path)


@pytest.fixture
def state_file(tmp_path):
    path = tmp_path / "state.json"
    ser.save_states(path, [("up", np.diag([1.0, 0.0]))])
    return str(path)


@pytest.fixture
def regions_file(tmp_path):
    path = tmp_path / "regions.json"
    payload = {
        "schema": 1,
        "regions": [
            {
                "id": "upper",
                "space": {"kind": "sphere"},
                "caps": [{"axis": [0.0, 0.0, 1.0], "angle": np.pi / 2}],
            }
        ],
    }
    path.write_text(json.dumps(payload))
    return str(path)


class TestValidate:
    def test_pass(self, capsys, coin_flip_file):
        code, out, _ = run_cli(capsys, "validate", coin_flip_file)
        assert code == 0
        assert json.loads(out)["passed"] is True

    def test_fail_non_psd(self, capsys, tmp_path):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        bad = pk.FinitePOVM(
            dim=2,
            space=pk.FiniteLabels(2),
            entries=((0, (np.eye(2) + 1.5 * x) / 2), (1, (np.eye(2) - 1.5 * x) / 2)),
        )
        path = tmp_path / "bad.json"
        ser.save_povm(path, bad)
        code, out, _ = run_cli(capsys, "validate", str(path))
        assert code == 1
        report = json.loads(out)
        assert report["passed"] is False
        assert min(report["psd_margins"]) < -1e-3

    def test_malformed_input(self, capsys, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text("{")
        code, out, err = run_cli(capsys, "validate", str(path))
        assert code == 2
        assert "error" in json.loads(err)

    def test_tolerance_override(self, capsys, coin_flip_file):
        code, _, _ = run_cli(
            capsys, "validate", coin_flip_file, "--tolerance", "psd=1e-6"
        )
        assert code == 0

    def test_unknown_tolerance_key(self, capsys, coin_flip_file):
        code, _, err = run_cli(
            capsys, "validate", coin_flip_file, "--tolerance", "nope=1"
        )
        assert code == 2


class TestExtremal:
    def test_coin_flip_verdict(self, capsys, coin_flip_file):
        code, out, _ = run_cli(capsys, "extremal", coin_flip_file)
        assert code == 0
        assert json.loads(out) == {"extremal": False, "kernel_dim": 4}

    def test_sic_verdict(self, capsys, tmp_path):
        path = tmp_path / "sic.json"
        ser.save_povm(path, pk.sic_tetrahedron_povm())
        code, out, _ = run_cli(capsys, "extremal", str(path))
        assert code == 0
        assert json.loads(out) == {"extremal": True, "kernel_dim": 0}


class TestDecompose:
    def test_coin_flip(self, capsys, coin_flip_file, tmp_path):
        out_path = tmp_path / "decomp.json"
        code, out, _ = run_cli(
            capsys, "decompose", coin_flip_file, "-o", str(out_path)
        )
        assert code == 0
        summary = json.loads(out)
        assert summary["terms"] == 2
        assert np.allclose(sorted(summary["weights"]), [0.5, 0.5])
        # round-trip: emitted file re-loads and every leaf validates
        data = json.loads(out_path.read_text())
        back = ser.decomposition_from_dict(data)
        for _, leaf in back.terms:
            assert pk.validate_povm(leaf).passed

    def test_output_overwrite_guard(self, capsys, coin_flip_file):
        code, _, err = run_cli(
            capsys, "decompose", coin_flip_file, "-o", coin_flip_file
        )
        assert code == 2
        assert "overwrite" in json.loads(err)["error"]

    def test_budget_exceeded_is_failed_check(self, capsys, tmp_path, rng):
        p = pk.random_povm(rng, 3, 10)
        path = tmp_path / "hard.json"
        ser.save_povm(path, p)
        code, _, err = run_cli(
            capsys, "decompose", str(path), "--max-terms", "8"
        )
        assert code == 1
        assert "check_failed" in json.loads(err)


class TestEquiv:
    def test_deterministic(self, capsys, state_file, regions_file):
        code, out, _ = run_cli(
            capsys,
            "equiv", "--family", "spin", "--states", state_file,
            "--regions", regions_file, "--mode", "det", "--tol", "1e-6",
        )
        assert code == 0
        report = json.loads(out)
        assert report["max_abs_diff"] <= 1e-6
        assert report["rows"][0]["state_id"] == "up"

    def test_montecarlo_needs_seed(self, capsys, state_file, regions_file):
        code, _, err = run_cli(
            capsys,
            "equiv", "--family", "spin", "--states", state_file,
            "--regions", regions_file, "--mode", "mc",
        )
        assert code == 2

    def test_montecarlo(self, capsys, state_file, regions_file):
        code, out, _ = run_cli(
            capsys,
            "equiv", "--family", "spin", "--states", state_file,
            "--regions", regions_file, "--mode", "mc",
            "--budget", "20000", "--seed", "3",
        )
        assert code == 0
        assert "se" in json.loads(out)["rows"][0]

    def test_phase_family(self, capsys, tmp_path):
        states = tmp_path / "s.json"
        ser.save_states(states, [("plus", np.full((2, 2), 0.5))])
        regions = tmp_path / "r.json"
        regions.write_text(json.dumps({
            "schema": 1,
            "regions": [{"space": {"kind": "circle"}, "arcs": [[0.0, np.pi]]}],
        }))
        code, out, _ = run_cli(
            capsys,
            "equiv", "--family", "phase:2", "--states", str(states),
            "--regions", str(regions), "--tol", "1e-9",
        )
        assert code == 0

    def test_bad_family(self, capsys, state_file, regions_file):
        code, _, _ = run_cli(
            capsys,
            "equiv", "--family", "banana", "--states", state_file,
            "--regions", regions_file,
        )
        assert code == 2


class TestSample:
    def test_direct_deterministic(self, capsys, state_file, tmp_path):
        out1 = tmp_path / "a.ndjson"
        out2 = tmp_path / "b.ndjson"
        for out in (out1, out2):
            code, _, _ = run_cli(
                capsys,
                "sample", "--family", "spin", "--direct", "--state", state_file,
                "-n", "500", "--seed", "7", "-o", str(out),
            )
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_scheme_records_roundtrip(self, capsys, state_file, tmp_path):
        out = tmp_path / "two_stage.ndjson"
        code, _, _ = run_cli(
            capsys,
            "sample", "--family", "spin", "--scheme", "--state", state_file,
            "-n", "200", "--seed", "9", "-o", str(out),
        )
        assert code == 0
        recs = ser.read_records(out)
        assert recs.i is not None and recs.x is not None
        assert len(recs) == 200


class TestGof:
    def test_same_law(self, capsys, state_file, tmp_path):
        a = tmp_path / "a.ndjson"
        b = tmp_path / "b.ndjson"
        for out, mode, seed in ((a, "--direct", "11"), (b, "--scheme", "12")):
            run_cli(
                capsys,
                "sample", "--family", "spin", mode, "--state", state_file,
                "-n", "20000", "--seed", seed, "-o", str(out),
            )
        code, out, _ = run_cli(
            capsys, "gof", "--a", str(a), "--b", str(b), "--bins", "sphere12",
            "--alpha", "0.001",
        )
        assert code == 0
        report = json.loads(out)
        assert report["dof"] == 11

    def test_alpha_rejection_exit_one(self, capsys, tmp_path, state_file):
        mixed = tmp_path / "mixed_state.json"
        ser.save_states(mixed, [("mm", np.eye(2) / 2)])
        a = tmp_path / "a.ndjson"
        b = tmp_path / "b.ndjson"
        run_cli(capsys, "sample", "--family", "spin", "--direct", "--state",
                state_file, "-n", "50000", "--seed", "1", "-o", str(a))
        run_cli(capsys, "sample", "--family", "spin", "--direct", "--state",
                str(mixed), "-n", "50000", "--seed", "2", "-o", str(b))
        code, out, _ = run_cli(
            capsys, "gof", "--a", str(a), "--b", str(b), "--bins", "sphere12",
            "--alpha", "0.001",
        )
        assert code == 1
        assert json.loads(out)["p_value"] < 1e-6


class TestMerit:
    def test_family_value(self, capsys, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"prior": "uniform_sphere", "gain": "fidelity"}))
        code, out, _ = run_cli(capsys, "merit", "--family", "spin", "--spec", str(spec))
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(2 / 3, abs=1e-9)

    def test_scheme_spread(self, capsys, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"prior": "uniform_circle", "gain": "cosine"}))
        code, out, _ = run_cli(
            capsys,
            "merit", "--family", "phase:2", "--spec", str(spec), "--scheme",
            "--samples", "4", "--seed", "5", "--tol", "1e-9",
        )
        assert code == 0
        assert json.loads(out)["spread"] <= 1e-9


class TestTomo:
    def test_finite_dual(self, capsys, tmp_path):
        sic = tmp_path / "sic.json"
        ser.save_povm(sic, pk.sic_tetrahedron_povm())
        target = tmp_path / "z.json"
        target.write_text(json.dumps({
            "schema": 1, "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
        }))
        code, out, _ = run_cli(
            capsys, "tomo", "--povm", str(sic), "--target", str(target)
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["residual"] <= 1e-10

    def test_spin_dual_with_records(self, capsys, tmp_path, state_file):
        records = tmp_path / "recs.ndjson"
        run_cli(
            capsys,
            "sample", "--family", "spin", "--direct", "--state", state_file,
            "-n", "20000", "--seed", "3", "-o", str(records),
        )
        target = tmp_path / "z.json"
        target.write_text(json.dumps({
            "schema": 1, "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
        }))
        code, out, _ = run_cli(
            capsys,
            "tomo", "--family", "spin", "--target", str(target),
            "--records", str(records), "--state", state_file,
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["estimate"]["exact"] == pytest.approx(1.0)
        est = payload["estimate"]
        assert abs(est["estimate"] - est["exact"]) <= 5 * est["std_error"]

    def test_incomplete_povm_is_failed_check(self, capsys, tmp_path):
        proj = tmp_path / "proj.json"
        ser.save_povm(proj, pk.projective_basis_povm(2))
        target = tmp_path / "x.json"
        target.write_text(json.dumps({
            "schema": 1, "matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]],
        }))
        code, _, err = run_cli(
            capsys, "tomo", "--povm", str(proj), "--target", str(target)
        )
        assert code == 1
        assert "check_failed" in json.loads(err)


def test_no_command_is_input_error(capsys):
    assert main([]) == 2


def test_missing_file(capsys):
    code, _, err = run_cli(capsys, "validate", "/nonexistent/povm.json")
    assert code == 2
