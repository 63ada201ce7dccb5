import json

import pytest
from eqmirror.ainfty import algebra_from_json, check_ainfty
from eqmirror.cli import RunConfig, build_parser, main
from eqmirror.errors import InputError
from tests.helpers import write_json


def run(capsys, *argv):
    code = main(list(argv))
    (out, err) = capsys.readouterr()
    return (code, json.loads(out) if code == 0 and out else None, err)


@pytest.mark.cli
class TestMirrorCommand:
    def test_cp1(self, capsys):
        (code, report, _) = run(capsys, "mirror", "--geometry", "cp1", "--lambda", "T")
        assert code == 0
        assert report["geometry"] == "CP1"
        assert len(report["rows"]) == 2
        assert report["vieta"]["sum"] < 1e-8
        assert all(row["clifford"]["match"] for row in report["rows"])

    def test_plane_with_precision(self, capsys):
        argv = ["mirror", "--geometry", "c", "--lambda", "T^{1/2}", "--precision", "4"]
        (code, report, _) = run(capsys, *argv)
        assert code == 0
        assert report["precision"] == [4, 1]
        assert report["rows"][0]["u"] == [1, 2]

    def test_collapsed_lagrangians(self, capsys):
        (code, _, err) = run(capsys, "mirror", "--geometry", "cp1", "--lambda", "1")
        assert code == 2
        assert "Lagrangians collapse" in err

    def test_degenerate_needs_the_flag(self, capsys):
        argv = ["mirror", "--geometry", "cp1", "--lambda", "2iT^{1/2}"]
        (code, _, err) = run(capsys, *argv)
        assert code == 2
        (code, report, _) = run(capsys, *argv, "--degenerate")
        assert code == 0
        assert len(report["rows"][0]["ladder"]) == 7

    def test_emit_algebra(self, capsys, tmp_path):
        path = tmp_path / "model.json"
        argv = ["mirror", "--geometry", "cp1", "--lambda", "T", "--precision", "2"]
        (code, _, _) = run(capsys, *argv, "--emit-algebra", str(path))
        assert code == 0
        with open(path) as f:
            A = algebra_from_json(json.load(f))
        assert check_ainfty(A).passed

    def test_pretty_tables_go_to_stderr(self, capsys):
        argv = ["mirror", "--geometry", "c", "--lambda", "T", "--pretty"]
        (code, report, err) = run(capsys, *argv)
        assert code == 0
        assert report["geometry"] == "C"
        assert "Brane 0" in err

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        code = main(["mirror", "--geometry", "c", "--lambda", "T", "--output", str(path)])
        assert code == 0
        assert capsys.readouterr().out == ""
        with open(path) as f:
            assert json.load(f)["geometry"] == "C"


@pytest.mark.cli
class TestTropicalCommand:
    def test_preset(self, capsys):
        (code, report, _) = run(capsys, "tropical", "--fan", "P1", "--lambda-vec", "[T^{1/4}]")
        assert code == 0
        assert report["epsilon"] == [1, 2]
        assert sorted(row["point"] for row in report["points"]) == [[[1, 4]], [[3, 4]]]
        assert report["count"] == {"critical": 2, "lifted": 2, "cones": 2, "equal": True}

    def test_unbounded_threshold(self, capsys):
        (code, report, _) = run(capsys, "tropical", "--fan", "C2")
        assert code == 0
        assert report["epsilon"] is None
        assert report["count"]["critical"] == 1

    def test_fan_file(self, capsys, tmp_path):
        fan = {"n": 1, "rays": [[1], [-1]], "max_cones": [[0], [1]], "phi": [0, 3]}
        (code, report, _) = run(capsys, "tropical", "--fan", write_json(tmp_path / "f.json", fan))
        assert code == 0
        assert report["epsilon"] == [3, 2]

    def test_invalid_fan_file(self, capsys, tmp_path):
        fan = {"rays": [[1], [-1]], "max_cones": [[0], [1]], "phi": [0, 0]}
        (code, _, err) = run(capsys, "tropical", "--fan", write_json(tmp_path / "f.json", fan))
        assert code == 1
        assert "convexity" in err

    def test_lambda_outside_the_hypotheses(self, capsys):
        (code, _, err) = run(capsys, "tropical", "--fan", "P1", "--lambda-vec", "[T]")
        assert code == 2
        assert "eps_P" in err

    def test_equal_lambdas_on_p2(self, capsys):
        argv = ["tropical", "--fan", "P2", "--lambda-vec", "[T^{1/4},T^{1/4}]"]
        (code, _, err) = run(capsys, *argv)
        assert code == 2
        assert "σ = [1, 2]" in " ".join(err.split())

    def test_unknown_fan(self, capsys):
        (code, _, err) = run(capsys, "tropical", "--fan", "nowhere.json")
        assert code == 1
        assert "neither a preset" in err


@pytest.mark.cli
class TestMFCommand:
    def test_verify(self, capsys, tmp_path):
        obj = {"w": "x^2", "phi": [["x"]], "psi": [["x"]], "nvars": 1}
        path = write_json(tmp_path / "mf.json", obj)
        (code, report, _) = run(capsys, "mf", "verify", "--input", path)
        assert code == 0
        assert report == {"ok": True, "residual": 0.0}

    def test_stabilize(self, capsys, tmp_path):
        obj = {"variables": ["x", "y"], "f": ["x", "y"], "g": ["x", "y"]}
        path = write_json(tmp_path / "k.json", obj)
        (code, report, _) = run(capsys, "mf", "stabilize", "--input", path)
        assert code == 0
        assert report["ok"]
        assert report["factorization"]["nvars"] == 2

    def test_homdim(self, capsys, tmp_path):
        path = write_json(tmp_path / "w.json", {"variables": ["x"], "w": "x^2"})
        (code, report, _) = run(capsys, "mf", "homdim", "--input", path, "--jet-order", "5")
        assert code == 0
        assert report == {"even": 1, "odd": 1}

    def test_missing_field(self, capsys, tmp_path):
        path = write_json(tmp_path / "w.json", {"variables": ["x"]})
        (code, _, err) = run(capsys, "mf", "homdim", "--input", path)
        assert code == 1
        assert "missing field" in err

    def test_missing_file(self, capsys, tmp_path):
        (code, _, err) = run(capsys, "mf", "verify", "--input", str(tmp_path / "none.json"))
        assert code == 1
        assert "cannot read" in err

    def test_not_json(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        (code, _, err) = run(capsys, "mf", "verify", "--input", str(path))
        assert code == 1
        assert "is not JSON" in err


@pytest.mark.cli
class TestCheckCommand:
    def test_cartan_of_a_point(self, capsys, tmp_path):
        obj = {"labels": ["1"], "degrees": [0], "interior": [[[0]]], "truncation": 4}
        path = write_json(tmp_path / "point.json", obj)
        (code, report, _) = run(capsys, "check", "cartan", "--input", path)
        assert code == 0
        assert [report["cartan"][str(p)] for p in range(4)] == [1, 0, 1, 0]
        assert report["weil"] == report["cartan"]
        assert report["square"] == 0
        assert report["landsInCartan"]

    def test_ainfty_model(self, capsys, tmp_path):
        obj = {"model": {"geometry": "cp1", "lambda": "T", "cutoff": 2}}
        path = write_json(tmp_path / "model.json", obj)
        (code, report, _) = run(capsys, "check", "ainfty", "--input", path)
        assert code == 0
        assert report["passed"]
        assert [r["check"] for r in report["reports"]] == ["ainfty", "unitality"]

    def test_gdiff_model(self, capsys, tmp_path):
        path = write_json(tmp_path / "model.json", {"model": {"lambda": "T", "cutoff": 2}})
        (code, report, _) = run(capsys, "check", "gdiff", "--input", path)
        assert code == 0
        assert report["passed"]

    def test_gdiff_space(self, capsys, tmp_path):
        obj = {"labels": ["1", "e1"], "degrees": [0, 1], "interior": [[[0, 1], [0, 0]]]}
        path = write_json(tmp_path / "circle.json", obj)
        (code, report, _) = run(capsys, "check", "gdiff", "--input", path)
        assert code == 0
        assert report["passed"]

    def test_ainfty_needs_an_algebra(self, capsys, tmp_path):
        path = write_json(tmp_path / "empty.json", {})
        (code, _, err) = run(capsys, "check", "ainfty", "--input", path)
        assert code == 1
        assert "needs an algebra" in err

    def test_root_out_of_range(self, capsys, tmp_path):
        path = write_json(tmp_path / "model.json", {"model": {"lambda": "T", "root": 5}})
        (code, _, err) = run(capsys, "check", "ainfty", "--input", path)
        assert code == 1
        assert "out of range" in err


@pytest.mark.cli
class TestRunConfig:
    def test_parsed_options(self):
        args = build_parser().parse_args(["mirror", "--geometry", "cp1", "--lambda", "T"])
        config = RunConfig.from_args(args)
        assert config.command == "mirror"
        assert config.options["lam"] == "T"
        assert config.precision is None

    def test_subcommand_actions(self):
        args = build_parser().parse_args(["check", "cartan", "--input", "x.json"])
        config = RunConfig.from_args(args)
        assert config.command == "check cartan"
        assert config.inputs == ["x.json"]

    @pytest.mark.parametrize("kwargs", [{"precision": 0}, {"precision": "-1/2"}, {"jet_order": 0}])
    def test_bad_settings(self, kwargs):
        with pytest.raises(InputError):
            RunConfig("mirror", **kwargs)

    def test_bad_precision_exit_code(self, capsys):
        argv = ["mirror", "--geometry", "c", "--lambda", "T", "--precision", "0"]
        (code, _, err) = run(capsys, *argv)
        assert code == 1
        assert "precision must be positive" in err

    def test_unreadable_precision_exit_code(self, capsys):
        argv = ["mirror", "--geometry", "c", "--lambda", "T", "--precision", "abc"]
        (code, _, err) = run(capsys, *argv)
        assert code == 1
        assert "precision must be a rational number" in err
