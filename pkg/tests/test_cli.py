"""End-to-end tests of the command-line entry point."""

import json

import pytest

from src.cli import build_parser, main


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return path


@pytest.fixture
def golden_files(tmp_path):
    (tmp_path / "golden.sft").write_text("2\n11\n10\n")
    _write(tmp_path / "phi.json", {
        "kind": "one_sided",
        "depth_or_radius": 1,
        "entries": [{"word": [0], "value": 0.0}, {"word": [1], "value": 1.0}],
    })
    return tmp_path


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class TestParser:

    def test_pmax_flag(self):
        args = build_parser().parse_args(["lorenz", "--pmax", "8", "--seed", "3"])
        assert (args.command, args.p_max, args.seed) == ("lorenz", 8, 3)

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["frobnicate"])


# ---------------------------------------------------------------------------
# Symbolic commands
# ---------------------------------------------------------------------------

class TestMapOptimize:

    def test_golden_mean_indicator(self, golden_files, capsys):
        cfg = _write(golden_files / "cfg.json", {"sft": "golden.sft", "potential": "phi.json"})
        out = golden_files / "out"
        assert main(["map-optimize", "--config", str(cfg), "--out", str(out)]) == 0
        result = json.loads((out / "result.json").read_text())
        assert result["value"] == pytest.approx(0.5)
        assert result["certificate"]["word"] == [0, 1]
        assert json.loads(capsys.readouterr().out)["value"] == pytest.approx(0.5)

    def test_run_log_is_json(self, golden_files):
        cfg = _write(golden_files / "cfg.json", {"sft": "golden.sft", "potential": "phi.json", "seed": 5})
        assert main(["map-optimize", "--config", str(cfg), "--out", str(golden_files / "out")]) == 0
        records = [json.loads(line) for line in (golden_files / "ergopt.log").read_text().splitlines()]
        finish = [r for r in records if r.get("event_type") == "finish"]
        assert finish and finish[0]["command"] == "map-optimize" and finish[0]["seed"] == 5

    def test_missing_config(self, tmp_path, capsys):
        assert main(["map-optimize", "--config", str(tmp_path / "nope.json")]) == 1
        assert "error[INVALID_INPUT]" in capsys.readouterr().err

    def test_missing_field(self, golden_files, capsys):
        cfg = _write(golden_files / "cfg.json", {"sft": "golden.sft"})
        assert main(["map-optimize", "--config", str(cfg)]) == 1
        assert "potential" in capsys.readouterr().err


class TestFlowOptimize:

    def test_needs_roof(self, golden_files):
        cfg = _write(golden_files / "cfg.json", {"sft": "golden.sft", "potential": "phi.json"})
        assert main(["flow-optimize", "--config", str(cfg)]) == 1

    def test_writes_reduced_potential(self, golden_files):
        _write(golden_files / "roof.json", {
            "kind": "one_sided",
            "depth_or_radius": 1,
            "entries": [{"word": [0], "value": 1.0}, {"word": [1], "value": 3.0}],
        })
        cfg = _write(golden_files / "cfg.json",
                     {"sft": "golden.sft", "potential": "phi.json", "roof": "roof.json"})
        out = golden_files / "out"
        assert main(["flow-optimize", "--config", str(cfg), "--out", str(out)]) == 0
        result = json.loads((out / "result.json").read_text())
        # orbit (0 1): 1 / (1 + 3)
        assert result["value"] == pytest.approx(0.25)
        assert (out / "reduced_potential.json").exists()


class TestReduce:

    def test_two_sided_radius_one(self, golden_files):
        values = {"000": 0.5, "001": -1.0, "010": 2.0, "100": 0.25, "101": -0.75}
        _write(golden_files / "phi2.json", {
            "kind": "two_sided",
            "depth_or_radius": 1,
            "entries": [{"word": [int(c) for c in w], "value": v} for w, v in values.items()],
        })
        cfg = _write(golden_files / "cfg.json", {"sft": "golden.sft", "potential": "phi2.json"})
        out = golden_files / "out"
        assert main(["reduce", "--config", str(cfg), "--out", str(out)]) == 0
        verification = json.loads((out / "verification.json").read_text())
        assert verification["passed"] is True
        assert verification["max_delta"] <= 1e-12
        assert json.loads((out / "potential.json").read_text())["depth_or_radius"] == 3

    def test_rejects_one_sided(self, golden_files, capsys):
        cfg = _write(golden_files / "cfg.json", {"sft": "golden.sft", "potential": "phi.json"})
        assert main(["reduce", "--config", str(cfg), "--out", str(golden_files / "out")]) == 1
        assert "two-sided" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# Lorenz
# ---------------------------------------------------------------------------

class TestLorenz:

    def test_invalid_model_exits_3(self, tmp_path, capsys):
        cfg = _write(tmp_path / "cfg.json", {"gamma": 1.5})
        out = tmp_path / "out"
        assert main(["lorenz", "--config", str(cfg), "--out", str(out)]) == 3
        report = json.loads((out / "validation.json").read_text())
        assert report["passed"] is False
        assert "error[MODEL_INVALID]" in capsys.readouterr().err

    def test_outputs(self, tmp_path):
        out = tmp_path / "out"
        assert main(["lorenz", "--pmax", "6", "--out", str(out)]) == 0
        for name in ("validation.json", "orbits.csv", "shapes.json", "dirac.json", "plot_spec.json",
                     "curve_constant.csv", "curve_log_singular.csv"):
            assert (out / name).exists(), name
        dirac = json.loads((out / "dirac.json").read_text())
        assert dirac["bound_ok"] is True
        shapes = json.loads((out / "shapes.json").read_text())
        assert shapes["observables"]["constant"]["shape"] == "plateau"


# ---------------------------------------------------------------------------
# Selftest
# ---------------------------------------------------------------------------

class TestSelftest:

    def test_rerun_is_byte_identical(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ERGOPT_LORENZ_P_LIMIT", "10")
        codes, texts = [], []
        for run in ("a", "b"):
            out = tmp_path / run
            cfg = _write(tmp_path / f"{run}.json", {"scale": 0.02, "seed": 7})
            codes.append(main(["selftest", "--config", str(cfg), "--pmax", "6", "--out", str(out)]))
            texts.append((out / "selftest.json").read_text())
        assert codes[0] == codes[1]
        assert texts[0] == texts[1]
        report = json.loads(texts[0])
        names = {c["name"]: c for c in report["criteria"]}
        assert names["deterministic_rerun"]["passed"] is True
        assert report["seed"] == 7

    def test_lorenz_criteria_decide_exit_code(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ERGOPT_LORENZ_P_LIMIT", "10")
        cfg = _write(tmp_path / "cfg.json", {"scale": 0.02, "seed": 3})
        out = tmp_path / "out"
        # up to period 6 the period-two orbit keeps the largest exponent
        assert main(["selftest", "--config", str(cfg), "--pmax", "6", "--out", str(out)]) == 2
        report = json.loads((out / "selftest.json").read_text())
        names = {c["name"]: c for c in report["criteria"]}
        assert names["lyapunov_growth"]["passed"] is False
        assert names["dirac_bound"]["passed"] is True
        assert names["dirac_family"]["passed"] is True
        assert report["passed"] is False
        assert all(set(c) == {"name", "passed", "detail"} for c in report["criteria"])
