"""
Run configuration: defaults, validation, text and JSON round trips,
output directories and initial-condition descriptors.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from src.config import (DEFAULT_OUTPUT_ROOT, OUTPUT_ENV, RunConfig, build_initial_condition, create_curvature_config,
                        create_jacobi_config, create_solve_config, create_vanish_config, create_verify_config,
                        load_config, parse_initial_condition, parse_text)
from src.grid import Grid
from src.metrics import Family


class TestRunConfig:

    def test_defaults(self):
        config = RunConfig("solve")
        assert config.family == "h0"
        assert config.n == 256
        assert config.eps == [0.2, 0.1, 0.05]
        assert config.out is None
        assert config.inertia().name == "h0"

    def test_text_round_trip(self):
        config = create_solve_config("ga", a=0.5, ic="random:0.3:4", A=0.25, sweep_a=[0.0, 0.5], out="somewhere")
        assert RunConfig.from_text(config.to_text()) == config

    def test_json_round_trip(self):
        config = create_vanish_config([0.3, 0.01], height=0.3, seed=9)
        assert RunConfig.from_json(config.to_json()) == config
        assert json.loads(config.to_json())["command"] == "vanish"

    def test_missing_command(self):
        with pytest.raises(ValueError, match="Missing required field: command"):
            RunConfig.from_dict({"n": 64})

    def test_invalid_json(self):
        with pytest.raises(ValueError, match="Invalid JSON"):
            RunConfig.from_json("{not json")
        with pytest.raises(ValueError):
            RunConfig.from_json("[1, 2]")

    @pytest.mark.parametrize("values,message", [
        ({"n": 7}, "Invalid value for n"),
        ({"n": "many"}, "Invalid value for n"),
        ({"dt": 0.0}, "Invalid value for dt"),
        ({"T": -1.0}, "Invalid value for T"),
        ({"eps": [0.5]}, "Invalid value for eps"),
        ({"case": "hyperbolic"}, "Invalid value for case"),
        ({"suite": "everything"}, "Invalid value for suite"),
        ({"bogus": 1}, "Unknown config field: bogus"),
        ({"central": "maybe"}, "Invalid value for central"),
        ({"ic": "wave:1:1"}, "Unknown initial condition"),
    ])
    def test_validation(self, values, message):
        with pytest.raises(ValueError, match=message):
            RunConfig("solve", **values)

    def test_unknown_command(self):
        with pytest.raises(ValueError):
            RunConfig("fly")

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            RunConfig("solve", family="h9")

    def test_inertia_selection(self):
        spec = create_jacobi_config("ga", A=0.5, central=True).inertia()
        assert spec.family == Family.GA
        assert spec.A == 0.5
        assert spec.central
        assert RunConfig("solve", family="h2").inertia().order == 2

    def test_family_parameter_is_folded_into_A(self):
        config = RunConfig("solve", family="ga:2")
        assert config.family == "ga"
        assert config.A == 2.0
        assert config.inertia().A == 2.0
        assert config.tag() == "ga2-a0-n256"
        assert RunConfig.from_text(config.to_text()) == config
        assert "A = 2.0" in config.to_text()

    def test_folded_family_takes_precedence_over_A(self):
        assert RunConfig("solve", family="ga:0.5", A=3.0).A == 0.5
        assert RunConfig("solve", family="ga:2").with_overrides({"A": 0.25}).inertia().A == 0.25

    def test_with_overrides(self):
        config = RunConfig("solve").with_overrides({"n": 64, "a": None, "central": "yes"})
        assert config.n == 64
        assert config.a == 0.0
        assert config.central is True

    def test_list_fields_parse_from_text(self):
        config = RunConfig("vanish", eps="0.2, 0.1", sweep_a="")
        assert config.eps == [0.2, 0.1]
        assert config.sweep_a == []


class TestOutputDirectory:

    def test_tags(self):
        assert create_solve_config().tag() == "h0-a0-n256"
        assert create_solve_config("ga", A=0.5, a=1.0, n=64).tag() == "ga0.5-a1-n64"
        assert create_curvature_config("random").tag() == "random"
        assert create_verify_config("jacobi", 3).tag() == "jacobi-seed3"

    def test_flag_wins_over_environment(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
        config = create_solve_config(out=str(tmp_path / "flag"))
        assert config.output_dir() == tmp_path / "flag" / "solve-h0-a0-n256"

    def test_environment_wins_over_default(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
        assert create_verify_config().output_dir() == tmp_path / "verify-algebra-seed0"

    def test_default_root(self, monkeypatch):
        monkeypatch.delenv(OUTPUT_ENV, raising=False)
        assert create_curvature_config().output_dir() == Path(DEFAULT_OUTPUT_ROOT) / "curvature-burgers-sincos"


class TestConfigFiles:

    def test_parse_text(self):
        data = parse_text("family = h1  # Camassa-Holm\n\n  n=64\n")
        assert data == {"family": "h1", "n": "64"}

    def test_parse_text_rejects_bare_words(self):
        with pytest.raises(ValueError, match="Line 2"):
            parse_text("n = 64\nfamily\n")

    def test_load_key_value_file(self, tmp_path):
        path = tmp_path / "run.txt"
        path.write_text("family = h1\ndt = 0.01\n", encoding="utf-8")
        config = RunConfig("solve", **load_config(str(path)))
        assert config.family == "h1"
        assert config.dt == 0.01

    def test_load_json_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"family": "ga", "A": 0.5}), encoding="utf-8")
        assert load_config(str(path)) == {"family": "ga", "A": 0.5}

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_config(str(tmp_path / "absent.txt"))


class TestInitialConditions:

    @pytest.mark.parametrize("descriptor,parsed", [
        ("zero", ["zero"]),
        ("sine:0.2:1", ["sine", 0.2, 1.0]),
        ("Cosine:0.5:3", ["cosine", 0.5, 3.0]),
        ("bump:1:0.5", ["bump", 1.0, 0.5]),
        ("random:0.3:4", ["random", 0.3, 4.0]),
    ])
    def test_parse(self, descriptor, parsed):
        assert parse_initial_condition(descriptor) == parsed

    @pytest.mark.parametrize("descriptor", ["sine:0.2", "sine:0.2:1.5", "bump:0.1:0", "sine:x:1", "zero:1",
                                            "random:1:0"])
    def test_parse_rejects(self, descriptor):
        with pytest.raises(ValueError):
            parse_initial_condition(descriptor)

    def test_build(self):
        grid = Grid(64)
        assert build_initial_condition("zero", grid).sup() == 0.0
        assert build_initial_condition("sine:0.2:1", grid).sup() == pytest.approx(0.2)
        cosine = build_initial_condition("cosine:0.5:3", grid)
        assert np.allclose(cosine.values, 0.5 * np.cos(3 * grid.nodes))

    def test_bump_is_centred(self):
        grid = Grid(64)
        bump = build_initial_condition("bump:0.7:1", grid)
        assert int(np.argmax(bump.values)) == grid.n // 2
        assert bump.sup() == pytest.approx(0.7)

    def test_random_is_seeded_and_scaled(self):
        grid = Grid(64)
        first = build_initial_condition("random:0.3:4", grid, seed=5)
        second = build_initial_condition("random:0.3:4", grid, seed=5)
        other = build_initial_condition("random:0.3:4", grid, seed=6)
        assert np.array_equal(first.values, second.values)
        assert not np.array_equal(first.values, other.values)
        assert first.sup() == pytest.approx(0.3)
