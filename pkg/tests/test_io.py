"""Tests for file readers and writers."""

import json
import math

import pytest

from src.dynamics.potentials import OneSidedPotential, TwoSidedPotential
from src.dynamics.sft import TransitionStructure
from src.errors import InputError, NonPositiveRoof
from src.utils.io import (
    dumps,
    format_sft,
    parse_sft,
    read_potential,
    read_sft,
    read_suspension,
    suspension_from_dict,
    suspension_to_dict,
    write_csv,
    write_potential,
    write_sft,
)


def _roof_entries(values):
    return [{"word": [i], "value": v} for i, v in enumerate(values)]


class TestSftFormat:

    def test_parse(self):
        ts = parse_sft("2\n11\n10\n")
        assert ts == TransitionStructure.from_rows(["11", "10"])

    def test_format(self, golden):
        assert format_sft(golden) == "2\n11\n10\n"

    @pytest.mark.parametrize("text", ["", "x\n11\n10", "2\n11", "2\n111\n10", "2\n12\n10"])
    def test_malformed(self, text):
        with pytest.raises(InputError):
            parse_sft(text)

    def test_file_round_trip(self, tmp_path, golden):
        path = tmp_path / "g.sft"
        write_sft(path, golden)
        assert read_sft(path) == golden

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            read_sft(tmp_path / "absent.sft")


class TestPotentialFiles:

    def test_read_one_sided(self, tmp_path, golden):
        path = tmp_path / "phi.json"
        path.write_text(json.dumps({
            "kind": "one_sided",
            "depth_or_radius": 1,
            "entries": [{"word": [0], "value": 0.0}, {"word": [1], "value": 1.0}],
        }))
        psi = read_potential(path, golden)
        assert isinstance(psi, OneSidedPotential)
        assert psi.value((1,)) == 1.0

    def test_written_file_reads_back(self, tmp_path, full2):
        phi = TwoSidedPotential(full2, 0, {(0,): 0.5, (1,): -2.0})
        path = tmp_path / "phi.json"
        write_potential(path, phi)
        back = read_potential(path, full2)
        assert isinstance(back, TwoSidedPotential)
        assert back.value((1,)) == -2.0

    def test_duplicate_words(self, tmp_path, golden):
        path = tmp_path / "phi.json"
        path.write_text(json.dumps({
            "kind": "one_sided",
            "depth_or_radius": 1,
            "entries": [{"word": [0], "value": 0.0}, {"word": [0], "value": 1.0}],
        }))
        with pytest.raises(InputError):
            read_potential(path, golden)

    def test_unknown_kind(self, tmp_path, golden):
        path = tmp_path / "phi.json"
        path.write_text(json.dumps({"kind": "three_sided", "depth_or_radius": 1, "entries": []}))
        with pytest.raises(InputError):
            read_potential(path, golden)

    def test_malformed_json(self, tmp_path, golden):
        path = tmp_path / "phi.json"
        path.write_text("{not json")
        with pytest.raises(InputError):
            read_potential(path, golden)


class TestSuspensionFiles:

    def _data(self, roof_values):
        return {
            "sft": {"n": 2, "rows": ["11", "11"]},
            "roof": {"kind": "one_sided", "depth_or_radius": 1, "entries": _roof_entries(roof_values)},
        }

    def test_from_dict(self):
        spec = suspension_from_dict(self._data([1.0, 2.0]))
        assert spec.ts.n == 2
        assert spec.roof.value((1,)) == 2.0

    def test_non_positive_roof(self):
        with pytest.raises(NonPositiveRoof):
            suspension_from_dict(self._data([1.0, 0.0]))

    def test_row_count_mismatch(self):
        data = self._data([1.0, 2.0])
        data["sft"]["n"] = 3
        with pytest.raises(InputError):
            suspension_from_dict(data)

    def test_to_dict_reads_back(self, tmp_path):
        spec = suspension_from_dict(self._data([1.0, 2.5]))
        path = tmp_path / "s.json"
        path.write_text(dumps(suspension_to_dict(spec)))
        back = read_suspension(path)
        assert back.ts == spec.ts
        assert back.roof.allclose(spec.roof, 0.0)


class TestResultWriters:

    def test_dumps_sorts_keys_and_writes_nan(self):
        text = dumps({"b": math.nan, "a": [1.0, math.inf]})
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [1.0, "inf"], "b": "nan"}

    def test_dumps_is_stable(self):
        obj = {"x": 0.1, "y": {"z": (1, 2)}}
        assert dumps(obj) == dumps(dict(reversed(list(obj.items()))))

    def test_csv_uses_repr_for_floats(self, tmp_path):
        path = tmp_path / "out.csv"
        write_csv(path, ["eps", "M_hat", "itinerary"], [(0.1, 1 / 3, "LR"), (0.01, math.nan, None)])
        lines = path.read_text().splitlines()
        assert lines[0] == "eps,M_hat,itinerary"
        assert lines[1] == f"0.1,{1 / 3!r},LR"
        assert lines[2] == "0.01,nan,"
