import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest
from django.core.exceptions import ImproperlyConfigured
try:
    from pytest_django.fixtures import SettingsWrapper
except ImportError:  # pytest-django >= 4.11 renamed the class
    from pytest_django.fixtures import Settings as SettingsWrapper
from pytest_mock import MockerFixture

from gaussian_vacuum import get_serializer
from gaussian_vacuum.models import Branch, GapSolution, Stability
from gaussian_vacuum.serializers.csv import CSVSerializer
from gaussian_vacuum.serializers.json import JSONSerializer


@dataclasses.dataclass
class Pair:
    left: float
    right: Branch


class TestJSONSerializer:
    def test_invalid_indent_provided(self):
        with pytest.raises(
            ImproperlyConfigured, match="INDENT value must be an integer"
        ):
            JSONSerializer({"INDENT": "not-an-integer"})

    def test_negative_indent(self):
        with pytest.raises(ImproperlyConfigured, match="INDENT can't be negative"):
            JSONSerializer({"INDENT": -1})

    def test_indent_from_settings(self, settings: SettingsWrapper):
        settings.GAUSSIAN_VACUUM_JSON_INDENT = 4
        assert JSONSerializer()._indent == 4
        assert JSONSerializer({"INDENT": 1})._indent == 1

    def test_sorted_keys(self):
        serializer = JSONSerializer({"INDENT": 0})
        first = serializer.dumps({"b": 1, "a": {"d": 2, "c": 3}})
        second = serializer.dumps({"a": {"c": 3, "d": 2}, "b": 1})
        assert first == second
        assert first.endswith(b"\n")

    def test_report_values(self):
        serializer = JSONSerializer()
        solution = GapSolution(
            xi=math.sqrt(5.0),
            m_sq=4.0,
            branch=Branch.MEAN_FIELD,
            stability=Stability.STABLE,
        )
        data = serializer.loads(
            serializer.dumps(
                {
                    "solution": solution,
                    "pair": Pair(0.5, Branch.SYMMETRIC),
                    "array": np.arange(3),
                    "scalar": np.float64(1.5),
                    "exact": Fraction(1, 4),
                    "stability": Stability.SADDLE,
                }
            )
        )
        assert data["solution"]["branch"] == "mean_field"
        assert data["solution"]["stability"] == "stable"
        assert data["pair"] == {"left": 0.5, "right": "symmetric"}
        assert data["array"] == [0, 1, 2]
        assert data["scalar"] == 1.5
        assert data["exact"] == 0.25
        assert data["stability"] == "saddle"

    def test_unknown_type(self):
        with pytest.raises(TypeError):
            JSONSerializer().dumps({"value": object()})


class TestCSVSerializer:
    def test_table(self):
        serializer = CSVSerializer()
        data = serializer.dumps(
            {
                "columns": ["branch", "xi", "energy"],
                "rows": [[Branch.SYMMETRIC, 0.1, None]],
            }
        )
        assert data == b"branch,xi,energy\nsymmetric,0.1,\n"
        assert serializer.loads(data) == {
            "columns": ["branch", "xi", "energy"],
            "rows": [["symmetric", "0.1", ""]],
        }

    def test_floats_round_trip_exactly(self):
        value = 1.0 / 3.0
        serializer = CSVSerializer()
        data = serializer.dumps({"columns": ["x"], "rows": [[value]]})
        table = serializer.loads(data)
        assert float(table["rows"][0][0]) == value

    def test_object_with_table(self, mocker: MockerFixture):
        report = mocker.Mock()
        report.table.return_value = {"columns": ["a"], "rows": [[1]]}
        assert CSVSerializer().dumps(report) == b"a\n1\n"

    def test_not_a_table(self):
        with pytest.raises(ImproperlyConfigured, match="'columns' and 'rows'"):
            CSVSerializer().dumps({"solutions": []})

    def test_ragged_row(self):
        with pytest.raises(ValueError):
            CSVSerializer().dumps({"columns": ["a", "b"], "rows": [[1]]})


class TestGetSerializer:
    def test_defaults(self):
        assert isinstance(get_serializer(), JSONSerializer)
        assert isinstance(get_serializer("csv"), CSVSerializer)

    def test_options_are_passed(self):
        assert get_serializer("json", {"INDENT": 3})._indent == 3

    def test_unknown_format(self):
        with pytest.raises(ImproperlyConfigured, match="no serializer registered"):
            get_serializer("yaml")

    def test_registry_setting(self, settings: SettingsWrapper):
        settings.GAUSSIAN_VACUUM_SERIALIZERS = {
            "compact": "gaussian_vacuum.serializers.json.JSONSerializer",
        }
        assert isinstance(get_serializer("compact"), JSONSerializer)
        with pytest.raises(ImproperlyConfigured):
            get_serializer("json")
