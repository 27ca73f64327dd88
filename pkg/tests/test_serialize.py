import json
from fractions import Fraction

import numpy as np
import pytest

from ssalab import Partition, catalog_get, ssa_gap
from ssalab.serialize import canonical_json, fmt_float, ssa_report_dict, with_envelope

from conftest import random_spd


class TestFloatFormatting:
    def test_17_significant_digits(self):
        assert fmt_float(-5.0 / 9.0) == "-0.55555555555555558"

    def test_short_values_stay_short(self):
        assert fmt_float(0.5) == "0.5"
        assert fmt_float(2.0) == "2"

    def test_round_trip_exact(self):
        for x in (1 / 3, 1e-300, 6.02214076e23, -0.1, 9007199254740993.0):
            assert float(fmt_float(x)) == x

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            fmt_float(float("nan"))
        with pytest.raises(ValueError):
            fmt_float(float("inf"))


class TestCanonicalJson:
    def test_key_order_preserved(self):
        assert canonical_json({"b": 1, "a": 2}) == '{"b":1,"a":2}'

    def test_fraction_as_num_den_string(self):
        assert canonical_json({"gap": Fraction(-5, 9)}) == '{"gap":"-5/9"}'
        assert canonical_json(Fraction(33)) == '"33/1"'

    def test_nested_structures(self):
        doc = {"xs": [1, 2.5, None, True], "inner": {"f": 1e-9}}
        text = canonical_json(doc)
        assert json.loads(text) == {"xs": [1, 2.5, None, True], "inner": {"f": 1e-9}}

    def test_numpy_scalars_and_arrays(self):
        text = canonical_json({"v": np.float64(0.25), "n": np.int64(3),
                               "arr": np.array([1.0, 2.0])})
        assert json.loads(text) == {"v": 0.25, "n": 3, "arr": [1.0, 2.0]}

    def test_valid_json_for_report(self):
        a = random_spd(3, 4)
        rep = ssa_gap(catalog_get("kappa"), a, Partition(1, 2, 1))
        doc = ssa_report_dict(rep, "kappa", {}, 4, (1, 2, 1))
        parsed = json.loads(canonical_json(doc))
        assert parsed["traces"].keys() == {"A", "A22", "B", "C"}
        assert parsed["gap"] == rep.gap
        assert list(parsed) == ["function", "params", "dim", "partition", "form",
                                "gap", "traces", "holds", "equality", "tol",
                                "diagnostics"]

    def test_byte_stability(self):
        a = random_spd(8, 5)
        rep = ssa_gap(catalog_get("log"), a, Partition(2, 2, 1))
        doc = ssa_report_dict(rep, "log", {}, 5, (2, 2, 1))
        assert canonical_json(doc) == canonical_json(doc)


class TestEnvelope:
    def test_ci_suppresses_timestamp(self):
        assert "timestamp" not in with_envelope({"a": 1}, ci=True)

    def test_timestamp_first_when_present(self):
        out = with_envelope({"a": 1}, ci=False)
        assert list(out)[0] == "timestamp"
        assert out["a"] == 1
