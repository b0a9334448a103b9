import json

import jsonschema
import pytest

from stabsim.report import SCHEMA_ID, csv_text, dumps, envelope, validate_report


def test_envelope_fields():
    doc = envelope("theorem_check", 5, {"a": 1}, {"b": 2})
    assert doc["schema"] == SCHEMA_ID
    assert doc["master_seed"] == 5
    assert {"tool_version", "rng_family", "backend"} <= set(doc)
    validate_report(doc)


def test_schema_rejects_bad_documents():
    doc = envelope("theorem_check", 5, {}, {})
    with pytest.raises(jsonschema.ValidationError):
        validate_report({**doc, "schema": "other/2"})
    with pytest.raises(jsonschema.ValidationError):
        validate_report({**doc, "kind": "mystery"})
    with pytest.raises(jsonschema.ValidationError):
        validate_report(envelope("calibration", 1, {}, {"p_hat": 0.5}))


def test_dumps_is_canonical():
    a = dumps({"b": 1, "a": [1.5, 2]})
    assert a == dumps({"a": [1.5, 2], "b": 1})
    assert a.endswith("\n")
    assert json.loads(a) == {"a": [1.5, 2], "b": 1}


def test_csv_text_round_trips_floats():
    x = 0.1 + 0.2
    text = csv_text(["v", "k"], [(x, 3)])
    assert text == f"v,k\n{x!r},3\n"
    assert float(text.splitlines()[1].split(",")[0]) == x
