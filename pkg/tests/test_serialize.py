"""Wire-format round trips for the versioned JSON schemas."""

import json

import numpy as np
import pytest

from xorlab import serialize
from xorlab.encodings import XorEncoding, canonical_bbbw_encoding


def test_complex_round_trip():
    z = 0.1234567890123456 - 2.5j
    assert serialize.complex_from_json(serialize.complex_to_json(z)) == z


def test_matrix_round_trip_full_precision():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    doc = json.loads(json.dumps(serialize.matrix_to_json(m)))
    np.testing.assert_array_equal(serialize.matrix_from_json(doc), m)


def test_state_round_trip():
    psi = np.array([1.0, 1.0j]) / np.sqrt(2.0)
    doc = json.loads(json.dumps(serialize.state_to_json(psi)))
    np.testing.assert_array_equal(serialize.state_from_json(doc), psi)


def test_schema_tag_enforced():
    doc = serialize.state_to_json(np.array([1.0, 0.0]))
    doc["schema"] = "xorlab/v0"
    with pytest.raises(ValueError, match="schema"):
        serialize.state_from_json(doc)


def test_povm_round_trip():
    povm = [np.eye(2) * 0.5, np.eye(2) * 0.5]
    doc = json.loads(json.dumps(serialize.povm_to_json(["0", "1"], povm)))
    outcomes, elements = serialize.povm_from_json(doc)
    assert outcomes == ["0", "1"]
    np.testing.assert_array_equal(elements[0], povm[0])


def test_encoding_round_trip():
    enc = canonical_bbbw_encoding()
    doc = json.loads(json.dumps(enc.to_json()))
    back = XorEncoding.from_json(doc)
    assert back.n == enc.n
    assert back.pairs() == enc.pairs()
    for key in enc.pairs():
        assert back.prior[key] == enc.prior[key]
        np.testing.assert_array_equal(back.states[key], enc.states[key])


def test_encoding_bitstring_labels():
    doc = canonical_bbbw_encoding().to_json()
    assert {e["x0"] for e in doc["entries"]} == {"0", "1"}
    assert doc["schema"] == "xorlab/v1"


def test_dump_writes_file(tmp_path):
    path = tmp_path / "state.json"
    serialize.dump(serialize.state_to_json(np.array([1.0, 0.0])), path)
    with open(path) as fh:
        doc = json.load(fh)
    np.testing.assert_array_equal(serialize.state_from_json(doc), [1.0, 0.0])
