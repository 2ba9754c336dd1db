"""Instance file schema: parsing, validation, round trips."""

import json
from fractions import Fraction

import pytest

from cjde.cjalg import DeformationForm, build_theta
from cjde.instancefile import (
    InstanceDocument,
    InstanceFileError,
    load_instance,
    save_instance,
)


def roundtrip(tmp_path, doc):
    path = tmp_path / "inst.json"
    save_instance(str(path), doc)
    return load_instance(str(path))


def test_roundtrip_structural_equality(tmp_path, omni1):
    doc = InstanceDocument(
        omni1,
        {"e12": DeformationForm.from_dict(omni1, {(0, 1): {(1,): 1}})},
        {"eps1": {(0, 1): Fraction(1, 2)}},
    )
    again = roundtrip(tmp_path, doc)
    inst = again.instance
    assert inst.m == omni1.m and inst.n == omni1.n
    # structural equality through the structure section
    assert str(build_theta(inst)) == str(build_theta(omni1))
    assert set(again.deformations) == {"e12"}
    assert str(again.deformations["e12"].to_section()) == \
        str(doc.deformations["e12"].to_section())
    assert set(again.epsilons) == {"eps1"}


def test_save_is_deterministic(tmp_path, heis2):
    doc = InstanceDocument(heis2, {}, {})
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_instance(str(p1), doc)
    save_instance(str(p2), doc)
    assert p1.read_bytes() == p2.read_bytes()


def test_missing_file():
    with pytest.raises(InstanceFileError):
        load_instance("/nonexistent/file.json")


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(InstanceFileError):
        load_instance(str(path))


def test_wrong_schema(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"schema": 99, "base_dim": 0, "rank": 2}))
    with pytest.raises(InstanceFileError):
        load_instance(str(path))


def test_skewness_enforced(tmp_path):
    data = {
        "schema": 1, "base_dim": 0, "rank": 2,
        "bracket": [[["0", "1"], ["1", "0"]],   # not skew in (a,b)
                    [["0", "0"], ["0", "0"]]],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InstanceFileError, match="skew"):
        load_instance(str(path))


def test_antisymmetry_enforced(tmp_path):
    arr = [[["0"] * 3 for _ in range(3)] for _ in range(3)]
    arr[0][1][2] = "1"
    arr[1][0][2] = "1"  # should be -1
    data = {"schema": 1, "base_dim": 0, "rank": 3, "upsilon_dual": arr}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InstanceFileError, match="antisym"):
        load_instance(str(path))


def test_bad_rational(tmp_path):
    data = {"schema": 1, "base_dim": 0, "rank": 2, "rep": ["1/0", "0"]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InstanceFileError):
        load_instance(str(path))


def test_bad_exponent_vector(tmp_path):
    data = {"schema": 1, "base_dim": 1, "rank": 2, "rep": [{"0,0": "1"}, "0"]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InstanceFileError):
        load_instance(str(path))


def test_rationals_bit_exact(tmp_path, heis2):
    big = Fraction(10**40 + 1, 10**39)
    doc = InstanceDocument(
        heis2, {"e": DeformationForm.from_dict(heis2, {(0, 1): big})}, {})
    again = roundtrip(tmp_path, doc)
    entry = again.deformations["e"].entries[0][1]
    assert entry.coefficient(()) == big


def test_unknown_deformation_shape(tmp_path):
    data = {"schema": 1, "base_dim": 0, "rank": 2,
            "deformations": {"x": [["0", "1"]]}}  # wrong shape
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InstanceFileError):
        load_instance(str(path))
