from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prototrack.annotations import (AnnotationSequence, load_sequence_dir, parse_boxes,
                                    parse_flags, parse_groundtruth, serialize_boxes)
from prototrack.errors import LengthMismatchError, ParseError
from prototrack.tensor import BBox


def test_single_box():
    ann = parse_groundtruth("10,20,30,40\n")
    assert ann.boxes == [BBox(10, 20, 30, 40)]


def test_malformed_line_number():
    with pytest.raises(ParseError) as err:
        parse_groundtruth("10,20,30\n")
    assert err.value.line == 1
    with pytest.raises(ParseError) as err:
        parse_groundtruth("1,2,3,4\n1,2,x,4\n")
    assert err.value.line == 2 and "line 2" in str(err.value)
    for bad in ("1,2,-3,4\n", "1,2,nan,4\n", "1,2,3,4\n\n1,2,3,4\n"):
        with pytest.raises(ParseError):
            parse_boxes(bad)


def test_flags_attach():
    ann = parse_groundtruth("1,1,2,2\n1,1,2,2\n1,1,2,2\n", full_occlusion="0,1,0\n")
    assert ann.full_occlusion == [False, True, False]
    assert ann.out_of_view is None
    with pytest.raises(LengthMismatchError):
        parse_groundtruth("1,1,2,2\n", out_of_view="0,1\n")
    with pytest.raises(ParseError):
        parse_flags("0,2")
    assert parse_flags("") == []


def test_trailing_blank_lines_and_reals():
    boxes = parse_boxes("1.5,2,3,4.25\r\n\n\n")
    assert boxes == [BBox(1.5, 2, 3, 4.25)]


real = st.floats(0, 1e4, allow_nan=False, allow_infinity=False)
ints = st.integers(0, 10000).map(float)


@given(st.lists(st.builds(BBox, real | ints, real | ints, real | ints, real | ints), max_size=20))
def test_round_trip(boxes):
    assert parse_boxes(serialize_boxes(boxes)) == boxes


def test_integral_values_written_as_ints():
    assert serialize_boxes([BBox(1.0, 2, 3.5, 0)]) == "1,2,3.5,0\n"


def test_sequence_dir(tmp_path):
    (tmp_path / "groundtruth.txt").write_text("1,1,2,2\n2,2,2,2\n")
    (tmp_path / "out_of_view.txt").write_text("0,1")
    (tmp_path / "attributes.txt").write_text("FOC, BC\n")
    np.save(tmp_path / "features.npy", np.zeros((2, 4, 4, 3)))
    feats, ann = load_sequence_dir(tmp_path)
    assert feats.shape == (2, 4, 4, 3)
    assert ann.out_of_view == [False, True] and ann.attributes == {"FOC", "BC"}
    np.save(tmp_path / "features.npy", np.zeros((3, 4, 4, 3)))
    with pytest.raises(LengthMismatchError):
        load_sequence_dir(tmp_path)
    with pytest.raises(FileNotFoundError):
        load_sequence_dir(tmp_path / "missing")


def test_annotation_invariant():
    with pytest.raises(LengthMismatchError):
        AnnotationSequence([BBox(0, 0, 1, 1)], full_occlusion=[True, False])
