import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from bosefinetti.errors import MismatchError
from bosefinetti.io import (
    matrix_from_json_value,
    matrix_to_json_value,
    operator_from_dict,
    operator_to_dict,
    sym_operator_to_dict,
)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 4), elements=finite), arrays(np.float64, (4, 4), elements=finite))
def test_round_trip_is_bit_exact(re, im):
    a = re + 1j * im
    text = json.dumps(operator_to_dict(a, 2, 2))
    b = operator_from_dict(json.loads(text))
    assert np.array_equal(a.view(np.float64), b.view(np.float64))


def test_symmetric_round_trip(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    obj = sym_operator_to_dict(a, 2, 1)
    assert obj["basis"] == "occupation" and obj["dim"] == 3
    assert np.array_equal(operator_from_dict(json.loads(json.dumps(obj))), a)


def test_shape_checks():
    with pytest.raises(MismatchError):
        operator_to_dict(np.eye(3), 2, 2)
    with pytest.raises(MismatchError):
        sym_operator_to_dict(np.eye(4), 2, 1)
    with pytest.raises(MismatchError):
        operator_from_dict({"dim": 2, "factors": 1, "local_dim": 2, "entries": [[1, 0]]})


def test_matrix_json_values():
    assert np.array_equal(matrix_from_json_value([[1, 2], [3, 4]]), [[1, 2], [3, 4]])
    z = matrix_from_json_value({"re": [[1, 0], [0, 1]], "im": [[0, 1], [-1, 0]]})
    assert z[0, 1] == 1j
    assert matrix_to_json_value(z) == {"re": [[1, 0], [0, 1]], "im": [[0, 1], [-1, 0]]}
    assert matrix_to_json_value(np.eye(2, dtype=complex)) == [[1, 0], [0, 1]]
    with pytest.raises(MismatchError):
        matrix_from_json_value({"re": [[1]], "im": [[1, 2]]})
