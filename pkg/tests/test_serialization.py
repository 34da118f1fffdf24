from __future__ import annotations

from fractions import Fraction

import pandas as pd

from ncleapfrog.algebra import Backend, RingValue
from ncleapfrog.leapfrog import Mode, random_state
from ncleapfrog.serialization import (
    SuiteReport,
    decode_ring,
    decode_scalar,
    decode_state,
    encode_ring,
    encode_scalar,
    state_record,
    to_jsonable,
    write_csv,
    write_json,
)
from tests.conftest import rational

# ---------------------------------------------------------
# Scalars and ring values
# ---------------------------------------------------------


def test_rationals_are_written_as_p_over_q():
    assert encode_scalar(Fraction(3, 4)) == "3/4"
    assert encode_scalar(Fraction(-6, 3)) == "-2"
    assert encode_scalar(7) == "7"
    assert decode_scalar("-3/4") == Fraction(-3, 4)


def test_floats_keep_full_precision():
    text = encode_scalar(0.1)
    assert text == "0.10000000000000001"
    assert decode_scalar(text, Backend.FLOAT) == 0.1


def test_ring_encoding():
    value = rational([[1, Fraction(1, 2)], [0, -3]])
    rows = encode_ring(value)
    assert rows == [["1", "1/2"], ["0", "-3"]]
    assert decode_ring(rows) == value


def test_nested_values_become_json_friendly():
    data = {(1, 2): Fraction(1, 2), "ring": RingValue.identity(1), "list": (0.5, 3)}
    assert to_jsonable(data) == {"1,2": "1/2", "ring": [["1"]], "list": ["0.5", 3]}


# ---------------------------------------------------------
# Records and files
# ---------------------------------------------------------


def test_state_record_restores_the_state():
    state = random_state(0, N=4, W=2)
    record = state_record(0, state)
    assert (record.lo, record.hi) == (-2, 6)
    assert decode_state(record, 4, Mode.WINDOWED, Backend.RATIONAL) == state


def test_periodic_state_record():
    state = random_state(1, N=3, mode=Mode.PERIODIC, d=2, backend=Backend.FLOAT)
    record = state_record(2, state)
    assert record.step == 2
    assert decode_state(record, 3, Mode.PERIODIC, Backend.FLOAT) == state


def test_json_is_written_with_unix_newlines(tmp_path):
    report = SuiteReport(command="simulate", seed=3, config={}, results=[], summary={"passed": 0})
    path = write_json(tmp_path / "nested" / "report.json", report)
    raw = path.read_bytes()
    assert raw.endswith(b"}\n")
    assert b"\r\n" not in raw
    assert SuiteReport.model_validate_json(raw) == report


def test_csv_is_written_with_unix_newlines(tmp_path):
    path = write_csv(tmp_path / "table.csv", pd.DataFrame([{"step": 0, "value": "1/2"}]))
    assert path.read_bytes() == b"step,value\n0,1/2\n"
