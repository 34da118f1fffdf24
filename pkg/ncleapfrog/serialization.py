"""
Text encodings for reports: exact rationals as "p/q", floats with 17 significant digits, ring values
as nested lists, and pydantic records for stored trajectories and suite reports.
"""

from __future__ import annotations

from collections.abc import Mapping
from fractions import Fraction
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from ncleapfrog.algebra import Backend, RingValue
from ncleapfrog.leapfrog import LeapfrogState, Mode

Matrix = list[list[str]]


def encode_scalar(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def decode_scalar(text: str, backend: Backend | str = Backend.RATIONAL):
    backend = Backend(backend)
    if backend is Backend.FLOAT:
        return float(text)
    return Fraction(text)


def encode_ring(value: RingValue) -> Matrix:
    return [[encode_scalar(x) for x in row] for row in value.payload]


def decode_ring(rows: Matrix, backend: Backend | str = Backend.RATIONAL) -> RingValue:
    return RingValue.from_rows([[decode_scalar(x, backend) for x in row] for row in rows], backend)


def _key(k) -> str:
    return ",".join(map(str, k)) if isinstance(k, tuple) else str(k)


def to_jsonable(value):
    """Recursively encode numbers, ring values and mapping keys for JSON output."""
    if isinstance(value, RingValue):
        return encode_ring(value)
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, Fraction | float):
        return encode_scalar(value)
    if isinstance(value, Mapping):
        return {_key(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [to_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


class StateRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    step: int
    lo: int
    hi: int
    v_minus: list[Matrix]
    v: list[Matrix]


class TrajectoryRecord(BaseModel):
    backend: Backend
    d: int
    N: int
    mode: Mode
    seed: int
    states: list[StateRecord]


class SuiteReport(BaseModel):
    """Machine-readable result of one subcommand."""

    command: str
    seed: int
    config: dict
    results: list[dict]
    summary: dict
    details: dict = {}


def state_record(step: int, state: LeapfrogState) -> StateRecord:
    indices = state.v.indices()
    return StateRecord(
        step=step,
        lo=indices.start,
        hi=indices.stop,
        v_minus=[encode_ring(state.v_minus[i]) for i in indices],
        v=[encode_ring(state.v[i]) for i in indices],
    )


def decode_state(record: StateRecord, N: int, mode: Mode, backend: Backend) -> LeapfrogState:
    v_minus = [decode_ring(rows, backend) for rows in record.v_minus]
    v = [decode_ring(rows, backend) for rows in record.v]
    if mode is Mode.PERIODIC:
        return LeapfrogState.periodic(v_minus, v)
    return LeapfrogState.windowed(N, v_minus, v, record.lo)


def write_json(path: Path, record: BaseModel) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(record.model_dump_json(indent=2) + "\n", encoding="utf-8", newline="\n")
    return path


def write_csv(path: Path, frame: pd.DataFrame) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    return path
