"""
Pyramid files.

Text variant:
    {"B": 2.0, "j_max": 3, "counts": [6, 28, 120, 496], "tag": "clean"}
    <N_0 coefficients, space separated, %.17g>
    ...
    <N_jmax coefficients>

Binary variant: the magic line b"NDLPYR1\\n", the same JSON header line, then
Σ N_j little-endian float64 values, level by level.

Headers go through ResilientBase, and a bad header raises PyramidFormatError
naming the offending field.
"""

from __future__ import annotations

import json
from typing import Literal

import numpy as np
from pydantic import Field, ValidationError, model_validator

from needlets.needlet_frame import CoefficientPyramid
from utils.errors import PyramidFormatError
from utils.file_io import atomic_write_bytes
from utils.resilient_base import ResilientBase

MAGIC = b"NDLPYR1\n"


class PyramidHeader(ResilientBase):
    B: float = Field(gt=1, description="Needlet bandwidth")
    j_max: int = Field(ge=0, description="Top level")
    counts: list[int] = Field(description="N_j for j = 0..j_max")
    tag: Literal["clean", "noisy", "thresholded"] = "clean"

    @model_validator(mode="after")
    def check_counts(self) -> "PyramidHeader":
        if len(self.counts) != self.j_max + 1:
            raise ValueError(f"counts has {len(self.counts)} entries, j_max={self.j_max} needs {self.j_max + 1}")
        if any(c < 1 for c in self.counts):
            raise ValueError("every level count must be positive")
        return self


def _field_of(err: ValidationError) -> str:
    first = err.errors()[0]
    loc = first.get("loc") or ()
    if loc:
        return str(loc[0])
    # model-level validator failures come back without a location
    return "counts" if "count" in first.get("msg", "") else "header"


def parse_header(line: str) -> PyramidHeader:
    try:
        return PyramidHeader.model_validate_json(line)
    except ValidationError as e:
        raise PyramidFormatError(e.errors()[0]["msg"], field=_field_of(e)) from None


def _header(pyr: CoefficientPyramid) -> str:
    return json.dumps({"B": pyr.B, "j_max": pyr.j_max, "counts": pyr.counts, "tag": pyr.tag})


def dumps_text(pyr: CoefficientPyramid) -> str:
    lines = [_header(pyr)]
    lines += [" ".join("%.17g" % v for v in level) for level in pyr.entries]
    return "\n".join(lines) + "\n"


def loads_text(text: str) -> CoefficientPyramid:
    lines = text.splitlines()
    if not lines:
        raise PyramidFormatError("empty pyramid file", field="header")
    head = parse_header(lines[0])
    body = lines[1:]
    if len(body) < head.j_max + 1:
        raise PyramidFormatError(f"{len(body)} level lines for j_max={head.j_max}", field="j_max")
    entries = []
    for j, count in enumerate(head.counts):
        try:
            level = np.array([float(x) for x in body[j].split()], dtype=float)
        except ValueError as e:
            raise PyramidFormatError(f"level {j}: {e}", field="counts") from None
        if len(level) != count:
            raise PyramidFormatError(f"level {j} has {len(level)} values, header says {count}", field="counts")
        entries.append(level)
    return CoefficientPyramid(entries=entries, B=head.B, tag=head.tag)


def dumps_binary(pyr: CoefficientPyramid) -> bytes:
    values = np.concatenate(pyr.entries).astype("<f8")
    return MAGIC + _header(pyr).encode() + b"\n" + values.tobytes()


def loads_binary(data: bytes) -> CoefficientPyramid:
    if not data.startswith(MAGIC):
        raise PyramidFormatError("missing binary magic", field="magic")
    rest = data[len(MAGIC):]
    end = rest.find(b"\n")
    if end < 0:
        raise PyramidFormatError("unterminated header line", field="header")
    head = parse_header(rest[:end].decode("utf-8", errors="replace"))
    payload = rest[end + 1:]
    total = sum(head.counts)
    if len(payload) != 8 * total:
        raise PyramidFormatError(f"{len(payload)} payload bytes, header needs {8 * total}", field="counts")
    values = np.frombuffer(payload, dtype="<f8").astype(float)
    bounds = np.cumsum(head.counts)[:-1]
    return CoefficientPyramid(entries=[a.copy() for a in np.split(values, bounds)], B=head.B, tag=head.tag)


def is_binary_path(path: str) -> bool:
    return path.endswith((".bin", ".npyr"))


def write_pyramid(path: str, pyr: CoefficientPyramid, binary: bool | None = None) -> str:
    binary = is_binary_path(path) if binary is None else binary
    data = dumps_binary(pyr) if binary else dumps_text(pyr).encode("utf-8")
    return atomic_write_bytes(path, data)


def read_pyramid(path: str) -> CoefficientPyramid:
    """Read either variant; the magic line decides which."""
    try:
        with open(path, "rb") as f:
            data = f.read()
    except FileNotFoundError:
        raise PyramidFormatError(f"no such file {path}", field="path") from None
    if data.startswith(MAGIC):
        return loads_binary(data)
    return loads_text(data.decode("utf-8"))
