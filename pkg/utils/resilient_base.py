"""
Shared Pydantic base class for hand-edited documents (config files, pyramid
headers).

People edit config files by hand and paste them around. The usual faults:

  1. Wrapped in markdown code fences  (```json ... ```)
  2. Preceded/followed by prose
  3. Whole-line comments  (# ... or // ...)
  4. Trailing commas before } or ]

_sanitize_json() fixes these before handing the string to Pydantic's JSON
parser, so field validators run normally and errors point at real fields.
"""

import re
import json
from pydantic import BaseModel, ConfigDict


def _sanitize_json(text: str) -> str:
    """Fix the most common hand-editing faults in a JSON document."""

    # 1. Unwrap markdown code fences if present
    fence = re.search(r'```(?:json)?\s*(.*?)```', text, re.DOTALL)
    if fence:
        text = fence.group(1).strip()

    # 2. Drop whole-line comments
    text = "\n".join(
        line for line in text.splitlines()
        if not line.lstrip().startswith(("#", "//"))
    )

    # 3. Extract the outermost { … } block, dropping surrounding prose
    brace = re.search(r'\{.*\}', text, re.DOTALL)
    if brace:
        text = brace.group()

    # 4. Remove trailing commas, only when the document is otherwise broken
    try:
        json.loads(text)
    except json.JSONDecodeError:
        text = re.sub(r',(\s*[\}\]])', r'\1', text)

    return text


class ResilientBase(BaseModel):
    """BaseModel subclass that sanitises hand-edited JSON before parsing."""

    model_config = ConfigDict(extra="forbid")

    @classmethod
    def model_validate_json(cls, json_data, *, strict=None, context=None, **kwargs):  # type: ignore[override]
        if isinstance(json_data, (bytes, bytearray)):
            json_data = json_data.decode()
        if isinstance(json_data, str):
            json_data = _sanitize_json(json_data)
        return super().model_validate_json(json_data, strict=strict, context=context, **kwargs)


def load_document(text: str) -> dict:
    """Parse a hand-edited JSON object into a dict after sanitising it."""
    data = json.loads(_sanitize_json(text))
    if not isinstance(data, dict):
        raise ValueError("config document must be a JSON object")
    return data
