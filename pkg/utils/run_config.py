# Parameter bundles for every CLI subcommand.
#
# Each bundle can come from a JSON config file (--config), from flags, or both;
# flags win. merge_config() reads the file through ResilientBase's sanitiser,
# overlays the flags that were actually given, and validates the result, so
# every range check runs before any computation starts.

import os
from typing import Literal, Optional, Type, TypeVar

from pydantic import Field

import config
from bench.risk_bench import BenchPlan
from estimation.block_threshold import BlockNorm
from utils.errors import ValidationFailure
from utils.resilient_base import ResilientBase, load_document

T = TypeVar("T", bound=ResilientBase)


class FrameConfig(ResilientBase):
    B: float = Field(default=config.DEFAULT_B, gt=1)
    j_max: int = Field(default=4, ge=0)
    out: Optional[str] = Field(default=None, description="Write the level summary here as CSV")
    grid_out: Optional[str] = Field(default=None, description="Write the analysis grid (k, theta, phi, weight)")


class AnalyzeConfig(ResilientBase):
    B: float = Field(default=config.DEFAULT_B, gt=1)
    j_max: int = Field(ge=0)
    samples: str = Field(description="Map CSV (theta, phi, value) on the analysis grid")
    out: str = Field(description="Output pyramid path; .bin/.npyr selects the binary variant")


class SynthConfig(ResilientBase):
    input: str = Field(description="Pyramid file")
    out: str = Field(description="Output map CSV")
    targets: Optional[str] = Field(default=None, description="Map CSV whose theta/phi columns give the targets")


class DenoiseConfig(ResilientBase):
    input: str
    out: str
    n: float = Field(ge=1)
    kappa: float = Field(default=config.DEFAULT_KAPPA, ge=0)
    eta: float = Field(default=config.DEFAULT_ETA, gt=0, lt=1)
    p_stat: int = Field(default=config.DEFAULT_P_STAT, ge=1)
    block_norm: BlockNorm = Field(default=config.DEFAULT_BLOCK_NORM)
    diagnostics: Optional[str] = Field(default=None, description="Per-level kept-block CSV")


class BenchRunConfig(BenchPlan):
    csv: str = Field(default=os.path.join(config.REPORTS_DIR, "bench.csv"))
    report: str = Field(default=os.path.join(config.REPORTS_DIR, "bench.txt"))
    pdf: bool = False
    assert_rate: Optional[float] = Field(default=None, gt=0, description="Relative slope tolerance to enforce")
    threads: Optional[int] = Field(default=None, ge=1)

    def plan(self) -> BenchPlan:
        return BenchPlan(**self.model_dump(include=set(BenchPlan.model_fields)))


class RateConfig(ResilientBase):
    r: float = Field(gt=0)
    pi: float = Field(ge=1)
    q: float = Field(default=2.0, ge=1)
    p: float = Field(ge=1)
    boundary: Literal["printed", "continuous"] = "printed"


class CalibrateConfig(BenchPlan):
    gamma: float = Field(gt=0, lt=1, description="Target pure-noise exceedance frequency")
    calibration_replications: Optional[int] = Field(default=None, ge=1)
    threads: Optional[int] = Field(default=None, ge=1)

    def plan(self) -> BenchPlan:
        return BenchPlan(**self.model_dump(include=set(BenchPlan.model_fields)))


def _overlay(base: dict, flags: dict) -> dict:
    merged = dict(base)
    for key, value in flags.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _overlay(merged[key], value)
        elif isinstance(value, dict):
            merged[key] = {k: v for k, v in value.items() if v is not None}
        else:
            merged[key] = value
    return merged


def merge_config(model: Type[T], config_path: Optional[str], flags: dict) -> T:
    """File values first, then every flag that is not None. Raises ValidationError on bad values."""
    base: dict = {}
    if config_path:
        try:
            with open(config_path) as f:
                base = load_document(f.read())
        except FileNotFoundError:
            raise ValidationFailure(f"config file not found: {config_path}") from None
        except ValueError as e:
            raise ValidationFailure(f"{config_path}: {e}") from None
    merged = _overlay(base, flags)
    merged = {k: v for k, v in merged.items() if not (isinstance(v, dict) and not v)}
    return model.model_validate(merged)
