import math
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, Field, model_validator

from cascade_lab.settings import (
    DEFAULT_NU,
    DEFAULT_SIGMA,
    CascadeSettings,
    IntegratorSettings,
    ToySettings,
)

# Saddle neighbourhoods |b_j| > 1 - delta**nu are pairwise disjoint on the
# unit mass sphere exactly when delta**nu stays below this bound.
DISJOINT_LIMIT = 1.0 - 1.0 / math.sqrt(2.0)


class OrbitKind(str, Enum):
    PERIODIC = "periodic"
    HETEROCLINIC_PLUS = "heteroclinic_plus"
    HETEROCLINIC_MINUS = "heteroclinic_minus"


class ExactOrbit(BaseModel):
    kind: OrbitKind
    j: int = Field(..., ge=1, description="Generation index of the orbit")
    n: int = Field(..., ge=5, description="Number of modes of the toy model")
    phase: float = Field(0.0, description="Phase of the heteroclinic family")

    @model_validator(mode="before")
    @classmethod
    def validate_index(cls, data: Any) -> Any:
        if isinstance(data, dict) and {"kind", "j", "n"} <= data.keys():
            kind = OrbitKind(data["kind"])
            j, n = int(data["j"]), int(data["n"])
            top = n if kind is OrbitKind.PERIODIC else n - 1
            if not 1 <= j <= top:
                raise ValueError(
                    f"Orbit index j={j} out of range 1..{top} for {kind.value}"
                )
        return data


class ToyParams(BaseModel):
    N: int = Field(..., ge=5, description="Number of generations")
    delta: float = Field(..., gt=0, lt=1, description="Closeness parameter")
    sigma: float = Field(DEFAULT_SIGMA, gt=0, lt=1, description="Section offset")
    nu: float = Field(DEFAULT_NU, gt=0, description="Exponent of delta thresholds")

    @model_validator(mode="before")
    @classmethod
    def validate_ordering(cls, data: Any) -> Any:
        if isinstance(data, dict) and "delta" in data:
            delta = float(data["delta"])
            sigma = float(data.get("sigma", DEFAULT_SIGMA))
            if not delta < sigma:
                raise ValueError(f"Need delta < sigma, got {delta} >= {sigma}")
        return data

    @property
    def gamma(self) -> float:
        return -math.log(self.delta) / self.N

    @property
    def threshold(self) -> float:
        return self.delta**self.nu

    @classmethod
    def from_settings(cls, toy: ToySettings) -> "ToyParams":
        return cls(N=toy.n, delta=toy.delta, sigma=toy.sigma, nu=toy.nu)


class IntegratorConfig(BaseModel):
    rel_tol: float = Field(1e-11, gt=0, description="Relative tolerance")
    abs_tol: float = Field(1e-14, gt=0, description="Absolute tolerance")
    max_step: float = Field(1.0, gt=0, description="Largest accepted step")
    max_time: float = Field(200.0, gt=0, description="Longest integration span")
    event_tol: float = Field(1e-10, gt=0, description="Section hit tolerance")
    tangency_tol: float = Field(
        1e-12, ge=0, description="Smallest crossing speed accepted as transversal"
    )

    @classmethod
    def from_settings(cls, integrator: IntegratorSettings) -> "IntegratorConfig":
        return cls(**integrator.model_dump())


class CascadeParams(BaseModel):
    toy: ToyParams
    shoot_tolerance: float = Field(
        1e-9, gt=0, description="Largest accepted exit |p1|"
    )
    per_saddle_budget: float = Field(40.0, gt=0, description="Time per saddle")
    search_depth: int = Field(60, ge=1, description="Bisection iterations")
    retry: bool = True
    start_offset: Optional[float] = Field(
        None, gt=0, description="|b_2| at time 0, defaults to delta**nu / 2"
    )
    entry_p2: Optional[float] = Field(
        None, gt=0, description="p2 at the first saddle, defaults to delta"
    )

    @model_validator(mode="after")
    def validate_corridor(self) -> "CascadeParams":
        threshold = self.toy.threshold
        if not threshold < DISJOINT_LIMIT:
            raise ValueError(
                f"delta**nu = {threshold:.4g} must stay below {DISJOINT_LIMIT:.4f} "
                "for disjoint saddle neighbourhoods"
            )
        if not self.shoot_tolerance < threshold:
            raise ValueError(
                f"shoot_tolerance {self.shoot_tolerance} must be below "
                f"delta**nu = {threshold:.4g}"
            )
        if self.start_offset is not None and not self.start_offset < threshold:
            raise ValueError("start_offset must be below delta**nu")
        return self

    @property
    def offset(self) -> float:
        if self.start_offset is not None:
            return self.start_offset
        return 0.5 * self.toy.threshold

    @property
    def first_p2(self) -> float:
        return self.entry_p2 if self.entry_p2 is not None else self.toy.delta

    @classmethod
    def from_settings(
        cls, toy: ToySettings, cascade: CascadeSettings
    ) -> "CascadeParams":
        return cls(toy=ToyParams.from_settings(toy), **cascade.model_dump())


class LiftConfig(BaseModel):
    lam: float = Field(..., ge=1, description="Rescaling parameter lambda")
    gauge: Optional[float] = Field(
        None, description="Gauge constant G, derived from the data when omitted"
    )


class LambdaBuildParams(BaseModel):
    N: int = Field(..., ge=1, description="Number of generations")
    gen_size: int = Field(4, ge=2, description="Points per generation")
    radius: int = Field(10_000, ge=1, description="Bound on |n|")
    seed: int = 7
    max_attempts: int = Field(400, ge=1)
    spread: bool = Field(True, description="Prefer unequal children norms")
    growth_s: Optional[float] = Field(
        None, gt=1, description="Reject sets below the growth bound for this s"
    )

    @model_validator(mode="before")
    @classmethod
    def validate_gen_size(cls, data: Any) -> Any:
        if isinstance(data, dict) and "gen_size" in data:
            size = int(data["gen_size"])
            if size % 2:
                raise ValueError(f"gen_size must be even, got {size}")
            if int(data.get("N", 1)) >= 3 and size < 4:
                # a single family per generation forces spouse == sibling
                raise ValueError("gen_size must be at least 4 when N >= 3")
        return data
