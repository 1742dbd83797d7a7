"""
Pydantic models for the JSON specs consumed by the API and the CLI.
"""
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, RootModel, field_validator, model_validator

from src.core.devmap import DevelopingMapSpec, LogMap, LogSeriesMap, PowerMap, SeriesMap
from src.core.metrics import (
    Conical,
    ConformalMetric,
    Cusp,
    GridSampled,
    HyperbolicDisk,
    HyperbolicHalfPlane,
    Pullback,
    annulus_grid,
    rect_grid,
)
from src.core.mobius import CayleyDirection, Model, MobiusTransform
from src.core.series import TruncatedSeries
from src.utils.config import RunConfig

ComplexPair = Tuple[float, float]


def _complex(pair: ComplexPair) -> complex:
    return complex(pair[0], pair[1])


class MobiusModel(BaseModel):
    model: Literal["disk", "halfplane"]
    mat: List[ComplexPair] = Field(min_length=4, max_length=4)

    def to_transform(self) -> MobiusTransform:
        a, b, c, d = (_complex(p) for p in self.mat)
        return MobiusTransform(a, b, c, d, Model(self.model))


class _MapBase(BaseModel):
    chart: Optional[Literal["to_disk", "to_halfplane"]] = None
    post: Optional[MobiusModel] = None

    def _wrap(self, core) -> DevelopingMapSpec:
        chart = CayleyDirection(self.chart) if self.chart is not None else None
        post = self.post.to_transform() if self.post is not None else None
        return DevelopingMapSpec(core, chart=chart, post=post)


class PowerMapModel(_MapBase):
    kind: Literal["power"]
    alpha: float = Field(gt=0)

    def to_spec(self) -> DevelopingMapSpec:
        return self._wrap(PowerMap(self.alpha))


class LogMapModel(_MapBase):
    kind: Literal["log"]

    def to_spec(self) -> DevelopingMapSpec:
        return self._wrap(LogMap())


class SeriesMapModel(_MapBase):
    kind: Literal["series"]
    lead: float = 0.0
    coeffs: List[ComplexPair] = Field(min_length=1)
    order: Optional[int] = None

    def to_spec(self) -> DevelopingMapSpec:
        series = TruncatedSeries.from_coeffs([_complex(c) for c in self.coeffs], self.order, self.lead)
        return self._wrap(SeriesMap(series))


class LogSeriesMapModel(_MapBase):
    kind: Literal["logseries"]
    coeffs: List[ComplexPair] = Field(min_length=1)
    order: Optional[int] = None

    def to_spec(self) -> DevelopingMapSpec:
        series = TruncatedSeries.from_coeffs([_complex(c) for c in self.coeffs], self.order)
        return self._wrap(LogSeriesMap(series))


MapModel = Union[PowerMapModel, LogMapModel, SeriesMapModel, LogSeriesMapModel]


class MapSpec(RootModel):
    """{"kind": "power" | "log" | "series" | "logseries", ...}"""
    root: MapModel = Field(discriminator="kind")

    def to_spec(self) -> DevelopingMapSpec:
        return self.root.to_spec()


class DiskMetricModel(BaseModel):
    kind: Literal["disk"]

    def to_metric(self) -> ConformalMetric:
        return HyperbolicDisk()


class HalfPlaneMetricModel(BaseModel):
    kind: Literal["halfplane"]

    def to_metric(self) -> ConformalMetric:
        return HyperbolicHalfPlane()


class ConicalMetricModel(BaseModel):
    kind: Literal["conical"]
    theta: float = Field(gt=0)

    def to_metric(self) -> ConformalMetric:
        return Conical(self.theta)


class CuspMetricModel(BaseModel):
    kind: Literal["cusp"]

    def to_metric(self) -> ConformalMetric:
        return Cusp()


class PullbackMetricModel(BaseModel):
    kind: Literal["pullback"]
    map: MapSpec

    def to_metric(self) -> ConformalMetric:
        F = self.map.to_spec()
        base = HyperbolicDisk() if F.target_model is Model.DISK else HyperbolicHalfPlane()
        return Pullback(F, base)


class SampledMetricModel(BaseModel):
    """u = log(density)/2 tabulated on the rectangular grid x by y; u[i][j] sits at x[i] + i y[j]."""
    kind: Literal["sampled"]
    x: List[float] = Field(min_length=2)
    y: List[float] = Field(min_length=2)
    u: List[List[float]]
    singular: bool = True

    @model_validator(mode="after")
    def _check_grid(self) -> "SampledMetricModel":
        for name, axis in (("x", self.x), ("y", self.y)):
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise ValueError(f"grid axis {name} must be strictly increasing")
        if len(self.u) != len(self.x) or any(len(row) != len(self.y) for row in self.u):
            raise ValueError(f"u must have {len(self.x)} rows of {len(self.y)} samples")
        return self

    def to_metric(self) -> ConformalMetric:
        return GridSampled(self.x, self.y, np.array(self.u, dtype=float), singular=self.singular)


MetricModel = Union[DiskMetricModel, HalfPlaneMetricModel, ConicalMetricModel, CuspMetricModel,
                    PullbackMetricModel, SampledMetricModel]


class MetricSpec(RootModel):
    root: MetricModel = Field(discriminator="kind")

    def to_metric(self) -> ConformalMetric:
        return self.root.to_metric()


class GridSpec(BaseModel):
    """Annulus bounds are (r_min, r_max); rectangle bounds are (x0, x1, y0, y1)."""
    grid: Literal["annulus", "rect"] = "annulus"
    bounds: List[float] = Field(default_factory=lambda: [0.3, 0.7])
    shape: Tuple[int, int] = (20, 20)

    @field_validator("shape")
    @classmethod
    def _check_shape(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if min(value) < 1:
            raise ValueError(f"grid shape must be positive, got {value}")
        return value

    def points(self):
        if self.grid == "annulus":
            if len(self.bounds) != 2:
                raise ValueError("annulus bounds are r_min r_max")
            return annulus_grid(self.bounds[0], self.bounds[1], self.shape)
        if len(self.bounds) != 4:
            raise ValueError("rectangle bounds are x0 x1 y0 y1")
        x0, x1, y0, y1 = self.bounds
        return rect_grid((x0, x1), (y0, y1), self.shape)


class ConfigOverrides(BaseModel):
    truncation_order: Optional[int] = None
    radius: Optional[float] = None
    samples: Optional[int] = None
    tolerances: Dict[str, float] = Field(default_factory=dict)

    def to_config(self) -> RunConfig:
        return RunConfig(**self.model_dump(exclude_none=True))


class ClassifyRequest(BaseModel):
    map: MapSpec
    config: ConfigOverrides = Field(default_factory=ConfigOverrides)


class SampleRequest(BaseModel):
    metric: MetricSpec
    grid: GridSpec = Field(default_factory=GridSpec)
    step: Optional[float] = Field(default=None, gt=0)


class GridRow(BaseModel):
    re: float
    im: float
    u: float
    density: float
    curvature_residual: float


class SampleResponse(BaseModel):
    rows: List[GridRow]
