"""
Configuration settings for the singularity classification toolkit.
"""

import os
from typing import Dict, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator

load_dotenv()

# Series / sampling configuration
DEFAULT_TRUNCATION_ORDER = int(os.getenv("SINGULARITY_TRUNCATION_ORDER", "32"))
DEFAULT_RADIUS = float(os.getenv("SINGULARITY_RADIUS", "0.25"))
DEFAULT_SAMPLES = int(os.getenv("SINGULARITY_SAMPLES", "512"))

# Continuation configuration
CONTINUATION_STEPS = int(os.getenv("SINGULARITY_CONTINUATION_STEPS", "256"))
MAX_CONTINUATION_STEPS = 1 << 14

# Finite differences
FD_STEP = float(os.getenv("SINGULARITY_FD_STEP", "1e-3"))
SCHWARZIAN_FD_RELATIVE_STEP = 1e-2

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# API Configuration
API_HOST = os.getenv("API_HOST", "0.0.0.0")
API_PORT = int(os.getenv("API_PORT", "8000"))

DEFAULT_TOLERANCES: Dict[str, float] = {
    "fit": 1e-8,
    "parabolic": 1e-9,
    "identity": 1e-9,
    "k_detect": 1e-10,
    "negative_coeff": 1e-8,
    "structure": 1e-8,
    "pullback": 1e-8,
    "theta": 1e-6,
    "roundtrip_theta": 1e-9,
    "xi": 1e-8,
    "curvature": 1e-3,
    "model_identity": 1e-10,
    "isometry": 1e-10,
    "series": 1e-11,
}


class RunConfig(BaseModel):
    """Parameters shared by the classify, verify and sample commands."""

    truncation_order: int = DEFAULT_TRUNCATION_ORDER
    radius: float = DEFAULT_RADIUS
    samples: int = DEFAULT_SAMPLES
    continuation_steps: int = CONTINUATION_STEPS
    tolerances: Dict[str, float] = Field(default_factory=dict)
    output_path: Optional[str] = None

    @field_validator("truncation_order")
    @classmethod
    def _check_order(cls, value: int) -> int:
        if value < 4:
            raise ValueError(f"truncation order must be >= 4, got {value}")
        return value

    @field_validator("radius")
    @classmethod
    def _check_radius(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError(f"radius must lie in (0, 1), got {value}")
        return value

    @field_validator("continuation_steps")
    @classmethod
    def _check_steps(cls, value: int) -> int:
        if value < 16:
            raise ValueError(f"continuation steps must be >= 16, got {value}")
        return value

    @field_validator("tolerances")
    @classmethod
    def _merge_tolerances(cls, value: Dict[str, float]) -> Dict[str, float]:
        unknown = set(value) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance names: {sorted(unknown)}")
        merged = dict(DEFAULT_TOLERANCES)
        merged.update({name: float(tol) for name, tol in value.items()})
        return merged

    @model_validator(mode="after")
    def _check_samples(self) -> "RunConfig":
        m = self.samples
        if m < 4 * self.truncation_order:
            raise ValueError(f"samples must be >= 4*N = {4 * self.truncation_order}, got {m}")
        if m & (m - 1):
            raise ValueError(f"samples must be a power of two, got {m}")
        if not self.tolerances:
            self.tolerances = dict(DEFAULT_TOLERANCES)
        return self

    def tol(self, name: str) -> float:
        """Tolerance by name, falling back to the module defaults."""
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])
