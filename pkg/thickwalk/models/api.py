from typing import List, Optional

from pydantic import BaseModel, Field

from thickwalk.config import config
from thickwalk.models.chain import ChainStats

# Largest walk accepted by the single-walk endpoints, in vertices
MAX_API_VERTICES = 2001
MAX_API_SAMPLES = 100
MAX_API_BURN_IN = 50_000
MAX_API_STRIDE = 5_000

Vertices = List[List[float]]


class HealthResponse(BaseModel):
    status: str
    version: str
    closures: List[str]


class ClosuresResponse(BaseModel):
    closures: List[str]


class SampleRequest(BaseModel):
    """Chain parameters; validated into a ChainConfig by the route"""

    n: int = Field(le=MAX_API_VERTICES - 1)
    r: float
    seed: int = 0
    samples: int = 1
    burn_in: Optional[int] = Field(default=None, le=MAX_API_BURN_IN)
    stride: Optional[int] = Field(default=None, le=MAX_API_STRIDE)
    move_mix: Optional[float] = None


class SampleResponse(BaseModel):
    n: int
    r: float
    walks: List[Vertices]
    stats: ChainStats
    acceptance_rate: float


class ThicknessRequest(BaseModel):
    vertices: Vertices = Field(min_length=3, max_length=MAX_API_VERTICES)
    r: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    witnesses: bool = Field(default=False, description="include every doubly-critical pair")


class Witness(BaseModel):
    segment: int
    parameter: float


class ThicknessResponse(BaseModel):
    # None when no doubly-critical pair exists
    dcsd: Optional[float]
    witness: Optional[List[Witness]] = None
    min_bend_angle: float
    theta_min: float
    accommodates_tube: bool
    critical_pairs: Optional[List[str]] = None


class SpectrumRequest(BaseModel):
    vertices: Vertices = Field(min_length=3, max_length=MAX_API_VERTICES)
    closures: int = Field(default_factory=lambda: config.KNOT_CLOSURES, ge=1, le=1000)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    closure: str = "sphere"
    reduce: bool = True


class SpectrumEntry(BaseModel):
    name: str
    determinant: int
    secondary: int
    count: int
    fraction: float


class DominanceResponse(BaseModel):
    level: str
    winner: str
    fraction: float
    knotted: bool


class SpectrumResponse(BaseModel):
    closure: str
    total: int
    spectrum: List[SpectrumEntry]
    dominance: DominanceResponse
    text: str
