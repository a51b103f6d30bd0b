from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from thickwalk.config import config
from thickwalk.exceptions import InvalidConfigError
from thickwalk.models.chain import ChainConfig, ChainStats

FULL_LENGTHS = [100 * k for k in range(1, 11)]
FULL_RADII = [round(0.1 * k, 1) for k in range(11)]
FULL_SAMPLES = 5000


class CampaignConfig(BaseModel):
    """A grid of (n, r) cells sampled by independent chains"""

    lengths: List[int] = Field(min_length=1)
    radii: List[float] = Field(min_length=1)
    samples_per_cell: int = Field(ge=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    chains_per_cell: int = Field(default=1, ge=1)
    move_mix: float = Field(default_factory=lambda: config.MOVE_MIX, ge=0.0, le=1.0)
    burn_in: Optional[int] = Field(default=None, ge=0)
    stride: Optional[int] = Field(default=None, ge=1)
    knot_closures: int = Field(default_factory=lambda: config.KNOT_CLOSURES, ge=1)
    knot_lengths: Optional[List[int]] = None
    output_dir: Path = Path("thickwalk-out")

    @field_validator("lengths", "knot_lengths")
    @classmethod
    def check_lengths(cls, value):
        if value is not None and any(n < 2 for n in value):
            raise ValueError("every length must be at least 2")
        return value

    @field_validator("radii")
    @classmethod
    def check_radii(cls, value):
        if any(not r >= 0 or r == float("inf") for r in value):
            raise ValueError("every radius must be finite and non-negative")
        return value

    @model_validator(mode="after")
    def check_grid(self):
        if self.samples_per_cell % self.chains_per_cell:
            raise ValueError("samples_per_cell must be divisible by chains_per_cell")
        if self.knot_lengths is not None and not set(self.knot_lengths) <= set(self.lengths):
            raise ValueError("knot_lengths must be a subset of lengths")
        return self

    @classmethod
    def full_grid(cls, **overrides) -> "CampaignConfig":
        """Lengths 100..1000 by 100, radii 0..1 by 0.1, 5000 samples per cell"""
        values = {"lengths": FULL_LENGTHS, "radii": FULL_RADII, "samples_per_cell": FULL_SAMPLES}
        values.update(overrides)
        return cls(**values)

    @property
    def samples_per_chain(self) -> int:
        return self.samples_per_cell // self.chains_per_cell

    def cells(self) -> List[Tuple[int, float]]:
        return [(n, r) for n in self.lengths for r in self.radii]

    def knotting_lengths(self) -> List[int]:
        return list(self.lengths if self.knot_lengths is None else self.knot_lengths)

    def chain_config(self, n: int, r: float, chain_index: int) -> ChainConfig:
        return ChainConfig(
            n=n,
            r=r,
            seed=self.seed,
            burn_in=self.burn_in,
            stride=self.stride,
            samples=self.samples_per_chain,
            move_mix=self.move_mix,
            chain_index=chain_index,
        )


def campaign_from_values(values: Dict[str, object]) -> CampaignConfig:
    """Validate raw values (campaign file plus flags) into a CampaignConfig"""
    try:
        return CampaignConfig(**values)
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(part) for part in error.get("loc", ())) or "campaign"
        raise InvalidConfigError(field, error.get("msg"))


class CellRecord(BaseModel):
    n: int
    r: float
    chains: int
    samples: int
    stats: ChainStats
    wall_clock_seconds: float = 0.0


class Manifest(BaseModel):
    """Reproducibility record of an output directory"""

    package: str = "thickwalk"
    version: str
    rng: str
    # None when the directory was not produced by generate
    config: Optional[CampaignConfig] = None
    commands: List[str] = []
    sphere_factor: float = Field(default_factory=lambda: config.SPHERE_FACTOR)
    wall_clock_seconds: float = 0.0
    cells: List[CellRecord] = []
    # relative path -> sha256 of the file content
    files: Dict[str, str] = {}
