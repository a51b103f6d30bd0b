from typing import Optional

from pydantic import BaseModel, Field, ValidationError, model_validator

from thickwalk.config import config
from thickwalk.exceptions import InvalidConfigError


class ChainConfig(BaseModel):
    """Parameters of one reflection chain"""

    n: int = Field(ge=2, description="edge count")
    r: float = Field(ge=0.0, allow_inf_nan=False, description="tube radius")
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    burn_in: Optional[int] = Field(default=None, ge=0, description="accepted moves before the first sample")
    stride: Optional[int] = Field(default=None, ge=1, description="accepted moves between samples")
    samples: int = Field(default=1, ge=1)
    move_mix: float = Field(default_factory=lambda: config.MOVE_MIX, ge=0.0, le=1.0)
    max_plane_retries: int = Field(default_factory=lambda: config.MAX_PLANE_RETRIES, ge=1)
    chain_index: int = Field(default=0, ge=0, description="stream index within a campaign cell")

    @model_validator(mode="after")
    def fill_schedule(self):
        # burn-in 10n and stride n unless given
        if self.burn_in is None:
            self.burn_in = 10 * self.n
        if self.stride is None:
            self.stride = self.n
        return self


class ChainStats(BaseModel):
    """Acceptance accounting of one chain"""

    proposed: int = 0
    accepted: int = 0
    exhausted: int = 0
    renormalizations: int = 0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else 0.0

    def record(self, accepted: bool) -> None:
        self.proposed += 1
        if accepted:
            self.accepted += 1

    def merge(self, other: "ChainStats") -> "ChainStats":
        return ChainStats(
            proposed=self.proposed + other.proposed,
            accepted=self.accepted + other.accepted,
            exhausted=self.exhausted + other.exhausted,
            renormalizations=self.renormalizations + other.renormalizations,
        )

    def summary(self) -> dict:
        return {**self.model_dump(), "acceptance_rate": self.acceptance_rate}


def chain_config_from_values(values: dict) -> ChainConfig:
    """Validate raw values into a ChainConfig, reporting the first problem as InvalidConfigError"""
    try:
        return ChainConfig(**values)
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(part) for part in error.get("loc", ())) or "chain"
        raise InvalidConfigError(field, error.get("msg"))
