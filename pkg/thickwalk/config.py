import os
from pathlib import Path
from typing import Dict, List, Optional

from thickwalk.exceptions import InvalidConfigError


class Config:
    """Configuration class for thickwalk"""

    # Compute Configuration
    THREADS: int = int(os.getenv("THICKWALK_THREADS", str(os.cpu_count() or 1)))

    # Sampler defaults
    MOVE_MIX: float = float(os.getenv("THICKWALK_MOVE_MIX", "0.5"))
    MAX_PLANE_RETRIES: int = int(os.getenv("THICKWALK_MAX_PLANE_RETRIES", "64"))
    RENORMALIZE_EVERY: int = int(os.getenv("THICKWALK_RENORMALIZE_EVERY", "1000000"))

    # Knot analysis defaults
    KNOT_CLOSURES: int = int(os.getenv("THICKWALK_KNOT_CLOSURES", "100"))
    SPHERE_FACTOR: float = float(os.getenv("THICKWALK_SPHERE_FACTOR", "3.0"))
    DIAGRAM_RETRIES: int = int(os.getenv("THICKWALK_DIAGRAM_RETRIES", "100"))

    # Closure schemes
    ENABLED_CLOSURES: List[str] = os.getenv(
        "ENABLED_CLOSURES",
        "direct,sphere"  # Default: all closures enabled
    ).split(",")

    # API Configuration
    API_KEY: Optional[str] = os.getenv("API_KEY")
    API_KEY_NAME: str = "x-api-key"

    # Server Configuration
    HOST: str = os.getenv("HOST", "0.0.0.0")
    PORT: int = int(os.getenv("PORT", "80"))
    WORKERS: int = int(os.getenv("WORKERS", "1"))
    TIMEOUT: int = int(os.getenv("TIMEOUT", "300"))

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "info")
    SENTRY_DSN: Optional[str] = os.getenv("SENTRY_DSN")
    ENVIRONMENT: str = os.getenv("ENVIRONMENT", "production")

    @classmethod
    def get_enabled_closures(cls) -> List[str]:
        """Get list of enabled closure schemes"""
        return [s.strip() for s in cls.ENABLED_CLOSURES if s.strip()]

    @classmethod
    def is_closure_enabled(cls, closure_name: str) -> bool:
        """Check if a specific closure scheme is enabled"""
        return closure_name in cls.get_enabled_closures()

    @classmethod
    def log_level(cls) -> str:
        return cls.LOG_LEVEL.upper()


config = Config()


# Keys accepted in a campaign file, mapped to CampaignConfig field names
CAMPAIGN_KEYS: Dict[str, str] = {
    "lengths": "lengths",
    "radii": "radii",
    "samples": "samples_per_cell",
    "samples_per_cell": "samples_per_cell",
    "seed": "seed",
    "chains": "chains_per_cell",
    "chains_per_cell": "chains_per_cell",
    "move_mix": "move_mix",
    "burn_in": "burn_in",
    "stride": "stride",
    "closures": "knot_closures",
    "knot_closures": "knot_closures",
    "knot_lengths": "knot_lengths",
    "out": "output_dir",
    "output_dir": "output_dir",
}

LIST_FIELDS = {"lengths", "radii", "knot_lengths"}


def parse_campaign_text(text: str, source: str = "<text>") -> Dict[str, object]:
    """
    Parse a flat ``key = value`` campaign description.

    Lines starting with ``#`` and blank lines are ignored; list fields take
    comma-separated values. Values stay strings here, CampaignConfig does the typing.
    """
    values: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"{source}:{lineno}", f"expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        field = CAMPAIGN_KEYS.get(key.lower())
        if field is None:
            raise InvalidConfigError(f"{source}:{lineno}", f"unknown key {key!r}")
        if field in LIST_FIELDS:
            values[field] = [item.strip() for item in value.split(",") if item.strip()]
        else:
            values[field] = value
    return values


def load_campaign_file(path: str) -> Dict[str, object]:
    """Read a campaign file from disk"""
    file_path = Path(path)
    try:
        text = file_path.read_text()
    except OSError as e:
        raise InvalidConfigError("config", f"cannot read {path}: {e}")
    return parse_campaign_text(text, source=str(file_path))
