"""Centralized application configuration."""

import os
import tomllib
from pathlib import Path
from typing import Any, ClassVar

from mm_clikit import BaseDataDirConfig
from pydantic import BaseModel, Field, computed_field, field_validator

from mb_hybrid4x.time_utils import parse_duration

DEFAULT_BIND = "127.0.0.1"


def _duration_sec(raw: str) -> float:
    """Seconds in a positive duration string.

    Raises:
        ValueError: If the string does not parse or is not positive.

    """
    seconds = parse_duration(raw)
    if seconds is None or seconds <= 0:
        raise ValueError(f"Expected a positive duration such as '30s', got {raw!r}.")
    return seconds


class EpisodeSettings(BaseModel):
    """Decision-episode limits."""

    deadline: str = Field(default="30s", description="Wall-clock budget per episode (e.g. '30s', '1m', '500ms')")
    round_cap: int = Field(default=8, ge=1, description="Maximum strategist rounds per episode")
    corrective_rounds: int = Field(default=1, ge=0, description="Extra rounds granted after an invalid option")

    @field_validator("deadline")
    @classmethod
    def _check_deadline(cls, value: str) -> str:
        _duration_sec(value)
        return value

    @property
    def deadline_sec(self) -> float:
        """Deadline in seconds."""
        return _duration_sec(self.deadline)


class LlmSettings(BaseModel):
    """Chat-completions endpoint and cost model."""

    base_url: str = "http://localhost:8000/v1"
    model: str = "mock-model"
    api_key: str = ""
    timeout: str = "120s"
    input_price_per_mtok: float = Field(default=0.15, ge=0)
    output_price_per_mtok: float = Field(default=0.60, ge=0)
    prefill_tokens_per_sec: float = Field(default=2000.0, gt=0)
    generation_tokens_per_sec: float = Field(default=100.0, gt=0)

    @field_validator("timeout")
    @classmethod
    def _check_timeout(cls, value: str) -> str:
        _duration_sec(value)
        return value

    @property
    def timeout_sec(self) -> float:
        """Request timeout in seconds."""
        return _duration_sec(self.timeout)


class BridgeSettings(BaseModel):
    """Bind address and mode of the bridge servers."""

    host: str = DEFAULT_BIND
    port: int = Field(default=8765, ge=0, le=65535)
    test_mode: bool = False


class GameSettings(BaseModel):
    """Default game parameters for CLI runs."""

    map_width: int = 16
    map_height: int = 16
    player_count: int = 4
    max_turns: int = 200


class Config(BaseDataDirConfig):
    """Application-wide configuration."""

    app_name: ClassVar[str] = "mb-hybrid4x"

    game: GameSettings = Field(default_factory=GameSettings)
    episode: EpisodeSettings = Field(default_factory=EpisodeSettings)
    llm: LlmSettings = Field(default_factory=LlmSettings)
    bridge: BridgeSettings = Field(default_factory=BridgeSettings)

    @computed_field(description="Default directory for game records and transcripts")
    @property
    def records_dir(self) -> Path:
        """Default directory for game records and transcripts."""
        return self.data_dir / "records"

    @computed_field(description="Background batch worker PID file")
    @property
    def batch_worker_pid_path(self) -> Path:
        """Background batch worker PID file."""
        return self.data_dir / "batch_worker.pid"

    @computed_field(description="Rotating log file")
    @property
    def log_path(self) -> Path:
        """Rotating log file."""
        return self.data_dir / "hybrid4x.log"

    @computed_field(description="Optional TOML configuration file")
    @property
    def config_path(self) -> Path:
        """Optional TOML configuration file."""
        return self.data_dir / "config.toml"

    @staticmethod
    def build(data_dir: Path | None = None) -> Config:
        """Build a Config from CLI arg / env var / default, with optional TOML overlay and env overrides."""
        resolved = Config.resolve_data_dir(data_dir)

        kwargs: dict[str, Any] = {"data_dir": resolved}
        config_path = resolved / "config.toml"
        if config_path.is_file():
            with config_path.open("rb") as f:
                toml_data = tomllib.load(f)
            kwargs.update(_sections_from_toml(toml_data))

        llm = dict(kwargs.get("llm", {}))
        if api_key := os.environ.get("MB_HYBRID4X_LLM_API_KEY"):
            llm["api_key"] = api_key
        if base_url := os.environ.get("MB_HYBRID4X_LLM_BASE_URL"):
            llm["base_url"] = base_url
        kwargs["llm"] = llm

        bridge = dict(kwargs.get("bridge", {}))
        if bind := os.environ.get("MB_HYBRID4X_BIND"):
            bridge["host"] = bind
        kwargs["bridge"] = bridge

        return Config(**kwargs)


def _sections_from_toml(toml_data: dict[str, Any]) -> dict[str, Any]:
    """Pick known sections from the overlay, dropping values that fail validation."""
    result: dict[str, Any] = {}
    sections: dict[str, type[BaseModel]] = {
        "game": GameSettings,
        "episode": EpisodeSettings,
        "llm": LlmSettings,
        "bridge": BridgeSettings,
    }
    for name, model in sections.items():
        raw = toml_data.get(name, {})
        if not isinstance(raw, dict):
            continue
        accepted: dict[str, Any] = {}
        for key, val in raw.items():
            if key not in model.model_fields:
                continue
            try:
                model.model_validate({key: val})
            except ValueError:
                continue
            accepted[key] = val
        result[name] = accepted
    return result
