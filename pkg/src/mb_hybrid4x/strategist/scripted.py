"""Deterministic strategists: the builtin passthrough and turn-keyed scripts."""

import tomllib
from enum import StrEnum
from pathlib import Path
from typing import Any, Self

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from mb_hybrid4x.bridge.tool_server import ToolRequest
from mb_hybrid4x.codec.document import BUILTIN_RATIONALE, MarkdownDoc
from mb_hybrid4x.codec.tools import FINISHING_TOOLS, ToolName
from mb_hybrid4x.core.errors import InvalidConfigError
from mb_hybrid4x.strategist.models import EpisodeContext, RoundResult, StrategistReply
from mb_hybrid4x.strategy.models import GrandStrategy, MilitaryStrategy, OptionCatalog


class ScriptPreset(StrEnum):
    """Scripts shipped with the package."""

    ALWAYS_KEEP = "always-keep"
    FIXED_CONQUEST = "fixed-conquest"
    ROTATE_GRAND = "rotate-grand"


class ScriptStep(BaseModel):
    """One tool call, issued on every episode from `from_turn` until a later step takes over."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    from_turn: int = Field(default=0, ge=0)
    tool: ToolName
    arguments: dict[str, Any] = Field(default_factory=dict)


class Script(BaseModel):
    """A preset or a list of custom steps, never both."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    preset: ScriptPreset | None = None
    steps: tuple[ScriptStep, ...] = ()

    @model_validator(mode="after")
    def _check_source(self) -> Self:
        if (self.preset is None) == (not self.steps):
            raise ValueError("a script needs either a preset or steps")
        return self

    @property
    def name(self) -> str:
        """Preset name, or `custom`."""
        return str(self.preset) if self.preset is not None else "custom"

    @classmethod
    def load(cls, path: Path) -> Script:
        """Read a script from a TOML file with a `preset` key or `[[steps]]` tables.

        Raises:
            InvalidConfigError: If the file is missing or does not describe a valid script.

        """
        try:
            return cls.model_validate(tomllib.loads(path.read_text(encoding="utf-8")))
        except (OSError, tomllib.TOMLDecodeError, ValidationError) as e:
            raise InvalidConfigError(f"Invalid script {path}: {e}", field=str(path)) from e


def _keep(rationale: str) -> ToolRequest:
    return ToolRequest(name=ToolName.KEEP_STATUS_QUO, arguments={"Rationale": rationale})


def _preset_calls(preset: ScriptPreset, catalog: OptionCatalog, episode: int) -> list[ToolRequest]:
    match preset:
        case ScriptPreset.ALWAYS_KEEP:
            return [_keep("Scripted: keep the current strategy.")]
        case ScriptPreset.FIXED_CONQUEST:
            arguments = {
                "GrandStrategy": GrandStrategy.CONQUEST,
                "EconomicStrategies": list(catalog.active.economic),
                "MilitaryStrategies": [MilitaryStrategy.WAR_MOBILIZATION],
                "Rationale": "Scripted: pursue domination.",
            }
            return [ToolRequest(name=ToolName.SET_STRATEGY, arguments=arguments)]
        case ScriptPreset.ROTATE_GRAND:
            grand = catalog.grand[episode % len(catalog.grand)].id
            arguments = {
                "GrandStrategy": grand,
                "EconomicStrategies": list(catalog.active.economic),
                "MilitaryStrategies": list(catalog.active.military),
                "Rationale": f"Scripted: rotate to {grand}.",
            }
            return [ToolRequest(name=ToolName.SET_STRATEGY, arguments=arguments)]


def scripted_decide(doc: MarkdownDoc, catalog: OptionCatalog, script: Script, episode: int = 0) -> list[ToolRequest]:
    """Tool calls a script makes for one episode.

    Custom steps pick the last step whose `from_turn` is at or before the document turn. A step
    whose tool does not finish the episode is followed by keep-status-quo. Option values are not
    checked here; the tool server rejects unknown ones.
    """
    if script.preset is not None:
        return _preset_calls(script.preset, catalog, episode)
    current = [s for s in script.steps if s.from_turn <= doc.turn]
    if not current:
        return [_keep("Scripted: no step applies yet.")]
    step = max(current, key=lambda s: s.from_turn)
    calls = [ToolRequest(name=step.tool, arguments=step.arguments)]
    if step.tool not in FINISHING_TOOLS:
        calls.append(_keep(f"Scripted: {step.tool} only."))
    return calls


class ScriptedStrategist:
    """Plays a script. A round after a rejected call closes the episode with keep-status-quo."""

    def __init__(self, script: Script) -> None:
        """Play the given script, counting episodes from zero."""
        self.script = script
        self.name = f"scripted:{script.name}"
        self.episodes = 0

    async def decide(self, ctx: EpisodeContext, previous: list[RoundResult]) -> StrategistReply:
        """First round: the script's calls. Later rounds: finish if still open."""
        if not previous:
            calls = scripted_decide(ctx.doc, ctx.catalog, self.script, self.episodes)
            self.episodes += 1
            return StrategistReply(calls=calls, input_tokens=0, output_tokens=0)
        if ToolName.KEEP_STATUS_QUO in ctx.consumed:
            return StrategistReply(input_tokens=0, output_tokens=0)
        return StrategistReply(calls=[_keep("Scripted: fall back after a rejected call.")], input_tokens=0, output_tokens=0)


class BuiltinStrategist:
    """Baseline: leaves every decision to the in-game AI."""

    name = "builtin"

    async def decide(self, ctx: EpisodeContext, previous: list[RoundResult]) -> StrategistReply:  # noqa: ARG002
        """Always keep-status-quo."""
        return StrategistReply(calls=[_keep(BUILTIN_RATIONALE)], input_tokens=0, output_tokens=0)
