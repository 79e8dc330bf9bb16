"""Published tool descriptors and argument models for strategist tool calls."""

import functools
import json
from collections.abc import Mapping
from enum import StrEnum
from importlib.resources import files
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, create_model
from pydantic.alias_generators import to_pascal

from mb_hybrid4x.core.errors import SchemaError, UnknownToolError
from mb_hybrid4x.strategy.models import Persona, PersonaValue


class ToolName(StrEnum):
    """The five strategist tools."""

    SET_PERSONA = "set-persona"
    SET_RESEARCH = "set-research"
    SET_POLICY = "set-policy"
    SET_STRATEGY = "set-strategy"
    KEEP_STATUS_QUO = "keep-status-quo"


FINISHING_TOOLS = frozenset({ToolName.SET_STRATEGY, ToolName.KEEP_STATUS_QUO})


class ToolSchema(BaseModel):
    """Machine-readable descriptor of one tool (JSON-schema parameters)."""

    model_config = ConfigDict(frozen=True)

    name: ToolName
    description: str
    finishing: bool
    parameters: dict[str, Any]


class _Descriptors(BaseModel):
    version: int
    tools: list[ToolSchema]


@functools.cache
def tool_schemas() -> tuple[ToolSchema, ...]:
    """Descriptors from `data/tools.json`, in publication order."""
    raw = json.loads(files("mb_hybrid4x.data").joinpath("tools.json").read_text(encoding="utf-8"))
    return tuple(_Descriptors.model_validate(raw).tools)


class ToolArgs(BaseModel):
    """Common shape of tool arguments: PascalCase keys, no extras, a non-empty rationale."""

    model_config = ConfigDict(alias_generator=to_pascal, populate_by_name=True, extra="forbid", frozen=True)

    rationale: str = Field(min_length=1)


SetPersonaArgs = create_model(
    "SetPersonaArgs",
    __base__=ToolArgs,
    **{name: (PersonaValue | None, None) for name in Persona.model_fields},  # type: ignore[call-overload]
)


class SetResearchArgs(ToolArgs):
    """Arguments of set-research."""

    technology: str


class SetPolicyArgs(ToolArgs):
    """Arguments of set-policy."""

    policy: str


class SetStrategyArgs(ToolArgs):
    """Arguments of set-strategy."""

    grand_strategy: str
    economic_strategies: list[str] = Field(default_factory=list)
    military_strategies: list[str] = Field(default_factory=list)


class KeepStatusQuoArgs(ToolArgs):
    """Arguments of keep-status-quo."""


TOOL_ARGS: dict[ToolName, type[ToolArgs]] = {
    ToolName.SET_PERSONA: SetPersonaArgs,
    ToolName.SET_RESEARCH: SetResearchArgs,
    ToolName.SET_POLICY: SetPolicyArgs,
    ToolName.SET_STRATEGY: SetStrategyArgs,
    ToolName.KEEP_STATUS_QUO: KeepStatusQuoArgs,
}


def persona_changes(args: ToolArgs) -> dict[str, int]:
    """PascalCase persona values present in set-persona arguments."""
    values = args.model_dump(by_alias=True, exclude={"rationale"}, exclude_none=True)
    return {k: int(v) for k, v in values.items()}


def parse_tool_call(name: str, arguments: Mapping[str, Any] | None) -> tuple[ToolName, ToolArgs]:
    """Check a tool name and validate its arguments against the schema.

    Raises:
        UnknownToolError: If the name is not a published tool.
        SchemaError: If the arguments do not match the tool's schema.

    """
    if name not in ToolName:
        raise UnknownToolError(f"Unknown tool: {name}.", field=name)
    tool = ToolName(name)
    if arguments is not None and not isinstance(arguments, Mapping):
        raise SchemaError(f"Arguments of {tool} must be an object.", field=str(tool))
    try:
        return tool, TOOL_ARGS[tool].model_validate(dict(arguments or {}))
    except ValidationError as e:
        error = e.errors()[0]
        where = ".".join(str(p) for p in error["loc"]) or str(tool)
        raise SchemaError(f"Invalid arguments for {tool}: {where}: {error['msg']}.", field=where) from e
