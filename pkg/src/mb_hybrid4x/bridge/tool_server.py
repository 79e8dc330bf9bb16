"""Tool server: schema-validated strategist tools scoped to one decision episode."""

import logging
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from mb_hybrid4x.codec.tools import (
    FINISHING_TOOLS,
    SetPolicyArgs,
    SetResearchArgs,
    SetStrategyArgs,
    ToolArgs,
    ToolName,
    ToolSchema,
    parse_tool_call,
    persona_changes,
    tool_schemas,
)
from mb_hybrid4x.core.errors import EpisodeClosedError, GameError, ToolReusedError
from mb_hybrid4x.strategy.models import DecisionKind, OptionCatalog, OverrideState
from mb_hybrid4x.strategy.overrides import queue_override

logger = logging.getLogger(__name__)

FORCED_RATIONALE = "No decision was made in time; the in-game AI keeps the current strategy."


class ToolRequest(BaseModel):
    """A tool invocation as it arrives from a strategist."""

    model_config = ConfigDict(frozen=True)

    name: str
    arguments: dict[str, Any] = Field(default_factory=dict)
    call_id: str | None = None


class ToolError(BaseModel):
    """Structured failure of a tool call."""

    model_config = ConfigDict(frozen=True)

    code: str
    message: str
    field: str | None = None

    @classmethod
    def from_exception(cls, error: GameError) -> ToolError:
        """Copy code, message and field from a domain error."""
        return cls(code=error.code, message=error.message, field=error.field)


class ToolResponse(BaseModel):
    """Result of a tool call: `result` when ok, `error` otherwise."""

    model_config = ConfigDict(frozen=True)

    ok: bool
    tool: str
    result: dict[str, Any] | None = None
    error: ToolError | None = None


class EpisodeSession:
    """Tools available to one player during one decision episode.

    Accepted calls are staged on a private copy of the player's override state. Each tool can be
    used once; a finishing tool closes the session, after which every call fails with CLOSED.
    Rejected calls leave the staged state untouched and do not use up the tool.
    """

    def __init__(self, player: int, catalog: OptionCatalog, overrides: OverrideState) -> None:
        """Open a session over the catalog of this turn and the player's current overrides."""
        self.player = player
        self.catalog = catalog
        self.staged = overrides.model_copy(deep=True)
        self.consumed: list[ToolName] = []
        self.closed = False
        self.finished_by: ToolName | None = None

    def list_tools(self) -> list[ToolSchema]:
        """Descriptors of the tools still available; empty once closed."""
        if self.closed:
            return []
        return [s for s in tool_schemas() if s.name not in self.consumed]

    def call_tool(self, request: ToolRequest) -> ToolResponse:
        """Validate and apply one tool call. Never raises for bad input."""
        try:
            tool, args = self._check(request)
            self.staged = self._apply(tool, args)
        except GameError as e:
            logger.debug("Tool rejected player=%d tool=%s code=%s", self.player, request.name, e.code)
            return ToolResponse(ok=False, tool=request.name, error=ToolError.from_exception(e))

        self.consumed.append(tool)
        if tool in FINISHING_TOOLS:
            self.closed = True
            self.finished_by = tool
        return ToolResponse(ok=True, tool=tool, result={"applied": str(tool), "closed": self.closed})

    def force_close(self, rationale: str = FORCED_RATIONALE) -> None:
        """Close the episode with a keep-status-quo on the strategist's behalf."""
        if self.closed:
            return
        self.call_tool(ToolRequest(name=ToolName.KEEP_STATUS_QUO, arguments={"Rationale": rationale}))

    def _check(self, request: ToolRequest) -> tuple[ToolName, ToolArgs]:
        if self.closed:
            raise EpisodeClosedError("The decision episode is closed.", field=request.name)
        tool, args = parse_tool_call(request.name, request.arguments)
        if tool in self.consumed:
            raise ToolReusedError(f"Tool {tool} was already used in this episode.", field=str(tool))
        return tool, args

    def _apply(self, tool: ToolName, args: ToolArgs) -> OverrideState:
        staged, catalog, rationale = self.staged, self.catalog, args.rationale
        match tool:
            case ToolName.SET_PERSONA:
                return queue_override(DecisionKind.PERSONA, persona_changes(args), rationale, staged, catalog)
            case ToolName.SET_RESEARCH:
                assert isinstance(args, SetResearchArgs)  # noqa: S101
                return queue_override(DecisionKind.RESEARCH, args.technology, rationale, staged, catalog)
            case ToolName.SET_POLICY:
                assert isinstance(args, SetPolicyArgs)  # noqa: S101
                return queue_override(DecisionKind.POLICY, args.policy, rationale, staged, catalog)
            case ToolName.SET_STRATEGY:
                assert isinstance(args, SetStrategyArgs)  # noqa: S101
                choice = {
                    "grand": args.grand_strategy,
                    "economic": list(args.economic_strategies),
                    "military": list(args.military_strategies),
                }
                return queue_override(DecisionKind.STRATEGY, choice, rationale, staged, catalog)
            case ToolName.KEEP_STATUS_QUO:
                result = staged.model_copy(deep=True)
                result.rationales[DecisionKind.STRATEGY] = rationale
                return result
