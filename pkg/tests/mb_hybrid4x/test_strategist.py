"""Tests for strategists and the decision-episode driver."""

import asyncio
import random
from collections import Counter
from pathlib import Path

import httpx
import pytest
from pydantic import ValidationError

from mb_hybrid4x.bridge.host import GameHost
from mb_hybrid4x.bridge.tool_server import EpisodeSession, ToolRequest
from mb_hybrid4x.codec.tokens import DEFAULT_ESTIMATOR
from mb_hybrid4x.codec.tools import FINISHING_TOOLS, ToolName
from mb_hybrid4x.config import EpisodeSettings, LlmSettings
from mb_hybrid4x.core.errors import InvalidConfigError, TransportError
from mb_hybrid4x.engine.game import new_game
from mb_hybrid4x.engine.models import GameConfig
from mb_hybrid4x.strategist.episode import episode_context, run_decision_episode
from mb_hybrid4x.strategist.llm import LlmClient, LlmStrategist, parse_completion
from mb_hybrid4x.strategist.mock import MockChatEndpoint, function_call_reply, load_transcript, tool_call_reply
from mb_hybrid4x.strategist.models import DecisionRecord, EpisodeContext, EpisodeOutcome, RoundResult, StrategistReply
from mb_hybrid4x.strategist.scripted import BuiltinStrategist, Script, ScriptedStrategist, ScriptPreset, ScriptStep
from mb_hybrid4x.strategy.models import DecisionKind, GrandStrategy, OptionCatalog, OverrideState


@pytest.fixture
def host() -> GameHost:
    return GameHost(new_game(GameConfig(seed=41)))


class _Silent:
    """Answers every round with no calls at all."""

    name = "silent"

    async def decide(self, ctx: EpisodeContext, previous: list[RoundResult]) -> StrategistReply:  # noqa: ARG002
        return StrategistReply(input_tokens=10, output_tokens=1)


class _Slow:
    name = "slow"

    async def decide(self, ctx: EpisodeContext, previous: list[RoundResult]) -> StrategistReply:  # noqa: ARG002
        await asyncio.sleep(5)
        return StrategistReply()


class _Broken:
    name = "broken"

    async def decide(self, ctx: EpisodeContext, previous: list[RoundResult]) -> StrategistReply:  # noqa: ARG002
        raise TransportError("connection refused")


class _Stubborn:
    """Keeps asking for a policy that does not exist, without reporting usage."""

    name = "stubborn"

    async def decide(self, ctx: EpisodeContext, previous: list[RoundResult]) -> StrategistReply:  # noqa: ARG002
        return StrategistReply(calls=[ToolRequest(name="set-policy", arguments={"Policy": "anarchy", "Rationale": "x"})])


def _run(host: GameHost, strategist: object, **settings: object) -> DecisionRecord:
    ctx = episode_context(host, 0, EpisodeSettings(**settings))
    return asyncio.run(run_decision_episode(ctx, strategist))  # type: ignore[arg-type]


class TestDecisionEpisode:
    """Tests for run_decision_episode."""

    def test_builtin_completes(self, host: GameHost):
        """The builtin strategist finishes in one round with keep-status-quo."""
        record = _run(host, BuiltinStrategist())
        assert record.outcome == EpisodeOutcome.COMPLETED
        assert record.rounds == 1
        assert [c.name for c in record.calls] == [ToolName.KEEP_STATUS_QUO]
        assert record.token_method == "usage"
        assert record.episode_id == "p0-t0"

    def test_scripted_conquest_commits(self, host: GameHost):
        """A completed set-strategy reaches the player's seat."""
        record = _run(host, ScriptedStrategist(Script(preset=ScriptPreset.FIXED_CONQUEST)))
        assert record.outcome == EpisodeOutcome.COMPLETED
        strategy = host.seats[0].overrides.strategy
        assert strategy is not None
        assert strategy.grand == GrandStrategy.CONQUEST
        assert DecisionKind.STRATEGY in record.rationales

    def test_round_cap_forces_close(self, host: GameHost):
        """A strategist that never finishes is closed with a synthetic keep-status-quo."""
        record = _run(host, _Silent(), round_cap=2)
        assert record.outcome == EpisodeOutcome.FORCED_CLOSE
        assert record.rounds == 2
        assert record.calls[-1].name == ToolName.KEEP_STATUS_QUO
        assert host.episodes[0].closed
        assert not record.is_gap

    def test_deadline_is_a_gap(self, host: GameHost):
        """A call pending at the deadline leaves a timeout gap and discards the episode."""
        record = _run(host, _Slow(), deadline="50ms")
        assert record.outcome == EpisodeOutcome.TIMEOUT_GAP
        assert record.is_gap
        assert 0 not in host.episodes
        assert record.rationales == {}

    def test_transport_error_is_a_gap(self, host: GameHost):
        """Transport failures end the episode as an error gap."""
        record = _run(host, _Broken())
        assert record.outcome == EpisodeOutcome.ERROR_GAP
        assert record.rounds == 0

    def test_corrective_round_then_forced(self, host: GameHost):
        """An invalid option earns one corrective round; repeating it forces a close."""
        record = _run(host, _Stubborn(), corrective_rounds=1)
        assert record.outcome == EpisodeOutcome.FORCED_CLOSE
        assert record.rounds == 2
        assert [c.error_code for c in record.calls[:2]] == ["INVALID_OPTION", "INVALID_OPTION"]

    def test_missing_usage_is_estimated(self, host: GameHost):
        """Without usage numbers the driver estimates tokens from the text sent."""
        record = _run(host, _Stubborn(), corrective_rounds=0)
        assert record.token_method == DEFAULT_ESTIMATOR
        assert record.input_tokens > 0
        assert record.output_tokens > 0

    def test_completed_needs_one_finishing_tool(self):
        """A completed record without a finishing call is invalid."""
        with pytest.raises(ValidationError, match="exactly one finishing tool"):
            DecisionRecord(turn=0, player=0, episode_id="p0-t0", outcome=EpisodeOutcome.COMPLETED)


class TestScripts:
    """Tests for scripted strategists."""

    def test_load_custom(self, tmp_path: Path):
        """Scripts are read from TOML steps."""
        path = tmp_path / "script.toml"
        path.write_text(
            '[[steps]]\nfrom_turn = 0\ntool = "set-research"\narguments = { Technology = "pottery", Rationale = "pots" }\n',
            encoding="utf-8",
        )
        script = Script.load(path)
        assert script.name == "custom"
        assert script.steps[0].tool == ToolName.SET_RESEARCH

    def test_load_invalid(self, tmp_path: Path):
        """A file with neither preset nor steps is rejected."""
        path = tmp_path / "empty.toml"
        path.write_text("", encoding="utf-8")
        with pytest.raises(InvalidConfigError):
            Script.load(path)

    def test_non_finishing_step_followed_by_keep(self, host: GameHost):
        """A rejected custom step still ends with keep-status-quo in the same round."""
        step = ScriptStep(tool=ToolName.SET_RESEARCH, arguments={"Technology": "warp_drive", "Rationale": "fast"})
        record = _run(host, ScriptedStrategist(Script(steps=(step,))))
        assert record.outcome == EpisodeOutcome.COMPLETED
        assert [(c.name, c.ok) for c in record.calls] == [("set-research", False), (ToolName.KEEP_STATUS_QUO, True)]

    def test_rotate_grand(self, host: GameHost):
        """The rotating preset walks through the grand strategies episode by episode."""
        strategist = ScriptedStrategist(Script(preset=ScriptPreset.ROTATE_GRAND))
        picks = []
        for _ in range(2):
            _run(host, strategist)
            strategy = host.seats[0].overrides.strategy
            assert strategy is not None
            picks.append(strategy.grand)
            host.advance()
        assert picks == [GrandStrategy.CULTURE, GrandStrategy.UNITED_NATIONS]


class TestParseCompletion:
    """Tests for parse_completion."""

    def test_parallel_calls(self):
        """Every tool call of the message becomes a request."""
        message = tool_call_reply(("set-research", {"Rationale": "a"}), ("keep-status-quo", {"Rationale": "b"}))
        body = {"choices": [{"message": message}]}
        _, calls = parse_completion(body)
        assert [c.name for c in calls] == ["set-research", "keep-status-quo"]
        assert calls[1].call_id == "call_1"

    def test_legacy_function_call(self):
        """The single function_call form is understood."""
        body = {"choices": [{"message": function_call_reply("keep-status-quo", {"Rationale": "ok"})}]}
        _, calls = parse_completion(body)
        assert calls[0].arguments == {"Rationale": "ok"}
        assert calls[0].call_id is None

    def test_malformed_arguments(self):
        """Unparsable arguments are kept aside so the tool server rejects them."""
        body = {"choices": [{"message": tool_call_reply(("keep-status-quo", "{not json"))}]}
        _, calls = parse_completion(body)
        assert calls[0].arguments == {"_malformed": "{not json"}

    def test_no_message(self):
        """A body without choices is a transport failure."""
        with pytest.raises(TransportError):
            parse_completion({"choices": []})


class TestLlmClient:
    """Tests for LlmClient against the offline endpoint."""

    def test_retries_with_backoff(self):
        """Retryable failures are retried with doubling delays."""
        endpoint = MockChatEndpoint(fail_times=2, fail_status=503)
        delays: list[float] = []

        async def sleep(seconds: float) -> None:
            delays.append(seconds)

        async def scenario() -> dict[str, object]:
            client = LlmClient(LlmSettings(), transport=endpoint.transport, sleep=sleep)
            try:
                return await client.complete([{"role": "user", "content": "hi"}], [])
            finally:
                await client.aclose()

        body = asyncio.run(scenario())
        assert "choices" in body
        assert delays == [1.0, 2.0]
        assert len(endpoint.requests) == 3
        assert "tools" not in endpoint.requests[0]

    @pytest.mark.parametrize(("fail_times", "status"), [(1, 400), (10, 429)])
    def test_gives_up(self, fail_times: int, status: int):
        """Client errors fail at once; persistent rate limiting fails after every try."""
        endpoint = MockChatEndpoint(fail_times=fail_times, fail_status=status)

        async def sleep(_seconds: float) -> None:
            return None

        async def scenario() -> None:
            client = LlmClient(LlmSettings(), transport=endpoint.transport, sleep=sleep, max_tries=3)
            try:
                await client.complete([{"role": "user", "content": "hi"}], [])
            finally:
                await client.aclose()

        with pytest.raises(TransportError):
            asyncio.run(scenario())
        assert len(endpoint.requests) == (1 if status == httpx.codes.BAD_REQUEST else 3)

    def test_api_key_header(self):
        """A configured key is sent as a bearer token."""
        seen: list[str | None] = []

        def handler(request: httpx.Request) -> httpx.Response:
            seen.append(request.headers.get("Authorization"))
            return httpx.Response(200, json={"choices": []})

        async def scenario() -> None:
            client = LlmClient(LlmSettings(api_key="secret"), transport=httpx.MockTransport(handler))
            try:
                await client.complete([], [])
            finally:
                await client.aclose()

        asyncio.run(scenario())
        assert seen == ["Bearer secret"]


class TestLlmStrategist:
    """Tests for LlmStrategist driven by the offline endpoint."""

    def test_episode_over_chat(self, host: GameHost):
        """A recorded set-strategy reply completes the episode with reported usage."""
        reply = tool_call_reply(("set-strategy", {"GrandStrategy": "Spaceship", "Rationale": "rockets"}))
        endpoint = MockChatEndpoint([reply])

        async def scenario() -> DecisionRecord:
            client = LlmClient(LlmSettings(), transport=endpoint.transport)
            try:
                ctx = episode_context(host, 0, EpisodeSettings())
                return await run_decision_episode(ctx, LlmStrategist(client))
            finally:
                await client.aclose()

        record = asyncio.run(scenario())
        assert record.outcome == EpisodeOutcome.COMPLETED
        assert record.token_method == "usage"
        assert record.input_tokens > 0
        assert len(record.transcript) == 1
        sent = endpoint.requests[0]
        assert [m["role"] for m in sent["messages"]] == ["system", "user"]
        assert len(sent["tools"]) == len(ToolName)

    def test_tool_results_fed_back(self, host: GameHost):
        """The second round sends tool messages answering the first round's calls."""
        replies = [
            tool_call_reply(("set-research", {"Technology": "nothing", "Rationale": "x"})),
            tool_call_reply(("keep-status-quo", {"Rationale": "fine"})),
        ]
        endpoint = MockChatEndpoint(replies)

        async def scenario() -> DecisionRecord:
            client = LlmClient(LlmSettings(), transport=endpoint.transport)
            try:
                return await run_decision_episode(episode_context(host, 0, EpisodeSettings()), LlmStrategist(client))
            finally:
                await client.aclose()

        record = asyncio.run(scenario())
        assert record.outcome == EpisodeOutcome.COMPLETED
        assert record.rounds == 2
        last = endpoint.requests[1]["messages"][-1]
        assert last["role"] == "tool"
        assert last["tool_call_id"] == "call_0"

    def test_default_transcript(self):
        """The bundled transcript has replies to play back."""
        assert load_transcript()


class _Chaotic:
    """Random rounds of valid, invalid and unknown tool calls, with occasional stalls and transport failures."""

    name = "chaotic"
    FAIL_RATE = 0.03
    STALL_RATE = 0.02
    UNREPORTED_USAGE = 0.5

    def __init__(self, rng: random.Random, catalog: OptionCatalog) -> None:
        self.rng = rng
        self.catalog = catalog

    def _call(self) -> ToolRequest:
        c, pick = self.catalog, self.rng.choice
        options: list[tuple[str, dict[str, object]]] = [
            ("set-research", {"Technology": "cold-fusion", "Rationale": "r"}),
            ("set-research", {"Technology": "pottery"}),
            ("set-policy", {"Policy": "anarchy", "Rationale": "p"}),
            ("set-persona", {"Boldness": self.rng.randint(1, 10), "Rationale": "bold"}),
            ("set-persona", {"Boldness": 11, "Rationale": "too bold"}),
            ("set-strategy", {"GrandStrategy": "piracy", "Rationale": "s"}),
            ("keep-status-quo", {"Rationale": "steady"}),
            ("keep-status-quo", {}),
            ("set-tariff", {"Rationale": "t"}),
        ]
        if c.research:
            options.append(("set-research", {"Technology": pick(c.research).id, "Rationale": "tech"}))
        if c.policies:
            options.append(("set-policy", {"Policy": pick(c.policies).id, "Rationale": "policy"}))
        options.append(("set-strategy", {"GrandStrategy": pick(c.grand).id, "Rationale": "grand"}))
        name, arguments = pick(options)
        return ToolRequest(name=name, arguments=arguments)

    async def decide(self, ctx: EpisodeContext, previous: list[RoundResult]) -> StrategistReply:  # noqa: ARG002
        roll = self.rng.random()
        if roll < self.FAIL_RATE:
            raise TransportError("connection reset")
        if roll < self.FAIL_RATE + self.STALL_RATE:
            await asyncio.sleep(1)
        calls = [self._call() for _ in range(self.rng.randint(0, 3))]
        if self.rng.random() < self.UNREPORTED_USAGE:
            return StrategistReply(calls=calls)
        return StrategistReply(calls=calls, input_tokens=100, output_tokens=10)


def _replay(host: GameHost, before: OverrideState, record: DecisionRecord) -> OverrideState:
    """Overrides obtained by applying only the record's accepted calls to the state before the episode."""
    session = EpisodeSession(record.player, host.catalog(record.player), before)
    for call in record.calls:
        if call.ok:
            assert session.call_tool(ToolRequest(name=call.name, arguments=call.arguments)).ok
    return session.staged


class TestRandomizedEpisodes:
    """Seeded random episodes over one game: rounds, rejections, stalls and transport failures."""

    EPISODES = 1000

    @pytest.mark.slow
    def test_outcome_and_commit_invariants(self, host: GameHost):
        """Every episode ends with one outcome; gaps change nothing and closes commit exactly the accepted calls."""
        rng = random.Random(20241)
        base = episode_context(host, 0, EpisodeSettings())
        strategist = _Chaotic(rng, base.catalog)
        outcomes: Counter[EpisodeOutcome] = Counter()

        async def run_all() -> None:
            for i in range(self.EPISODES):
                host.episodes.clear()
                before = host.seats[0].overrides.model_copy(deep=True)
                ctx = base.model_copy(
                    update={
                        "episode_id": f"p0-t0-{i}",
                        "deadline_sec": 0.05,
                        "round_cap": rng.randint(1, 4),
                        "corrective_rounds": rng.randint(0, 2),
                    }
                )
                record = await run_decision_episode(ctx, strategist)
                outcomes[record.outcome] += 1
                finishing = [c for c in record.calls if c.ok and c.name in FINISHING_TOOLS]
                if record.is_gap:
                    assert finishing == []
                    assert 0 not in host.episodes
                    assert host.seats[0].overrides == before
                    assert record.rationales == {}
                else:
                    assert len(finishing) == 1
                    assert host.episodes[0].closed
                    assert host.seats[0].overrides == _replay(host, before, record)
                if record.outcome == EpisodeOutcome.FORCED_CLOSE:
                    assert record.calls[-1].name == ToolName.KEEP_STATUS_QUO
                    assert record.rounds <= ctx.round_cap

        asyncio.run(run_all())
        assert sum(outcomes.values()) == self.EPISODES
        assert set(outcomes) == set(EpisodeOutcome)
