"""Tests for the experiment harness: config, record store, games, batches and replay."""

import asyncio
import json
from collections import Counter
from pathlib import Path

import pytest
import scipy.stats
from pydantic import ValidationError

from mb_hybrid4x.analytics.metrics import compute_metrics
from mb_hybrid4x.core.errors import InvalidConfigError, NotReplayableError, RecordNotFoundError, SchemaVersionError
from mb_hybrid4x.engine.models import GameConfig, VictoryKind
from mb_hybrid4x.harness import game as harness_game
from mb_hybrid4x.harness.batch import run_batch
from mb_hybrid4x.harness.game import crash_record, play_game, run_game
from mb_hybrid4x.harness.models import (
    Condition,
    EpisodeSummary,
    Exclusion,
    ExperimentConfig,
    FaultPlan,
    GameRecord,
    OutcomeKind,
    StrategistKind,
    longest_gap_run,
)
from mb_hybrid4x.harness.replay import replay
from mb_hybrid4x.harness.store import (
    find_record,
    persist_record,
    persist_transcripts,
    persisted_keys,
    read_records,
    repair_tail,
    transcript_path,
)
from mb_hybrid4x.strategist.models import EpisodeOutcome
from mb_hybrid4x.strategist.scripted import ScriptPreset
from mb_hybrid4x.strategy.models import GrandStrategy

SHORT_GAME = GameConfig(max_turns=5, victory_toggles=(VictoryKind.TIME,))
BUILTIN = Condition(name="builtin")
KEEP = Condition(name="keep", strategist=StrategistKind.SCRIPTED, script=ScriptPreset.ALWAYS_KEEP)


def _summary(outcome: EpisodeOutcome, turn: int = 0) -> EpisodeSummary:
    return EpisodeSummary(
        turn=turn, outcome=outcome, rounds=1, calls=0, input_tokens=0, output_tokens=0, token_method="bytes/4"
    )


def _play(condition: Condition, seed: int = 3, game: GameConfig = SHORT_GAME, fault: FaultPlan | None = None) -> GameRecord:
    return asyncio.run(play_game(condition, seed, game, fault=fault)).record


class TestCondition:
    """Tests for Condition."""

    def test_scripted_needs_script(self):
        """A scripted condition without a script is invalid."""
        with pytest.raises(ValidationError, match="needs script"):
            Condition(name="x", strategist=StrategistKind.SCRIPTED)

    def test_script_only_for_scripted(self):
        """Other strategists cannot carry a script."""
        with pytest.raises(ValidationError, match="has a script"):
            Condition(name="x", script=ScriptPreset.ALWAYS_KEEP)

    @pytest.mark.parametrize(
        ("kind", "deterministic"),
        [(StrategistKind.BUILTIN, True), (StrategistKind.MOCK, True), (StrategistKind.LLM, False)],
    )
    def test_deterministic(self, kind: StrategistKind, deterministic: bool):
        """Only live LLM conditions are not reproducible."""
        assert Condition(name="x", strategist=kind).deterministic is deterministic


class TestExperimentConfig:
    """Tests for ExperimentConfig."""

    def test_load(self, tmp_path: Path):
        """Seed ranges expand and a relative output sits beside the file."""
        path = tmp_path / "exp.toml"
        path.write_text(
            """
seeds = {start = 10, count = 3}
output = "out/records.jsonl"

[game]
max_turns = 20

[[conditions]]
name = "builtin"

[[conditions]]
name = "grand"
strategist = "scripted"
script = "rotate-grand"
""",
            encoding="utf-8",
        )
        cfg = ExperimentConfig.load(path)
        assert cfg.seeds == [10, 11, 12]
        assert cfg.output == tmp_path / "out" / "records.jsonl"
        assert cfg.game.max_turns == 20
        assert [c.name for c in cfg.conditions] == ["builtin", "grand"]

    def test_missing_file(self, tmp_path: Path):
        """A missing file is an invalid config."""
        with pytest.raises(InvalidConfigError):
            ExperimentConfig.load(tmp_path / "nope.toml")

    def test_validation_error_names_field(self, tmp_path: Path):
        """Validation failures point at the offending key."""
        path = tmp_path / "exp.toml"
        path.write_text('seeds = [1]\nparallelism = 0\n[[conditions]]\nname = "a"\n', encoding="utf-8")
        with pytest.raises(InvalidConfigError) as exc:
            ExperimentConfig.load(path)
        assert exc.value.field == "parallelism"

    @pytest.mark.parametrize(
        ("conditions", "seeds"),
        [([{"name": "a"}, {"name": "a"}], [1]), ([{"name": "a"}], [1, 1])],
    )
    def test_unique(self, conditions: list[dict[str, str]], seeds: list[int]):
        """Condition names and seeds must be distinct."""
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"conditions": conditions, "seeds": seeds})


class TestGapRun:
    """Tests for longest_gap_run."""

    def test_counts_consecutive_gaps(self):
        """Timeouts and errors both count; completed and forced episodes break the run."""
        outcomes = [
            EpisodeOutcome.TIMEOUT_GAP,
            EpisodeOutcome.ERROR_GAP,
            EpisodeOutcome.FORCED_CLOSE,
            EpisodeOutcome.ERROR_GAP,
            EpisodeOutcome.ERROR_GAP,
            EpisodeOutcome.TIMEOUT_GAP,
            EpisodeOutcome.COMPLETED,
        ]
        assert longest_gap_run([_summary(o) for o in outcomes]) == 3

    def test_empty(self):
        """No episodes, no gaps."""
        assert longest_gap_run([]) == 0


class TestStore:
    """Tests for the record store."""

    def test_persist_and_read(self, tmp_path: Path):
        """Records append as lines and read back equal."""
        sink = tmp_path / "records.jsonl"
        first = crash_record(BUILTIN, 1, SHORT_GAME, "boom")
        second = crash_record(BUILTIN, 2, SHORT_GAME, "boom")
        persist_record(first, sink)
        persist_record(second, sink)
        assert list(read_records(sink)) == [first, second]
        assert persisted_keys(sink) == {("builtin", 1), ("builtin", 2)}

    def test_truncated_tail_skipped(self, tmp_path: Path):
        """A final line without a newline is not read, and repair_tail cuts it."""
        sink = tmp_path / "records.jsonl"
        persist_record(crash_record(BUILTIN, 1, SHORT_GAME, "boom"), sink)
        with sink.open("a", encoding="utf-8") as f:
            f.write('{"schema_version": 1, "cond')
        assert len(list(read_records(sink))) == 1
        repair_tail(sink)
        assert sink.read_text(encoding="utf-8").endswith("\n")
        assert len(sink.read_text(encoding="utf-8").splitlines()) == 1

    def test_schema_version_mismatch(self, tmp_path: Path):
        """Records from another schema version are refused."""
        sink = tmp_path / "records.jsonl"
        raw = json.loads(crash_record(BUILTIN, 1, SHORT_GAME, "boom").model_dump_json())
        raw["schema_version"] = 99
        sink.write_text(json.dumps(raw) + "\n", encoding="utf-8")
        with pytest.raises(SchemaVersionError, match="schema version 99"):
            list(read_records(sink))

    def test_missing_file(self, tmp_path: Path):
        """Reading a missing file fails; its key set is empty."""
        with pytest.raises(RecordNotFoundError):
            list(read_records(tmp_path / "none.jsonl"))
        assert persisted_keys(tmp_path / "none.jsonl") == set()

    def test_find_record(self, tmp_path: Path):
        """A missing game in an existing file is reported."""
        sink = tmp_path / "records.jsonl"
        persist_record(crash_record(BUILTIN, 1, SHORT_GAME, "boom"), sink)
        assert find_record(sink, "builtin", 1).seed == 1
        with pytest.raises(RecordNotFoundError):
            find_record(sink, "builtin", 2)

    def test_transcripts_replaced(self, tmp_path: Path):
        """A rerun overwrites the transcript file of the game."""
        sink = tmp_path / "records.jsonl"
        persist_transcripts(sink, "keep", 4, [{"turn": 0}, {"turn": 1}])
        persist_transcripts(sink, "keep", 4, [{"turn": 0}])
        path = transcript_path(sink, "keep", 4)
        assert path.parent.name == "records.transcripts"
        assert path.read_text(encoding="utf-8").splitlines() == ['{"turn": 0}']


class TestPlayGame:
    """Tests for play_game."""

    def test_time_victory_record(self):
        """A short game ends in a time victory with one entry per played turn."""
        record = _play(BUILTIN)
        assert record.outcome.kind == OutcomeKind.VICTORY
        assert record.outcome.victory == VictoryKind.TIME
        assert record.game_length == 5
        assert len(record.grand_by_turn) == 5
        assert [e.turn for e in record.episodes] == list(range(5))
        assert all(e.outcome == EpisodeOutcome.COMPLETED for e in record.episodes)
        assert len(record.final_scores) == len(record.peak_scores) == SHORT_GAME.player_count
        assert all(p >= f for p, f in zip(record.peak_scores, record.final_scores, strict=True))
        assert record.included

    def test_draw_without_time_victory(self):
        """With no victory enabled the game is a draw at the turn limit."""
        record = _play(BUILTIN, game=GameConfig(max_turns=3, victory_toggles=()))
        assert record.outcome.kind == OutcomeKind.DRAW
        assert record.outcome.winner is None

    def test_deterministic(self):
        """Same condition and seed give the same record."""
        assert _play(KEEP, seed=8) == _play(KEEP, seed=8)

    def test_seed_recorded(self):
        """The record keeps the condition and the seed."""
        record = _play(KEEP, seed=6)
        assert record.key == ("keep", 6)
        assert record.spec == KEEP

    def test_fault_bursts_exclude_game(self):
        """Fifteen consecutive transport failures exclude the game."""
        game = GameConfig(max_turns=16, victory_toggles=(VictoryKind.TIME,))
        record = _play(KEEP, game=game, fault=FaultPlan(failure_probability=1.0, burst_length=2))
        assert all(e.outcome == EpisodeOutcome.ERROR_GAP for e in record.episodes)
        assert record.exclusion == Exclusion.GAP15
        assert record.exclusion_reason == "16 consecutive strategy gaps"

    def test_crash_becomes_record(self, monkeypatch: pytest.MonkeyPatch):
        """A failing game is turned into a crash record with no transcripts."""

        async def explode(*_args: object, **_kwargs: object) -> None:
            raise RuntimeError("engine fault")

        monkeypatch.setattr(harness_game, "play_game", explode)
        record, transcripts = run_game(BUILTIN, 1, SHORT_GAME)
        assert record.outcome.kind == OutcomeKind.CRASHED
        assert record.exclusion == Exclusion.CRASH
        assert record.exclusion_reason == "RuntimeError: engine fault"
        assert transcripts == []


class TestBatch:
    """Tests for run_batch."""

    def test_runs_then_resumes(self, tmp_path: Path):
        """A second run skips every persisted game."""
        cfg = ExperimentConfig(conditions=[BUILTIN, KEEP], seeds=[1, 2], game=SHORT_GAME, output=tmp_path / "r.jsonl")
        seen: list[tuple[str, int]] = []
        report = run_batch(cfg, on_record=lambda r: seen.append(r.key))
        assert (report.ran, report.skipped, report.crashed) == (4, 0, 0)
        assert sorted(seen) == [("builtin", 1), ("builtin", 2), ("keep", 1), ("keep", 2)]
        assert [s.games for s in report.conditions] == [2, 2]
        assert transcript_path(cfg.output, "keep", 1).is_file()

        again = run_batch(cfg)
        assert (again.ran, again.skipped) == (0, 4)
        assert len(list(read_records(cfg.output))) == 4

    def test_resume_after_partial_write(self, tmp_path: Path):
        """A cut-off last line is dropped and the game is played again."""
        cfg = ExperimentConfig(conditions=[KEEP], seeds=[1], game=SHORT_GAME, output=tmp_path / "r.jsonl")
        cfg.output.write_text('{"schema_version": 1, "condition": "ke', encoding="utf-8")
        report = run_batch(cfg)
        assert report.ran == 1
        assert [r.key for r in read_records(cfg.output)] == [("keep", 1)]


class TestBatchProperties:
    """Seeded batch-level properties over builtin and scripted conditions."""

    CONQUEST = Condition(name="fixed-conquest", strategist=StrategistKind.SCRIPTED, script=ScriptPreset.FIXED_CONQUEST)
    SEAT_TOLERANCE = 0.15
    SEAT_P_VALUE = 0.001
    STEERING_FACTOR = 2
    CONQUEST_ADOPTION = 0.9

    @staticmethod
    def _records(tmp_path: Path, name: str, conditions: list[Condition], seeds: list[int], game: GameConfig) -> list[GameRecord]:
        cfg = ExperimentConfig(conditions=conditions, seeds=seeds, game=game, output=tmp_path / f"{name}.jsonl")
        report = run_batch(cfg)
        assert report.crashed == 0
        return list(read_records(cfg.output))

    @pytest.mark.slow
    def test_deterministic_over_seeds(self, tmp_path: Path):
        """Twenty seeds played twice give byte-identical record files and identical event logs."""
        game = GameConfig(max_turns=15, victory_toggles=(VictoryKind.TIME,))
        seeds = list(range(20))
        self._records(tmp_path, "first", [BUILTIN], seeds, game)
        self._records(tmp_path, "second", [BUILTIN], seeds, game)
        assert (tmp_path / "first.jsonl").read_bytes() == (tmp_path / "second.jsonl").read_bytes()

        for seed in seeds:
            runs = [asyncio.run(play_game(BUILTIN, seed, game)) for _ in range(2)]
            assert runs[0].state.event_log == runs[1].state.event_log, seed

    @pytest.mark.slow
    def test_seats_win_evenly(self, tmp_path: Path):
        """With every seat on the builtin AI, no seat wins noticeably more often than the others."""
        game = GameConfig(max_turns=20, victory_toggles=(VictoryKind.TIME,))
        records = self._records(tmp_path, "seats", [BUILTIN], list(range(100)), game)
        winners = Counter(r.outcome.winner for r in records)
        assert None not in winners
        shares = [winners[seat] / len(records) for seat in range(game.player_count)]
        expected = 1 / game.player_count
        assert all(abs(share - expected) <= self.SEAT_TOLERANCE for share in shares), shares
        assert scipy.stats.chisquare([winners[seat] for seat in range(game.player_count)]).pvalue >= self.SEAT_P_VALUE

        (builtin,) = compute_metrics(records).conditions
        assert builtin.win_rate.value == pytest.approx(shares[0])

    @pytest.mark.slow
    def test_fixed_conquest_steers_toward_domination(self, tmp_path: Path):
        """A fixed Conquest strategy is held almost every turn and wins by Domination at least twice as often."""
        game = GameConfig(
            map_width=12, map_height=12, max_turns=60, victory_toggles=(VictoryKind.DOMINATION, VictoryKind.TIME)
        )
        records = self._records(tmp_path, "steering", [BUILTIN, self.CONQUEST], list(range(30)), game)
        metrics = {c.condition: c for c in compute_metrics(records).conditions}
        domination = str(VictoryKind.DOMINATION)
        baseline = metrics[BUILTIN.name].victory_kinds[domination]
        steered = metrics[self.CONQUEST.name]
        assert steered.victory_kinds[domination] >= self.STEERING_FACTOR * baseline
        assert steered.adoption[str(GrandStrategy.CONQUEST)] >= self.CONQUEST_ADOPTION


class TestReplay:
    """Tests for replay."""

    def test_matches_stored(self, tmp_path: Path):
        """Replaying a scripted game reproduces the record."""
        sink = tmp_path / "r.jsonl"
        persist_record(_play(KEEP, seed=4), sink)
        result = replay(sink, "keep", 4)
        assert result.matches
        assert "## Turn 0" in result.event_log()

    def test_llm_not_replayable(self, tmp_path: Path):
        """Live LLM games are refused."""
        sink = tmp_path / "r.jsonl"
        persist_record(crash_record(Condition(name="live", strategist=StrategistKind.LLM), 1, SHORT_GAME, "x"), sink)
        with pytest.raises(NotReplayableError):
            replay(sink, "live", 1)

    def test_crash_not_replayable(self, tmp_path: Path):
        """Crashed games have nothing to replay."""
        sink = tmp_path / "r.jsonl"
        persist_record(crash_record(BUILTIN, 1, SHORT_GAME, "x"), sink)
        with pytest.raises(NotReplayableError):
            replay(sink, "builtin", 1)
