"""Study-session orchestration for the four guidance conditions.

A session is nine games on fixed boards (three diagnostic, three
instructional, three diagnostic) played as white against the engine
opponent, capped at ten player moves per game. Every committed player
move is percentile-ranked against the pre-move ranking; instructional
games add condition-gated guidance and a two-phase caution flow for
bottom-third proposals. All mutations append to an event log from which
the final session state is exactly replayable.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .calibration import CalibrationTable
from .core import (
    Move, Position, apply_move, find_move, game_status, legal_moves,
    parse_fen, to_fen, to_san,
)
from .domain import domain_factors
from .evaluator import DEFAULT_CONFIG, EvalConfig, ScoredMove, best_move, mate_in, rank_moves
from .rga import (
    Rationale, RGAConfig, detect_non_optimal, generate_cautionary,
    generate_rationale, percentile_of,
)
from .evaluator import evaluate

CONDITIONS = ("None", "Hints", "RGA", "RGA+")
PHASE_PATTERN = ("diagnostic",) * 3 + ("instructional",) * 3 + ("diagnostic",) * 3
GAMES_PER_SESSION = 9
MAX_BOARD_PIECES = 12
MAX_OPTIMAL_MOVES = 4  # boards must be winnable in fewer than 5 player moves
OUTCOMES = ("win", "loss", "tie", "maxmoves")


class StudyError(ValueError):
    pass


class CorpusError(StudyError):
    pass


class SessionError(StudyError):
    pass


class QuestionnaireError(StudyError):
    pass


class DuplicateQuestionnaireError(QuestionnaireError):
    pass


def normalize_condition(raw: str) -> str:
    lookup = {c.lower(): c for c in CONDITIONS}
    key = str(raw).strip().lower()
    if key not in lookup:
        raise SessionError(f"unknown condition {raw!r}; expected one of {CONDITIONS}")
    return lookup[key]


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoardTask:
    fen: str
    optimal_moves: int  # forced-win distance O in player moves
    index: int


def load_corpus(path: str, verify_horizon: int = MAX_OPTIMAL_MOVES) -> list[BoardTask]:
    """Load and validate one board per line: 'FEN' or 'FEN ; O=n'.

    Every board must be legal, white to move, at most 12 pieces, and a
    forced win in fewer than 5 player moves (confirmed by mate search).
    """
    tasks = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fen_part, _, annotation = line.partition(";")
            annotated = None
            if annotation.strip():
                key, _, value = annotation.partition("=")
                if key.strip() != "O":
                    raise CorpusError(f"{path}:{lineno}: bad annotation {annotation.strip()!r}")
                annotated = int(value)
            try:
                p = parse_fen(fen_part.strip())
            except ValueError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            if not p.white_to_move:
                raise CorpusError(f"{path}:{lineno}: player side must be white")
            if p.piece_count() > MAX_BOARD_PIECES:
                raise CorpusError(
                    f"{path}:{lineno}: {p.piece_count()} pieces exceeds {MAX_BOARD_PIECES}")
            distance = mate_in(p, verify_horizon)
            if distance is None:
                raise CorpusError(
                    f"{path}:{lineno}: no forced win within {verify_horizon} player moves")
            if annotated is not None and annotated != distance:
                raise CorpusError(
                    f"{path}:{lineno}: annotated O={annotated} but search found O={distance}")
            tasks.append(BoardTask(fen=to_fen(p), optimal_moves=distance, index=len(tasks)))
    return tasks


# ---------------------------------------------------------------------------
# Session state
# ---------------------------------------------------------------------------

@dataclass
class StudyConfig:
    hint_depth: int = 4
    opponent_depth: int = 6
    max_player_moves: int = 10
    days: tuple = (1, 2, 3)


@dataclass(frozen=True)
class Guidance:
    highlight: Optional[tuple] = None  # (from-square, to-square) names
    rationale: Optional[Rationale] = None
    variant: Optional[str] = None  # 'rga' | 'rga+'

    @property
    def is_empty(self) -> bool:
        return self.highlight is None and self.rationale is None


@dataclass
class GameRecord:
    task: BoardTask
    phase: str
    fen: str  # current position
    moves: list = field(default_factory=list)
    player_moves: int = 0
    outcome: Optional[str] = None


@dataclass
class Session:
    session_id: str
    participant: str
    condition: str
    day: int
    games: list
    current_game: int = 0
    questionnaire: Optional[int] = None
    events: list = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return all(g.outcome is not None for g in self.games)


@dataclass(frozen=True)
class TurnOutcome:
    committed: bool
    game_index: int
    move: str
    san: str
    percentile: Optional[float] = None
    caution: Optional[Rationale] = None
    move_number: Optional[int] = None
    opponent_move: Optional[str] = None
    opponent_san: Optional[str] = None
    outcome: Optional[str] = None
    game_over: bool = False
    fen_after: Optional[str] = None
    status_state: Optional[str] = None


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def win_percentage(records: list) -> float:
    """Eq-style win percentage: wins count 1, ties and capped games 0.5,
    exact rational arithmetic before the final float conversion."""
    if not records:
        raise StudyError("win_percentage needs at least one game record")
    counts = {o: 0 for o in OUTCOMES}
    for r in records:
        outcome = r.outcome if isinstance(r, GameRecord) else r
        if outcome not in counts:
            raise StudyError(f"game has no valid outcome: {outcome!r}")
        counts[outcome] += 1
    total = sum(counts.values())
    score = (Fraction(counts["win"])
             + Fraction(1, 2) * counts["tie"]
             + Fraction(1, 2) * counts["maxmoves"])
    return float(100 * score / total)


def percentile_rank(ranking: list[ScoredMove], chosen: Move) -> float:
    """Percentile of the chosen move in the ascending ranking (mid-rank
    ties; 100 for a single-move list)."""
    return float(percentile_of(ranking, chosen))


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

class StudyRunner:
    """Owns the corpus, calibration table and configs; drives sessions."""

    def __init__(self, corpus: list, table: CalibrationTable,
                 study_config: Optional[StudyConfig] = None,
                 eval_config: EvalConfig = DEFAULT_CONFIG,
                 rga_config: Optional[RGAConfig] = None,
                 log_dir: Optional[str] = None,
                 move_source=None):
        self.corpus = corpus
        self.table = table
        self.study = study_config or StudyConfig()
        self.eval_config = eval_config
        self.rga = rga_config or RGAConfig()
        self.log_dir = log_dir
        self.sessions: dict = {}
        self._counter = 0
        self._rank_cache: dict = {}
        self._guidance_cache: dict = {}
        self._archived: dict = {}
        self._cautioned: set = set()
        # move_source may override best-move/ranking queries (engine bridge)
        self.move_source = move_source

    # -- session lifecycle ---------------------------------------------------

    def create_session(self, participant: str, condition: str, day: int,
                       corpus: Optional[list] = None) -> Session:
        condition = normalize_condition(condition)
        if day not in self.study.days:
            raise SessionError(f"day must be one of {self.study.days}, got {day}")
        boards = (corpus if corpus is not None else self.corpus)
        start = (day - 1) * GAMES_PER_SESSION
        day_boards = boards[start:start + GAMES_PER_SESSION]
        if len(day_boards) < GAMES_PER_SESSION:
            raise SessionError(
                f"corpus has {len(day_boards)} unused boards for day {day}; need {GAMES_PER_SESSION}")
        self._counter += 1
        session = Session(
            session_id=f"sess-{self._counter}",
            participant=participant,
            condition=condition,
            day=day,
            games=[GameRecord(task=t, phase=PHASE_PATTERN[i], fen=t.fen)
                   for i, t in enumerate(day_boards)],
        )
        self.sessions[session.session_id] = session
        self._log(session, "session_created", participant=participant,
                  condition=condition, day=day,
                  boards=[t.fen for t in day_boards])
        self._log(session, "game_started", game=0, phase=session.games[0].phase,
                  fen=session.games[0].fen)
        return session

    def _log(self, session: Session, event_type: str, **data) -> None:
        event = {"seq": len(session.events) + 1, "type": event_type}
        event.update(data)
        session.events.append(event)
        if self.log_dir:
            path = os.path.join(self.log_dir, f"{session.session_id}.jsonl")
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")

    # -- per-turn machinery ----------------------------------------------------

    def current_ranking(self, session: Session, game_index: int) -> list[ScoredMove]:
        game = session.games[game_index]
        key = (session.session_id, game_index, game.fen)
        if key not in self._rank_cache:
            p = parse_fen(game.fen)
            if self.move_source is not None:
                ranking = self.move_source.rank_moves(p, self.study.hint_depth)
            else:
                ranking = rank_moves(p, self.study.hint_depth, self.eval_config)
            self._rank_cache[key] = ranking
        return self._rank_cache[key]

    def guidance_for(self, session: Session, game_index: int) -> Guidance:
        """Condition-gated guidance for the current turn; diagnostic games
        and the None condition always get empty guidance."""
        game = session.games[game_index]
        if game.outcome is not None or game.phase != "instructional" \
                or session.condition == "None":
            return Guidance()
        key = (session.session_id, game_index, game.fen)
        if key in self._guidance_cache:
            return self._guidance_cache[key]
        ranking = self.current_ranking(session, game_index)
        best = ranking[-1]
        highlight = (best.move.uci()[:2], best.move.uci()[2:4])
        rationale = None
        variant = None
        if session.condition in ("RGA", "RGA+"):
            p = parse_fen(game.fen)
            _, factors = evaluate(p, self.eval_config)
            dom = None
            if session.condition == "RGA+":
                dom = domain_factors(p, best.move, self.rga.mate_horizon)
            rationale = generate_rationale(factors, best.move, dom, self.rga,
                                           self.table, p)
            variant = "rga+" if session.condition == "RGA+" else "rga"
        guidance = Guidance(highlight=highlight, rationale=rationale, variant=variant)
        self._guidance_cache[key] = guidance
        self._log(session, "guidance_shown", game=game_index,
                  move_number=game.player_moves + 1,
                  highlight=list(highlight),
                  rationale=_rationale_payload(rationale),
                  variant=variant)
        return guidance

    def submit_move(self, session: Session, game_index: int, move_text: str,
                    confirm: bool = False,
                    move_number: Optional[int] = None) -> TurnOutcome:
        """Two-phase move submission.

        In instructional RGA/RGA+ games a bottom-third proposal returns an
        uncommitted outcome carrying the cautionary rationale; resubmitting
        with confirm=True commits it. Replaying an already-committed move
        number returns the archived outcome.
        """
        if not 0 <= game_index < len(session.games):
            raise SessionError(f"no game {game_index} in this session")
        game = session.games[game_index]

        # replay of an already-committed move returns the archived outcome,
        # even when that move finished the game
        if move_number is not None and move_number <= game.player_moves:
            archived = self._archived.get((session.session_id, game_index, move_number))
            if archived is not None and archived.move == move_text:
                return archived
            raise SessionError(
                f"move number {move_number} already committed with a different move")

        if session.complete:
            raise SessionError("session already complete")
        if game_index != session.current_game:
            raise SessionError(
                f"game {game_index} is not active (current game is {session.current_game})")
        if game.outcome is not None:
            raise SessionError("game already finished")

        p = parse_fen(game.fen)
        move = find_move(p, move_text)  # raises IllegalMoveError
        ranking = self.current_ranking(session, game_index)
        pct = percentile_of(ranking, move)

        caution_gated = (game.phase == "instructional"
                         and session.condition in ("RGA", "RGA+"))
        if caution_gated and not confirm and detect_non_optimal(ranking, move, self.rga):
            caution = generate_cautionary(p, move, self.rga, self.table, self.eval_config)
            self._log(session, "move_proposed", game=game_index, move=move.uci(),
                      percentile=float(pct))
            self._log(session, "caution_shown", game=game_index, move=move.uci(),
                      move_san=caution.move_san, lines=list(caution.lines))
            self._cautioned.add((session.session_id, game_index, game.fen, move.uci()))
            return TurnOutcome(
                committed=False, game_index=game_index, move=move.uci(),
                san=caution.move_san, percentile=float(pct), caution=caution)

        return self._commit(session, game_index, p, move, pct)

    def _commit(self, session: Session, game_index: int, p: Position,
                move: Move, pct: Fraction) -> TurnOutcome:
        game = session.games[game_index]
        san = to_san(p, move)
        after = apply_move(p, move)
        game.player_moves += 1
        number = game.player_moves
        key = (session.session_id, game_index, game.fen)
        guidance = self._guidance_cache.get(key)
        guidance_shown = bool(guidance and not guidance.is_empty)
        caution_overridden = (session.session_id, game_index, game.fen,
                              move.uci()) in self._cautioned
        game.moves.append({
            "by": "player", "uci": move.uci(), "san": san,
            "percentile": float(pct), "guidance_shown": guidance_shown,
            "caution_overridden": caution_overridden,
        })
        self._log(session, "move_committed", game=game_index, move_number=number,
                  move=move.uci(), san=san, percentile=float(pct),
                  guidance_shown=guidance_shown, caution_overridden=caution_overridden)

        game.fen = to_fen(after)
        status = game_status(after)
        opponent_move = None
        opponent_san = None
        outcome = None
        if status.state == "checkmate":
            outcome = "win"
        elif status.state in ("stalemate", "draw-insufficient-material"):
            outcome = "tie"
        elif game.player_moves >= self.study.max_player_moves:
            outcome = "maxmoves"
        else:
            if self.move_source is not None:
                reply = self.move_source.best_move(after, self.study.opponent_depth)
            else:
                reply = best_move(after, self.study.opponent_depth, self.eval_config)
            opponent_move = reply.move.uci()
            opponent_san = to_san(after, reply.move)
            after = apply_move(after, reply.move)
            game.fen = to_fen(after)
            game.moves.append({"by": "opponent", "uci": opponent_move,
                               "san": opponent_san})
            self._log(session, "opponent_moved", game=game_index,
                      move=opponent_move, san=opponent_san)
            status = game_status(after)
            if status.state == "checkmate":
                outcome = "loss"
            elif status.state in ("stalemate", "draw-insufficient-material"):
                outcome = "tie"

        if outcome is not None:
            game.outcome = outcome
            self._log(session, "game_ended", game=game_index, outcome=outcome)
            session.current_game += 1
            if session.current_game < len(session.games):
                nxt = session.games[session.current_game]
                self._log(session, "game_started", game=session.current_game,
                          phase=nxt.phase, fen=nxt.fen)

        result = TurnOutcome(
            committed=True, game_index=game_index, move=move.uci(), san=san,
            percentile=float(pct), move_number=number,
            opponent_move=opponent_move, opponent_san=opponent_san,
            outcome=outcome, game_over=outcome is not None,
            fen_after=game.fen, status_state=status.state,
        )
        self._archived[(session.session_id, game_index, number)] = result
        return result

    def record_questionnaire(self, session: Session, answer: int) -> None:
        if not session.complete:
            raise QuestionnaireError("questionnaire opens after all nine games finish")
        if session.questionnaire is not None:
            raise DuplicateQuestionnaireError("questionnaire already submitted")
        if not isinstance(answer, int) or not 1 <= answer <= 5:
            raise QuestionnaireError(f"answer must be an integer 1..5, got {answer!r}")
        session.questionnaire = answer
        self._log(session, "questionnaire", answer=answer)


def _rationale_payload(r: Optional[Rationale]) -> Optional[dict]:
    if r is None:
        return None
    return {
        "move_san": r.move_san,
        "lines": list(r.lines),
        "polarity": r.polarity,
        "factors": [
            {"name": f.name, "source": f.source, "sign": f.sign,
             "weight": f.weight, "payload": f.payload}
            for f in r.factors
        ],
        "template_version": r.template_version,
    }


# ---------------------------------------------------------------------------
# Snapshot and replay
# ---------------------------------------------------------------------------

def session_snapshot(session: Session) -> dict:
    """Canonical final-state view; the replay of an event log must
    reproduce this exactly."""
    return {
        "participant": session.participant,
        "condition": session.condition,
        "day": session.day,
        "current_game": session.current_game,
        "questionnaire": session.questionnaire,
        "games": [
            {
                "start_fen": g.task.fen,
                "phase": g.phase,
                "fen": g.fen,
                "player_moves": g.player_moves,
                "outcome": g.outcome,
                "moves": g.moves,
            }
            for g in session.games
        ],
    }


def snapshot_bytes(session: Session) -> bytes:
    return json.dumps(session_snapshot(session), sort_keys=True).encode("utf-8")


def replay_events(events: list) -> dict:
    """Rebuild the session-state snapshot purely from the event log
    (no search is re-run; every decision is recorded in the log)."""
    header = events[0]
    if header["type"] != "session_created":
        raise StudyError("event log must start with session_created")
    games = [
        {
            "start_fen": fen,
            "phase": PHASE_PATTERN[i],
            "fen": fen,
            "player_moves": 0,
            "outcome": None,
            "moves": [],
        }
        for i, fen in enumerate(header["boards"])
    ]
    state = {
        "participant": header["participant"],
        "condition": header["condition"],
        "day": header["day"],
        "current_game": 0,
        "questionnaire": None,
        "games": games,
    }
    expected_seq = 0
    for event in events:
        expected_seq += 1
        if event["seq"] != expected_seq:
            raise StudyError(f"event log gap at seq {expected_seq}")
        etype = event["type"]
        if etype in ("session_created", "guidance_shown", "move_proposed",
                     "caution_shown"):
            continue
        if etype == "game_started":
            state["current_game"] = event["game"]
            continue
        game = games[event["game"]] if "game" in event else None
        if etype == "move_committed":
            p = parse_fen(game["fen"])
            move = find_move(p, event["move"])
            game["fen"] = to_fen(apply_move(p, move))
            game["player_moves"] += 1
            game["moves"].append({
                "by": "player", "uci": event["move"], "san": event["san"],
                "percentile": event["percentile"],
                "guidance_shown": event["guidance_shown"],
                "caution_overridden": event["caution_overridden"],
            })
        elif etype == "opponent_moved":
            p = parse_fen(game["fen"])
            move = find_move(p, event["move"])
            game["fen"] = to_fen(apply_move(p, move))
            game["moves"].append({"by": "opponent", "uci": event["move"],
                                  "san": event["san"]})
        elif etype == "game_ended":
            game["outcome"] = event["outcome"]
            state["current_game"] = event["game"] + 1
        elif etype == "questionnaire":
            state["questionnaire"] = event["answer"]
        else:
            raise StudyError(f"unknown event type {etype!r}")
    return state


def replay_bytes(events: list) -> bytes:
    return json.dumps(replay_events(events), sort_keys=True).encode("utf-8")


# ---------------------------------------------------------------------------
# Scripted agents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DayMetrics:
    day: int
    win_percent: float
    mean_percentile: float
    games: int


@dataclass(frozen=True)
class SimulationResult:
    policy: str
    condition: str
    days: tuple
    overall_win_percent: float
    overall_mean_percentile: float
    sessions: tuple


def simulate_agent(policy: str, condition: str, corpus: list, seed: int,
                   runner: Optional[StudyRunner] = None,
                   table: Optional[CalibrationTable] = None,
                   study_config: Optional[StudyConfig] = None,
                   follow_prob: float = 1.0,
                   days: Optional[int] = None,
                   participant: str = "sim") -> SimulationResult:
    """Play full sessions with a scripted policy and aggregate the metrics.

    Policies: 'random-legal' picks uniformly among legal moves (confirming
    through any caution), 'hint-follower' plays the engine-best move with
    probability follow_prob, 'caution-aware' proposes randomly but switches
    to the best move whenever a caution fires.
    """
    if policy not in ("random-legal", "hint-follower", "caution-aware"):
        raise StudyError(f"unknown policy {policy!r}")
    if runner is None:
        if table is None:
            raise StudyError("simulate_agent needs a runner or a calibration table")
        runner = StudyRunner(corpus, table, study_config=study_config)
    rng = random.Random(seed)
    condition = normalize_condition(condition)
    max_days = min(len(runner.study.days), len(corpus) // GAMES_PER_SESSION)
    n_days = max_days if days is None else min(days, max_days)

    day_metrics = []
    sessions = []
    all_outcomes = []
    all_percentiles = []
    for day in list(runner.study.days)[:n_days]:
        session = runner.create_session(f"{participant}-{policy}", condition, day,
                                        corpus=corpus)
        sessions.append(session)
        percentiles = []
        while not session.complete:
            game_index = session.current_game
            game = session.games[game_index]
            runner.guidance_for(session, game_index)  # client poll; gated inside
            p = parse_fen(game.fen)
            legal = sorted(legal_moves(p), key=lambda m: m.uci())
            if policy == "hint-follower" and rng.random() < follow_prob:
                chosen = runner.current_ranking(session, game_index)[-1].move
            else:
                chosen = rng.choice(legal)
            outcome = runner.submit_move(session, game_index, chosen.uci())
            if not outcome.committed:
                if policy == "caution-aware":
                    chosen = runner.current_ranking(session, game_index)[-1].move
                    outcome = runner.submit_move(session, game_index, chosen.uci(),
                                                 confirm=True)
                else:
                    outcome = runner.submit_move(session, game_index, chosen.uci(),
                                                 confirm=True)
            percentiles.append(outcome.percentile)
        records = session.games
        day_metrics.append(DayMetrics(
            day=day,
            win_percent=win_percentage(records),
            mean_percentile=sum(percentiles) / len(percentiles),
            games=len(records),
        ))
        all_outcomes.extend(records)
        all_percentiles.extend(percentiles)

    return SimulationResult(
        policy=policy,
        condition=condition,
        days=tuple(day_metrics),
        overall_win_percent=win_percentage(all_outcomes),
        overall_mean_percentile=sum(all_percentiles) / len(all_percentiles),
        sessions=tuple(sessions),
    )
