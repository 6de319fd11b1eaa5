"""Factor-decomposed static evaluation and depth-limited search.

The evaluation is an exact sum of eight named factors (white-relative
centipawns). Search scores every legal move with a full-window alpha-beta
so each root score equals the plain minimax value; mate scores are encoded
as MATE_BASE minus the ply at which mate lands, so shorter mates always
rank strictly higher.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .core import (
    ALL_DIRS, BISHOP, BISHOP_DIRS, EMPTY, KING, KNIGHT, KNIGHT_OFFSETS,
    KING_OFFSETS, PAWN, QUEEN, ROOK, ROOK_DIRS, VALID_88,
    Move, Position, _Board, _internal_to_move,
    game_status,
)

FACTOR_REGISTRY = (
    "Material", "Mobility", "KingDanger", "King",
    "Threats", "HangingPiece", "Passed", "PawnPromotion",
)

MATE_BASE = 1_000_000
MATE_WINDOW = MATE_BASE - 1_000  # scores at or beyond this magnitude are mates
INF = 2_000_000


class TerminalPositionError(ValueError):
    """Evaluation or search was asked about a finished game."""


@dataclass(frozen=True)
class EvalConfig:
    """Weight constants for the factor registry. Configuration, not contract."""

    pawn_value: int = 100
    knight_value: int = 300
    bishop_value: int = 300
    rook_value: int = 500
    queen_value: int = 900
    mobility_unit: int = 5
    king_danger_unit: int = 15
    king_center_unit: int = 10
    threat_unit: int = 20
    hanging_divisor: int = 10
    passed_base: int = 20
    passed_rank_unit: int = 10
    promotion_bonus: int = 200

    def piece_value(self, kind: int) -> int:
        return {
            PAWN: self.pawn_value, KNIGHT: self.knight_value, BISHOP: self.bishop_value,
            ROOK: self.rook_value, QUEEN: self.queen_value, KING: 0,
        }[kind]

    @staticmethod
    def from_file(path: str) -> "EvalConfig":
        """Load `name = integer` overrides; unknown names are rejected."""
        cfg = EvalConfig()
        fields = set(cfg.__dataclass_fields__)
        overrides = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'name = value'")
                name, _, value = line.partition("=")
                name = name.strip()
                if name not in fields:
                    raise ValueError(f"{path}:{lineno}: unknown constant {name!r}")
                overrides[name] = int(value.strip())
        return replace(cfg, **overrides)


DEFAULT_CONFIG = EvalConfig()


@dataclass(frozen=True)
class ScoredMove:
    """A legal move with its search score from the mover's perspective."""

    move: Move
    score: int
    mate_distance: Optional[int]  # signed plies; positive means the mover mates
    rank: int  # 1-based index in the ascending-score list


# ---------------------------------------------------------------------------
# Static evaluation
# ---------------------------------------------------------------------------

def _attacked_in_king_area(b: _Board, king_sq: int, by_white: bool) -> int:
    """Squares in the king's 3x3 neighborhood (own square included) attacked
    by the given color. Enumerates the attackers' reach once instead of
    querying each area square."""
    area = set()
    for d in KING_OFFSETS + (0,):
        s = king_sq + d
        if not (s & 0x88):
            area.add(s)
    sq = b.sq
    hit = set()
    for s in VALID_88:
        piece = sq[s]
        if piece == EMPTY or (piece > 0) != by_white:
            continue
        kind = piece if piece > 0 else -piece
        if kind == PAWN:
            fwd = 16 if by_white else -16
            for dd in (fwd - 1, fwd + 1):
                t = s + dd
                if t in area:
                    hit.add(t)
        elif kind == KNIGHT:
            for d in KNIGHT_OFFSETS:
                t = s + d
                if t in area:
                    hit.add(t)
        elif kind == KING:
            for d in KING_OFFSETS:
                t = s + d
                if t in area:
                    hit.add(t)
        else:
            dirs = ROOK_DIRS if kind == ROOK else BISHOP_DIRS if kind == BISHOP else ALL_DIRS
            for d in dirs:
                t = s + d
                while not (t & 0x88):
                    if t in area:
                        hit.add(t)
                    if sq[t] != EMPTY:
                        break
                    t += d
    return len(hit)


def _center_bonus(sq88: int, unit: int) -> int:
    rank, file = sq88 >> 4, sq88 & 7
    dr = 0 if rank in (3, 4) else min(abs(rank - 3), abs(rank - 4))
    df = 0 if file in (3, 4) else min(abs(file - 3), abs(file - 4))
    return unit * (3 - max(dr, df))


def _rook_or_king_attacks(b: _Board, target: int, by_white: bool) -> bool:
    rook = ROOK if by_white else -ROOK
    king = KING if by_white else -KING
    sq = b.sq
    for d in KING_OFFSETS:
        f = target + d
        if not (f & 0x88) and sq[f] == king:
            return True
    for d in ROOK_DIRS:
        f = target + d
        while not (f & 0x88):
            piece = sq[f]
            if piece != EMPTY:
                if piece == rook:
                    return True
                break
            f += d
    return False


def _is_passed_pawn(b: _Board, sq88: int, white: bool) -> bool:
    file = sq88 & 7
    rank = sq88 >> 4
    enemy = -PAWN if white else PAWN
    ranks_ahead = range(rank + 1, 8) if white else range(rank - 1, -1, -1)
    for r in ranks_ahead:
        for f in (file - 1, file, file + 1):
            if 0 <= f <= 7 and b.sq[(r << 4) | f] == enemy:
                return False
    return True


def _factor_dict(b: _Board, cfg: EvalConfig) -> dict:
    """All eight factors, white-relative centipawns, exact integers."""
    material = 0
    king_bonus = 0
    threats = 0
    hanging = 0
    passed = 0
    promotion = 0
    sq = b.sq
    for s in VALID_88:
        piece = sq[s]
        if piece == EMPTY:
            continue
        white = piece > 0
        kind = piece if white else -piece
        sign = 1 if white else -1
        if kind == KING:
            king_bonus += sign * _center_bonus(s, cfg.king_center_unit)
            continue
        material += sign * cfg.piece_value(kind)
        # a piece is a threat target / hanging from its owner's enemy's view
        if _rook_or_king_attacks(b, s, not white):
            threats -= sign * cfg.threat_unit
        if b.attacked(s, not white) and not b.attacked(s, white):
            hanging -= sign * (cfg.piece_value(kind) // cfg.hanging_divisor)
        if kind == PAWN:
            rel_rank = (s >> 4) if white else 7 - (s >> 4)
            if rel_rank == 6:
                promotion += sign * cfg.promotion_bonus
            if _is_passed_pawn(b, s, white):
                passed += sign * (cfg.passed_base + cfg.passed_rank_unit * (rel_rank - 1))
    mobility = cfg.mobility_unit * (
        b.count_pseudo_moves(True) - b.count_pseudo_moves(False))
    king_danger = cfg.king_danger_unit * (
        _attacked_in_king_area(b, b.bk, True) - _attacked_in_king_area(b, b.wk, False))
    return {
        "Material": material,
        "Mobility": mobility,
        "KingDanger": king_danger,
        "King": king_bonus,
        "Threats": threats,
        "HangingPiece": hanging,
        "Passed": passed,
        "PawnPromotion": promotion,
    }


def evaluate(p: Position, config: EvalConfig = DEFAULT_CONFIG) -> tuple[int, dict]:
    """Score an ongoing position; returns (total, factor map), both
    white-relative, with total exactly the sum of the factors."""
    status = game_status(p)
    if status.is_over:
        raise TerminalPositionError(f"cannot evaluate terminal position ({status.state})")
    factors = _factor_dict(_Board(p), config)
    return sum(factors.values()), factors


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

def _insufficient_board(b: _Board) -> bool:
    minors = {1: [], -1: []}
    for s in VALID_88:
        piece = b.sq[s]
        if piece == EMPTY or abs(piece) == KING:
            continue
        kind = abs(piece)
        if kind in (PAWN, ROOK, QUEEN):
            return False
        minors[1 if piece > 0 else -1].append((kind, s))
    total = len(minors[1]) + len(minors[-1])
    if total <= 1:
        return True
    if len(minors[1]) == 1 and len(minors[-1]) == 1:
        (wk, ws), (bk, bs) = minors[1][0], minors[-1][0]
        if wk == BISHOP and bk == BISHOP:
            return ((ws >> 4) + (ws & 7)) % 2 == ((bs >> 4) + (bs & 7)) % 2
    return False


def _move_order_key(mv: tuple) -> tuple:
    frm, to, promo, flags = mv
    return (-(flags & 1), -promo, frm, to)


def _negamax(b: _Board, depth: int, alpha: int, beta: int, ply: int,
             cfg: EvalConfig) -> int:
    if depth == 0:
        if not b.has_legal_move():
            return -(MATE_BASE - ply) if b.in_check() else 0
        if _insufficient_board(b):
            return 0
        score = sum(_factor_dict(b, cfg).values())
        return score if b.white_to_move else -score
    moves = b.legal_moves()
    if not moves:
        return -(MATE_BASE - ply) if b.in_check() else 0
    if _insufficient_board(b):
        return 0
    best = -INF
    for mv in sorted(moves, key=_move_order_key):
        b.make(mv)
        value = -_negamax(b, depth - 1, -beta, -alpha, ply + 1, cfg)
        b.unmake()
        if value > best:
            best = value
        if best > alpha:
            alpha = best
        if alpha >= beta:
            break
    return best


def _mate_distance(score: int) -> Optional[int]:
    if score >= MATE_WINDOW:
        return MATE_BASE - score
    if score <= -MATE_WINDOW:
        return -(MATE_BASE + score)
    return None


def rank_moves(p: Position, depth: int,
               config: EvalConfig = DEFAULT_CONFIG) -> list[ScoredMove]:
    """Score every legal move by full-window search of its successor.

    The list is sorted ascending by score (ties broken by long-algebraic
    move text), so the last element is the engine's best move.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    status = game_status(p)
    if status.is_over:
        raise TerminalPositionError(f"cannot rank moves in terminal position ({status.state})")
    b = _Board(p)
    scored = []
    for mv in b.legal_moves():
        b.make(mv)
        score = -_negamax(b, depth - 1, -INF, INF, 1, config)
        b.unmake()
        scored.append((score, _internal_to_move(mv)))
    scored.sort(key=lambda sm: (sm[0], sm[1].uci()))
    return [
        ScoredMove(move=m, score=s, mate_distance=_mate_distance(s), rank=i + 1)
        for i, (s, m) in enumerate(scored)
    ]


def best_move(p: Position, depth: int,
              config: EvalConfig = DEFAULT_CONFIG) -> ScoredMove:
    """The same move and score as rank_moves(p, depth)[-1].

    Uses an alpha-sharing root loop over children in descending move-text
    order: a child only replaces the running best on a strict improvement,
    which reproduces rank_moves' (score, text) tie-break while letting
    alpha-beta skip exact scores for inferior moves.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    status = game_status(p)
    if status.is_over:
        raise TerminalPositionError(f"cannot pick a move in terminal position ({status.state})")
    b = _Board(p)
    children = [(_internal_to_move(mv).uci(), mv) for mv in b.legal_moves()]
    children.sort(reverse=True)
    best_score = -INF
    best_mv = None
    for _, mv in children:
        b.make(mv)
        score = -_negamax(b, depth - 1, -INF, -best_score, 1, config)
        b.unmake()
        if score > best_score:
            best_score = score
            best_mv = mv
    move = _internal_to_move(best_mv)
    n = len(children)
    return ScoredMove(move=move, score=best_score,
                      mate_distance=_mate_distance(best_score), rank=n)


# ---------------------------------------------------------------------------
# Forced-mate detection
# ---------------------------------------------------------------------------

def mate_in(p: Position, horizon: int) -> Optional[int]:
    """Minimal player-move count n <= horizon such that the side to move
    forces checkmate against any defense, else None."""
    status = game_status(p)
    if status.is_over:
        return None
    b = _Board(p)
    for n in range(1, horizon + 1):
        if _forces_mate(b, n):
            return n
    return None


def _forces_mate(b: _Board, n: int) -> bool:
    for mv in b.legal_moves():
        b.make(mv)
        try:
            if not b.in_check():
                # no check delivered: cannot be mate on this move
                if n == 1:
                    continue
                replies = b.legal_moves()
                if not replies:
                    continue  # stalemate
            else:
                replies = b.legal_moves()
                if not replies:
                    return True  # checkmate
                if n == 1:
                    continue
            if _insufficient_board(b):
                continue
            refuted = False
            for reply in replies:
                b.make(reply)
                forced = _forces_mate(b, n - 1)
                b.unmake()
                if not forced:
                    refuted = True
                    break
            if not refuted:
                return True
        finally:
            b.unmake()
    return False
