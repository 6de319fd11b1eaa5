"""Expert-encoded detectors for the supplemental decision factors.

Three criteria: capturing on the next move, giving check on the next
move, and forcing checkmate soon. Their tier weights form an ordinal
band that always outranks Z-scored utility factors, with MateSoon above
CheckNextMove above CaptureNextMove. A move that mates immediately
reports MateSoon only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import (
    EMPTY, PAWN,
    Move, MoveKind, Position,
    apply_move, game_status, in_check,
)
from .evaluator import mate_in

DOMAIN_TIERS = {"CaptureNextMove": 1, "CheckNextMove": 2, "MateSoon": 3}
DEFAULT_MATE_HORIZON = 3

PIECE_NAMES = {
    1: "pawn", 2: "knight", 3: "bishop", 4: "rook", 5: "queen", 6: "king",
}


@dataclass(frozen=True)
class DomainFactor:
    name: str
    tier: int
    payload: Optional[object] = None  # captured piece name or mate distance
    source: str = "domain"


def detect_capture_next(p: Position, best: Move) -> Optional[DomainFactor]:
    """CaptureNextMove when the move takes a piece (en passant included)."""
    if best.kind == MoveKind.EN_PASSANT:
        return DomainFactor("CaptureNextMove", DOMAIN_TIERS["CaptureNextMove"],
                            payload=PIECE_NAMES[PAWN])
    victim = p.board[best.to_square]
    if victim != EMPTY and best.kind != MoveKind.CASTLE:
        return DomainFactor("CaptureNextMove", DOMAIN_TIERS["CaptureNextMove"],
                            payload=PIECE_NAMES[abs(victim)])
    return None


def detect_check_next(p: Position, best: Move) -> Optional[DomainFactor]:
    """CheckNextMove when the move checks without mating (mate is reported
    by MateSoon instead)."""
    after = apply_move(p, best)
    if not in_check(after):
        return None
    if game_status(after).state == "checkmate":
        return None
    return DomainFactor("CheckNextMove", DOMAIN_TIERS["CheckNextMove"])


def detect_mate_within(p: Position,
                       horizon: int = DEFAULT_MATE_HORIZON) -> Optional[DomainFactor]:
    """MateSoon when the side to move forces mate in <= horizon player
    moves against optimal defense; payload is the minimal distance."""
    distance = mate_in(p, horizon)
    if distance is None:
        return None
    return DomainFactor("MateSoon", DOMAIN_TIERS["MateSoon"], payload=distance)


def domain_factors(p: Position, best: Move,
                   horizon: int = DEFAULT_MATE_HORIZON) -> list[DomainFactor]:
    """Union of the three detectors, highest tier first."""
    found = [
        detect_mate_within(p, horizon),
        detect_check_next(p, best),
        detect_capture_next(p, best),
    ]
    return [f for f in found if f is not None]
