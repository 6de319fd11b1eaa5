"""Chess endgame coaching toolkit.

Factor-decomposed evaluation with Z-score calibration, template-based
move rationales, and a four-condition study harness served over a CLI
and HTTP API.
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    FenError,
    GameStatus,
    IllegalMoveError,
    Move,
    MoveKind,
    Position,
    apply_move,
    find_move,
    game_status,
    legal_moves,
    parse_fen,
    perft,
    to_fen,
    to_san,
)
