#!/usr/bin/env python3
"""Generate the study board corpus.

Samples small white-to-move positions, keeps those with a forced win in
one or two player moves, and additionally requires the engine-best move
to be strictly unique at every step of deterministic best-vs-best play at
the verification depth. That uniqueness is what makes a perfect
hint-following agent score percentile 100 on every move.

Usage: python3 tools/make_corpus.py [count] [out-path]
"""

from __future__ import annotations

import random
import sys

sys.path.insert(0, "src")

from chesscoach.core import (  # noqa: E402
    EMPTY, KING, KNIGHT, BISHOP, ROOK, QUEEN, PAWN,
    Position, game_status, parse_fen, to_fen, apply_move,
)
from chesscoach.evaluator import mate_in, rank_moves  # noqa: E402

VERIFY_DEPTH = 3
MAX_PIECES = 12
WHITE_EXTRAS = (QUEEN, ROOK, ROOK, QUEEN, KNIGHT, BISHOP, PAWN)
BLACK_EXTRAS = (PAWN, KNIGHT, BISHOP, ROOK)


def sample_candidate(rng: random.Random) -> Position | None:
    board = [EMPTY] * 64
    squares = rng.sample(range(64), 8)
    wk, bk = squares[0], squares[1]
    if max(abs((wk >> 3) - (bk >> 3)), abs((wk & 7) - (bk & 7))) <= 1:
        return None
    board[wk] = KING
    board[bk] = -KING
    n_white = rng.randint(1, 3)
    n_black = rng.randint(0, 1)
    idx = 2
    for _ in range(n_white):
        kind = rng.choice(WHITE_EXTRAS)
        sq = squares[idx]
        idx += 1
        if kind == PAWN and (sq < 8 or sq >= 56):
            return None
        board[sq] = kind
    for _ in range(n_black):
        kind = rng.choice(BLACK_EXTRAS)
        sq = squares[idx]
        idx += 1
        if kind == PAWN and (sq < 8 or sq >= 56):
            return None
        board[sq] = -kind
    fen = to_fen(Position(tuple(board), True, "", None, 0, 1))
    try:
        return parse_fen(fen)
    except ValueError:
        return None


def unique_best_path(p: Position, depth: int, max_player_moves: int = 10) -> bool:
    """Deterministic best-vs-best play must win with a strictly unique
    top-ranked move at every player turn."""
    moves = 0
    while True:
        status = game_status(p)
        if status.state == "checkmate":
            return status.winner == "white"
        if status.is_over:
            return False
        if moves >= max_player_moves:
            return False
        ranking = rank_moves(p, depth)
        if len(ranking) > 1 and ranking[-1].score == ranking[-2].score:
            return False
        p = apply_move(p, ranking[-1].move)
        moves += 1
        status = game_status(p)
        if status.state == "checkmate":
            return status.winner == "white"
        if status.is_over:
            return False
        reply = rank_moves(p, depth)[-1]
        p = apply_move(p, reply.move)


def main() -> None:
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 54
    out = sys.argv[2] if len(sys.argv) > 2 else "corpus/endgames.fen"
    rng = random.Random(20250810)
    seen = set()
    lines = []
    attempts = 0
    while len(lines) < count:
        attempts += 1
        p = sample_candidate(rng)
        if p is None:
            continue
        fen = to_fen(p)
        if fen in seen:
            continue
        distance = mate_in(p, 2)
        if distance is None:
            continue
        if not unique_best_path(p, VERIFY_DEPTH):
            continue
        seen.add(fen)
        lines.append(f"{fen} ; O={distance}")
        print(f"[{len(lines)}/{count}] O={distance} {fen}")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("# Forced-win endgame boards (white to move), O = forced-win distance.\n")
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} boards to {out} after {attempts} samples")


if __name__ == "__main__":
    main()
