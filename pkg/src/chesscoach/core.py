"""Rules-complete chess kernel.

Immutable positions, FEN parsing/serialization, strictly legal move
generation, move application, game-status detection, SAN rendering and
perft counting. Squares are indexed 0..63 with a1=0 and h8=63; the
internal board uses a 0x88 mailbox for speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

STARTPOS_FEN = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"

# Piece encoding: positive white, negative black, 0 empty.
EMPTY = 0
PAWN, KNIGHT, BISHOP, ROOK, QUEEN, KING = 1, 2, 3, 4, 5, 6

PIECE_TO_CHAR = {
    PAWN: "P", KNIGHT: "N", BISHOP: "B", ROOK: "R", QUEEN: "Q", KING: "K",
    -PAWN: "p", -KNIGHT: "n", -BISHOP: "b", -ROOK: "r", -QUEEN: "q", -KING: "k",
}
CHAR_TO_PIECE = {v: k for k, v in PIECE_TO_CHAR.items()}
PROMOTION_CHARS = ("b", "n", "q", "r")
PROMO_CHAR_TO_KIND = {"n": KNIGHT, "b": BISHOP, "r": ROOK, "q": QUEEN}
PROMO_KIND_TO_CHAR = {v: k for k, v in PROMO_CHAR_TO_KIND.items()}

FILES = "abcdefgh"


class FenError(ValueError):
    """Raised for malformed or impossible FEN input; names the bad field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"FEN {field}: {message}")


class IllegalMoveError(ValueError):
    """Raised when a move is not legal in the given position."""

    def __init__(self, move: "Move", reason: str):
        self.move = move
        self.reason = reason
        super().__init__(f"illegal move {move.uci()}: {reason}")


class MoveKind(str, Enum):
    NORMAL = "normal"
    CAPTURE = "capture"
    CASTLE = "castle"
    EN_PASSANT = "en-passant"
    PROMOTION = "promotion"


def square_name(sq: int) -> str:
    return FILES[sq & 7] + str((sq >> 3) + 1)


def square_index(name: str) -> int:
    if len(name) != 2 or name[0] not in FILES or name[1] not in "12345678":
        raise ValueError(f"bad square name {name!r}")
    return (int(name[1]) - 1) * 8 + FILES.index(name[0])


@dataclass(frozen=True, order=True)
class Move:
    """A chess move in coordinate form plus its classification."""

    from_square: int
    to_square: int
    promotion: Optional[str] = None  # 'q' 'r' 'b' 'n'
    kind: MoveKind = MoveKind.NORMAL

    def uci(self) -> str:
        return square_name(self.from_square) + square_name(self.to_square) + (self.promotion or "")

    @staticmethod
    def from_uci(text: str) -> "Move":
        """Parse long-algebraic text; kind defaults to NORMAL until matched
        against a legal move list (see find_move)."""
        if len(text) not in (4, 5):
            raise ValueError(f"bad move text {text!r}")
        promo = None
        if len(text) == 5:
            promo = text[4].lower()
            if promo not in PROMO_CHAR_TO_KIND:
                raise ValueError(f"bad promotion piece in {text!r}")
        return Move(square_index(text[:2]), square_index(text[2:4]), promo)


@dataclass(frozen=True)
class GameStatus:
    state: str  # 'ongoing' | 'checkmate' | 'stalemate' | 'draw-insufficient-material'
    winner: Optional[str] = None  # 'white' | 'black', present iff checkmate

    @property
    def is_over(self) -> bool:
        return self.state != "ongoing"


@dataclass(frozen=True)
class Position:
    """Immutable chess state: placement, side to move, castling rights,
    en-passant target, halfmove clock and fullmove number."""

    board: tuple  # 64 ints, piece encoding above
    white_to_move: bool
    castling: str  # subset of "KQkq" in that order, "" if none
    ep_square: Optional[int]
    halfmove_clock: int
    fullmove_number: int

    def piece_at(self, sq: int) -> int:
        return self.board[sq]

    def piece_count(self) -> int:
        return sum(1 for p in self.board if p != EMPTY)

    @property
    def side_to_move(self) -> str:
        return "white" if self.white_to_move else "black"

    @staticmethod
    def startpos() -> "Position":
        return parse_fen(STARTPOS_FEN)


# ---------------------------------------------------------------------------
# Internal 0x88 board
# ---------------------------------------------------------------------------

KNIGHT_OFFSETS = (-33, -31, -18, -14, 14, 18, 31, 33)
KING_OFFSETS = (-17, -16, -15, -1, 1, 15, 16, 17)
BISHOP_DIRS = (-17, -15, 15, 17)
ROOK_DIRS = (-16, -1, 1, 16)
ALL_DIRS = BISHOP_DIRS + ROOK_DIRS
VALID_88 = tuple(s for s in range(128) if not s & 0x88)

# Internal move flags
F_CAPTURE = 1
F_DOUBLE = 2
F_EP = 4
F_CASTLE = 8
F_PROMO = 16


def _to88(sq64: int) -> int:
    return ((sq64 >> 3) << 4) | (sq64 & 7)


def _to64(sq88: int) -> int:
    return ((sq88 >> 4) << 3) | (sq88 & 7)


class _Board:
    """Mutable 0x88 scratch board used by move generation, search and perft.

    Not part of the public API; Position is the value type callers hold.
    """

    __slots__ = ("sq", "white_to_move", "castling", "ep", "halfmove", "fullmove",
                 "wk", "bk", "_undo")

    def __init__(self, p: Position):
        self.sq = [EMPTY] * 128
        self.wk = -1
        self.bk = -1
        for i, piece in enumerate(p.board):
            if piece != EMPTY:
                s = _to88(i)
                self.sq[s] = piece
                if piece == KING:
                    self.wk = s
                elif piece == -KING:
                    self.bk = s
        self.white_to_move = p.white_to_move
        self.castling = set(p.castling)
        self.ep = _to88(p.ep_square) if p.ep_square is not None else -1
        self.halfmove = p.halfmove_clock
        self.fullmove = p.fullmove_number
        self._undo = []

    def to_position(self) -> Position:
        board = [EMPTY] * 64
        for sq88 in range(128):
            if sq88 & 0x88:
                continue
            board[_to64(sq88)] = self.sq[sq88]
        castling = "".join(c for c in "KQkq" if c in self.castling)
        return Position(
            board=tuple(board),
            white_to_move=self.white_to_move,
            castling=castling,
            ep_square=_to64(self.ep) if self.ep >= 0 else None,
            halfmove_clock=self.halfmove,
            fullmove_number=self.fullmove,
        )

    # -- attack queries ----------------------------------------------------

    def attacked(self, target: int, by_white: bool) -> bool:
        sq = self.sq
        if by_white:
            pawn, knight, king = PAWN, KNIGHT, KING
            for d in (-15, -17):
                f = target + d
                if not (f & 0x88) and sq[f] == pawn:
                    return True
        else:
            pawn, knight, king = -PAWN, -KNIGHT, -KING
            for d in (15, 17):
                f = target + d
                if not (f & 0x88) and sq[f] == pawn:
                    return True
        for d in KNIGHT_OFFSETS:
            f = target + d
            if not (f & 0x88) and sq[f] == knight:
                return True
        for d in KING_OFFSETS:
            f = target + d
            if not (f & 0x88) and sq[f] == king:
                return True
        bishop = BISHOP if by_white else -BISHOP
        rook = ROOK if by_white else -ROOK
        queen = QUEEN if by_white else -QUEEN
        for d in BISHOP_DIRS:
            f = target + d
            while not (f & 0x88):
                piece = sq[f]
                if piece != EMPTY:
                    if piece == bishop or piece == queen:
                        return True
                    break
                f += d
        for d in ROOK_DIRS:
            f = target + d
            while not (f & 0x88):
                piece = sq[f]
                if piece != EMPTY:
                    if piece == rook or piece == queen:
                        return True
                    break
                f += d
        return False

    def in_check(self, white: Optional[bool] = None) -> bool:
        if white is None:
            white = self.white_to_move
        king_sq = self.wk if white else self.bk
        return self.attacked(king_sq, not white)

    # -- pseudo-legal generation --------------------------------------------

    def pseudo_moves(self, for_white: Optional[bool] = None) -> list:
        """Moves obeying piece movement but ignoring king exposure.

        Castle moves are emitted fully legal (rights, empty path, no transit
        through check) so the legality filter can pass them unchecked.
        """
        return list(self.iter_pseudo(for_white))

    def iter_pseudo(self, for_white: Optional[bool] = None):
        if for_white is None:
            for_white = self.white_to_move
        sq = self.sq
        pawn_dir = 16 if for_white else -16
        start_rank = 1 if for_white else 6
        promo_rank = 7 if for_white else 0
        for frm in VALID_88:
            piece = sq[frm]
            if piece == EMPTY or (piece > 0) != for_white:
                continue
            kind = piece if piece > 0 else -piece
            if kind == PAWN:
                one = frm + pawn_dir
                if not (one & 0x88) and sq[one] == EMPTY:
                    if one >> 4 == promo_rank:
                        for pk in (QUEEN, ROOK, BISHOP, KNIGHT):
                            yield (frm, one, pk, F_PROMO)
                    else:
                        yield (frm, one, 0, 0)
                        if frm >> 4 == start_rank:
                            two = one + pawn_dir
                            if sq[two] == EMPTY:
                                yield (frm, two, 0, F_DOUBLE)
                for dd in (pawn_dir - 1, pawn_dir + 1):
                    to = frm + dd
                    if to & 0x88:
                        continue
                    victim = sq[to]
                    if victim != EMPTY and (victim > 0) != for_white:
                        if to >> 4 == promo_rank:
                            for pk in (QUEEN, ROOK, BISHOP, KNIGHT):
                                yield (frm, to, pk, F_PROMO | F_CAPTURE)
                        else:
                            yield (frm, to, 0, F_CAPTURE)
                    elif to == self.ep and for_white == self.white_to_move:
                        yield (frm, to, 0, F_EP | F_CAPTURE)
            elif kind == KNIGHT:
                for d in KNIGHT_OFFSETS:
                    to = frm + d
                    if to & 0x88:
                        continue
                    victim = sq[to]
                    if victim == EMPTY:
                        yield (frm, to, 0, 0)
                    elif (victim > 0) != for_white:
                        yield (frm, to, 0, F_CAPTURE)
            elif kind == KING:
                for d in KING_OFFSETS:
                    to = frm + d
                    if to & 0x88:
                        continue
                    victim = sq[to]
                    if victim == EMPTY:
                        yield (frm, to, 0, 0)
                    elif (victim > 0) != for_white:
                        yield (frm, to, 0, F_CAPTURE)
            else:
                dirs = ROOK_DIRS if kind == ROOK else BISHOP_DIRS if kind == BISHOP else ALL_DIRS
                for d in dirs:
                    to = frm + d
                    while not (to & 0x88):
                        victim = sq[to]
                        if victim == EMPTY:
                            yield (frm, to, 0, 0)
                        else:
                            if (victim > 0) != for_white:
                                yield (frm, to, 0, F_CAPTURE)
                            break
                        to += d
        castles = []
        self._gen_castles(for_white, castles.append)
        yield from castles

    def _gen_castles(self, for_white: bool, add) -> None:
        sq = self.sq
        if for_white:
            if ("K" in self.castling and sq[0x05] == EMPTY and sq[0x06] == EMPTY
                    and not self.attacked(0x04, False) and not self.attacked(0x05, False)
                    and not self.attacked(0x06, False)):
                add((0x04, 0x06, 0, F_CASTLE))
            if ("Q" in self.castling and sq[0x01] == EMPTY and sq[0x02] == EMPTY
                    and sq[0x03] == EMPTY and not self.attacked(0x04, False)
                    and not self.attacked(0x03, False) and not self.attacked(0x02, False)):
                add((0x04, 0x02, 0, F_CASTLE))
        else:
            if ("k" in self.castling and sq[0x75] == EMPTY and sq[0x76] == EMPTY
                    and not self.attacked(0x74, True) and not self.attacked(0x75, True)
                    and not self.attacked(0x76, True)):
                add((0x74, 0x76, 0, F_CASTLE))
            if ("q" in self.castling and sq[0x71] == EMPTY and sq[0x72] == EMPTY
                    and sq[0x73] == EMPTY and not self.attacked(0x74, True)
                    and not self.attacked(0x73, True) and not self.attacked(0x72, True)):
                add((0x74, 0x72, 0, F_CASTLE))

    def count_pseudo_moves(self, for_white: bool) -> int:
        """len(pseudo_moves(for_white)) without building the list."""
        sq = self.sq
        count = 0
        pawn_dir = 16 if for_white else -16
        start_rank = 1 if for_white else 6
        promo_rank = 7 if for_white else 0
        for frm in VALID_88:
            piece = sq[frm]
            if piece == EMPTY or (piece > 0) != for_white:
                continue
            kind = piece if piece > 0 else -piece
            if kind == PAWN:
                one = frm + pawn_dir
                if not (one & 0x88) and sq[one] == EMPTY:
                    count += 4 if one >> 4 == promo_rank else 1
                    if frm >> 4 == start_rank and sq[one + pawn_dir] == EMPTY:
                        count += 1
                for dd in (pawn_dir - 1, pawn_dir + 1):
                    to = frm + dd
                    if to & 0x88:
                        continue
                    victim = sq[to]
                    if victim != EMPTY and (victim > 0) != for_white:
                        count += 4 if to >> 4 == promo_rank else 1
                    elif to == self.ep and for_white == self.white_to_move:
                        count += 1
            elif kind == KNIGHT or kind == KING:
                offs = KNIGHT_OFFSETS if kind == KNIGHT else KING_OFFSETS
                for d in offs:
                    to = frm + d
                    if to & 0x88:
                        continue
                    victim = sq[to]
                    if victim == EMPTY or (victim > 0) != for_white:
                        count += 1
            else:
                dirs = ROOK_DIRS if kind == ROOK else BISHOP_DIRS if kind == BISHOP else ALL_DIRS
                for d in dirs:
                    to = frm + d
                    while not (to & 0x88):
                        victim = sq[to]
                        if victim == EMPTY:
                            count += 1
                        else:
                            if (victim > 0) != for_white:
                                count += 1
                            break
                        to += d
        castles = []
        self._gen_castles(for_white, castles.append)
        return count + len(castles)

    # -- make / unmake -------------------------------------------------------

    def make(self, mv: tuple) -> None:
        frm, to, promo, flags = mv
        sq = self.sq
        piece = sq[frm]
        captured = sq[to]
        cap_sq = to
        if flags & F_EP:
            cap_sq = to - 16 if self.white_to_move else to + 16
            captured = sq[cap_sq]
        self._undo.append((mv, captured, cap_sq, frozenset(self.castling),
                           self.ep, self.halfmove, self.fullmove))
        if captured != EMPTY:
            sq[cap_sq] = EMPTY
        sq[frm] = EMPTY
        sq[to] = (promo if piece > 0 else -promo) if promo else piece
        if piece == KING:
            self.wk = to
            self.castling.discard("K")
            self.castling.discard("Q")
            if flags & F_CASTLE:
                if to == 0x06:
                    sq[0x07] = EMPTY
                    sq[0x05] = ROOK
                else:
                    sq[0x00] = EMPTY
                    sq[0x03] = ROOK
        elif piece == -KING:
            self.bk = to
            self.castling.discard("k")
            self.castling.discard("q")
            if flags & F_CASTLE:
                if to == 0x76:
                    sq[0x77] = EMPTY
                    sq[0x75] = -ROOK
                else:
                    sq[0x70] = EMPTY
                    sq[0x73] = -ROOK
        if frm == 0x00 or cap_sq == 0x00:
            self.castling.discard("Q")
        if frm == 0x07 or cap_sq == 0x07:
            self.castling.discard("K")
        if frm == 0x70 or cap_sq == 0x70:
            self.castling.discard("q")
        if frm == 0x77 or cap_sq == 0x77:
            self.castling.discard("k")
        self.ep = (frm + to) // 2 if flags & F_DOUBLE else -1
        if abs(piece) == PAWN or captured != EMPTY:
            self.halfmove = 0
        else:
            self.halfmove += 1
        if not self.white_to_move:
            self.fullmove += 1
        self.white_to_move = not self.white_to_move

    def unmake(self) -> None:
        mv, captured, cap_sq, castling, ep, halfmove, fullmove = self._undo.pop()
        frm, to, promo, flags = mv
        sq = self.sq
        self.white_to_move = not self.white_to_move
        piece = sq[to]
        if promo:
            piece = PAWN if piece > 0 else -PAWN
        sq[to] = EMPTY
        sq[frm] = piece
        if captured != EMPTY:
            sq[cap_sq] = captured
        if piece == KING:
            self.wk = frm
            if flags & F_CASTLE:
                if to == 0x06:
                    sq[0x05] = EMPTY
                    sq[0x07] = ROOK
                else:
                    sq[0x03] = EMPTY
                    sq[0x00] = ROOK
        elif piece == -KING:
            self.bk = frm
            if flags & F_CASTLE:
                if to == 0x76:
                    sq[0x75] = EMPTY
                    sq[0x77] = -ROOK
                else:
                    sq[0x73] = EMPTY
                    sq[0x70] = -ROOK
        self.castling = set(castling)
        self.ep = ep
        self.halfmove = halfmove
        self.fullmove = fullmove

    # -- strictly legal generation -------------------------------------------

    def _pinned(self) -> dict:
        """Map pinned-square -> normalized ray direction from own king."""
        sq = self.sq
        white = self.white_to_move
        king = self.wk if white else self.bk
        pinned = {}
        for d in ALL_DIRS:
            blocker = -1
            f = king + d
            while not (f & 0x88):
                piece = sq[f]
                if piece != EMPTY:
                    if blocker < 0:
                        if (piece > 0) == white:
                            blocker = f
                        else:
                            break
                    else:
                        if (piece > 0) != white:
                            kind = piece if piece > 0 else -piece
                            if kind == QUEEN or (kind == ROOK and d in ROOK_DIRS) or \
                               (kind == BISHOP and d in BISHOP_DIRS):
                                pinned[blocker] = d
                        break
                f += d
        return pinned

    def legal_moves(self) -> list:
        white = self.white_to_move
        king = self.wk if white else self.bk
        check = self.attacked(king, not white)
        pinned = self._pinned() if not check else None
        out = []
        for mv in self.pseudo_moves():
            frm, to, promo, flags = mv
            if flags & F_CASTLE:
                out.append(mv)  # generated fully legal
                continue
            if check or frm == king or flags & F_EP:
                self.make(mv)
                safe = not self.attacked(self.wk if white else self.bk, not white)
                self.unmake()
                if safe:
                    out.append(mv)
                continue
            d = pinned.get(frm)
            if d is not None:
                diff_dir = _ray_dir(king, to)
                if diff_dir == d:
                    out.append(mv)
                continue
            out.append(mv)
        return out

    def has_legal_move(self) -> bool:
        white = self.white_to_move
        king = self.wk if white else self.bk
        check = self.attacked(king, not white)
        pinned = self._pinned() if not check else None
        # safe to interleave make/unmake with the lazy generator: the board
        # is fully restored before each resumption
        for mv in self.iter_pseudo():
            frm, to, promo, flags = mv
            if flags & F_CASTLE:
                return True
            if check or frm == king or flags & F_EP:
                self.make(mv)
                safe = not self.attacked(self.wk if white else self.bk, not white)
                self.unmake()
                if safe:
                    return True
                continue
            d = pinned.get(frm)
            if d is not None:
                if _ray_dir(king, to) == d:
                    return True
                continue
            return True
        return False

    def perft(self, depth: int) -> int:
        if depth == 0:
            return 1
        moves = self.legal_moves()
        if depth == 1:
            return len(moves)
        total = 0
        for mv in moves:
            self.make(mv)
            total += self.perft(depth - 1)
            self.unmake()
        return total


def _ray_dir(frm: int, to: int) -> Optional[int]:
    """Normalized 0x88 step from frm to to when collinear on a queen ray."""
    diff = to - frm
    if diff == 0:
        return None
    fr, ff = frm >> 4, frm & 7
    tr, tf = to >> 4, to & 7
    dr, df = tr - fr, tf - ff
    if dr == 0:
        return 1 if df > 0 else -1
    if df == 0:
        return 16 if dr > 0 else -16
    if dr == df:
        return 17 if dr > 0 else -17
    if dr == -df:
        return 15 if dr > 0 else -15
    return None


def _internal_to_move(mv: tuple) -> Move:
    frm, to, promo, flags = mv
    if flags & F_CASTLE:
        kind = MoveKind.CASTLE
    elif flags & F_EP:
        kind = MoveKind.EN_PASSANT
    elif flags & F_PROMO:
        kind = MoveKind.PROMOTION
    elif flags & F_CAPTURE:
        kind = MoveKind.CAPTURE
    else:
        kind = MoveKind.NORMAL
    return Move(_to64(frm), _to64(to), PROMO_KIND_TO_CHAR.get(promo), kind)


def _move_sort_key(m: Move):
    return (m.from_square, m.to_square, m.promotion or "")


# ---------------------------------------------------------------------------
# FEN
# ---------------------------------------------------------------------------

def parse_fen(text: str) -> Position:
    """Parse a 6-field FEN record into a validated Position."""
    if not isinstance(text, str) or not text.strip():
        raise FenError("record", "empty input")
    fields = text.split()
    if len(fields) != 6:
        raise FenError("record", f"expected 6 fields, got {len(fields)}")
    placement, stm, castling, ep, halfmove, fullmove = fields

    ranks = placement.split("/")
    if len(ranks) != 8:
        raise FenError("placement", f"expected 8 ranks, got {len(ranks)}")
    board = [EMPTY] * 64
    for rank_idx, row in enumerate(ranks):
        rank = 7 - rank_idx
        file_idx = 0
        for ch in row:
            if ch.isdigit():
                n = int(ch)
                if n < 1 or n > 8:
                    raise FenError("placement", f"bad empty-count {ch!r} in rank {rank + 1}")
                file_idx += n
            elif ch in CHAR_TO_PIECE:
                if file_idx >= 8:
                    raise FenError("placement", f"rank width exceeds 8 in rank {rank + 1}")
                board[rank * 8 + file_idx] = CHAR_TO_PIECE[ch]
                file_idx += 1
            else:
                raise FenError("placement", f"bad piece char {ch!r}")
        if file_idx != 8:
            raise FenError("placement", f"rank width {file_idx} != 8 in rank {rank + 1}")

    if stm not in ("w", "b"):
        raise FenError("side-to-move", f"expected 'w' or 'b', got {stm!r}")
    white_to_move = stm == "w"

    if castling != "-":
        seen = set()
        for ch in castling:
            if ch not in "KQkq" or ch in seen:
                raise FenError("castling", f"bad rights {castling!r}")
            seen.add(ch)
        castling_norm = "".join(c for c in "KQkq" if c in seen)
    else:
        castling_norm = ""

    ep_square: Optional[int] = None
    if ep != "-":
        try:
            ep_square = square_index(ep)
        except ValueError:
            raise FenError("en-passant", f"bad square {ep!r}")

    try:
        halfmove_i = int(halfmove)
        if halfmove_i < 0:
            raise ValueError
    except ValueError:
        raise FenError("halfmove-clock", f"expected non-negative integer, got {halfmove!r}")
    try:
        fullmove_i = int(fullmove)
        if fullmove_i < 1:
            raise ValueError
    except ValueError:
        raise FenError("fullmove-number", f"expected positive integer, got {fullmove!r}")

    p = Position(
        board=tuple(board),
        white_to_move=white_to_move,
        castling=castling_norm,
        ep_square=ep_square,
        halfmove_clock=halfmove_i,
        fullmove_number=fullmove_i,
    )
    _validate(p)
    return p


def _validate(p: Position) -> None:
    board = p.board
    wk = [i for i in range(64) if board[i] == KING]
    bk = [i for i in range(64) if board[i] == -KING]
    if len(wk) != 1 or len(bk) != 1:
        raise FenError("placement", f"need exactly one king per color, got {len(wk)}W/{len(bk)}B")
    for i in range(8):
        if abs(board[i]) == PAWN or abs(board[56 + i]) == PAWN:
            raise FenError("placement", "pawn on rank 1 or 8")

    for flag, ksq, rsq, kpiece, rpiece in (
        ("K", 4, 7, KING, ROOK), ("Q", 4, 0, KING, ROOK),
        ("k", 60, 63, -KING, -ROOK), ("q", 60, 56, -KING, -ROOK),
    ):
        if flag in p.castling and (board[ksq] != kpiece or board[rsq] != rpiece):
            raise FenError("castling", f"right {flag!r} inconsistent with piece placement")

    if p.ep_square is not None:
        rank = p.ep_square >> 3
        if p.white_to_move:
            # black just double-pushed: ep target on rank 6 (index 5)
            if rank != 5:
                raise FenError("en-passant", "target square must be on rank 6 when white moves")
            pawn_sq, crossed, origin = p.ep_square - 8, p.ep_square, p.ep_square + 8
            if board[pawn_sq] != -PAWN or board[crossed] != EMPTY or board[origin] != EMPTY:
                raise FenError("en-passant", "no matching double pawn push")
        else:
            if rank != 2:
                raise FenError("en-passant", "target square must be on rank 3 when black moves")
            pawn_sq, crossed, origin = p.ep_square + 8, p.ep_square, p.ep_square - 8
            if board[pawn_sq] != PAWN or board[crossed] != EMPTY or board[origin] != EMPTY:
                raise FenError("en-passant", "no matching double pawn push")

    b = _Board(p)
    if b.attacked(b.bk if p.white_to_move else b.wk, p.white_to_move):
        raise FenError("placement", "side not to move is in check")


def to_fen(p: Position) -> str:
    """Serialize a Position to its canonical FEN."""
    rows = []
    for rank in range(7, -1, -1):
        row = []
        run = 0
        for file in range(8):
            piece = p.board[rank * 8 + file]
            if piece == EMPTY:
                run += 1
            else:
                if run:
                    row.append(str(run))
                    run = 0
                row.append(PIECE_TO_CHAR[piece])
        if run:
            row.append(str(run))
        rows.append("".join(row))
    return " ".join((
        "/".join(rows),
        "w" if p.white_to_move else "b",
        p.castling or "-",
        square_name(p.ep_square) if p.ep_square is not None else "-",
        str(p.halfmove_clock),
        str(p.fullmove_number),
    ))


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def legal_moves(p: Position) -> list[Move]:
    """All strictly legal moves, sorted by (origin, destination, promotion)."""
    b = _Board(p)
    moves = [_internal_to_move(mv) for mv in b.legal_moves()]
    moves.sort(key=_move_sort_key)
    return moves


def find_move(p: Position, uci_text: str) -> Move:
    """Resolve long-algebraic text against the legal move list."""
    probe = Move.from_uci(uci_text)
    for m in legal_moves(p):
        if (m.from_square == probe.from_square and m.to_square == probe.to_square
                and m.promotion == probe.promotion):
            return m
    raise IllegalMoveError(probe, "not a legal move in this position")


def apply_move(p: Position, m: Move) -> Position:
    """Apply a legal move, returning the successor position."""
    b = _Board(p)
    for mv in b.legal_moves():
        cand = _internal_to_move(mv)
        if (cand.from_square == m.from_square and cand.to_square == m.to_square
                and cand.promotion == m.promotion):
            b.make(mv)
            return b.to_position()
    raise IllegalMoveError(m, "not a legal move in this position")


def in_check(p: Position) -> bool:
    return _Board(p).in_check()


def game_status(p: Position) -> GameStatus:
    b = _Board(p)
    if not b.has_legal_move():
        if b.in_check():
            return GameStatus("checkmate", winner="black" if p.white_to_move else "white")
        return GameStatus("stalemate")
    if _insufficient_material(p):
        return GameStatus("draw-insufficient-material")
    return GameStatus("ongoing")


def _insufficient_material(p: Position) -> bool:
    # K vs K, K+minor vs K, K+minor vs K+minor with same-colored bishops.
    white_minors, black_minors = [], []
    for i, piece in enumerate(p.board):
        if piece in (EMPTY, KING, -KING):
            continue
        kind = abs(piece)
        if kind in (PAWN, ROOK, QUEEN):
            return False
        (white_minors if piece > 0 else black_minors).append((kind, i))
    total = len(white_minors) + len(black_minors)
    if total <= 1:
        return True
    if len(white_minors) == 1 and len(black_minors) == 1:
        (wkind, wsq), (bkind, bsq) = white_minors[0], black_minors[0]
        if wkind == BISHOP and bkind == BISHOP:
            return (wsq // 8 + wsq % 8) % 2 == (bsq // 8 + bsq % 8) % 2
    return False


def to_san(p: Position, m: Move) -> str:
    """Standard algebraic notation with disambiguation and +/# suffixes."""
    legal = legal_moves(p)
    if m not in legal:
        # Allow kind-agnostic lookups: match on coordinates + promotion.
        matches = [x for x in legal if x.from_square == m.from_square
                   and x.to_square == m.to_square and x.promotion == m.promotion]
        if not matches:
            raise IllegalMoveError(m, "not a legal move in this position")
        m = matches[0]

    piece = p.board[m.from_square]
    kind = abs(piece)
    if m.kind == MoveKind.CASTLE:
        core = "O-O" if m.to_square & 7 == 6 else "O-O-O"
    elif kind == PAWN:
        is_capture = m.kind in (MoveKind.CAPTURE, MoveKind.EN_PASSANT) or (
            m.kind == MoveKind.PROMOTION and p.board[m.to_square] != EMPTY)
        core = ""
        if is_capture:
            core += FILES[m.from_square & 7] + "x"
        core += square_name(m.to_square)
        if m.promotion:
            core += "=" + m.promotion.upper()
    else:
        letter = PIECE_TO_CHAR[kind]
        rivals = [x for x in legal
                  if x.to_square == m.to_square and x.from_square != m.from_square
                  and abs(p.board[x.from_square]) == kind]
        disamb = ""
        if rivals:
            same_file = any((x.from_square & 7) == (m.from_square & 7) for x in rivals)
            same_rank = any((x.from_square >> 3) == (m.from_square >> 3) for x in rivals)
            if not same_file:
                disamb = FILES[m.from_square & 7]
            elif not same_rank:
                disamb = str((m.from_square >> 3) + 1)
            else:
                disamb = square_name(m.from_square)
        capture = "x" if p.board[m.to_square] != EMPTY else ""
        core = letter + disamb + capture + square_name(m.to_square)

    after = apply_move(p, m)
    status = game_status(after)
    if status.state == "checkmate":
        return core + "#"
    if in_check(after):
        return core + "+"
    return core


def perft(p: Position, depth: int) -> int:
    """Count leaf nodes of the legal-move tree at exactly `depth`."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    return _Board(p).perft(depth)
