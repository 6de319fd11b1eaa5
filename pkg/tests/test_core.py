import random

import pytest

import curated
import oracle_chess as oc
from oracle_search import mirror_fen, roundtrip

from chesscoach.calibration import random_position
from chesscoach.core import (
    STARTPOS_FEN, FenError, IllegalMoveError, Move, MoveKind, Position,
    apply_move, find_move, game_status, legal_moves, parse_fen, perft,
    to_fen, to_san,
)


# ---------------------------------------------------------------------------
# FEN parsing
# ---------------------------------------------------------------------------

def test_parse_startpos():
    p = parse_fen(STARTPOS_FEN)
    assert p.piece_count() == 32
    assert p.white_to_move
    assert p.castling == "KQkq"
    assert p.ep_square is None


def test_parse_two_king_minimal_board():
    p = parse_fen("8/8/8/8/8/8/8/K6k w - - 0 1")
    assert p.piece_count() == 2
    assert game_status(p).state != "checkmate"


def test_parse_rank_width_error():
    with pytest.raises(FenError) as err:
        parse_fen("8/8/8/8/8/8/8/RNBQKBNRR w - - 0 1")
    assert err.value.field == "placement"
    assert "width" in str(err.value)


@pytest.mark.parametrize("fen,field", [
    ("8/8/8/8/8/8/8/K6k w - -", "record"),                    # 5 fields
    ("8/8/8/8/8/8/8/K6k x - - 0 1", "side-to-move"),
    ("8/8/8/8/8/8/8/K6k w KK - 0 1", "castling"),
    ("8/8/8/8/8/8/8/K6k w - e9 0 1", "en-passant"),
    ("8/8/8/8/8/8/8/K6k w - e4 0 1", "en-passant"),            # wrong rank
    ("8/8/8/8/8/8/8/K6k w - - -1 1", "halfmove-clock"),
    ("8/8/8/8/8/8/8/K6k w - - 0 0", "fullmove-number"),
    ("8/8/8/8/8/8/8/7k w - - 0 1", "placement"),               # missing king
    ("K7/8/8/8/8/8/8/K6k w - - 0 1", "placement"),             # two white kings
    ("P7/8/8/8/8/8/8/K6k w - - 0 1", "placement"),             # pawn on rank 8
    ("8/8/8/8/8/8/8/Kk6 w - - 0 1", "placement"),              # adjacent kings
    ("8/8/8/8/8/8/8/K5kR w - - 0 1", "placement"),             # side not to move in check
])
def test_parse_errors_name_the_field(fen, field):
    with pytest.raises(FenError) as err:
        parse_fen(fen)
    assert err.value.field == field


def test_parse_accepts_consistent_lone_castling_right():
    parse_fen("r3k3/8/8/8/8/8/8/K7 w q - 0 1")


def test_parse_rejects_inconsistent_castling_rights():
    with pytest.raises(FenError) as err:
        parse_fen("4k3/8/8/8/8/8/8/K6R w K - 0 1")  # white king not on e1
    assert err.value.field == "castling"


def test_parse_validates_ep_square_consistency():
    # ep square must sit behind a pawn that just double-pushed
    parse_fen("rnbqkbnr/pppppppp/8/8/4P3/8/8/RNBQKBNR b KQkq e3 0 1")
    with pytest.raises(FenError):
        parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR b KQkq e3 0 1")


# ---------------------------------------------------------------------------
# FEN serialization
# ---------------------------------------------------------------------------

def test_roundtrip_startpos():
    assert roundtrip(STARTPOS_FEN) == STARTPOS_FEN


def test_roundtrip_preserves_halfmove_clock():
    fen = "k7/8/8/8/8/8/8/K6R w - - 99 3"
    assert roundtrip(fen) == fen


def test_fen_after_double_push_emits_ep_square():
    p = parse_fen(STARTPOS_FEN)
    after = apply_move(p, find_move(p, "e2e4"))
    # classic FEN: the en-passant target is the square the pawn crossed
    assert to_fen(after) == "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1"
    state = oc.apply(oc.from_fen(STARTPOS_FEN),
                     ((4, 1), (4, 3), None, "double"))
    assert state.ep == (4, 2)  # oracle agrees: e3


def test_roundtrip_random_positions():
    rng = random.Random(11)
    for _ in range(50):
        p = random_position((2, 32), rng=rng)
        fen = to_fen(p)
        assert to_fen(parse_fen(fen)) == fen
        assert parse_fen(fen) == p


# ---------------------------------------------------------------------------
# Move generation
# ---------------------------------------------------------------------------

def test_startpos_has_twenty_moves():
    assert len(legal_moves(parse_fen(STARTPOS_FEN))) == 20


def test_moves_sorted_and_duplicate_free():
    p = parse_fen(STARTPOS_FEN)
    moves = legal_moves(p)
    keys = [(m.from_square, m.to_square, m.promotion or "") for m in moves]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)


def test_rook_endgame_move_list():
    p = parse_fen(curated.ROOK_CHECK_ESCAPES)
    ucis = {m.uci() for m in legal_moves(p)}
    assert "h1h8" in ucis
    assert "a1a2" in ucis and "a1b1" in ucis and "a1b2" in ucis


def test_stalemated_side_has_no_moves():
    p = parse_fen(curated.STALEMATE_BLACK)
    assert legal_moves(p) == []


def test_king_never_left_in_check():
    rng = random.Random(5)
    for _ in range(20):
        p = random_position((3, 10), rng=rng)
        for m in legal_moves(p):
            after = apply_move(p, m)
            b = oc.from_fen(to_fen(after))
            mover = "w" if p.white_to_move else "b"
            assert not oc.in_check(b, mover), (to_fen(p), m.uci())


def test_legal_moves_agree_with_oracle():
    rng = random.Random(23)
    for _ in range(12):
        p = random_position((3, 10), rng=rng)
        mine = sorted(m.uci() for m in legal_moves(p))
        theirs = sorted(oc.move_uci(m) for m in oc.legal_moves(oc.from_fen(to_fen(p))))
        assert mine == theirs, to_fen(p)


# ---------------------------------------------------------------------------
# apply_move
# ---------------------------------------------------------------------------

def test_apply_move_is_pure():
    p = parse_fen(STARTPOS_FEN)
    before = (p.board, p.white_to_move, p.castling, p.ep_square)
    apply_move(p, find_move(p, "g1f3"))
    assert (p.board, p.white_to_move, p.castling, p.ep_square) == before


def test_apply_rejects_illegal_move():
    p = parse_fen(STARTPOS_FEN)
    with pytest.raises(IllegalMoveError) as err:
        apply_move(p, Move.from_uci("e2e5"))
    assert err.value.move.uci() == "e2e5"


def test_castling_clears_rights():
    p = parse_fen("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1")
    after = apply_move(p, find_move(p, "e1g1"))
    assert after.castling == "kq"
    assert after.board[5] != 0 and after.board[6] != 0  # rook f1, king g1


def test_en_passant_capture_removes_bypassed_pawn():
    p = parse_fen(curated.EN_PASSANT_BOARD)
    m = find_move(p, "e5d6")
    assert m.kind == MoveKind.EN_PASSANT
    after = apply_move(p, m)
    d5 = 4 * 8 + 3
    assert after.board[d5] == 0
    assert after.piece_count() == p.piece_count() - 1


def test_halfmove_and_fullmove_bookkeeping():
    p = parse_fen("k7/8/8/8/8/8/8/K6R w - - 4 10")
    after = apply_move(p, find_move(p, "h1h2"))  # quiet rook move
    assert after.halfmove_clock == 5
    assert after.fullmove_number == 10
    after2 = apply_move(after, find_move(after, "a8b8"))
    assert after2.fullmove_number == 11


# ---------------------------------------------------------------------------
# game_status
# ---------------------------------------------------------------------------

def test_status_startpos_ongoing():
    assert game_status(parse_fen(STARTPOS_FEN)).state == "ongoing"


def test_status_back_rank_checkmate():
    status = game_status(parse_fen(curated.BACK_RANK_MATED))
    assert status.state == "checkmate"
    assert status.winner == "white"


def test_status_stalemate():
    status = game_status(parse_fen(curated.STALEMATE_BLACK))
    assert status.state == "stalemate"
    assert status.winner is None


@pytest.mark.parametrize("fen,drawn", [
    ("8/8/8/8/8/8/8/K6k w - - 0 1", True),                   # K vs K
    ("8/8/8/8/8/8/8/KB5k w - - 0 1", True),                  # K+B vs K
    ("8/8/8/8/8/8/8/KN5k w - - 0 1", True),                  # K+N vs K
    ("kb6/8/8/8/8/8/8/KB5b w - - 0 1", False),               # two black minors
    ("kb6/8/8/8/8/8/8/K1B5 w - - 0 1", True),                # same-colored bishops (b8, c1)
    ("k1b5/8/8/8/8/8/8/K1B5 w - - 0 1", False),              # opposite-colored bishops (c8, c1)
    ("k1n5/8/8/8/8/8/8/K1N5 w - - 0 1", False),              # knight vs knight
    ("k7/p7/8/8/8/8/8/K7 w - - 0 1", False),                 # pawn present
])
def test_insufficient_material_rules(fen, drawn):
    assert (game_status(parse_fen(fen)).state == "draw-insufficient-material") == drawn


# ---------------------------------------------------------------------------
# SAN
# ---------------------------------------------------------------------------

def test_san_simple_pawn_and_knight():
    p = parse_fen(STARTPOS_FEN)
    assert to_san(p, find_move(p, "e2e4")) == "e4"
    assert to_san(p, find_move(p, "g1f3")) == "Nf3"


def test_san_knight_ambiguity_uses_file():
    p = parse_fen("k7/8/8/8/8/8/8/N1N4K w - - 0 1")
    assert to_san(p, find_move(p, "a1b3")) == "Nab3"
    assert to_san(p, find_move(p, "c1b3")) == "Ncb3"


def test_san_rank_disambiguation():
    p = parse_fen("1k5K/8/8/8/R7/8/8/R7 w - - 0 1")
    assert to_san(p, find_move(p, "a1a2")) == "R1a2"
    assert to_san(p, find_move(p, "a4a2")) == "R4a2"


def test_san_mate_and_check_suffixes():
    p = parse_fen(curated.BACK_RANK_MATE_IN_1)
    assert to_san(p, find_move(p, "e1e8")) == "Re8#"
    q = parse_fen(curated.ROOK_CHECK_ESCAPES)
    assert to_san(q, find_move(q, "h1h8")) == "Rh8+"


def test_san_castle_capture_promotion_ep():
    p = parse_fen("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1")
    assert to_san(p, find_move(p, "e1g1")) == "O-O"
    assert to_san(p, find_move(p, "e1c1")) == "O-O-O"
    q = parse_fen(curated.PAWN_CAPTURE_BOARD)
    assert to_san(q, find_move(q, "e4d5")) == "exd5"
    r = parse_fen("4k3/P7/8/8/8/8/8/4K3 w - - 0 1")
    assert to_san(r, find_move(r, "a7a8q")) == "a8=Q+"
    s = parse_fen(curated.EN_PASSANT_BOARD)
    assert to_san(s, find_move(s, "e5d6")) == "exd6"


def test_san_rejects_illegal_move():
    p = parse_fen(STARTPOS_FEN)
    with pytest.raises(IllegalMoveError):
        to_san(p, Move.from_uci("e2e5"))


# ---------------------------------------------------------------------------
# perft
# ---------------------------------------------------------------------------

PUBLISHED = [
    (STARTPOS_FEN, {1: 20, 2: 400, 3: 8902, 4: 197281}),
    ("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
     {1: 48, 2: 2039, 3: 97862}),
    ("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1", {1: 14, 2: 191, 3: 2812, 4: 43238}),
    ("r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
     {1: 6, 2: 264, 3: 9467}),
    ("rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8",
     {1: 44, 2: 1486, 3: 62379}),
    ("r4rk1/1pp1qppp/p1np1n2/2b1p1B1/2B1P1b1/P1NP1N2/1PP1QPPP/R4RK1 w - - 0 10",
     {1: 46, 2: 2079, 3: 89890}),
]


@pytest.mark.parametrize("fen,expected", PUBLISHED, ids=[f[0].split()[0][:18] for f in PUBLISHED])
def test_perft_published_tables(fen, expected):
    p = parse_fen(fen)
    for depth, count in expected.items():
        assert perft(p, depth) == count


def test_perft_depth_zero_is_one():
    assert perft(parse_fen(curated.STALEMATE_BLACK), 0) == 1


def test_perft_terminal_position_is_zero():
    p = parse_fen(curated.STALEMATE_BLACK)
    assert perft(p, 1) == 0
    assert perft(p, 2) == 0


def test_perft_agrees_with_naive_oracle():
    rng = random.Random(17)
    for _ in range(6):
        p = random_position((4, 8), rng=rng)
        fen = to_fen(p)
        state = oc.from_fen(fen)
        for depth in (1, 2):
            assert perft(p, depth) == oc.perft(state, depth), (fen, depth)


def test_mirror_positions_have_mirrored_move_sets():
    rng = random.Random(29)
    for _ in range(8):
        p = random_position((3, 9), rng=rng)
        fen = to_fen(p)
        mirrored = parse_fen(mirror_fen(fen))
        from oracle_search import mirror_move_uci
        mine = sorted(m.uci() for m in legal_moves(p))
        theirs = sorted(mirror_move_uci(m.uci()) for m in legal_moves(mirrored))
        assert mine == theirs
