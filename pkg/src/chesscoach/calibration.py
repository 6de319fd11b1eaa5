"""Per-factor Z-score statistics from randomly sampled legal positions.

Sampling draws a piece count uniformly from the requested range, then
rejection-samples placements until the position is playable. The staged
schedule (default 30, 60, 120) grows one deterministic sample stream and
records the stage-to-stage drift of every factor's mean and standard
deviation so convergence is auditable.
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    BISHOP, EMPTY, KING, KNIGHT, PAWN, QUEEN, ROOK,
    Position, _Board,
)
from .evaluator import FACTOR_REGISTRY, DEFAULT_CONFIG, EvalConfig, _factor_dict

SIGMA_FLOOR = 1e-6
TABLE_VERSION = 1
DEFAULT_SCHEDULE = (30, 60, 120)
DEFAULT_PIECE_RANGE = (2, 32)
CONVERGENCE_RTOL = 0.05

_NON_KING_KINDS = (PAWN, KNIGHT, BISHOP, ROOK, QUEEN)


@dataclass(frozen=True)
class FactorStats:
    mean: float
    std: float  # population standard deviation, floored at SIGMA_FLOOR
    count: int


@dataclass(frozen=True)
class NormalizedFactor:
    name: str
    raw: float
    z: float
    source: str = "utility"


@dataclass(frozen=True)
class StageDelta:
    """Drift of one factor between consecutive schedule stages."""

    samples: int
    factor: str
    delta_mean: float
    delta_std: float
    converged: bool


@dataclass(frozen=True)
class CalibrationTable:
    stats: dict  # factor name -> FactorStats
    seed: int
    schedule: tuple
    piece_range: tuple
    flags: dict = field(default_factory=dict)  # factor name -> tuple of flags
    stage_deltas: tuple = ()
    version: int = TABLE_VERSION


class CalibrationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Random position sampling
# ---------------------------------------------------------------------------

def random_position(piece_range: tuple = DEFAULT_PIECE_RANGE,
                    seed: Optional[int] = None,
                    rng: Optional[random.Random] = None) -> Position:
    """A playable random position with its piece count drawn uniformly
    from piece_range. No castling rights, no en-passant square."""
    lo, hi = piece_range
    if lo < 2 or hi > 32 or lo > hi:
        raise CalibrationError(f"piece range must lie within [2, 32], got {piece_range}")
    if rng is None:
        rng = random.Random(seed)
    count = rng.randint(lo, hi)
    while True:
        p = _try_place(rng, count)
        if p is not None:
            return p


def _try_place(rng: random.Random, count: int) -> Optional[Position]:
    squares = rng.sample(range(64), count)
    board = [EMPTY] * 64
    wk_sq, bk_sq = squares[0], squares[1]
    if max(abs((wk_sq >> 3) - (bk_sq >> 3)), abs((wk_sq & 7) - (bk_sq & 7))) <= 1:
        return None
    board[wk_sq] = KING
    board[bk_sq] = -KING
    pawns = {1: 0, -1: 0}
    for sq in squares[2:]:
        sign = 1 if rng.random() < 0.5 else -1
        kind = rng.choice(_NON_KING_KINDS)
        if kind == PAWN:
            if pawns[sign] >= 8 or sq < 8 or sq >= 56:
                return None
            pawns[sign] += 1
        board[sq] = sign * kind
    p = Position(
        board=tuple(board),
        white_to_move=rng.random() < 0.5,
        castling="",
        ep_square=None,
        halfmove_clock=0,
        fullmove_number=1,
    )
    b = _Board(p)
    # side not to move must not be in check; mover must have a move to play
    if b.attacked(b.bk if p.white_to_move else b.wk, p.white_to_move):
        return None
    if not b.has_legal_move():
        return None
    return p


# ---------------------------------------------------------------------------
# Table construction
# ---------------------------------------------------------------------------

def factor_samples(n: int, seed: int,
                   piece_range: tuple = DEFAULT_PIECE_RANGE,
                   config: EvalConfig = DEFAULT_CONFIG) -> list[dict]:
    """Factor vectors of n positions from the deterministic sample stream."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        p = random_position(piece_range, rng=rng)
        out.append(_factor_dict(_Board(p), config))
    return out


def calibrate(schedule: tuple = DEFAULT_SCHEDULE,
              seed: int = 0,
              piece_range: tuple = DEFAULT_PIECE_RANGE,
              config: EvalConfig = DEFAULT_CONFIG) -> CalibrationTable:
    """Run the staged sampling schedule and build the final-stage table."""
    if not schedule:
        raise CalibrationError("schedule must be non-empty")
    if list(schedule) != sorted(set(schedule)):
        raise CalibrationError("schedule must be strictly increasing")
    samples = factor_samples(schedule[-1], seed, piece_range, config)

    deltas = []
    prev: Optional[dict] = None
    final_stats: dict = {}
    for stage_n in schedule:
        stage = {
            name: (
                float(statistics.mean(s[name] for s in samples[:stage_n])),
                float(statistics.pstdev(s[name] for s in samples[:stage_n])),
            )
            for name in FACTOR_REGISTRY
        }
        if prev is not None:
            for name in FACTOR_REGISTRY:
                d_mean = abs(stage[name][0] - prev[name][0])
                d_std = abs(stage[name][1] - prev[name][1])
                converged = (
                    d_mean <= CONVERGENCE_RTOL * max(abs(prev[name][0]), 1.0)
                    and d_std <= CONVERGENCE_RTOL * max(prev[name][1], 1.0)
                )
                deltas.append(StageDelta(stage_n, name, d_mean, d_std, converged))
        prev = stage
        final_stats = stage

    stats = {}
    flags = {}
    for name in FACTOR_REGISTRY:
        mean, std = final_stats[name]
        factor_flags = ()
        if std < SIGMA_FLOOR:
            std = SIGMA_FLOOR
            factor_flags = ("sigma-floor",)
        stats[name] = FactorStats(mean=mean, std=std, count=schedule[-1])
        flags[name] = factor_flags
    return CalibrationTable(
        stats=stats,
        seed=seed,
        schedule=tuple(schedule),
        piece_range=tuple(piece_range),
        flags=flags,
        stage_deltas=tuple(deltas),
    )


def zscore(factors: dict, table: CalibrationTable) -> list[NormalizedFactor]:
    """(w - mean) / std per factor, preserving input order."""
    out = []
    for name, raw in factors.items():
        if name not in table.stats:
            raise CalibrationError(f"factor {name!r} has no calibration stats")
        st = table.stats[name]
        out.append(NormalizedFactor(name=name, raw=raw, z=(raw - st.mean) / st.std))
    return out


# ---------------------------------------------------------------------------
# Persistence (plain-text key-value, bitwise reproducible)
# ---------------------------------------------------------------------------

def dump_table(table: CalibrationTable) -> str:
    lines = [
        "# factor calibration table",
        f"version: {table.version}",
        f"seed: {table.seed}",
        f"schedule: {','.join(str(n) for n in table.schedule)}",
        f"piece-range: {table.piece_range[0]},{table.piece_range[1]}",
    ]
    for name in FACTOR_REGISTRY:
        st = table.stats[name]
        flags = ",".join(table.flags.get(name, ()))
        lines.append(
            f"factor: {name} mean={st.mean!r} std={st.std!r} n={st.count} flags={flags}")
    for d in table.stage_deltas:
        lines.append(
            f"delta: stage={d.samples} factor={d.factor} "
            f"dmean={d.delta_mean!r} dstd={d.delta_std!r} converged={str(d.converged).lower()}")
    return "\n".join(lines) + "\n"


def save_table(table: CalibrationTable, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_table(table))


def load_table(path: str) -> CalibrationTable:
    meta: dict = {}
    stats: dict = {}
    flags: dict = {}
    deltas: list = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, rest = line.partition(":")
            key, rest = key.strip(), rest.strip()
            if key in ("version", "seed"):
                meta[key] = int(rest)
            elif key == "schedule":
                meta[key] = tuple(int(x) for x in rest.split(","))
            elif key == "piece-range":
                lo, hi = rest.split(",")
                meta[key] = (int(lo), int(hi))
            elif key == "factor":
                parts = rest.split()
                name = parts[0]
                kv = dict(item.split("=", 1) for item in parts[1:])
                stats[name] = FactorStats(
                    mean=float(kv["mean"]), std=float(kv["std"]), count=int(kv["n"]))
                flags[name] = tuple(f for f in kv.get("flags", "").split(",") if f)
            elif key == "delta":
                kv = dict(item.split("=", 1) for item in rest.split())
                deltas.append(StageDelta(
                    samples=int(kv["stage"]), factor=kv["factor"],
                    delta_mean=float(kv["dmean"]), delta_std=float(kv["dstd"]),
                    converged=kv["converged"] == "true"))
            else:
                raise CalibrationError(f"unknown table line: {line!r}")
    missing = [name for name in FACTOR_REGISTRY if name not in stats]
    if missing:
        raise CalibrationError(f"table missing factors: {missing}")
    return CalibrationTable(
        stats=stats,
        seed=meta.get("seed", 0),
        schedule=meta.get("schedule", ()),
        piece_range=meta.get("piece-range", DEFAULT_PIECE_RANGE),
        flags=flags,
        stage_deltas=tuple(deltas),
        version=meta.get("version", TABLE_VERSION),
    )
