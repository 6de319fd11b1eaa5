"""Bridge to an external UCI engine over stdio.

Optional substitute for the internal evaluator: multi-PV search supplies
move rankings with the same ordering contract as rank_moves, and engines
exposing a static-eval trace can feed the factor registry through a
per-engine mapping config. One request in flight per handle; the full
line transcript is kept for diagnostics.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .core import Position, legal_moves, to_fen
from .evaluator import FACTOR_REGISTRY, MATE_BASE, ScoredMove, _mate_distance


class UciError(RuntimeError):
    pass


class UciTimeoutError(UciError):
    pass


class UciProtocolError(UciError):
    pass


class UciCapabilityError(UciError):
    pass


class UciBusyError(UciError):
    pass


DEFAULT_TIMEOUT = 10.0


@dataclass
class EngineHandle:
    process: subprocess.Popen
    name: str
    supports_multipv: bool
    supports_eval: bool
    transcript: list = field(default_factory=list)
    _lines: queue.Queue = field(default_factory=queue.Queue)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def transcript_tail(self, n: int = 12) -> str:
        return "\n".join(self.transcript[-n:])


def _reader(process: subprocess.Popen, sink: queue.Queue) -> None:
    for line in process.stdout:
        sink.put(line.rstrip("\n"))
    sink.put(None)


def _send(h: EngineHandle, text: str) -> None:
    h.transcript.append(f">> {text}")
    try:
        h.process.stdin.write(text + "\n")
        h.process.stdin.flush()
    except (BrokenPipeError, OSError) as exc:
        raise UciProtocolError(
            f"engine pipe closed while sending {text!r}\n{h.transcript_tail()}") from exc


def _read_line(h: EngineHandle, deadline: float) -> str:
    remaining = deadline - time.monotonic()
    if remaining <= 0:
        raise UciTimeoutError(f"engine reply timed out\n{h.transcript_tail()}")
    try:
        line = h._lines.get(timeout=remaining)
    except queue.Empty:
        raise UciTimeoutError(f"engine reply timed out\n{h.transcript_tail()}") from None
    if line is None:
        raise UciProtocolError(f"engine closed its output\n{h.transcript_tail()}")
    h.transcript.append(f"<< {line}")
    return line


def connect(command, options: Optional[dict] = None,
            timeout: float = DEFAULT_TIMEOUT) -> EngineHandle:
    """Start the engine and complete the UCI handshake.

    command is an argv list (or a single executable path). Unknown lines
    before 'uciok' are ignored per UCI tolerance.
    """
    argv = command if isinstance(command, (list, tuple)) else [command]
    try:
        process = subprocess.Popen(
            list(argv), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, text=True, bufsize=1)
    except OSError as exc:
        raise UciError(f"cannot start engine {argv!r}: {exc}") from exc
    h = EngineHandle(process=process, name="", supports_multipv=False,
                     supports_eval=False)
    threading.Thread(target=_reader, args=(process, h._lines), daemon=True).start()

    deadline = time.monotonic() + timeout
    try:
        _send(h, "uci")
        while True:
            line = _read_line(h, deadline)
            if line.startswith("id name "):
                h.name = line[len("id name "):].strip()
            elif line.startswith("option name MultiPV"):
                h.supports_multipv = True
            elif line.startswith("option name EvalTrace"):
                h.supports_eval = True
            elif line.strip() == "uciok":
                break
        for key, value in (options or {}).items():
            _send(h, f"setoption name {key} value {value}")
        _send(h, "isready")
        while _read_line(h, deadline).strip() != "readyok":
            pass
    except UciError:
        process.kill()
        raise
    return h


def close(h: EngineHandle) -> None:
    try:
        _send(h, "quit")
    except UciError:
        pass
    try:
        h.process.wait(timeout=2)
    except subprocess.TimeoutExpired:
        h.process.kill()


def _acquire(h: EngineHandle):
    if not h._lock.acquire(blocking=False):
        raise UciBusyError("handle already has a request in flight")
    return h._lock


def _engine_score_to_internal(kind: str, value: int) -> int:
    if kind == "cp":
        return value
    # mate m: m > 0 engine mates in m moves (2m-1 plies), m < 0 it is mated
    if value > 0:
        return MATE_BASE - (2 * value - 1)
    return -(MATE_BASE - 2 * (-value))


def engine_rank_moves(h: EngineHandle, p: Position, depth: int,
                      timeout: float = DEFAULT_TIMEOUT) -> list[ScoredMove]:
    """Score every legal move via multi-PV search; same ordering contract
    as the internal rank_moves (ascending score, move-text tie-break)."""
    moves = legal_moves(p)
    if not moves:
        raise UciProtocolError("position has no legal moves")
    if not h.supports_multipv:
        raise UciCapabilityError(
            f"engine {h.name!r} does not advertise MultiPV; fall back to the internal evaluator")
    lock = _acquire(h)
    try:
        deadline = time.monotonic() + timeout
        n = len(moves)
        _send(h, f"setoption name MultiPV value {n}")
        _send(h, f"position fen {to_fen(p)}")
        _send(h, f"go depth {depth}")
        by_move: dict = {}
        while True:
            line = _read_line(h, deadline)
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "bestmove":
                break
            if parts[0] != "info" or "pv" not in parts or "score" not in parts:
                continue
            multipv = 1
            if "multipv" in parts:
                multipv = int(parts[parts.index("multipv") + 1])
            si = parts.index("score")
            score = _engine_score_to_internal(parts[si + 1], int(parts[si + 2]))
            move_text = parts[parts.index("pv") + 1]
            by_move[move_text] = (multipv, score)
        missing = [m.uci() for m in moves if m.uci() not in by_move]
        if missing:
            raise UciProtocolError(
                f"engine ranked {len(by_move)} of {n} legal moves; missing {missing[:4]}\n"
                f"{h.transcript_tail()}")
        scored = sorted(
            ((by_move[m.uci()][1], m) for m in moves),
            key=lambda sm: (sm[0], sm[1].uci()))
        return [
            ScoredMove(move=m, score=s, mate_distance=_mate_distance(s), rank=i + 1)
            for i, (s, m) in enumerate(scored)
        ]
    finally:
        lock.release()


# ---------------------------------------------------------------------------
# Static-eval trace
# ---------------------------------------------------------------------------

def load_trace_maps(path: Optional[str] = None) -> list[dict]:
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)["maps"]
    text = (resources.files("chesscoach") / "data" / "uci_trace_map.json").read_text("utf-8")
    return json.loads(text)["maps"]


def _map_for_engine(h: EngineHandle, maps: list[dict]) -> dict:
    for m in maps:
        if m["match"] in h.name:
            return m
    raise UciCapabilityError(
        f"no trace mapping configured for engine {h.name!r}; supply a mapping file")


def engine_factor_trace(h: EngineHandle, p: Position,
                        maps: Optional[list] = None,
                        timeout: float = DEFAULT_TIMEOUT) -> dict:
    """Parse the engine's static-eval trace into the factor registry.

    Rows are renamed per the mapping config; unmapped rows fold into
    Material or are dropped; registry names the engine never mentions are
    filled with 0. Values are white-relative centipawns after scaling.
    """
    if not h.supports_eval:
        raise UciCapabilityError(
            f"engine {h.name!r} does not advertise a static-eval trace")
    mapping = _map_for_engine(h, maps if maps is not None else load_trace_maps())
    lock = _acquire(h)
    try:
        deadline = time.monotonic() + timeout
        _send(h, f"position fen {to_fen(p)}")
        _send(h, "eval")
        factors = {name: 0 for name in FACTOR_REGISTRY}
        prefix = mapping["row_prefix"]
        scale = mapping.get("scale", 1)
        while True:
            line = _read_line(h, deadline)
            parts = line.split()
            if not parts:
                continue
            if parts[0] == mapping["terminator"]:
                break
            if parts[0] != prefix:
                continue
            if len(parts) != 4 or parts[2] != "cp":
                raise UciProtocolError(f"unparseable trace row: {line!r}")
            term, value = parts[1], int(parts[3]) * scale
            target = mapping["terms"].get(term)
            if target is None:
                fold = mapping.get("fold_unmapped", "drop")
                if fold == "drop":
                    continue
                target = fold
            factors[target] += value
        return factors
    finally:
        lock.release()


class EngineMoveSource:
    """Adapter giving the study runner engine-backed rankings with the
    internal evaluator's interface."""

    def __init__(self, handle: EngineHandle):
        self.handle = handle

    def rank_moves(self, p: Position, depth: int) -> list[ScoredMove]:
        return engine_rank_moves(self.handle, p, depth)

    def best_move(self, p: Position, depth: int) -> ScoredMove:
        return engine_rank_moves(self.handle, p, depth)[-1]
