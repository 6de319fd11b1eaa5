import pytest
from fastapi.testclient import TestClient

import curated

from chesscoach import __version__
from chesscoach.core import legal_moves, parse_fen
from chesscoach.server import create_app
from chesscoach.study import StudyConfig, StudyRunner, load_corpus


@pytest.fixture(scope="module")
def mini_corpus(tmp_path_factory):
    boards = [
        curated.MATE_IN_1[0], curated.MATE_IN_1[1], curated.MATE_IN_1[2],
        curated.MATE_IN_2_KQ, curated.MATE_IN_1[3], curated.MATE_IN_1[4],
        curated.MATE_IN_2_KR, curated.MATE_IN_1[5],
        "4Q3/3R4/8/8/8/7K/8/6k1 w - - 0 1",
    ]
    path = tmp_path_factory.mktemp("corpus") / "mini.fen"
    path.write_text("\n".join(boards) + "\n")
    return load_corpus(str(path))


@pytest.fixture()
def client(mini_corpus, table):
    runner = StudyRunner(mini_corpus, table,
                         study_config=StudyConfig(hint_depth=3, opponent_depth=3))
    return TestClient(create_app(runner))


def _create(client, condition="None", participant="p1", day=1):
    r = client.post("/sessions", json={"participant": participant,
                                       "condition": condition, "day": day})
    assert r.status_code == 201, r.text
    return r.json()


def _finish_game(client, sid):
    state = client.get(f"/sessions/{sid}").json()
    game = state["current"]["game_index"]
    while True:
        state = client.get(f"/sessions/{sid}").json()
        if state["session_complete"] or state["current"]["game_index"] != game:
            return state
        guidance = state["current"]["guidance"]
        if guidance and guidance["highlight"]:
            move = "".join(guidance["highlight"])
        else:
            move = state["current"]["legal_moves"][0]
        r = client.post(f"/sessions/{sid}/moves", json={"move": move, "confirm": True})
        assert r.status_code == 200, r.text


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok", "version": __version__}


def test_create_session_validates_condition_and_day(client):
    r = client.post("/sessions", json={"participant": "p", "condition": "nope", "day": 1})
    assert r.status_code == 400
    assert r.json()["code"] == "bad_session_request"
    r = client.post("/sessions", json={"participant": "p", "condition": "None", "day": 7})
    assert r.status_code == 400


def test_unknown_session_is_404(client):
    assert client.get("/sessions/sess-999").status_code == 404
    r = client.post("/sessions/sess-999/moves", json={"move": "e2e4"})
    assert r.status_code == 404
    assert r.json()["code"] == "session_not_found"


def test_state_legal_moves_match_kernel(client):
    created = _create(client)
    state = created["state"]
    fen = state["current"]["fen"]
    expected = [m.uci() for m in legal_moves(parse_fen(fen))]
    assert state["current"]["legal_moves"] == expected


def test_guidance_is_null_under_none_condition(client):
    created = _create(client, condition="None")
    sid = created["session_id"]
    state = _finish_game(client, sid)
    while not state["session_complete"]:
        assert state["current"]["guidance"] is None
        state = _finish_game(client, sid)


def test_hints_condition_has_highlight_without_rationale(client):
    created = _create(client, condition="Hints")
    sid = created["session_id"]
    state = client.get(f"/sessions/{sid}").json()
    while not state["session_complete"] and state["current"]["game_index"] < 3:
        state = _finish_game(client, sid)
    guidance = state["current"]["guidance"]
    assert guidance is not None
    assert guidance["highlight"] is not None
    assert guidance["rationale"] is None


def test_two_phase_caution_over_http(client):
    created = _create(client, condition="RGA+")
    sid = created["session_id"]
    state = client.get(f"/sessions/{sid}").json()
    while state["current"]["game_index"] < 3:
        state = _finish_game(client, sid)
    # propose the first legal move: bottom third on this mate-in-2 board
    fen_before = state["current"]["fen"]
    worst = state["current"]["legal_moves"][0]
    r = client.post(f"/sessions/{sid}/moves", json={"move": worst})
    body = r.json()
    if body["committed"]:
        pytest.skip("first legal move was not bottom-third on this board")
    assert body["caution"] is not None
    assert body["caution"]["lines"]
    assert body["state"]["current"]["fen"] == fen_before
    r2 = client.post(f"/sessions/{sid}/moves", json={"move": worst, "confirm": True})
    assert r2.json()["committed"]
    assert r2.json()["state"]["current"] is None or \
        r2.json()["state"]["current"]["fen"] != fen_before


def test_illegal_move_yields_400_with_code(client):
    created = _create(client)
    sid = created["session_id"]
    r = client.post(f"/sessions/{sid}/moves", json={"move": "a1a1"})
    assert r.status_code == 400
    assert r.json()["code"] == "illegal_move"


def test_move_replay_is_idempotent(client):
    created = _create(client)
    sid = created["session_id"]
    state = created["state"]
    guidance_move = state["current"]["legal_moves"][0]
    first = client.post(f"/sessions/{sid}/moves",
                        json={"move": guidance_move, "move_number": 1}).json()
    again = client.post(f"/sessions/{sid}/moves",
                        json={"move": guidance_move, "move_number": 1}).json()
    assert first["move"] == again["move"]
    assert first["fen_after"] == again["fen_after"]
    assert first["opponent_move"] == again["opponent_move"]
    conflict = client.post(f"/sessions/{sid}/moves",
                           json={"move": "h8h7", "move_number": 1})
    assert conflict.status_code == 409


def test_questionnaire_flow_and_conflict(client):
    created = _create(client)
    sid = created["session_id"]
    r = client.post(f"/sessions/{sid}/questionnaire", json={"likert": 4})
    assert r.status_code == 400  # games not finished
    state = client.get(f"/sessions/{sid}").json()
    while not state["session_complete"]:
        state = _finish_game(client, sid)
    r = client.post(f"/sessions/{sid}/questionnaire", json={"likert": 9})
    assert r.status_code == 400
    r = client.post(f"/sessions/{sid}/questionnaire", json={"likert": 4})
    assert r.status_code == 200 and r.json()["recorded"]
    r = client.post(f"/sessions/{sid}/questionnaire", json={"likert": 2})
    assert r.status_code == 409
    assert r.json()["code"] == "questionnaire_conflict"


def test_events_endpoint_exposes_append_only_log(client):
    created = _create(client)
    sid = created["session_id"]
    move = created["state"]["current"]["legal_moves"][0]
    client.post(f"/sessions/{sid}/moves", json={"move": move})
    events = client.get(f"/sessions/{sid}/events").json()["events"]
    assert events[0]["type"] == "session_created"
    assert [e["seq"] for e in events] == list(range(1, len(events) + 1))
    assert any(e["type"] == "move_committed" for e in events)
