import numpy as np
import pytest
from starlette.testclient import TestClient

from voxsteer.frames import decode_frame
from voxsteer.server import create_app


@pytest.fixture
def client():
    app = create_app(grace_seconds=0.0)
    with TestClient(app) as c:
        yield c


def configure_small(ws, maxiter=5):
    ws.send_json({"type": "set_domain", "domain": {"lx": 2, "ly": 1, "lz": 1}, "elem_size": 0.5})
    assert ws.receive_json()["type"] == "ack"
    ws.send_json({"type": "preset", "name": "cantilever"})
    assert ws.receive_json()["type"] == "ack"
    ws.send_json({"type": "set_params", "maxiter": maxiter})
    assert ws.receive_json()["type"] == "ack"


def drain_run(ws, expect_phase="finished"):
    """Collect (status, frame) pairs until the run leaves the running phase."""
    pairs = []
    for _ in range(500):
        status = ws.receive_json()
        assert status["type"] == "status"
        frame = decode_frame(ws.receive_bytes())
        assert frame.iteration == status["iter"]
        pairs.append((status, frame))
        if status["phase"] == expect_phase:
            return pairs
    raise AssertionError("run never reached phase " + expect_phase)


class TestControlMessages:
    def test_preset_then_snapshot_shows_bcs(self, client):
        with client.websocket_connect("/session") as ws:
            ws.send_json({"type": "preset", "name": "cantilever"})
            assert ws.receive_json() == {"type": "ack", "applies_at": 1}
            ws.send_json({"type": "get_snapshot"})
            status = ws.receive_json()
            assert status["type"] == "status"
            assert status["phase"] == "configuring"
            ents = status["bcs"]["entities"]
            states = sorted(v["state"] for v in ents.values())
            assert states == ["clamped", "traction"]
            assert status["params"]["volfrac"] == 0.3
            assert status["domain"]["lx"] == 2.0
            frame = decode_frame(ws.receive_bytes())
            assert frame.shape == (16, 8, 8)  # default domain 2x1x1 at 0.125

    def test_drag_sets_traction(self, client):
        with client.websocket_connect("/session") as ws:
            ws.send_json({"type": "drag", "entity": "face:z+", "force": [0, 0, -1]})
            assert ws.receive_json()["type"] == "ack"

    def test_bad_volfrac_rejected(self, client):
        with client.websocket_connect("/session") as ws:
            ws.send_json({"type": "set_params", "volfrac": 1.5})
            reply = ws.receive_json()
            assert reply["type"] == "error"
            assert reply["code"] == "bad_value"

    def test_bad_entity_rejected(self, client):
        with client.websocket_connect("/session") as ws:
            ws.send_json({"type": "tap", "entity": "face:zz"})
            assert ws.receive_json()["code"] == "bad_entity"

    def test_unknown_type_keeps_connection_open(self, client):
        with client.websocket_connect("/session") as ws:
            ws.send_json({"type": "warp_drive"})
            assert ws.receive_json()["type"] == "error"
            ws.send_json({"type": "preset", "name": "bridge"})
            assert ws.receive_json()["type"] == "ack"

    def test_malformed_json_is_parse_error(self, client):
        with client.websocket_connect("/session") as ws:
            ws.send_text("{not json")
            assert ws.receive_json()["code"] == "parse_error"

    def test_start_without_clamp_fails_precheck(self, client):
        with client.websocket_connect("/session") as ws:
            ws.send_json({"type": "drag", "entity": "face:z+", "force": [0, 0, -1]})
            ws.receive_json()
            ws.send_json({"type": "start"})
            reply = ws.receive_json()
            assert reply["type"] == "error"
            assert reply["code"] == "singular_system"

    def test_start_without_traction_fails_precheck(self, client):
        with client.websocket_connect("/session") as ws:
            ws.send_json({"type": "tap", "entity": "face:x-"})
            ws.receive_json()
            ws.send_json({"type": "start"})
            assert ws.receive_json()["code"] == "zero_load"


class TestStreaming:
    def test_run_streams_status_then_frame_pairs(self, client):
        with client.websocket_connect("/session") as ws:
            configure_small(ws, maxiter=5)
            ws.send_json({"type": "start"})
            assert ws.receive_json()["type"] == "ack"
            pairs = drain_run(ws)
            final_status, final_frame = pairs[-1]
            assert final_status["iter"] == 5
            assert final_status["phase"] == "finished"
            assert 1 <= len(pairs) <= 5  # coalescing may skip, never exceed
            assert len(final_frame.densities) == 16
            # full history tail eventually delivered despite drops
            delivered = [tuple(h) for s, _ in pairs for h in s["history_tail"]]
            assert [it for it, _ in delivered] == [1, 2, 3, 4, 5]
            assert all(np.isfinite(c) for _, c in delivered)

    def test_volume_tracks_target(self, client):
        with client.websocket_connect("/session") as ws:
            configure_small(ws, maxiter=3)
            ws.send_json({"type": "start"})
            ws.receive_json()
            pairs = drain_run(ws)
            assert pairs[-1][0]["volume"] == pytest.approx(0.3, abs=1e-4)

    def test_mid_run_volfrac_ack_future_iteration(self, client):
        with client.websocket_connect("/session") as ws:
            configure_small(ws, maxiter=8)
            ws.send_json({"type": "start"})
            assert ws.receive_json()["type"] == "ack"
            got = None
            for _ in range(200):
                # interleave: keep reading stream, inject one set_params
                status = ws.receive_json()
                if status["type"] == "status":
                    ws.receive_bytes()
                    if status["phase"] == "finished":
                        break
                    if got is None and status["iter"] >= 1:
                        ws.send_json({"type": "set_params", "volfrac": 0.4})
                elif status["type"] == "ack":
                    got = status
                    assert got["applies_at"] >= 2
            assert got is not None

    def test_stop_then_reset_cycle(self, client):
        with client.websocket_connect("/session") as ws:
            configure_small(ws, maxiter=100_000)
            ws.send_json({"type": "start"})
            assert ws.receive_json()["type"] == "ack"
            status = ws.receive_json()
            assert status["type"] == "status"
            ws.receive_bytes()
            ws.send_json({"type": "stop"})
            phase = None
            for _ in range(200):
                msg = ws.receive_json()
                if msg["type"] == "status":
                    ws.receive_bytes()
                    phase = msg["phase"]
                    if phase == "stopped":
                        break
            assert phase == "stopped"
            ws.send_json({"type": "reset"})
            saw_ack = False
            for _ in range(10):
                msg = ws.receive_json()
                if msg["type"] == "ack":
                    saw_ack = True
                    break
                ws.receive_bytes()
            assert saw_ack
