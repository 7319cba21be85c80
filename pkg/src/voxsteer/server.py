"""WebSocket boundary: JSON control messages in, status plus binary
density frames out.

One session per connection on /session. Every control message is answered
with {"type":"ack","applies_at":k} or {"type":"error","code","detail"};
errors never close the socket. After each completed iteration the sender
pushes one status message followed by one binary frame. The sender polls
the session's latest snapshot, so a slow client simply skips intermediate
frames (latest wins) while the status carries the full undelivered
history tail.
"""

from __future__ import annotations

import asyncio
import threading

from fastapi import FastAPI
from starlette.websockets import WebSocket, WebSocketDisconnect

from .errors import PhaseError, SingularSystem, VoxsteerError, ZeroLoad
from .frames import pack_frame
from .mesh import DomainSpec
from .session import RUNNING, MutationCommand, Session, Snapshot

POLL_SECONDS = 0.005


def _error(code: str, detail: str) -> dict:
    return {"type": "error", "code": code, "detail": detail}


def _ack(applies_at: int) -> dict:
    return {"type": "ack", "applies_at": applies_at}


def _status_message(snap: Snapshot, tail: list) -> dict:
    from dataclasses import asdict

    return {
        "type": "status",
        "phase": snap.phase,
        "iter": snap.iter,
        "compliance": snap.compliance,
        "volume": snap.volume,
        "history_tail": [[it, c] for it, c in tail],
        # problem echo: lets a stateless client rebuild its whole view
        "domain": {
            "lx": snap.domain.lx,
            "ly": snap.domain.ly,
            "lz": snap.domain.lz,
            "position": list(snap.domain.position),
            "yaw": snap.domain.yaw,
            "elem_size": snap.elem_size,
        },
        "shape": list(snap.shape),
        "bcs": snap.bcs,
        "params": asdict(snap.params),
    }


def handle_message(session: Session, msg: dict) -> dict | None:
    """Map one control message onto the session; returns the JSON reply.

    A None return means the caller should push a fresh status+frame pair
    instead of a plain ack (used by get_snapshot).
    """
    mtype = msg.get("type")
    try:
        if mtype == "set_domain":
            dom = msg.get("domain", {})
            spec = DomainSpec(
                lx=float(dom["lx"]),
                ly=float(dom["ly"]),
                lz=float(dom["lz"]),
                position=tuple(dom.get("position", (0.0, 0.0, 0.0))),
                yaw=float(dom.get("yaw", 0.0)),
            )
            session.configure_domain(spec, float(msg["elem_size"]))
            return _ack(1)
        if mtype == "tap":
            return _ack(session.submit(MutationCommand.tap(msg["entity"])))
        if mtype == "drag":
            return _ack(session.submit(MutationCommand.drag(msg["entity"], msg["force"])))
        if mtype == "preset":
            return _ack(session.submit(MutationCommand.preset(msg.get("name"))))
        if mtype == "set_params":
            known = {
                "volfrac": MutationCommand.set_volfrac,
                "maxiter": MutationCommand.set_maxiter,
                "remove_voids": MutationCommand.set_remove_voids,
                "iterative_solver": MutationCommand.set_iterative_solver,
            }
            unknown = set(msg) - set(known) - {"type"}
            if unknown:
                return _error("bad_value", f"unknown params {sorted(unknown)}")
            if not set(msg) & set(known):
                return _error("bad_value", "set_params carries no known parameter")
            applies = None
            for key, make in known.items():
                if key in msg:
                    applies = session.submit(make(msg[key]))
            return _ack(applies)
        if mtype == "start":
            session.start()
            return _ack(session.state.iter + 1)
        if mtype == "stop":
            return _ack(session.stop())
        if mtype == "reset":
            session.reset()
            return _ack(session.state.iter + 1)
        if mtype == "get_snapshot":
            return None
        return _error("bad_value", f"unknown message type {mtype!r}")
    except KeyError as exc:
        return _error("bad_entity", str(exc))
    except PhaseError as exc:
        return _error("bad_phase", str(exc))
    except SingularSystem as exc:
        return _error("singular_system", str(exc))
    except ZeroLoad as exc:
        return _error("zero_load", str(exc))
    except (TypeError, ValueError) as exc:
        return _error("bad_value", str(exc))
    except VoxsteerError as exc:
        return _error("bad_value", str(exc))


class _Streamer:
    """Pushes status+frame pairs as snapshots advance; latest wins.

    Dormant until a start succeeds; before that, clients pull snapshots
    explicitly with get_snapshot, so control replies never interleave with
    unsolicited frames while configuring.
    """

    def __init__(self, ws: WebSocket, session: Session):
        self.ws = ws
        self.session = session
        self.active = False
        self.last_iter: int | None = None
        self.last_phase: str | None = None
        self.sent_through = 0  # last history iteration delivered

    def arm(self) -> None:
        self.active = True
        self.last_iter = self.session.latest_snapshot().iter
        self.last_phase = RUNNING

    async def send_current(self) -> None:
        snap = self.session.latest_snapshot()
        if snap.iter < self.sent_through:  # session was reset
            self.sent_through = 0
        tail = [h for h in snap.history if h[0] > self.sent_through]
        await self.ws.send_json(_status_message(snap, tail))
        await self.ws.send_bytes(pack_frame(snap.iter, snap.shape, snap.density_q))
        if tail:
            self.sent_through = tail[-1][0]
        self.last_iter, self.last_phase = snap.iter, snap.phase

    async def run(self) -> None:
        while True:
            if self.active:
                snap = self.session.latest_snapshot()
                if snap.iter != self.last_iter or snap.phase != self.last_phase:
                    await self.send_current()
            await asyncio.sleep(POLL_SECONDS)


def create_app(grace_seconds: float = 60.0) -> FastAPI:
    app = FastAPI(title="voxsteer")

    @app.websocket("/session")
    async def session_socket(ws: WebSocket):
        await ws.accept()
        session = Session()
        streamer = _Streamer(ws, session)
        sender = asyncio.create_task(streamer.run())
        try:
            while True:
                try:
                    msg = await ws.receive_json()
                except (ValueError, KeyError, UnicodeDecodeError):
                    await ws.send_json(_error("parse_error", "control frames must be JSON text"))
                    continue
                reply = handle_message(session, msg)
                if reply is None:
                    await streamer.send_current()
                else:
                    await ws.send_json(reply)
                    if msg.get("type") == "start" and reply.get("type") == "ack":
                        streamer.arm()
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            _discard_later(session, grace_seconds)

    return app


def _discard_later(session: Session, grace_seconds: float) -> None:
    """Stop an orphaned session once the reconnect grace period lapses."""

    def _reap():
        try:
            if session.phase == RUNNING:
                session.stop()
        except VoxsteerError:
            pass

    if grace_seconds <= 0:
        _reap()
    else:
        timer = threading.Timer(grace_seconds, _reap)
        timer.daemon = True
        timer.start()


app = create_app()
