"""Live-run orchestration.

One session owns one optimization. The iteration loop runs either on a
dedicated worker thread (live use) or on the caller's thread (headless
runs); either way it is the only code that touches optimizer state.
Mutations arrive through a thread-safe FIFO queue and are drained at sync
points, the start of each iteration, so every iteration sees a fixed,
consistent problem. Applied commands are recorded with their application
iteration; replaying the record through the same queue reproduces the
run bit for bit.

Snapshots are immutable values swapped into a single reference; any
number of readers may poll them without ever blocking the worker.
"""

from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from . import bc as bc_ops
from .bc import BoundaryConditions
from .errors import PhaseError, SingularSystem, ZeroLoad
from .fea import check_clamping, hex8_stiffness
from .filters import FilterKernel
from .frames import quantize
from .mesh import DomainSpec, build_mesh, resolve_entity
from .optimizer import (
    IterationState,
    OptimizerParams,
    has_converged,
    init_densities,
    run_iteration,
)

CONFIGURING = "configuring"
RUNNING = "running"
FINISHED = "finished"
STOPPED = "stopped"

PRESETS = {
    "cantilever": bc_ops.preset_cantilever,
    "bridge": bc_ops.preset_bridge,
}


@dataclass(frozen=True)
class MutationCommand:
    """One live mutation; payloads are validated before they enter the queue."""

    kind: str
    entity: str | None = None
    force: tuple[float, float, float] | None = None
    name: str | None = None
    value: object = None

    KINDS = (
        "tap",
        "drag",
        "preset",
        "set_volfrac",
        "set_maxiter",
        "set_remove_voids",
        "set_iterative_solver",
        "stop",
        "reset",
    )

    def validate(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown command kind {self.kind!r}")
        if self.kind in ("tap", "drag"):
            resolve_entity(self.entity)
        if self.kind == "drag":
            if self.force is None or len(self.force) != 3:
                raise ValueError("drag needs a 3-vector force")
            if not all(math.isfinite(c) for c in self.force):
                raise ValueError("drag force must be finite")
        if self.kind == "preset" and self.name not in PRESETS:
            raise ValueError(f"unknown preset {self.name!r}")
        if self.kind == "set_volfrac":
            v = self.value
            if not isinstance(v, (int, float)) or not 0.0 < float(v) < 1.0:
                raise ValueError(f"volfrac must lie in (0, 1), got {v!r}")
        if self.kind == "set_maxiter":
            v = self.value
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ValueError(f"maxiter must be an integer >= 0, got {v!r}")
        if self.kind in ("set_remove_voids", "set_iterative_solver"):
            if not isinstance(self.value, bool):
                raise ValueError(f"{self.kind} takes a boolean, got {self.value!r}")

    @classmethod
    def tap(cls, entity: str) -> "MutationCommand":
        return cls("tap", entity=entity)

    @classmethod
    def drag(cls, entity: str, force) -> "MutationCommand":
        return cls("drag", entity=entity, force=tuple(float(c) for c in force))

    @classmethod
    def preset(cls, name: str) -> "MutationCommand":
        return cls("preset", name=name)

    @classmethod
    def set_volfrac(cls, v: float) -> "MutationCommand":
        return cls("set_volfrac", value=float(v))

    @classmethod
    def set_maxiter(cls, n: int) -> "MutationCommand":
        return cls("set_maxiter", value=int(n))

    @classmethod
    def set_remove_voids(cls, b: bool) -> "MutationCommand":
        return cls("set_remove_voids", value=bool(b))

    @classmethod
    def set_iterative_solver(cls, b: bool) -> "MutationCommand":
        return cls("set_iterative_solver", value=bool(b))

    @classmethod
    def stop(cls) -> "MutationCommand":
        return cls("stop")

    @classmethod
    def reset(cls) -> "MutationCommand":
        return cls("reset")

    def to_json(self) -> dict:
        out: dict = {"type": self.kind}
        if self.entity is not None:
            out["entity"] = self.entity
        if self.force is not None:
            out["force"] = list(self.force)
        if self.name is not None:
            out["name"] = self.name
        if self.value is not None:
            out["value"] = self.value
        return out

    @classmethod
    def from_json(cls, data: dict) -> "MutationCommand":
        if not isinstance(data, dict) or "type" not in data:
            raise ValueError("command JSON needs a 'type' field")
        kind = data["type"]
        force = data.get("force")
        cmd = cls(
            kind=kind,
            entity=data.get("entity"),
            force=tuple(float(c) for c in force) if force is not None else None,
            name=data.get("name"),
            value=data.get("value"),
        )
        cmd.validate()
        return cmd


@dataclass(frozen=True)
class Snapshot:
    """Immutable view of a session, published once per iteration.

    Carries the full problem echo (domain, BCs, params) so a reconnecting
    client can rebuild its entire view from one snapshot.
    """

    iter: int
    phase: str
    history: tuple[tuple[int, float], ...]
    shape: tuple[int, int, int]
    density_q: bytes
    x_phys: np.ndarray
    volume: float
    change: float
    params: OptimizerParams
    bcs: dict
    domain: DomainSpec
    elem_size: float

    @property
    def compliance(self) -> float | None:
        return self.history[-1][1] if self.history else None


class Session:
    """One steerable optimization run over one mesh."""

    def __init__(
        self,
        domain: DomainSpec | None = None,
        elem_size: float = 0.125,
        params: OptimizerParams | None = None,
        bcs: BoundaryConditions | None = None,
    ):
        self._lock = threading.RLock()
        self._queue: deque[tuple[int, int, MutationCommand]] = deque()
        self._seq = 0
        self.phase = CONFIGURING
        self.params = params or OptimizerParams()
        self.bcs = bcs or BoundaryConditions()
        self.history: list[tuple[int, float]] = []
        self.recorded: list[dict] = []
        self.on_iteration: list = []
        self.error: Exception | None = None
        self._worker: threading.Thread | None = None
        self._snapshot: Snapshot | None = None
        self._last_change = 0.0
        self._configure_mesh(domain or DomainSpec(2.0, 1.0, 1.0), elem_size)

    # -- configuration ----------------------------------------------------

    def _configure_mesh(self, domain: DomainSpec, elem_size: float) -> None:
        self.domain = domain
        self.elem_size = float(elem_size)
        self.mesh = build_mesh(domain, elem_size)
        self.kernel = FilterKernel(self.mesh.shape, self.params.rmin)
        self.ke = hex8_stiffness(self.mesh.h, self.params.nu)
        self.state = IterationState(field=init_densities(self.mesh, self.params, self.kernel))
        self._publish()

    def configure_domain(self, domain: DomainSpec, elem_size: float) -> None:
        """Re-mesh; existing BCs survive because entity ids are resolution-free."""
        with self._lock:
            if self.phase != CONFIGURING:
                raise PhaseError(f"cannot change the domain while {self.phase}")
            self.history.clear()
            self._configure_mesh(domain, elem_size)

    # -- command queue -----------------------------------------------------

    def submit(self, cmd: MutationCommand, apply_at: int | None = None) -> int:
        """Validate and enqueue; returns the iteration the command applies at.

        Commands without an explicit apply_at take effect at the next sync
        point. While configuring, due commands apply immediately (the first
        sync point is iteration 1); scheduled ones wait in the queue.
        """
        cmd.validate()
        with self._lock:
            if self.phase in (FINISHED, STOPPED) and cmd.kind != "reset":
                raise PhaseError(f"session is {self.phase}; only reset is accepted")
            if self.phase == CONFIGURING and cmd.kind == "stop":
                raise PhaseError("nothing is running")
            next_sync = self.state.iter + 1
            effective = next_sync if apply_at is None else max(int(apply_at), next_sync)
            self._seq += 1
            self._queue.append((effective, self._seq, cmd))
            if self.phase == CONFIGURING:
                flow = self._drain(next_sync)
                if flow == "reset":
                    self._do_reset()
                else:
                    self._publish()
            elif self.phase in (FINISHED, STOPPED):
                # only reset reaches here; apply it right away
                self._queue.clear()
                self._do_reset()
            return effective

    def _drain(self, up_to_iteration: int) -> str:
        """Apply queued commands due at or before the given iteration, FIFO."""
        flow = "continue"
        with self._lock:
            due = [item for item in self._queue if item[0] <= up_to_iteration]
            due.sort(key=lambda item: item[1])
            for item in due:
                self._queue.remove(item)
            for _, _, cmd in due:
                self.recorded.append(
                    {"applied_at_iteration": up_to_iteration, "command": cmd.to_json()}
                )
                outcome = self._apply(cmd)
                if outcome != "continue":
                    flow = outcome
        return flow

    def _apply(self, cmd: MutationCommand) -> str:
        if cmd.kind == "stop":
            return "stop"
        if cmd.kind == "reset":
            return "reset"
        if cmd.kind in ("tap", "drag", "preset"):
            before = self.bcs.clamped_ids()
            if cmd.kind == "tap":
                self.bcs = bc_ops.tap(self.bcs, cmd.entity)
            elif cmd.kind == "drag":
                self.bcs = bc_ops.drag(self.bcs, cmd.entity, cmd.force)
            else:
                self.bcs = PRESETS[cmd.name]()
            if self.bcs.clamped_ids() != before:
                # the operator changed; a stale warm start would be misleading
                self.state.invalidate_warm_start()
        elif cmd.kind == "set_volfrac":
            self.params = replace(self.params, volfrac=float(cmd.value))
        elif cmd.kind == "set_maxiter":
            self.params = replace(self.params, maxiter=int(cmd.value))
        elif cmd.kind == "set_remove_voids":
            self.params = replace(self.params, remove_voids=bool(cmd.value))
        elif cmd.kind == "set_iterative_solver":
            self.params = replace(self.params, iterative_solver=bool(cmd.value))
        return "continue"

    def sync_point_drain(self) -> str:
        """Worker-side drain at the start of an iteration."""
        return self._drain(self.state.iter + 1)

    # -- lifecycle ----------------------------------------------------------

    def _precheck(self) -> None:
        if not self.bcs.clamped_ids():
            raise SingularSystem("no clamped entity; the structure would float")
        check_clamping(self.bcs, self.mesh)
        if not self.bcs.traction_ids():
            raise ZeroLoad("no traction assigned; nothing to optimize against")

    def start(self) -> None:
        """Spawn the worker loop; requires a solvable configuration."""
        with self._lock:
            if self.phase == RUNNING:
                raise PhaseError("already running")
            if self.phase != CONFIGURING:
                raise PhaseError(f"cannot start while {self.phase}; reset first")
            self._precheck()
            self.phase = RUNNING
            self.error = None
            self._publish()
            self._worker = threading.Thread(target=self._loop, name="voxsteer-worker", daemon=True)
        self._worker.start()

    def run_blocking(self) -> None:
        """Run the identical loop on the calling thread (headless path)."""
        with self._lock:
            if self.phase == RUNNING:
                raise PhaseError("already running")
            if self.phase != CONFIGURING:
                raise PhaseError(f"cannot start while {self.phase}; reset first")
            self._precheck()
            self.phase = RUNNING
            self.error = None
            self._publish()
        self._loop()
        if self.error is not None:
            raise self.error

    def stop(self) -> int:
        """Request a graceful halt at the next sync point."""
        return self.submit(MutationCommand.stop())

    def reset(self) -> None:
        """Return to Configuring with fresh densities; BCs and params survive.

        Mid-run the reset lands at the next sync point; call join() to wait
        for the worker to wind down.
        """
        self.submit(MutationCommand.reset())

    def _do_reset(self) -> None:
        with self._lock:
            self.phase = CONFIGURING
            self.history.clear()
            self.recorded.clear()
            self._queue.clear()
            self._last_change = 0.0
            self.state = IterationState(field=init_densities(self.mesh, self.params, self.kernel))
            self._publish()

    def join(self, timeout: float | None = 30.0) -> None:
        """Wait for a live worker to wind down."""
        w = self._worker
        if w is not None and w is not threading.current_thread():
            w.join(timeout)

    # -- the loop -----------------------------------------------------------

    def _loop(self) -> None:
        try:
            while True:
                flow = self.sync_point_drain()
                if flow == "stop":
                    with self._lock:
                        self.phase = STOPPED
                        self._publish()
                    return
                if flow == "reset":
                    self._do_reset()
                    return
                if self.state.iter >= self.params.maxiter:
                    with self._lock:
                        self.phase = FINISHED
                        self._publish()
                    return
                state, report = run_iteration(
                    self.state, self.params, self.bcs, self.mesh, self.kernel, self.ke
                )
                with self._lock:
                    self.state = state
                    self.history.append((report.iter, report.compliance))
                    self._last_change = report.change
                for cb in self.on_iteration:
                    cb(state, report)
                with self._lock:
                    if has_converged(report, self.params):
                        self.phase = FINISHED
                    self._publish()
                if self.phase != RUNNING:
                    return
        except Exception as exc:  # solver failure: stop gracefully, keep the cause
            with self._lock:
                self.error = exc
                self.phase = STOPPED
                self._publish()

    # -- snapshots ----------------------------------------------------------

    def _publish(self) -> None:
        field = self.state.field
        x_phys = field.x_phys.copy()
        x_phys.setflags(write=False)
        self._snapshot = Snapshot(
            iter=self.state.iter,
            phase=self.phase,
            history=tuple(self.history),
            shape=self.mesh.shape,
            density_q=quantize(field.x_phys, field.passive_void).tobytes(),
            x_phys=x_phys,
            volume=field.volume,
            change=self._last_change,
            params=self.params,
            bcs=self.bcs.to_json(),
            domain=self.domain,
            elem_size=self.elem_size,
        )

    def latest_snapshot(self) -> Snapshot:
        snap = self._snapshot
        assert snap is not None
        return snap

    def recording(self) -> list[dict]:
        """Applied commands with their application iterations, FIFO order."""
        with self._lock:
            return [dict(r, command=dict(r["command"])) for r in self.recorded]
