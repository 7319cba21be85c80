"""Boundary conditions over the 26 boundary entities.

Each entity is Free, Clamped, or carries a Traction: a total force vector
in Newtons spread equally over the entity's closed node set. The three
states are mutually exclusive per entity. Tapping cycles
Free -> Clamped -> Free and clears a Traction; dragging assigns a
Traction, overriding whatever was there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh import MeshTopology, entity_nodes, resolve_entity

FREE = "free"
CLAMPED = "clamped"
TRACTION = "traction"


@dataclass(frozen=True)
class EntityBC:
    """State of one boundary entity; force is set only for tractions."""

    state: str
    force: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.state not in (FREE, CLAMPED, TRACTION):
            raise ValueError(f"unknown BC state {self.state!r}")
        if self.state == TRACTION:
            if self.force is None or len(self.force) != 3:
                raise ValueError("traction needs a 3-vector force")
            if not all(math.isfinite(c) for c in self.force):
                raise ValueError("traction force must be finite")
            if all(c == 0.0 for c in self.force):
                raise ValueError("traction force must be nonzero")
        elif self.force is not None:
            raise ValueError(f"{self.state} state carries no force")


_FREE_BC = EntityBC(FREE)


class BoundaryConditions:
    """Immutable map entity-id -> EntityBC; absent entries are Free."""

    def __init__(self, entities: dict[str, EntityBC] | None = None):
        items = {}
        for eid, ebc in (entities or {}).items():
            resolve_entity(eid)
            if ebc.state != FREE:
                items[eid] = ebc
        self._entities = items

    def state_of(self, entity_id: str) -> EntityBC:
        resolve_entity(entity_id)
        return self._entities.get(entity_id, _FREE_BC)

    @property
    def entities(self) -> dict[str, EntityBC]:
        return dict(self._entities)

    def clamped_ids(self) -> list[str]:
        return sorted(i for i, b in self._entities.items() if b.state == CLAMPED)

    def traction_ids(self) -> list[str]:
        return sorted(i for i, b in self._entities.items() if b.state == TRACTION)

    def _with(self, entity_id: str, ebc: EntityBC) -> "BoundaryConditions":
        items = dict(self._entities)
        if ebc.state == FREE:
            items.pop(entity_id, None)
        else:
            items[entity_id] = ebc
        return BoundaryConditions(items)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BoundaryConditions)
            and self._entities == other._entities
        )

    def __repr__(self) -> str:
        return f"BoundaryConditions({self._entities!r})"

    def to_json(self) -> dict:
        out = {}
        for eid, ebc in sorted(self._entities.items()):
            if ebc.state == TRACTION:
                out[eid] = {"state": TRACTION, "force": list(ebc.force)}
            else:
                out[eid] = {"state": ebc.state}
        return {"entities": out}

    @classmethod
    def from_json(cls, data: dict) -> "BoundaryConditions":
        if not isinstance(data, dict) or not isinstance(data.get("entities", {}), dict):
            raise ValueError("BC JSON must be {'entities': {id: {...}}}")
        items = {}
        for eid, spec in data.get("entities", {}).items():
            state = spec.get("state")
            if state == TRACTION:
                force = spec.get("force")
                if force is None:
                    raise ValueError(f"traction on {eid!r} missing 'force'")
                items[eid] = EntityBC(TRACTION, tuple(float(c) for c in force))
            elif state in (CLAMPED, FREE):
                items[eid] = EntityBC(state)
            else:
                raise ValueError(f"unknown BC state {state!r} on {eid!r}")
        return cls(items)


def tap(bcs: BoundaryConditions, entity_id: str) -> BoundaryConditions:
    """Cycle one entity: Traction -> Free, Free -> Clamped, Clamped -> Free."""
    current = bcs.state_of(entity_id)
    if current.state == FREE:
        return bcs._with(entity_id, EntityBC(CLAMPED))
    return bcs._with(entity_id, _FREE_BC)


def drag(
    bcs: BoundaryConditions, entity_id: str, vector: tuple[float, float, float]
) -> BoundaryConditions:
    """Assign a traction (total Newtons) to an entity; a zero drag is a no-op."""
    resolve_entity(entity_id)
    vec = tuple(float(c) for c in vector)
    if len(vec) != 3 or not all(math.isfinite(c) for c in vec):
        raise ValueError(f"traction vector must be 3 finite numbers, got {vector!r}")
    if vec == (0.0, 0.0, 0.0):
        return bcs
    return bcs._with(entity_id, EntityBC(TRACTION, vec))


def preset_cantilever() -> BoundaryConditions:
    """Clamped x- face, unit downward load along the lower x+ edge."""
    return BoundaryConditions(
        {
            "face:x-": EntityBC(CLAMPED),
            "edge:x+z-": EntityBC(TRACTION, (0.0, 0.0, -1.0)),
        }
    )


def preset_bridge() -> BoundaryConditions:
    """Both lower x edges clamped, unit downward load spread over the top face."""
    return BoundaryConditions(
        {
            "edge:x-z-": EntityBC(CLAMPED),
            "edge:x+z-": EntityBC(CLAMPED),
            "face:z+": EntityBC(TRACTION, (0.0, 0.0, -1.0)),
        }
    )


def assemble_force(bcs: BoundaryConditions, mesh: MeshTopology) -> np.ndarray:
    """Nodal force vector of length dof_count.

    Each traction's total vector is split equally over the entity's closed
    node set; entities sharing nodes add up. Entries at clamped DOFs stay
    in the vector and are masked at solve time.
    """
    f = np.zeros(mesh.dof_count)
    for eid in bcs.traction_ids():
        ebc = bcs.state_of(eid)
        nodes = entity_nodes(mesh, eid, closure=True)
        share = np.asarray(ebc.force, dtype=float) / len(nodes)
        for axis in range(3):
            if share[axis] != 0.0:
                np.add.at(f, 3 * nodes + axis, share[axis])
    return f


def clamped_nodes(bcs: BoundaryConditions, mesh: MeshTopology) -> np.ndarray:
    """Union of the closed node sets of all clamped entities, sorted."""
    sets = [entity_nodes(mesh, eid, closure=True) for eid in bcs.clamped_ids()]
    if not sets:
        return np.empty(0, dtype=int)
    return np.unique(np.concatenate(sets))


def clamped_dofs(bcs: BoundaryConditions, mesh: MeshTopology) -> np.ndarray:
    """All 3 DOFs of every clamped node, sorted ascending, duplicate-free."""
    nodes = clamped_nodes(bcs, mesh)
    return (3 * nodes[:, None] + np.arange(3)).reshape(-1)
