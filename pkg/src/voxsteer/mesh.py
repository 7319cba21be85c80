"""Voxel domain, mesh numbering, and the 26-entity boundary catalog.

Numbering conventions (x fastest, then y, then z):

    node index    = ix + iy*(nx+1) + iz*(nx+1)*(ny+1)
    element index = ex + ey*nx + ez*nx*ny
    DOF index     = 3*node + axis,  axis 0/1/2 = x/y/z

Local element nodes enumerate the corner offsets (dx,dy,dz) in {0,1}^3,
again x fastest, so local node k sits at (k&1, (k>>1)&1, (k>>2)&1).

The box boundary decomposes into 26 entities (6 faces, 12 edges, 8
vertices) with resolution-independent string ids such as "face:x-",
"edge:x+z-" (the edge where faces x+ and z- meet, running along y) and
"vertex:x-y-z+". With lexicographic numbering a node lies on the boundary
iff some index is extreme, and the number of extreme indices classifies
it as face interior (1), edge interior (2) or vertex (3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

AXES = ("x", "y", "z")
SIGNS = ("-", "+")


@dataclass(frozen=True)
class DomainSpec:
    """Physical box: dimensions in meters plus a render-only pose.

    position and yaw place the rendered box in space; they never enter
    any numerical result.
    """

    lx: float
    ly: float
    lz: float
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    yaw: float = 0.0

    def __post_init__(self):
        for name in ("lx", "ly", "lz"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"domain {name} must be finite and > 0, got {v!r}")
        if len(self.position) != 3 or not all(
            math.isfinite(p) for p in self.position
        ):
            raise ValueError("position must be three finite numbers")
        if not math.isfinite(self.yaw):
            raise ValueError("yaw must be finite")

    @property
    def lengths(self) -> tuple[float, float, float]:
        return (self.lx, self.ly, self.lz)


@dataclass(frozen=True)
class BoundaryEntity:
    """One of the 26 topological features of the box boundary.

    sides lists the constrained axes as (axis, side) pairs with side 0 at
    index 0 and side 1 at the maximal index; a face constrains one axis,
    an edge two, a vertex three.
    """

    kind: str
    index: int
    id: str
    sides: tuple[tuple[int, int], ...]


def _build_catalog() -> tuple[BoundaryEntity, ...]:
    ents: list[BoundaryEntity] = []
    for axis in range(3):
        for side in range(2):
            eid = f"face:{AXES[axis]}{SIGNS[side]}"
            ents.append(BoundaryEntity("face", 2 * axis + side, eid, ((axis, side),)))
    idx = 0
    for free in range(3):
        a, b = (ax for ax in range(3) if ax != free)
        for sb in range(2):
            for sa in range(2):
                eid = f"edge:{AXES[a]}{SIGNS[sa]}{AXES[b]}{SIGNS[sb]}"
                ents.append(BoundaryEntity("edge", idx, eid, ((a, sa), (b, sb))))
                idx += 1
    for idx in range(8):
        s = (idx & 1, (idx >> 1) & 1, (idx >> 2) & 1)
        eid = "vertex:" + "".join(f"{AXES[ax]}{SIGNS[s[ax]]}" for ax in range(3))
        ents.append(BoundaryEntity("vertex", idx, eid, tuple((ax, s[ax]) for ax in range(3))))
    return tuple(ents)


ENTITIES: tuple[BoundaryEntity, ...] = _build_catalog()
ENTITY_BY_ID: dict[str, BoundaryEntity] = {e.id: e for e in ENTITIES}


def resolve_entity(entity: BoundaryEntity | str) -> BoundaryEntity:
    """Map an entity or its id to the catalog entry; unknown ids raise."""
    if isinstance(entity, BoundaryEntity):
        if entity.id not in ENTITY_BY_ID:
            raise KeyError(f"unknown boundary entity {entity.id!r}")
        return entity
    try:
        return ENTITY_BY_ID[entity]
    except KeyError:
        raise KeyError(f"unknown boundary entity {entity!r}") from None


class MeshTopology:
    """Immutable voxel grid: counts, numbering and element connectivity.

    Attributes
    ----------
    nx, ny, nz : int
        Element counts per axis (each >= 1).
    h : float
        Edge length of the cubic voxels, meters.
    enodes : (ne, 8) int array
        Global node indices of each element's corners in local order.
    edof : (ne, 24) int array
        Global DOF indices per element, 3 per node, node-major.
    """

    def __init__(self, nx: int, ny: int, nz: int, h: float):
        for name, v in (("nx", nx), ("ny", ny), ("nz", nz)):
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {v!r}")
        if not (isinstance(h, (int, float)) and math.isfinite(h) and h > 0):
            raise ValueError(f"element size h must be finite and > 0, got {h!r}")
        self.nx, self.ny, self.nz = int(nx), int(ny), int(nz)
        self.h = float(h)
        self.shape = (self.nx, self.ny, self.nz)
        self.element_count = self.nx * self.ny * self.nz
        self.node_count = (self.nx + 1) * (self.ny + 1) * (self.nz + 1)
        self.dof_count = 3 * self.node_count

        sx, sy = self.nx + 1, (self.nx + 1) * (self.ny + 1)
        e = np.arange(self.element_count)
        ex = e % self.nx
        ey = (e // self.nx) % self.ny
        ez = e // (self.nx * self.ny)
        corner = ex + ey * sx + ez * sy
        k = np.arange(8)
        offs = (k & 1) + ((k >> 1) & 1) * sx + ((k >> 2) & 1) * sy
        self.enodes = corner[:, None] + offs[None, :]
        self.edof = (3 * self.enodes[:, :, None] + np.arange(3)).reshape(-1, 24)
        self.enodes.setflags(write=False)
        self.edof.setflags(write=False)

    def node_index(self, ix: int, iy: int, iz: int) -> int:
        return ix + iy * (self.nx + 1) + iz * (self.nx + 1) * (self.ny + 1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MeshTopology)
            and self.shape == other.shape
            and self.h == other.h
        )

    def __repr__(self) -> str:
        return f"MeshTopology({self.nx}x{self.ny}x{self.nz}, h={self.h})"


def build_mesh(domain: DomainSpec, elem_size: float) -> MeshTopology:
    """Discretize a domain into cubic voxels of edge elem_size.

    Element counts are round-to-nearest (ties up) with a floor of one
    element per axis; the domain lengths themselves are not snapped, so
    h*n may differ from l.
    """
    if not (isinstance(elem_size, (int, float)) and math.isfinite(elem_size) and elem_size > 0):
        raise ValueError(f"elem_size must be finite and > 0, got {elem_size!r}")
    counts = [max(1, int(math.floor(l / elem_size + 0.5))) for l in domain.lengths]
    return MeshTopology(counts[0], counts[1], counts[2], float(elem_size))


def element_nodes(mesh: MeshTopology, e: int) -> np.ndarray:
    """The 8 corner nodes of element e in local (x-fastest) order."""
    if not 0 <= e < mesh.element_count:
        raise IndexError(f"element index {e} out of range [0, {mesh.element_count})")
    return mesh.enodes[e].copy()


def boundary_entities(mesh: MeshTopology) -> list[BoundaryEntity]:
    """The 26 boundary entities; ids are independent of mesh resolution."""
    return list(ENTITIES)


def entity_nodes(
    mesh: MeshTopology, entity: BoundaryEntity | str, closure: bool = True
) -> np.ndarray:
    """Global node indices covered by a boundary entity, sorted ascending.

    closure=True includes the entity's own boundary (a face brings its 4
    edges and 4 vertices, an edge its 2 vertices); closure=False keeps
    only strictly interior nodes and may be empty on coarse meshes.
    """
    ent = resolve_entity(entity)
    n = (mesh.nx, mesh.ny, mesh.nz)
    constrained = dict(ent.sides)
    ranges = []
    for axis in range(3):
        if axis in constrained:
            ranges.append(np.array([constrained[axis] * n[axis]]))
        elif closure:
            ranges.append(np.arange(n[axis] + 1))
        else:
            ranges.append(np.arange(1, n[axis]))
    ix, iy, iz = np.meshgrid(*ranges, indexing="ij")
    nodes = ix + iy * (mesh.nx + 1) + iz * (mesh.nx + 1) * (mesh.ny + 1)
    return np.sort(nodes.ravel())
