"""voxsteer: interactive 3-D topology optimization on voxel grids.

A SIMP compliance-minimization engine over a structured hexahedral mesh,
steerable while it runs: boundary conditions, volume fraction, iteration
limit and solver toggles can all be mutated between iterations, live from
a browser via the WebSocket API or scripted through the CLI.
"""

from .mesh import DomainSpec, MeshTopology, BoundaryEntity, build_mesh
from .bc import BoundaryConditions, EntityBC, preset_cantilever, preset_bridge
from .optimizer import OptimizerParams, DensityField
from .session import Session, MutationCommand, Snapshot

__version__ = "0.1.0"

__all__ = [
    "DomainSpec",
    "MeshTopology",
    "BoundaryEntity",
    "build_mesh",
    "BoundaryConditions",
    "EntityBC",
    "preset_cantilever",
    "preset_bridge",
    "OptimizerParams",
    "DensityField",
    "Session",
    "MutationCommand",
    "Snapshot",
    "__version__",
]
