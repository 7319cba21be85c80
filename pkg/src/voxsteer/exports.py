"""Result writers: VTK voxel fields, CSV histories, matplotlib report figures."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .mesh import MeshTopology
from .optimizer import IterationReport

CSV_COLUMNS = ("iter", "compliance", "volume", "change")


def export_vtk(
    field: np.ndarray,
    mesh: MeshTopology,
    path,
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0),
    title: str = "voxsteer density field",
) -> None:
    """Legacy ASCII STRUCTURED_POINTS file with one CELL_DATA density scalar.

    Values are written in x-fastest element order; the full field is kept,
    thresholding is left to the viewer.
    """
    values = np.asarray(field, dtype=float).ravel(order="F")
    if values.size != mesh.element_count:
        raise ValueError(
            f"field has {values.size} values, mesh has {mesh.element_count} elements"
        )
    h = mesh.h
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {mesh.nx + 1} {mesh.ny + 1} {mesh.nz + 1}",
        f"ORIGIN {origin[0]:.9g} {origin[1]:.9g} {origin[2]:.9g}",
        f"SPACING {h:.9g} {h:.9g} {h:.9g}",
        f"CELL_DATA {mesh.element_count}",
        "SCALARS density float 1",
        "LOOKUP_TABLE default",
    ]
    lines.extend(f"{v:.9g}" for v in values)
    Path(path).write_text("\n".join(lines) + "\n")


class HistoryWriter:
    """Incremental CSV history, flushed after every row so crashes leave a trail."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(CSV_COLUMNS)
        self._fh.flush()

    def write(self, report: IterationReport) -> None:
        self._writer.writerow(
            [
                report.iter,
                f"{report.compliance:.17g}",
                f"{report.volume:.17g}",
                f"{report.change:.17g}",
            ]
        )
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def render_convergence(history, volumes, path) -> None:
    """Objective and volume per iteration, to a file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    iters = [it for it, _ in history]
    comps = [c for _, c in history]
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(iters, comps, "o-", ms=3, lw=1.2, color="tab:blue", label="compliance")
    ax.set_xlabel("iteration")
    ax.set_ylabel("compliance", color="tab:blue")
    ax.grid(alpha=0.3)
    if volumes:
        ax2 = ax.twinx()
        ax2.plot(iters, volumes, "s--", ms=2.5, lw=1.0, color="tab:red", label="volume")
        ax2.set_ylabel("volume fraction", color="tab:red")
        ax2.set_ylim(0.0, 1.0)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_density(x_phys: np.ndarray, mesh: MeshTopology, path, threshold: float = 0.5) -> None:
    """Mid-plane slices of the density field plus the thresholded silhouette."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    grid = np.asarray(x_phys).reshape(mesh.shape, order="F")
    cuts = [
        (grid[:, :, mesh.nz // 2].T, "xy plane, mid z", "x", "y"),
        (grid[:, mesh.ny // 2, :].T, "xz plane, mid y", "x", "z"),
        (grid[mesh.nx // 2, :, :].T, "yz plane, mid x", "y", "z"),
    ]
    fig, axes = plt.subplots(1, 4, figsize=(11.0, 2.9))
    for ax, (img, name, xl, yl) in zip(axes[:3], cuts):
        ax.imshow(img, origin="lower", cmap="gray_r", vmin=0.0, vmax=1.0, aspect="equal")
        ax.set_title(name, fontsize=9)
        ax.set_xlabel(xl, fontsize=8)
        ax.set_ylabel(yl, fontsize=8)
        ax.tick_params(labelsize=7)
    solid = (grid >= threshold).sum(axis=1).T  # project along y
    axes[3].imshow(solid > 0, origin="lower", cmap="gray_r", aspect="equal")
    axes[3].set_title(f"solid projection (x_phys >= {threshold:g})", fontsize=9)
    axes[3].set_xlabel("x", fontsize=8)
    axes[3].set_ylabel("z", fontsize=8)
    axes[3].tick_params(labelsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
