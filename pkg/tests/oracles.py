"""Independent reference implementations the tests check the package against.

Everything here is deliberately written the slow, obvious way (triple
loops, dense matrices, direct quadrature) and shares no code with the
package internals.
"""

from __future__ import annotations

import math

import numpy as np


def gauss_ke(h: float, nu: float) -> np.ndarray:
    """H8 stiffness by direct 2x2x2 Gauss quadrature of B^T C B, E=1.

    Local nodes enumerate corner offsets x fastest, matching the package
    convention.
    """
    corners = [(k & 1, (k >> 1) & 1, (k >> 2) & 1) for k in range(8)]
    sgn = np.array([[2 * c - 1 for c in cs] for cs in corners], dtype=float)
    g = 1.0 / math.sqrt(3.0)
    c = 1.0 / ((1 + nu) * (1 - 2 * nu))
    C = c * np.array(
        [
            [1 - nu, nu, nu, 0, 0, 0],
            [nu, 1 - nu, nu, 0, 0, 0],
            [nu, nu, 1 - nu, 0, 0, 0],
            [0, 0, 0, (1 - 2 * nu) / 2, 0, 0],
            [0, 0, 0, 0, (1 - 2 * nu) / 2, 0],
            [0, 0, 0, 0, 0, (1 - 2 * nu) / 2],
        ]
    )
    ke = np.zeros((24, 24))
    det = (h / 2.0) ** 3
    for gx in (-g, g):
        for gy in (-g, g):
            for gz in (-g, g):
                dN = np.zeros((8, 3))
                for k in range(8):
                    sx, sy, sz = sgn[k]
                    dN[k, 0] = 0.125 * sx * (1 + sy * gy) * (1 + sz * gz)
                    dN[k, 1] = 0.125 * sy * (1 + sx * gx) * (1 + sz * gz)
                    dN[k, 2] = 0.125 * sz * (1 + sx * gx) * (1 + sy * gy)
                dNdx = dN * (2.0 / h)
                B = np.zeros((6, 24))
                for k in range(8):
                    B[0, 3 * k + 0] = dNdx[k, 0]
                    B[1, 3 * k + 1] = dNdx[k, 1]
                    B[2, 3 * k + 2] = dNdx[k, 2]
                    B[3, 3 * k + 0] = dNdx[k, 1]
                    B[3, 3 * k + 1] = dNdx[k, 0]
                    B[4, 3 * k + 1] = dNdx[k, 2]
                    B[4, 3 * k + 2] = dNdx[k, 1]
                    B[5, 3 * k + 0] = dNdx[k, 2]
                    B[5, 3 * k + 2] = dNdx[k, 0]
                ke += B.T @ C @ B * det
    return ke


def cone_weights(rmin: float):
    """(offsets, weights) of the cone kernel, offsets within ceil(rmin)-1."""
    hw = math.ceil(rmin) - 1
    offs, w = [], []
    for i in range(-hw, hw + 1):
        for j in range(-hw, hw + 1):
            for k in range(-hw, hw + 1):
                v = rmin - math.sqrt(i * i + j * j + k * k)
                offs.append((i, j, k))
                w.append(max(0.0, v))
    return offs, w


def conv3_brute(x: np.ndarray, rmin: float) -> tuple[np.ndarray, np.ndarray]:
    """Direct zero-padded 3-D cone convolution; returns (numerator, hs)."""
    nx, ny, nz = x.shape
    offs, w = cone_weights(rmin)
    num = np.zeros_like(x, dtype=float)
    hs = np.zeros_like(x, dtype=float)
    for ex in range(nx):
        for ey in range(ny):
            for ez in range(nz):
                acc = 0.0
                hacc = 0.0
                for (di, dj, dk), wv in zip(offs, w):
                    if wv == 0.0:
                        continue
                    jx, jy, jz = ex + di, ey + dj, ez + dk
                    if 0 <= jx < nx and 0 <= jy < ny and 0 <= jz < nz:
                        acc += wv * x[jx, jy, jz]
                        hacc += wv
                num[ex, ey, ez] = acc
                hs[ex, ey, ez] = hacc
    return num, hs


def dense_filter_matrix(shape: tuple[int, int, int], rmin: float):
    """Dense (ne, ne) cone weight matrix H and the row sums hs.

    Element order is x fastest, matching flat fields in the package.
    """
    nx, ny, nz = shape
    ne = nx * ny * nz
    offs, w = cone_weights(rmin)
    H = np.zeros((ne, ne))
    for ex in range(nx):
        for ey in range(ny):
            for ez in range(nz):
                e1 = ex + ey * nx + ez * nx * ny
                for (di, dj, dk), wv in zip(offs, w):
                    if wv == 0.0:
                        continue
                    jx, jy, jz = ex + di, ey + dj, ez + dk
                    if 0 <= jx < nx and 0 <= jy < ny and 0 <= jz < nz:
                        e2 = jx + jy * nx + jz * nx * ny
                        H[e1, e2] = wv
    return H, H.sum(axis=1)


def assemble_dense_K(x_phys, mesh, ke, e0, emin, p) -> np.ndarray:
    """Dense global stiffness from per-element SIMP moduli."""
    K = np.zeros((mesh.dof_count, mesh.dof_count))
    E = emin + np.asarray(x_phys) ** p * (e0 - emin)
    for e in range(mesh.element_count):
        dofs = mesh.edof[e]
        K[np.ix_(dofs, dofs)] += E[e] * ke
    return K


def rigid_body_modes(mesh) -> np.ndarray:
    """6 rigid-body displacement vectors (3 translations, 3 rotations)."""
    nn = mesh.node_count
    sx, sy = mesh.nx + 1, (mesh.nx + 1) * (mesh.ny + 1)
    nodes = np.arange(nn)
    coords = (
        np.column_stack((nodes % sx, (nodes // sx) % (mesh.ny + 1), nodes // sy))
        * mesh.h
    )
    modes = np.zeros((6, 3 * nn))
    for a in range(3):
        modes[a, a::3] = 1.0
    x, y, z = coords.T
    # infinitesimal rotations about x, y, z
    modes[3, 1::3], modes[3, 2::3] = -z, y
    modes[4, 0::3], modes[4, 2::3] = z, -x
    modes[5, 0::3], modes[5, 1::3] = -y, x
    return modes
