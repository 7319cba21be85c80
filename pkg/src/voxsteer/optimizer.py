"""SIMP compliance minimization with the optimality-criteria update.

One iteration runs filter -> solve -> compliance -> sensitivities ->
sensitivity filtering -> OC update -> optional void removal. The OC
Lagrange multiplier is bracketed by doubling and bisected on the exact
filtered volume, so the volume constraint holds at every iterate, not
just in the limit.

Volume is accounted over the full domain: permanently removed (passive
void) elements count as zero density in the constraint mean, keeping the
target a fraction of the whole computational domain.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .bc import BoundaryConditions, assemble_force
from .errors import BisectionFailure, NoConvergence
from .fea import (
    SolverConfig,
    compliance,
    element_strain_energies,
    solve_direct,
    solve_pcg,
)
from .filters import FilterKernel
from .mesh import MeshTopology


@dataclass(frozen=True)
class OptimizerParams:
    volfrac: float = 0.3
    maxiter: int = 100
    p: float = 3.0
    move: float = 0.2
    eta: float = 0.5
    change_tol: float = 0.01
    remove_voids: bool = True
    iterative_solver: bool = True
    void_threshold: float = 0.01
    void_patience: int = 5
    rmin: float = 1.5
    e0: float = 1.0
    emin: float = 1e-9
    nu: float = 0.3
    pcg_tol: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.volfrac < 1.0:
            raise ValueError(f"volfrac must lie strictly inside (0, 1), got {self.volfrac!r}")
        if int(self.maxiter) != self.maxiter or self.maxiter < 0:
            raise ValueError(f"maxiter must be an integer >= 0, got {self.maxiter!r}")
        if self.p < 1.0:
            raise ValueError("penalization p must be >= 1")
        if not 0.0 < self.move <= 1.0:
            raise ValueError("move limit must lie in (0, 1]")
        if self.eta <= 0.0:
            raise ValueError("eta must be > 0")
        if self.change_tol < 0.0:
            raise ValueError("change_tol must be >= 0")
        if not 0.0 < self.void_threshold < 1.0:
            raise ValueError("void_threshold must lie in (0, 1)")
        if int(self.void_patience) != self.void_patience or self.void_patience < 1:
            raise ValueError("void_patience must be an integer >= 1")
        if self.rmin < 1.0:
            raise ValueError("rmin must be >= 1 element")
        if not 0.0 <= self.emin < self.e0:
            raise ValueError("need 0 <= Emin < E0")
        if not 0.0 <= self.nu < 0.5:
            raise ValueError("Poisson ratio must lie in [0, 0.5)")
        if not 0.0 < self.pcg_tol < 1.0:
            raise ValueError("pcg_tol must lie in (0, 1)")

    def solver_config(self) -> SolverConfig:
        mode = "pcg" if self.iterative_solver else "direct"
        return SolverConfig(mode=mode, pcg_tol=self.pcg_tol)


@dataclass
class DensityField:
    """Design variables, their filtered counterpart, and void bookkeeping."""

    x: np.ndarray
    x_phys: np.ndarray
    passive_void: np.ndarray
    low_count: np.ndarray

    def copy(self) -> "DensityField":
        return DensityField(
            self.x.copy(), self.x_phys.copy(), self.passive_void.copy(), self.low_count.copy()
        )

    @property
    def volume(self) -> float:
        return float(self.x_phys.mean())


@dataclass(frozen=True)
class IterationReport:
    iter: int
    compliance: float
    volume: float
    change: float
    solver_iterations: int
    wall_time: float
    element_ops: int = 0


@dataclass
class IterationState:
    """Everything one iteration hands to the next."""

    field: DensityField
    u: np.ndarray | None = None
    iter: int = 0
    element_ops: int = 0

    def invalidate_warm_start(self) -> None:
        self.u = None


def init_densities(
    mesh: MeshTopology, params: OptimizerParams, kernel: FilterKernel | None = None
) -> DensityField:
    """Uniform start at the volume fraction, no voids, counters zero."""
    kernel = kernel or FilterKernel(mesh.shape, params.rmin)
    ne = mesh.element_count
    x = np.full(ne, params.volfrac)
    return DensityField(
        x=x,
        x_phys=kernel.forward(x),
        passive_void=np.zeros(ne, dtype=bool),
        low_count=np.zeros(ne, dtype=np.int64),
    )


def sensitivities(x_phys: np.ndarray, ce: np.ndarray, params: OptimizerParams):
    """Compliance and volume gradients wrt the filtered densities.

    dc/dx_e = -p x_e^(p-1) (E0 - Emin) ce, never positive; volume is the
    plain mean so dv is uniform 1/ne.
    """
    ce = np.maximum(ce, 0.0)
    dc = -params.p * x_phys ** (params.p - 1.0) * (params.e0 - params.emin) * ce
    dv = np.full(x_phys.shape, 1.0 / x_phys.size)
    return dc, dv


def _oc_candidate(x, bfac, lam, lower, upper, passive, eta):
    cand = np.clip(x * (bfac / lam) ** eta, lower, upper)
    if passive is not None:
        cand = np.where(passive, 0.0, cand)
    return cand


def _pinned_volume(cand, kernel, passive):
    xp = kernel.forward(cand)
    if passive is not None:
        xp = np.where(passive, 0.0, xp)
    return xp, float(xp.mean())


def oc_update(
    x: np.ndarray,
    dc: np.ndarray,
    dv: np.ndarray,
    params: OptimizerParams,
    kernel: FilterKernel,
    passive: np.ndarray | None = None,
):
    """Optimality-criteria step under move limits and the volume constraint.

    The multiplier bracket starts at 1 and is grown by doubling until the
    filtered-volume residual changes sign (at most 128 doublings, else
    BisectionFailure), then bisected to a relative width of 1e-6. Passive
    elements stay pinned at zero throughout.

    Returns (x_new, x_phys_new).
    """
    if np.any(dv <= 0):
        raise ValueError("dv must be positive")
    bfac = np.maximum(-dc, 0.0) / dv
    lower = np.maximum(0.0, x - params.move)
    upper = np.minimum(1.0, x + params.move)

    def volume_excess(lam: float) -> float:
        cand = _oc_candidate(x, bfac, lam, lower, upper, passive, params.eta)
        _, vol = _pinned_volume(cand, kernel, passive)
        return vol - params.volfrac

    # volume decreases as lam grows; keep excess(lo) > 0 >= excess(hi)
    lo = hi = 1.0
    g0 = volume_excess(1.0)
    if g0 > 0:
        for _ in range(128):
            hi *= 2.0
            if volume_excess(hi) <= 0:
                break
        else:
            raise BisectionFailure("no multiplier bracket after 128 doublings")
    else:
        for _ in range(128):
            lo *= 0.5
            if volume_excess(lo) > 0:
                break
        else:
            raise BisectionFailure("no multiplier bracket after 128 doublings")

    while (hi - lo) / (hi + lo) > 1e-6:
        mid = 0.5 * (lo + hi)
        if volume_excess(mid) > 0:
            lo = mid
        else:
            hi = mid

    lam = 0.5 * (lo + hi)
    x_new = _oc_candidate(x, bfac, lam, lower, upper, passive, params.eta)
    x_phys_new, _ = _pinned_volume(x_new, kernel, passive)
    return x_new, x_phys_new


def apply_void_removal(field: DensityField, params: OptimizerParams) -> DensityField:
    """Track persistently empty elements and retire them permanently.

    An element whose filtered density sits below void_threshold for
    void_patience consecutive iterations becomes a passive void: design
    and filtered values pinned to zero, element dropped from assembly.
    Removal is one-way.
    """
    out = field.copy()
    active = ~out.passive_void
    below = active & (out.x_phys < params.void_threshold)
    out.low_count[below] += 1
    out.low_count[active & ~below] = 0
    newly = out.low_count >= params.void_patience
    if np.any(newly):
        out.passive_void |= newly
        out.x[out.passive_void] = 0.0
        out.x_phys[out.passive_void] = 0.0
    return out


def run_iteration(
    state: IterationState,
    params: OptimizerParams,
    bcs: BoundaryConditions,
    mesh: MeshTopology,
    kernel: FilterKernel,
    ke: np.ndarray,
):
    """One full optimizer pass; returns (new state, report).

    PCG runs warm-started from the previous displacement; a NoConvergence
    falls back to one direct solve for the iteration. The reported volume
    is the constraint value enforced by the OC bisection, measured before
    this iteration's void removal retires further elements.
    """
    t0 = time.perf_counter()
    old = state.field
    passive = old.passive_void if old.passive_void.any() else None
    x_phys = kernel.forward(old.x)
    if passive is not None:
        x_phys = np.where(passive, 0.0, x_phys)

    cfg = params.solver_config()
    if cfg.mode == "pcg":
        try:
            sol = solve_pcg(
                x_phys, bcs, mesh, ke, params, cfg, u0=state.u, passive=passive
            )
        except NoConvergence:
            sol = solve_direct(x_phys, bcs, mesh, ke, params, passive=passive)
    else:
        sol = solve_direct(x_phys, bcs, mesh, ke, params, passive=passive)

    f = assemble_force(bcs, mesh)
    c = compliance(sol.u, f)
    ce = element_strain_energies(sol.u, mesh, ke)
    dc, dv = sensitivities(x_phys, ce, params)
    dc_f = kernel.adjoint(dc)
    dv_f = kernel.adjoint(dv)
    x_new, x_phys_new = oc_update(old.x, dc_f, dv_f, params, kernel, old.passive_void)

    new_field = DensityField(
        x=x_new,
        x_phys=x_phys_new,
        passive_void=old.passive_void.copy(),
        low_count=old.low_count.copy(),
    )
    volume = new_field.volume
    if params.remove_voids:
        new_field = apply_void_removal(new_field, params)

    change = float(np.max(np.abs(x_new - old.x))) if x_new.size else 0.0
    report = IterationReport(
        iter=state.iter + 1,
        compliance=c,
        volume=volume,
        change=change,
        solver_iterations=sol.iterations,
        wall_time=time.perf_counter() - t0,
        element_ops=sol.element_ops,
    )
    new_state = IterationState(
        field=new_field,
        u=sol.u,
        iter=state.iter + 1,
        element_ops=state.element_ops + sol.element_ops,
    )
    return new_state, report


def has_converged(report: IterationReport, params: OptimizerParams) -> bool:
    """Stop when the design stalls or the iteration budget is spent."""
    return report.change < params.change_tol or report.iter >= params.maxiter
