import numpy as np
import pytest

from voxsteer.bc import BoundaryConditions, drag, preset_cantilever, tap
from voxsteer.errors import NoConvergence, SingularSystem
from voxsteer.fea import (
    SolverConfig,
    active_dof_mask,
    compliance,
    element_strain_energies,
    element_young,
    hex8_stiffness,
    solve_direct,
    solve_pcg,
)
from voxsteer.mesh import DomainSpec, MeshTopology, build_mesh, entity_nodes

from oracles import assemble_dense_K, gauss_ke, rigid_body_modes


class P:
    """Minimal material/penalization parameter bag."""

    def __init__(self, e0=1.0, emin=1e-9, p=3.0):
        self.e0, self.emin, self.p = e0, emin, p


class TestHex8Stiffness:
    def test_symmetry(self):
        ke = hex8_stiffness(1.0, 0.3)
        assert np.abs(ke - ke.T).max() <= 1e-12 * np.abs(ke).max()

    def test_rigid_body_nullspace(self):
        ke = hex8_stiffness(0.7, 0.25)
        modes = rigid_body_modes(MeshTopology(1, 1, 1, 0.7))
        scale = np.abs(ke).max()
        for r in modes:
            assert np.abs(ke @ r).max() <= 1e-10 * scale

    def test_exactly_six_zero_eigenvalues(self):
        ke = hex8_stiffness(1.0, 0.3)
        ev = np.linalg.eigvalsh(ke)
        tol = 1e-10 * ev[-1]
        assert (np.abs(ev) <= tol).sum() == 6
        assert (ev > tol).sum() == 18

    @pytest.mark.parametrize("nu", [0.0, 0.3, 0.45])
    def test_matches_gauss_quadrature_and_scales_linearly(self, nu):
        for h in (1.0, 2.0, 0.25):
            np.testing.assert_allclose(hex8_stiffness(h, nu), gauss_ke(h, nu), atol=1e-12)
        np.testing.assert_allclose(hex8_stiffness(2.0, nu), 2.0 * hex8_stiffness(1.0, nu), rtol=1e-14)

    def test_rejects_bad_nu(self):
        for nu in (-0.1, 0.5, 0.7):
            with pytest.raises(ValueError):
                hex8_stiffness(1.0, nu)


class TestElementYoung:
    def test_endpoints(self):
        p = P(e0=2.5, emin=1e-6)
        assert element_young(0.0, p) == pytest.approx(1e-6)
        assert element_young(1.0, p) == pytest.approx(2.5)

    def test_linear_case(self):
        assert element_young(0.5, P(e0=1.0, emin=0.0, p=1.0)) == pytest.approx(0.5)

    def test_strictly_increasing(self):
        x = np.linspace(0, 1, 21)
        E = element_young(x, P())
        assert np.all(np.diff(E) > 0)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            element_young(1.2, P())


def _uniform(mesh, value=1.0):
    return np.full(mesh.element_count, value)


class TestSolveDirect:
    def test_single_element_vs_dense_oracle(self):
        mesh = MeshTopology(1, 1, 1, 1.0)
        ke = hex8_stiffness(1.0, 0.3)
        bcs = drag(tap(BoundaryConditions(), "face:x-"), "vertex:x+y+z+", (0.0, 0.0, -1.0))
        params = P()
        sol = solve_direct(_uniform(mesh), bcs, mesh, ke, params)

        K = assemble_dense_K(_uniform(mesh), mesh, ke, params.e0, params.emin, params.p)
        f = np.zeros(mesh.dof_count)
        f[3 * entity_nodes(mesh, "vertex:x+y+z+")[0] + 2] = -1.0
        free = np.setdiff1d(np.arange(24), np.array([3 * n + a for n in entity_nodes(mesh, "face:x-") for a in range(3)]))
        u_expect = np.zeros(24)
        u_expect[free] = np.linalg.solve(K[np.ix_(free, free)], f[free])

        np.testing.assert_allclose(sol.u, u_expect, rtol=1e-9, atol=1e-14)
        assert compliance(sol.u, f) > 0

    def test_no_clamp_is_singular(self, mesh422):
        bcs = drag(BoundaryConditions(), "face:z+", (0.0, 0.0, -1.0))
        with pytest.raises(SingularSystem):
            solve_direct(_uniform(mesh422), bcs, mesh422, hex8_stiffness(mesh422.h, 0.3), P())

    def test_collinear_clamp_is_singular(self, mesh422):
        bcs = drag(tap(BoundaryConditions(), "edge:y-z-"), "face:z+", (0.0, 0.0, -1.0))
        with pytest.raises(SingularSystem):
            solve_direct(_uniform(mesh422), bcs, mesh422, hex8_stiffness(mesh422.h, 0.3), P())

    def test_zero_load_flag(self, mesh422):
        bcs = tap(BoundaryConditions(), "face:x-")
        sol = solve_direct(_uniform(mesh422), bcs, mesh422, hex8_stiffness(mesh422.h, 0.3), P())
        assert sol.zero_load
        assert not sol.u.any()

    def test_linearity_in_load(self, mesh422):
        ke = hex8_stiffness(mesh422.h, 0.3)
        one = preset_cantilever()
        two = drag(one, "edge:x+z-", (0.0, 0.0, -2.0))
        u1 = solve_direct(_uniform(mesh422, 0.5), one, mesh422, ke, P()).u
        u2 = solve_direct(_uniform(mesh422, 0.5), two, mesh422, ke, P()).u
        np.testing.assert_allclose(u2, 2.0 * u1, rtol=1e-9, atol=1e-16)

    def test_clamped_dofs_identically_zero(self, mesh422):
        from voxsteer.bc import clamped_dofs

        bcs = preset_cantilever()
        sol = solve_direct(_uniform(mesh422, 0.4), bcs, mesh422, hex8_stiffness(mesh422.h, 0.3), P())
        assert not sol.u[clamped_dofs(bcs, mesh422)].any()

    def test_mirror_symmetric_solution(self, mesh422):
        from voxsteer.bc import preset_bridge

        m = mesh422
        sol = solve_direct(_uniform(m, 0.5), preset_bridge(), m, hex8_stiffness(m.h, 0.3), P())
        u = sol.u.reshape(-1, 3)
        nodes = np.arange(m.node_count)
        ix = nodes % (m.nx + 1)
        mirror = nodes - ix + (m.nx - ix)
        scale = np.abs(u).max()
        # x-components flip sign under the mirror, y/z match
        assert np.abs(u[:, 0] + u[mirror, 0]).max() <= 1e-8 * scale
        assert np.abs(u[:, 1] - u[mirror, 1]).max() <= 1e-8 * scale
        assert np.abs(u[:, 2] - u[mirror, 2]).max() <= 1e-8 * scale


class TestSolvePcg:
    def test_agrees_with_direct_8x4x4(self, mesh844):
        ke = hex8_stiffness(mesh844.h, 0.3)
        bcs = preset_cantilever()
        x = _uniform(mesh844, 0.3)
        ud = solve_direct(x, bcs, mesh844, ke, P()).u
        up = solve_pcg(x, bcs, mesh844, ke, P(), SolverConfig(pcg_tol=1e-8)).u
        assert np.abs(up - ud).max() / np.abs(ud).max() <= 1e-6

    def test_solver_equivalence_within_10x_tol(self):
        mesh = build_mesh(DomainSpec(2.0, 1.0, 1.0), 0.125)  # 16x8x8
        ke = hex8_stiffness(mesh.h, 0.3)
        bcs = preset_cantilever()
        x = _uniform(mesh, 0.3)
        ud = solve_direct(x, bcs, mesh, ke, P()).u
        up = solve_pcg(x, bcs, mesh, ke, P(), SolverConfig(pcg_tol=1e-8)).u
        assert np.abs(up - ud).max() / np.abs(ud).max() <= 1e-7

    def test_warm_start_exact_converges_immediately(self, mesh422):
        ke = hex8_stiffness(mesh422.h, 0.3)
        bcs = preset_cantilever()
        x = _uniform(mesh422, 0.5)
        exact = solve_pcg(x, bcs, mesh422, ke, P(), SolverConfig(pcg_tol=1e-10))
        again = solve_pcg(x, bcs, mesh422, ke, P(), SolverConfig(pcg_tol=1e-8), u0=exact.u)
        assert again.iterations <= 2

    def test_tolerance_monotone_work(self, mesh422):
        ke = hex8_stiffness(mesh422.h, 0.3)
        bcs = preset_cantilever()
        x = _uniform(mesh422, 0.5)
        loose = solve_pcg(x, bcs, mesh422, ke, P(), SolverConfig(pcg_tol=0.5))
        tight = solve_pcg(x, bcs, mesh422, ke, P(), SolverConfig(pcg_tol=1e-10))
        assert loose.iterations < tight.iterations

    def test_maxit_raises_no_convergence(self, mesh844):
        ke = hex8_stiffness(mesh844.h, 0.3)
        with pytest.raises(NoConvergence):
            solve_pcg(
                _uniform(mesh844, 0.3),
                preset_cantilever(),
                mesh844,
                ke,
                P(),
                SolverConfig(pcg_tol=1e-12, pcg_maxit=3),
            )

    def test_counts_element_ops(self, mesh422):
        ke = hex8_stiffness(mesh422.h, 0.3)
        sol = solve_pcg(_uniform(mesh422, 0.5), preset_cantilever(), mesh422, ke, P())
        # one matvec for the initial residual plus one per iteration
        assert sol.element_ops == mesh422.element_count * (sol.iterations + 1)


class TestEnergies:
    def test_zero_displacement(self, mesh422):
        ke = hex8_stiffness(mesh422.h, 0.3)
        ce = element_strain_energies(np.zeros(mesh422.dof_count), mesh422, ke)
        assert not ce.any()

    def test_rigid_translation_energy_free(self, mesh422):
        ke = hex8_stiffness(mesh422.h, 0.3)
        u = np.zeros(mesh422.dof_count)
        u[0::3] = 0.37
        ce = element_strain_energies(u, mesh422, ke)
        assert np.abs(ce).max() <= 1e-10 * np.abs(ke).max()

    def test_energy_sum_matches_dense_quadratic_form(self, rng):
        mesh = MeshTopology(2, 1, 1, 1.0)
        ke = hex8_stiffness(1.0, 0.3)
        params = P()
        x = rng.uniform(0.2, 1.0, mesh.element_count)
        u = rng.normal(size=mesh.dof_count)
        K = assemble_dense_K(x, mesh, ke, params.e0, params.emin, params.p)
        ce = element_strain_energies(u, mesh, ke)
        E = element_young(x, params)
        np.testing.assert_allclose((E * ce).sum(), u @ K @ u, rtol=1e-12)


class TestCompliance:
    def test_zero_force(self, mesh422):
        assert compliance(np.ones(mesh422.dof_count), np.zeros(mesh422.dof_count)) == 0.0

    def test_doubling_force_quadruples_compliance(self, mesh422):
        ke = hex8_stiffness(mesh422.h, 0.3)
        one = preset_cantilever()
        two = drag(one, "edge:x+z-", (0.0, 0.0, -2.0))
        from voxsteer.bc import assemble_force

        u1 = solve_direct(_uniform(mesh422, 0.5), one, mesh422, ke, P()).u
        u2 = solve_direct(_uniform(mesh422, 0.5), two, mesh422, ke, P()).u
        c1 = compliance(u1, assemble_force(one, mesh422))
        c2 = compliance(u2, assemble_force(two, mesh422))
        assert c2 == pytest.approx(4.0 * c1, rel=1e-9)

    def test_energy_identity_on_cantilever(self, mesh422):
        from voxsteer.bc import assemble_force

        ke = hex8_stiffness(mesh422.h, 0.3)
        params = P()
        x = _uniform(mesh422, 0.5)
        bcs = preset_cantilever()
        sol = solve_direct(x, bcs, mesh422, ke, params)
        c = compliance(sol.u, assemble_force(bcs, mesh422))
        ce = element_strain_energies(sol.u, mesh422, ke)
        energy = (element_young(x, params) * ce).sum()
        assert abs(c - energy) <= 1e-8 * abs(c)

    def test_stiffer_never_less_stiff(self, mesh422, rng):
        from voxsteer.bc import assemble_force

        ke = hex8_stiffness(mesh422.h, 0.3)
        params = P()
        bcs = preset_cantilever()
        f = assemble_force(bcs, mesh422)
        for _ in range(5):
            x = rng.uniform(0.1, 0.9, mesh422.element_count)
            bump = np.minimum(1.0, x + rng.uniform(0.0, 0.1, x.size))
            c_soft = compliance(solve_direct(x, bcs, mesh422, ke, params).u, f)
            c_stiff = compliance(solve_direct(bump, bcs, mesh422, ke, params).u, f)
            assert c_stiff <= c_soft * (1 + 1e-10)


class TestActiveDofMask:
    def test_buried_void_nodes_dropped(self):
        mesh = MeshTopology(3, 3, 3, 1.0)
        bcs = tap(BoundaryConditions(), "face:x-")
        passive = np.zeros(mesh.element_count, dtype=bool)
        mask_full = active_dof_mask(mesh, bcs, passive)
        # retire every element touching the center node -> its DOFs go inactive
        center = mesh.node_index(2, 2, 2)
        passive[np.any(mesh.enodes == center, axis=1)] = True
        mask = active_dof_mask(mesh, bcs, passive)
        assert mask_full[3 * center : 3 * center + 3].all()
        assert not mask[3 * center : 3 * center + 3].any()
