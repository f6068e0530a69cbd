import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sparse

from maxwelldg.assembly import Discretization
from maxwelldg.mesh import Mesh, unit_square
from maxwelldg.problems import gradient_null_data, sine_problem
from maxwelldg.solver import (
    ResonanceError,
    SolutionOperator,
    solve_auxiliary,
    solve_mixed,
)


@pytest.fixture
def sine_load(disc2):
    problem = sine_problem()
    return disc2.load_volume(problem.source)


class TestMixedSolve:
    def test_zero_load(self, disc2):
        sol = solve_mixed(disc2, 1.0, np.zeros(disc2.spaces.dim_V
                                               + disc2.spaces.dim_Q))
        assert np.abs(sol.u.coeffs).max() == 0.0
        assert np.abs(sol.p.coeffs).max() == 0.0
        assert sol.residual == 0.0

    def test_solution_fields(self, disc2, sine_load):
        sol = solve_mixed(disc2, 1.0, sine_load)
        assert sol.u.space == "V"
        assert sol.p.space == "Q"
        assert sol.lam is None
        assert sol.residual < 1e-10
        assert 0.0 < sol.pivot_ratio <= 1.0
        assert sol.constraint_gap < 1e-10

    def test_linearity(self, disc2, sine_load):
        rng = np.random.default_rng(41)
        other = rng.standard_normal(sine_load.shape)
        combined = solve_mixed(disc2, 1.0, sine_load + 2.0 * other)
        a = solve_mixed(disc2, 1.0, sine_load)
        b = solve_mixed(disc2, 1.0, other)
        expect = a.u.coeffs + 2.0 * b.u.coeffs
        scale = np.linalg.norm(expect)
        assert np.linalg.norm(combined.u.coeffs - expect) < 1e-12 * scale

    def test_gradient_source_kills_field(self, disc2):
        # source eps grad q solves exactly as (u, p) = (0, -q)
        load, q = gradient_null_data(disc2, seed=5)
        for ksq in (0.0, 1.0):
            sol = solve_mixed(disc2, ksq, load)
            qscale = disc2.norm_q(q)
            assert disc2.norm_v(sol.u.coeffs) < 1e-10 * qscale
            assert disc2.norm_q(sol.p.coeffs + q) < 1e-9 * qscale

    def test_element_reorder_invariance(self, degree):
        # cyclic vertex relabeling changes coefficients, not the field;
        # a polynomial source keeps the load quadrature-exact on both maps
        base = unit_square(2)
        rolled = Mesh(base.vertices, np.roll(base.elements, 1, axis=1),
                      base.tags)
        source = lambda x, y: np.stack(
            [1.0 + x - 2.0 * y + x * x, -2.0 + 3.0 * x + y - y * y], axis=-1)
        fields = []
        for mesh in (base, rolled):
            disc = Discretization(mesh, degree)
            sol = solve_mixed(disc, 1.0, disc.load_volume(source))
            centroid = np.array([[1.0 / 3.0, 1.0 / 3.0]])
            sp = disc.spaces
            vals = np.array([
                sp.eval_v(sol.u.coeffs, sp.ref_coords(e, np.array(
                    [np.mean(mesh.vertices[mesh.elements[e]], axis=0)])))[e][0]
                for e in range(mesh.num_elements)])
            fields.append(vals)
        assert np.abs(fields[0] - fields[1]).max() < 1e-10


class TestAuxiliarySolve:
    def test_matches_primal(self, disc2, sine_load):
        primal = solve_mixed(disc2, 1.0, sine_load)
        aux = solve_auxiliary(disc2, 1.0, sine_load)
        uscale = disc2.norm_v(primal.u.coeffs)
        pscale = max(disc2.norm_q(primal.p.coeffs), 1e-30)
        assert disc2.norm_v(aux.u.coeffs - primal.u.coeffs) < 1e-8 * uscale
        assert disc2.norm_q(aux.p.coeffs - primal.p.coeffs) < 1e-8 * pscale
        assert aux.residual < 1e-10

    def test_multiplier_is_normal_jump(self, disc2, sine_load):
        aux = solve_auxiliary(disc2, 1.0, sine_load)
        assert aux.lam is not None and aux.lam.space == "M"
        jump = disc2.jump_n @ aux.p.coeffs
        scale = max(disc2.norm_m(jump), 1e-30)
        assert disc2.norm_m(aux.lam.coeffs - jump) < 1e-8 * scale


class TestSolutionOperator:
    def test_reuse_matches_direct(self, disc2, sine_load):
        op = SolutionOperator(disc2, ksq=1.0)
        direct = solve_mixed(disc2, 1.0, sine_load)
        again = op.solve(sine_load)
        assert np.abs(again.u.coeffs - direct.u.coeffs).max() < 1e-12
        assert op.pivot_ratio == again.pivot_ratio

    def test_apply_linearity(self, disc2):
        op = SolutionOperator(disc2)
        rng = np.random.default_rng(42)
        l1 = rng.standard_normal(disc2.spaces.dim_V)
        l2 = rng.standard_normal(disc2.spaces.dim_V)
        combined = op.apply(l1 + 2.0 * l2).coeffs
        split = op.apply(l1).coeffs + 2.0 * op.apply(l2).coeffs
        scale = np.linalg.norm(split)
        assert np.linalg.norm(combined - split) < 1e-11 * scale

    def test_self_adjoint_at_zero(self, disc2):
        # (T j1, j2)_eps = (j1, T j2)_eps for the source-to-field map
        op = SolutionOperator(disc2, ksq=0.0)
        rng = np.random.default_rng(43)
        c1 = rng.standard_normal(disc2.spaces.dim_V)
        c2 = rng.standard_normal(disc2.spaces.dim_V)
        u1 = op.apply_density(c1).u.coeffs
        u2 = op.apply_density(c2).u.coeffs
        s12 = u1 @ (disc2.mass_eps @ c2)
        s21 = c1 @ (disc2.mass_eps @ u2)
        assert s12 == pytest.approx(s21, rel=1e-10)

    def test_apply_density_load(self, disc2):
        rng = np.random.default_rng(44)
        c = rng.standard_normal(disc2.spaces.dim_V)
        sol = SolutionOperator(disc2).apply_density(c)
        load = np.zeros(disc2.spaces.dim_V + disc2.spaces.dim_Q)
        load[:disc2.spaces.dim_V] = disc2.mass_eps @ c
        direct = SolutionOperator(disc2).solve(load)
        assert np.abs(sol.u.coeffs - direct.u.coeffs).max() < 1e-13


class TestResonance:
    def test_exact_discrete_eigenvalue_raises(self):
        # find a true eigenvalue of the saddle point pencil, then solve there
        mesh = unit_square(2)
        disc = Discretization(mesh, 1)
        nv = disc.spaces.dim_V
        system = disc.primal_system(0.0).toarray()
        mass = np.zeros_like(system)
        mass[:nv, :nv] = disc.mass_eps.toarray()
        ev = scipy.linalg.eig(system, mass, right=False)
        finite = ev[np.isfinite(ev)]
        real = finite[np.abs(finite.imag) < 1e-8 * np.abs(finite.real)].real
        ksq = np.min(real[real > 0.1])
        load = np.zeros(system.shape[0])
        load[0] = 1.0
        with pytest.raises(ResonanceError):
            solve_mixed(disc, float(ksq), load)

    def test_regular_wavenumber_passes(self, disc2, sine_load):
        sol = solve_mixed(disc2, 1.0, sine_load)
        assert sol.pivot_ratio > 1e-12
