import numpy as np
import pytest
import sympy as sp

import esym.gauge
from esym.errors import FrameError
from esym.estructure import make_b_structure, make_foliation_structure
from esym.fields import ScalarField
from esym.gauge import (
    GaugeData,
    GaugePhasePoint,
    LieAlgebra,
    coupled_poisson_bivector,
    curvature,
    minimal_coupling_inverse,
    minimal_coupling_map,
    split_gauge_state,
    wong_field,
    wong_flow_field,
)
from esym.integrator import IntegratorConfig, integrate
from esym.phasespace import phase_function


def fields_from_exprs(exprs, symbols):
    return [[ScalarField.from_expr(e, symbols) for e in row] for row in exprs]


def constant_connection(values, n):
    return [[ScalarField.constant(v, n) for v in row] for row in values]


def component_gradient(frame, fn, state, h=1e-6):
    n = frame.chart.dim_n
    grad = np.zeros(len(state))
    for j in range(len(state)):
        xp, xm = np.array(state), np.array(state)
        step = h * max(1.0, abs(state[j]))
        xp[j] += step
        xm[j] -= step
        grad[j] = (fn(xp) - fn(xm)) / (2 * step)
    rho = frame.anchor_matrix(state[:n])
    return np.concatenate([rho @ grad[:n], grad[n:]])


def bracket(gd, fa, fb, state):
    pm = coupled_poisson_bivector(gd, split_gauge_state(gd, state))
    ga = component_gradient(gd.frame, fa, state)
    gb = component_gradient(gd.frame, fb, state)
    return float(ga @ pm @ gb)


class TestLieAlgebra:
    def test_so3_jacobi_and_skew(self):
        alg = LieAlgebra.so3()
        assert alg.dim_d == 3 and not alg.is_abelian
        assert alg.c[0, 1, 2] == 1.0 and alg.c[1, 0, 2] == -1.0

    def test_u1_is_abelian(self):
        assert LieAlgebra.u1().is_abelian

    def test_invalid_constants_rejected(self):
        bad = np.zeros((2, 2, 2))
        bad[0, 1, 0] = 1.0      # not skew
        with pytest.raises(FrameError):
            LieAlgebra(bad)
        # [e0, e1] = e1 and [e1, e2] = e0 leave a cyclic-sum residual -e0
        nonjacobi = np.zeros((3, 3, 3))
        nonjacobi[0, 1, 1] = 1.0
        nonjacobi[1, 0, 1] = -1.0
        nonjacobi[1, 2, 0] = 1.0
        nonjacobi[2, 1, 0] = -1.0
        with pytest.raises(FrameError):
            LieAlgebra(nonjacobi)

    def test_casimir_names(self):
        assert set(LieAlgebra.abelian(2).casimirs([1.0, 2.0])) == {"O1", "O2"}
        assert set(LieAlgebra.so3().casimirs([1.0, 0.0, 0.0])) == {"charge_norm"}


class TestCurvature:
    def test_constant_abelian_connection_is_flat(self):
        frame = make_foliation_structure(2, 2)
        gd = GaugeData(LieAlgebra.u1(), constant_connection([[0.7], [0.3]], 2), frame)
        assert np.max(np.abs(curvature(gd, [0.1, 0.5]))) < 1e-12

    def test_linear_potential_constant_field(self):
        frame = make_foliation_structure(2, 2)
        q1, q2 = sp.symbols("q1 q2", real=True)
        gd = GaugeData(LieAlgebra.u1(),
                       fields_from_exprs([[sp.Integer(0)], [q1]], (q1, q2)), frame)
        f = curvature(gd, [0.4, -0.6])
        assert f[0, 1, 0] == pytest.approx(1.0, abs=1e-12)
        assert f[1, 0, 0] == pytest.approx(-1.0, abs=1e-12)

    def test_zero_connection_nonabelian(self):
        frame = make_foliation_structure(2, 2)
        gd = GaugeData(LieAlgebra.su2(), constant_connection([[0.0] * 3] * 2, 2), frame)
        assert np.max(np.abs(curvature(gd, [0.3, 0.3]))) == 0.0

    def test_frame_correction_term(self):
        # on E1 = x dx, E2 = x dy with [E1, E2] = E2 the -C A term appears
        from esym.estructure import make_vanishing_structure

        frame = make_vanishing_structure()
        gd = GaugeData(LieAlgebra.u1(), constant_connection([[0.0], [1.0]], 2), frame)
        f = curvature(gd, [0.5, 0.2])
        # E_i(A_j) = 0, so F_12 = -C_12^2 A_2 = -1
        assert f[0, 1, 0] == pytest.approx(-1.0, abs=1e-12)

    def test_quadratic_term_nonabelian(self):
        frame = make_foliation_structure(2, 2)
        conn = constant_connection([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]], 2)
        gd = GaugeData(LieAlgebra.so3(), conn, frame)
        f = curvature(gd, [0.0, 0.0])
        # F_12^c = eps_abc A_1^a A_2^b = eps_12c * 1 * 2
        assert f[0, 1, 2] == pytest.approx(2.0)
        assert f[0, 1, 0] == 0.0 and f[0, 1, 1] == 0.0


class TestMinimalCoupling:
    def test_zero_connection_is_identity(self):
        frame = make_foliation_structure(2, 2)
        gd = GaugeData(LieAlgebra.u1(), constant_connection([[0.0], [0.0]], 2), frame)
        pt = GaugePhasePoint.make(gd, [0.1, 0.2], [1.0, -1.0], [2.0])
        out = minimal_coupling_map(gd, pt)
        assert np.array_equal(out.m, pt.m) and np.array_equal(out.charge, pt.charge)

    def test_uncharged_particle_unchanged(self):
        frame = make_foliation_structure(2, 2)
        q1, q2 = sp.symbols("q1 q2", real=True)
        gd = GaugeData(LieAlgebra.u1(),
                       fields_from_exprs([[q2], [q1]], (q1, q2)), frame)
        pt = GaugePhasePoint.make(gd, [0.5, 0.5], [1.0, 1.0], [0.0])
        out = minimal_coupling_map(gd, pt)
        assert np.array_equal(out.m, pt.m)

    def test_momentum_shift_value(self):
        frame = make_foliation_structure(2, 2)
        q1, q2 = sp.symbols("q1 q2", real=True)
        gd = GaugeData(LieAlgebra.u1(),
                       fields_from_exprs([[sp.Integer(0)], [q1]], (q1, q2)), frame)
        pt = GaugePhasePoint.make(gd, [2.0, 0.0], [1.0, 1.0], [3.0])
        out = minimal_coupling_map(gd, pt)
        assert np.allclose(out.m, [1.0, 7.0])

    def test_involution_with_inverse(self):
        frame = make_b_structure(2, 1)
        q1, q2 = sp.symbols("q1 q2", real=True)
        gd = GaugeData(LieAlgebra.so3(),
                       fields_from_exprs([[q1, q2, sp.Integer(1)],
                                          [q2 ** 2, sp.Integer(0), q1]], (q1, q2)),
                       frame)
        pt = GaugePhasePoint.make(gd, [0.4, -0.8], [0.3, 0.6], [1.0, -2.0, 0.5])
        back = minimal_coupling_inverse(gd, minimal_coupling_map(gd, pt))
        assert np.allclose(back.m, pt.m) and np.allclose(back.q, pt.q)


class TestCoupledBivector:
    def setup_method(self):
        self.frame = make_b_structure(2, 1)
        q1, q2 = sp.symbols("q1 q2", real=True)
        self.syms = (q1, q2)
        self.exprs = [[q2, sp.Integer(1), q1 * q2], [q1, q1 ** 2, sp.sin(q2)]]
        self.gd = GaugeData(LieAlgebra.so3(),
                            fields_from_exprs(self.exprs, self.syms), self.frame)

    def amat(self, q):
        return np.array([[float(e.subs(dict(zip(self.syms, q)))) for e in row]
                         for row in self.exprs])

    def psi(self, state):
        q, mom, charge = state[:2], state[2:4], state[4:]
        return np.concatenate([q, mom + self.amat(q) @ charge, charge])

    def test_uncoupled_limit_is_canonical(self):
        zero = ScalarField.constant(0.0, 2)
        gd0 = GaugeData(LieAlgebra.so3(), [[zero] * 3, [zero] * 3], self.frame)
        pt = GaugePhasePoint.make(gd0, [0.5, 0.2], [1.0, -1.0], [0.0, 0.0, 0.0])
        pm = coupled_poisson_bivector(gd0, pt)
        expected = np.zeros((7, 7))
        expected[:2, 2:4] = -np.eye(2)
        expected[2:4, :2] = np.eye(2)
        assert np.array_equal(pm, expected)

    def test_abelian_case_kills_charge_blocks(self):
        q1, q2 = self.syms
        gd = GaugeData(LieAlgebra.u1(),
                       fields_from_exprs([[q2], [q1 ** 2]], self.syms), self.frame)
        pt = GaugePhasePoint.make(gd, [0.5, 0.2], [1.0, -1.0], [2.0])
        pm = coupled_poisson_bivector(gd, pt)
        assert np.max(np.abs(pm[4:, 4:])) == 0.0       # charge-charge
        assert np.max(np.abs(pm[2:4, 4:])) == 0.0      # momentum-charge
        f = curvature(gd, pt.q)
        assert pm[2, 3] == pytest.approx(2.0 * f[0, 1, 0])

    def test_so3_charge_block_is_linear(self):
        pt = GaugePhasePoint.make(self.gd, [0.5, 0.2], [1.0, -1.0], [0.3, 0.2, 0.1])
        pm = coupled_poisson_bivector(self.gd, pt)
        eps = LieAlgebra.so3().c
        expected = np.einsum("k,ijk->ij", pt.charge, eps)
        assert np.allclose(pm[4:, 4:], expected)

    def test_skewness_exact(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            state = np.concatenate([rng.uniform(0.2, 1.5, 2), rng.normal(size=5)])
            pm = coupled_poisson_bivector(self.gd, split_gauge_state(self.gd, state))
            assert np.max(np.abs(pm + pm.T)) == 0.0

    def test_pullback_oracle(self):
        """The bracket table is the canonical bracket seen through the
        coupling map: {f o Psi, g o Psi}_canonical = {f, g}_coupled o Psi."""
        rng = np.random.default_rng(12)
        zero = ScalarField.constant(0.0, 2)
        gd0 = GaugeData(LieAlgebra.so3(), [[zero] * 3, [zero] * 3], self.frame)
        worst = 0.0
        for trial in range(20):
            r = np.random.default_rng(trial)
            lin_a, lin_b = r.normal(size=7) * 0.5, r.normal(size=7) * 0.5
            quad_a, quad_b = r.normal(size=(7, 7)) / 14, r.normal(size=(7, 7)) / 14

            def fa(x):
                return float(lin_a @ x + x @ quad_a @ x)

            def fb(x):
                return float(lin_b @ x + x @ quad_b @ x)

            w = np.concatenate([rng.uniform(0.3, 1.2, 2), rng.normal(size=5)])
            lhs = bracket(gd0, lambda s: fa(self.psi(s)), lambda s: fb(self.psi(s)), w)
            rhs = bracket(self.gd, fa, fb, self.psi(w))
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
        assert worst < 1e-6

    def test_jacobi_identity_and_mutation(self):
        rng = np.random.default_rng(7)

        def make_fn(seed):
            r = np.random.default_rng(seed)
            lin = r.normal(size=7) * 0.5
            quad = r.normal(size=(7, 7)) / 14
            return lambda x: float(lin @ x + x @ quad @ x)

        def jacobi(biv):
            def br(a, b):
                def inner(s):
                    pm = biv(self.gd, split_gauge_state(self.gd, s))
                    ga = component_gradient(self.frame, a, s)
                    gb = component_gradient(self.frame, b, s)
                    return float(ga @ pm @ gb)
                return inner

            worst = 0.0
            for trial in range(5):
                f, g, h = make_fn(trial), make_fn(trial + 50), make_fn(trial + 100)
                s = np.concatenate([rng.uniform(0.3, 1.2, 2), rng.normal(size=5)])
                worst = max(worst, abs(br(f, br(g, h))(s) + br(g, br(h, f))(s)
                                       + br(h, br(f, g))(s)))
            return worst

        assert jacobi(coupled_poisson_bivector) < 1e-6

        def flipped(gd, pt):
            pm = coupled_poisson_bivector(gd, pt).copy()
            pm[2:4, 4:] *= -1.0
            pm[4:, 2:4] *= -1.0
            return pm

        assert jacobi(flipped) > 1e-2


class TestWongField:
    def test_abelian_charge_conserved_exactly(self):
        frame = make_foliation_structure(2, 2)
        q1, q2 = sp.symbols("q1 q2", real=True)
        gd = GaugeData(LieAlgebra.u1(),
                       fields_from_exprs([[sp.Integer(0)], [q1]], (q1, q2)), frame)
        ham = phase_function(frame, "m1^2 + m2^2")
        pt = GaugePhasePoint.make(gd, [0.4, 0.3], [0.5, -0.2], [1.7])
        v = wong_field(ham, gd, pt)
        assert v[4] == 0.0
        traj = integrate(wong_flow_field(ham, gd),
                         np.array([0.4, 0.3, 0.5, -0.2, 1.7]),
                         IntegratorConfig(method="rk45_adaptive", horizon=10.0,
                                          rtol=1e-10, atol=1e-13))
        assert np.max(np.abs(traj.states[:, 4] - 1.7)) == 0.0

    def test_boundary_stays_fixed(self):
        frame = make_b_structure(2, 1)
        q1, q2 = sp.symbols("q1 q2", real=True)
        gd = GaugeData(LieAlgebra.u1(),
                       fields_from_exprs([[q2], [q1 + q2]], (q1, q2)), frame)
        ham = phase_function(frame, "m1^2 + m2^2")
        traj = integrate(wong_flow_field(ham, gd),
                         np.array([0.0, 0.4, 0.5, -0.2, 1.0]),
                         IntegratorConfig(method="rk45_adaptive", horizon=5.0,
                                          rtol=1e-9, atol=1e-12))
        assert np.max(np.abs(traj.states[:, 0])) == 0.0

    def test_circular_lorentz_motion(self):
        """Constant magnetic field: momentum rotates at rate 2 O, the orbit
        is a circle of radius |m0| / |O| about q0 + J m0 / O."""
        frame = make_foliation_structure(2, 2)
        q1, q2 = sp.symbols("q1 q2", real=True)
        gd = GaugeData(LieAlgebra.u1(),
                       fields_from_exprs([[sp.Integer(0)], [q1]], (q1, q2)), frame)
        ham = phase_function(frame, "m1^2 + m2^2")
        q0, m0, charge = np.array([0.2, -0.3]), np.array([0.5, 0.4]), 1.3
        traj = integrate(wong_flow_field(ham, gd), np.concatenate([q0, m0, [charge]]),
                         IntegratorConfig(method="rk45_adaptive", horizon=10.0,
                                          rtol=1e-11, atol=1e-13))
        jrot = np.array([[0.0, -1.0], [1.0, 0.0]])
        center = q0 + jrot @ m0 / charge
        radius = np.linalg.norm(m0) / abs(charge)
        radii = np.linalg.norm(traj.states[:, :2] - center, axis=1)
        assert np.max(np.abs(radii - radius)) < 1e-5
        # angular frequency of the momentum rotation is 2 O
        angles = np.unwrap(np.arctan2(traj.states[:, 3], traj.states[:, 2]))
        fitted = np.polyfit(traj.times, angles, 1)[0]
        assert fitted == pytest.approx(2 * charge, rel=1e-6)

    def test_so3_casimir_drift(self):
        frame = make_foliation_structure(2, 2)
        conn = constant_connection([[0.3, 0.0, 0.1], [0.0, 0.2, 0.0]], 2)
        gd = GaugeData(LieAlgebra.so3(), conn, frame)
        ham = phase_function(frame, "m1^2 + m2^2")
        x0 = np.array([0.2, -0.3, 0.5, 0.4, 0.3, -0.2, 0.4])
        traj = integrate(wong_flow_field(ham, gd), x0,
                         IntegratorConfig(method="rk45_adaptive", horizon=10.0,
                                          rtol=1e-10, atol=1e-13))
        norms = np.linalg.norm(traj.states[:, 4:], axis=1)
        assert np.max(np.abs(norms - norms[0])) / norms[0] < 1e-6
        # the charge itself precesses: components are not individually conserved
        assert np.max(np.abs(traj.states[:, 4] - x0[4])) > 1e-3

    def test_energy_conserved(self):
        frame = make_b_structure(2, 1)
        q1, q2 = sp.symbols("q1 q2", real=True)
        gd = GaugeData(LieAlgebra.so3(),
                       fields_from_exprs([[q2, sp.Integer(1), q1],
                                          [sp.Integer(0), q1, q2]], (q1, q2)), frame)
        ham = phase_function(frame, "m1^2 + m2^2 + q2^2")
        x0 = np.array([0.5, 0.1, 0.4, -0.3, 0.3, 0.2, -0.1])
        traj = integrate(wong_flow_field(ham, gd), x0,
                         IntegratorConfig(method="rk45_adaptive", horizon=10.0,
                                          rtol=1e-10, atol=1e-13))
        energies = np.array([ham.smooth(s[:4]) for s in traj.states])
        assert np.max(np.abs(energies - energies[0])) < 1e-6
