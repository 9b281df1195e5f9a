import numpy as np
import pytest
import sympy as sp

from esym.ecalculus import (
    EForm,
    EFunction,
    d_squared_residual,
    e_differential,
    e_function_frame_gradient,
    interior_product,
    lie_derivative,
    smooth_efunction,
)
from esym.errors import SingularTermError
from esym.estructure import (
    BUILTIN_FAMILIES,
    make_b_structure,
    make_foliation_structure,
    make_vanishing_structure,
)
from esym.fields import ScalarField


def poly_field(expr_text, names):
    syms = tuple(sp.Symbol(n, real=True) for n in names)
    expr = sp.sympify(expr_text, locals=dict(zip(names, syms)))
    return ScalarField.from_expr(expr, syms)


class TestDifferential:
    def test_coordinate_function_on_b(self):
        frame = make_b_structure(2, 1)
        df = e_differential(EForm.function(poly_field("q2", ("q1", "q2")), 2), frame)
        q = np.array([0.7, 0.3])
        assert df.evaluate((0,), q) == 0.0       # <df, q1 d/dq1> = q1 * 0
        assert df.evaluate((1,), q) == 1.0

    def test_log_differential_is_dual_generator(self):
        # <d log|q1|, q1 d/dq1> = 1 exactly, smooth across the locus
        frame = make_b_structure(2, 1)
        func = EFunction(log_terms=((0, 1.0),), nvars=2)
        for q1 in (0.5, 1e-8, 0.0, -0.4):
            grad = e_function_frame_gradient(func, frame, [q1, 2.0])
            assert np.allclose(grad, [1.0, 0.0])

    def test_dual_generator_differential_vanishing(self):
        # with C_12^2 = 1 the second dual generator obeys dE2* = -E1*^E2*
        frame = make_vanishing_structure()
        de2 = e_differential(EForm.dual_generator(1, 2, 2), frame)
        q = np.array([0.7, -0.2])
        assert de2.evaluate((0, 1), q) == pytest.approx(-1.0, abs=1e-12)
        de1 = e_differential(EForm.dual_generator(0, 2, 2), frame)
        assert de1.max_abs(q) == 0.0

    def test_top_degree_differential_is_zero(self):
        frame = make_b_structure(2, 1)
        top = EForm(2, 2, {(0, 1): ScalarField.constant(1.0, 2)})
        dtop = e_differential(top, frame)
        assert dtop.degree == 3 and not dtop.coeffs


class TestCochainProperty:
    def test_polynomial_zero_forms(self):
        rng = np.random.default_rng(11)
        for builder in BUILTIN_FAMILIES.values():
            frame = builder()
            names = frame.chart.coord_names
            field = poly_field("+".join(f"{c:.3f}*{a}*{b}"
                                        for c, a, b in zip(rng.normal(size=3),
                                                           names * 3, names[::-1] * 3)),
                               names)
            form = EForm.function(field, frame.rank_p)
            q = rng.uniform(0.2, 1.5, size=frame.chart.dim_n)
            assert d_squared_residual(form, frame, q) < 1e-6

    def test_worked_one_form(self):
        frame = make_vanishing_structure()
        e2 = EForm.dual_generator(1, 2, 2)
        assert d_squared_residual(e2, frame, [0.7, -0.2]) < 1e-8

    def test_foliation_trig_function(self):
        frame = make_foliation_structure(2, 2)
        f = EForm.function(poly_field("sin(q1)*cos(q2)", ("q1", "q2")), 2)
        assert d_squared_residual(f, frame, [0.4, 1.1]) < 1e-6


class TestLieDerivative:
    def test_invariant_dual_generator(self):
        # i_{E1} E1* = 1 and dE1* = 0, so L_{E1} E1* = 0
        frame = make_b_structure(2, 1)
        one = ScalarField.constant(1.0, 2)
        zero = ScalarField.constant(0.0, 2)
        out = lie_derivative([one, zero], EForm.dual_generator(0, 2, 2), frame)
        assert out.max_abs(np.array([0.6, -0.3])) == 0.0

    def test_zero_field_annihilates(self):
        frame = make_vanishing_structure()
        zero = ScalarField.constant(0.0, 2)
        form = EForm(1, 2, {(0,): poly_field("x*y", ("x", "y")),
                            (1,): poly_field("x^2", ("x", "y"))})
        out = lie_derivative([zero, zero], form, frame)
        assert out.max_abs(np.array([0.3, 0.8])) == 0.0

    def test_scaling_of_second_dual_generator(self):
        # [E1, E2] = E2 makes E2* contract: L_{E1} E2* = -E2*
        frame = make_vanishing_structure()
        one = ScalarField.constant(1.0, 2)
        zero = ScalarField.constant(0.0, 2)
        out = lie_derivative([one, zero], EForm.dual_generator(1, 2, 2), frame)
        q = np.array([0.7, -0.2])
        assert out.evaluate((1,), q) == pytest.approx(-1.0, abs=1e-12)
        assert out.evaluate((0,), q) == 0.0

    def test_flow_pullback_oracle(self):
        """One-step flow pullback reproduces the Cartan-formula value.

        The frame E1 = x dx, E2 = x dy is invertible off x = 0, so the form
        can be pushed to coordinates, pulled back along the (numeric) time-t
        flow of E1, and re-expressed in the frame; (pullback - id)/t must
        match L_{E1} E2* = -E2*.
        """
        frame = make_vanishing_structure()
        q0 = np.array([0.7, -0.2])
        t = 1e-4

        def ambient_flow(q):
            # one RK4 step for the field (x, 0)
            def vel(z):
                return np.array([z[0], 0.0])

            k1 = vel(q)
            k2 = vel(q + t / 2 * k1)
            k3 = vel(q + t / 2 * k2)
            k4 = vel(q + t * k3)
            return q + t / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

        # frame coefficients of E2* pulled back along the flow
        def frame_coeffs_of_pullback(q):
            h = 1e-6
            jac = np.zeros((2, 2))
            for j in range(2):
                qp, qm = q.copy(), q.copy()
                qp[j] += h
                qm[j] -= h
                jac[:, j] = (ambient_flow(qp) - ambient_flow(qm)) / (2 * h)
            phi_q = ambient_flow(q)
            # E2* = dy/x in coordinates
            w_amb_at_phi = np.array([0.0, 1.0 / phi_q[0]])
            pulled = jac.T @ w_amb_at_phi
            rho = frame.anchor_matrix(q)
            return rho @ pulled

        numeric = (frame_coeffs_of_pullback(q0) - np.array([0.0, 1.0])) / t
        cartan = lie_derivative([ScalarField.constant(1.0, 2),
                                 ScalarField.constant(0.0, 2)],
                                EForm.dual_generator(1, 2, 2), frame)
        expected = np.array([cartan.evaluate((0,), q0), cartan.evaluate((1,), q0)])
        assert np.allclose(numeric, expected, atol=1e-3)
        assert np.allclose(expected, [0.0, -1.0])

    def test_degree_zero_cartan(self):
        rng = np.random.default_rng(5)
        frame = make_vanishing_structure()
        f = EForm.function(poly_field("x^2*y + sin(x)", ("x", "y")), 2)
        x_fields = [poly_field("y", ("x", "y")), poly_field("x*y", ("x", "y"))]
        q = rng.uniform(0.2, 1.0, size=2)
        lhs = lie_derivative(x_fields, f, frame).evaluate((), q)
        rhs = interior_product(x_fields, e_differential(f, frame), frame).evaluate((), q)
        assert abs(lhs - rhs) < 1e-8


class TestEFunction:
    def test_smooth_gradient_equals_anchor_contraction(self):
        frame = make_b_structure(2, 1)
        field = poly_field("q1*q2 + q2^2", ("q1", "q2"))
        q = np.array([0.4, -1.1])
        grad = e_function_frame_gradient(smooth_efunction(field), frame, q)
        rho = frame.anchor_matrix(q)
        assert np.allclose(grad, rho @ field.gradient(q))

    def test_power_term_on_order_three_frame(self):
        frame = make_b_structure(2, 3)
        gk = ScalarField.constant(1.0, 1)
        func = EFunction(power_terms=((0, 2, gk),), nvars=2)
        grad = e_function_frame_gradient(func, frame, [0.5, 0.0])
        assert grad[0] == pytest.approx(-2.0, abs=1e-12)   # -k g q^(m-k-1) = -2
        assert grad[1] == 0.0

    def test_power_term_with_varying_coefficient(self):
        # d/dx (g(x)/x) with g = x^2: contributions -1*g*x^(m-2) + g'*x^(m-1)
        frame = make_b_structure(1, 2)
        x = sp.Symbol("x", real=True)
        gk = ScalarField.from_expr(x ** 2, (x,))
        func = EFunction(power_terms=((0, 1, gk),), nvars=1)
        q = np.array([0.7])
        # f = x^2/x = x smooth; <df, x^2 d/dx> = x^2
        grad = e_function_frame_gradient(func, frame, q)
        assert grad[0] == pytest.approx(0.49, abs=1e-12)

    def test_exponent_exceeding_order_rejected(self):
        frame = make_b_structure(2, 3)
        gk = ScalarField.constant(1.0, 1)
        func = EFunction(power_terms=((0, 3, gk),), nvars=2)
        with pytest.raises(SingularTermError):
            e_function_frame_gradient(func, frame, [0.5, 0.0])

    def test_ledger_requires_boundary_coordinate(self):
        frame = make_foliation_structure(2, 2)
        func = EFunction(log_terms=((0, 1.0),), nvars=2)
        with pytest.raises(SingularTermError):
            e_function_frame_gradient(func, frame, [0.5, 0.5])

    def test_value_includes_singular_parts(self):
        func = EFunction(smooth=ScalarField.constant(2.0, 1),
                         log_terms=((0, 3.0),), nvars=1)
        assert func(np.array([1.0])) == 2.0
        assert func(np.array([np.e])) == pytest.approx(5.0)
        assert func(np.array([0.0])) == -np.inf

    def test_gradient_bounded_through_locus(self):
        frame = make_b_structure(2, 3)
        gk = ScalarField.constant(0.5, 1)
        func = EFunction(log_terms=((0, 2.0),), power_terms=((0, 2, gk),), nvars=2)
        sup = max(np.max(np.abs(e_function_frame_gradient(func, frame, [q1, 0.3])))
                  for q1 in np.linspace(-0.5, 0.5, 21))
        assert np.isfinite(sup) and sup < 10.0

    def test_degree0_differential_matches_gradient(self):
        rng = np.random.default_rng(9)
        for builder in BUILTIN_FAMILIES.values():
            frame = builder()
            names = frame.chart.coord_names
            field = poly_field(f"{names[0]}^2" + ("" if len(names) == 1 else f"*{names[-1]}"),
                               names)
            df = e_differential(EForm.function(field, frame.rank_p), frame)
            q = rng.uniform(0.3, 1.2, size=frame.chart.dim_n)
            grad = e_function_frame_gradient(smooth_efunction(field), frame, q)
            for i in range(frame.rank_p):
                assert df.evaluate((i,), q) == pytest.approx(grad[i], abs=1e-10)
