import numpy as np
import pytest

from esym.errors import IntegrationAbort
from esym.estructure import make_b_structure
from esym.integrator import IntegratorConfig, Trajectory, integrate, invariant_report
from esym.phasespace import flow_field, phase_function


def exp_field(x):
    return x


class TestAdaptive:
    def test_exponential(self):
        cfg = IntegratorConfig(method="rk45_adaptive", horizon=1.0,
                               rtol=1e-9, atol=1e-12)
        traj = integrate(exp_field, np.array([1.0]), cfg)
        assert traj.status == "completed"
        assert traj.times[-1] == pytest.approx(1.0, abs=1e-12)
        assert abs(traj.states[-1, 0] - np.e) < 1e-8

    def test_no_step_exceeds_tolerance(self):
        cfg = IntegratorConfig(method="rk45_adaptive", horizon=3.0,
                               rtol=1e-8, atol=1e-10)
        traj = integrate(lambda x: np.array([x[1], -np.sin(x[0])]),
                         np.array([1.2, 0.0]), cfg)
        assert len(traj.step_errors) > 10
        assert np.max(traj.step_errors) <= 1.0

    def test_times_strictly_increasing(self):
        cfg = IntegratorConfig(method="rk45_adaptive", horizon=2.0)
        traj = integrate(exp_field, np.array([0.5]), cfg)
        assert np.all(np.diff(traj.times) > 0)
        assert len(traj.times) == len(traj.states)

    def test_step_underflow_on_blowup(self):
        # finite-time blow-up x' = x^2 starting at 1 diverges at t = 1
        cfg = IntegratorConfig(method="rk45_adaptive", horizon=2.0,
                               rtol=1e-10, atol=1e-12, dt_min=1e-7)
        traj = integrate(lambda x: x ** 2, np.array([1.0]), cfg)
        assert traj.status == "step_underflow"
        assert traj.times[-1] < 2.0

    def test_left_region(self):
        cfg = IntegratorConfig(method="rk45_adaptive", horizon=5.0)
        traj = integrate(exp_field, np.array([1.0]), cfg,
                         region=lambda x: x[0] < 3.0)
        assert traj.status == "left_region"
        assert traj.states[-1, 0] < 3.0          # last recorded state in region
        assert traj.times[-1] < 5.0

    def test_time_reversal(self):
        def swirl(x):
            return np.array([x[1], -x[0]])

        cfg = IntegratorConfig(method="rk45_adaptive", horizon=4.0,
                               rtol=1e-10, atol=1e-13)
        x0 = np.array([1.0, 0.25])
        fwd = integrate(swirl, x0, cfg)
        back = integrate(lambda x: -swirl(x), fwd.states[-1], cfg)
        assert np.max(np.abs(back.states[-1] - x0)) < 1e-7


class TestFixedStep:
    def test_order_four_convergence(self):
        errors = []
        for dt in (0.1, 0.05):
            cfg = IntegratorConfig(method="rk4_fixed", dt=dt, horizon=1.0)
            traj = integrate(exp_field, np.array([1.0]), cfg)
            errors.append(abs(traj.states[-1, 0] - np.e))
        ratio = errors[0] / errors[1]
        assert 12.0 <= ratio <= 20.0

    def test_sample_stride(self):
        cfg = IntegratorConfig(method="rk4_fixed", dt=0.01, horizon=1.0,
                               sample_stride=10)
        traj = integrate(exp_field, np.array([1.0]), cfg)
        assert len(traj.times) == 11          # initial + every 10th of 100 steps
        assert np.allclose(np.diff(traj.times), 0.1)


class TestGuards:
    def test_nonfinite_initial_state(self):
        cfg = IntegratorConfig(horizon=1.0)
        with pytest.raises(IntegrationAbort):
            integrate(exp_field, np.array([np.nan]), cfg)

    def test_nan_field_aborts_with_state(self):
        def bad(x):
            return np.array([np.nan])

        cfg = IntegratorConfig(horizon=1.0)
        with pytest.raises(IntegrationAbort) as err:
            integrate(bad, np.array([1.0]), cfg)
        assert err.value.state is not None

    def test_initial_state_outside_region(self):
        cfg = IntegratorConfig(horizon=1.0)
        with pytest.raises(IntegrationAbort):
            integrate(exp_field, np.array([5.0]), cfg, region=lambda x: x[0] < 3.0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            IntegratorConfig(horizon=-1.0)
        with pytest.raises(ValueError):
            IntegratorConfig(method="euler")
        with pytest.raises(ValueError):
            IntegratorConfig(sample_stride=0)


class TestHypersurfaceFlow:
    def test_exponential_growth_of_boundary_coordinate(self):
        frame = make_b_structure(1, 1)
        ham = phase_function(frame, "m1")
        cfg = IntegratorConfig(method="rk45_adaptive", horizon=2.0,
                               rtol=1e-10, atol=1e-14)
        traj = integrate(flow_field(ham, frame), np.array([0.5, 1.0]), cfg)
        expected = 0.5 * np.exp(traj.times)
        assert np.max(np.abs(traj.states[:, 0] - expected) / expected) < 1e-7

    def test_boundary_start_is_fixed_point(self):
        frame = make_b_structure(1, 1)
        ham = phase_function(frame, "m1")
        cfg = IntegratorConfig(method="rk45_adaptive", horizon=2.0)
        traj = integrate(flow_field(ham, frame), np.array([0.0, 1.0]), cfg,
                         monitors={"boundary_q1": lambda t, x: x[0]})
        assert np.max(np.abs(traj.monitors["boundary_q1"])) == 0.0

    def test_no_locus_crossing(self):
        # dq/dt proportional to q keeps the sign of the distance fixed
        frame = make_b_structure(1, 1)
        ham = phase_function(frame, "m1^2")
        cfg = IntegratorConfig(method="rk45_adaptive", horizon=3.0)
        for q0 in (0.4, -0.4):
            traj = integrate(flow_field(ham, frame), np.array([q0, -1.0]), cfg)
            assert np.all(np.sign(traj.states[:, 0]) == np.sign(q0))


class TestInvariantReport:
    def test_constant_state(self):
        cfg = IntegratorConfig(method="rk4_fixed", dt=0.1, horizon=1.0)
        traj = integrate(lambda x: np.zeros_like(x), np.array([2.0]), cfg,
                         monitors={"value": lambda t, x: x[0]})
        rep = invariant_report(traj)
        assert rep["value"]["max_abs_drift"] == 0.0
        assert rep["value"]["max_rel_drift"] == 0.0

    def test_drift_shrinks_with_tolerance(self):
        def swirl(x):
            return np.array([x[1], -x[0]])

        def energy(t, x):
            return float(x @ x)

        drifts = []
        for rtol in (1e-6, 1e-10):
            cfg = IntegratorConfig(method="rk45_adaptive", horizon=10.0,
                                   rtol=rtol, atol=rtol * 1e-3)
            traj = integrate(swirl, np.array([1.0, 0.0]), cfg,
                             monitors={"energy": energy})
            drifts.append(invariant_report(traj)["energy"]["max_rel_drift"])
        assert drifts[1] < drifts[0] / 2
        assert drifts[1] < 1e-7

    def test_empty_trajectory_rejected(self):
        traj = Trajectory(times=np.empty(0), states=np.empty((0, 1)),
                          monitors={}, status="completed")
        with pytest.raises(ValueError):
            invariant_report(traj)

    def test_nonfinite_channel_reported_not_raised(self):
        cfg = IntegratorConfig(method="rk4_fixed", dt=0.5, horizon=1.0)
        traj = integrate(lambda x: np.zeros_like(x), np.array([0.0]), cfg,
                         monitors={"log": lambda t, x: -np.inf})
        rep = invariant_report(traj)
        assert np.isnan(rep["log"]["max_abs_drift"])
