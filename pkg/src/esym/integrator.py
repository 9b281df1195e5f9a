"""Time integration of state-space fields with invariant monitoring.

Two methods: classical fixed-step RK4 and a Dormand-Prince 5(4) embedded
pair with PI step-size control.  Integration terminates at the horizon, on
leaving the chart region (status ``left_region``) or when the adaptive step
underflows (status ``step_underflow``, the physically meaningful outcome
when a trajectory approaches a singular locus in infinite time).  A step
that would leave the region is never recorded; the last in-region state
closes the record.

No structure-preserving discretization is attempted: the symplectic form
is non-canonical in ambient coordinates, so conservation quality is
controlled by tight tolerances and reported by the drift monitors instead.
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import IntegrationAbort

# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass
class IntegratorConfig:
    method: str = "rk45_adaptive"      # or "rk4_fixed"
    horizon: float = 10.0
    dt: float = 1e-3                   # fixed-step size
    rtol: float = 1e-9
    atol: float = 1e-12
    dt_min: float = 1e-12
    dt_max: float = 1.0
    dt_init: float = 1e-4
    sample_stride: int = 1
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.method not in ("rk4_fixed", "rk45_adaptive"):
            raise ValueError(f"unknown method '{self.method}'")
        if self.method == "rk4_fixed" and self.dt <= 0:
            raise ValueError("dt must be positive")
        if min(self.rtol, self.atol, self.dt_min, self.dt_max, self.dt_init) <= 0:
            raise ValueError("tolerances and step bounds must be positive")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be a positive integer")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray                 # shape (len(times), dim)
    monitors: dict                     # name -> np.ndarray aligned with times
    status: str                        # completed | left_region | step_underflow
    step_errors: np.ndarray = dataclass_field(default_factory=lambda: np.empty(0))
    meta: dict = dataclass_field(default_factory=dict)


class _Recorder:
    def __init__(self, monitors):
        self.monitor_fns = monitors or {}
        self.times = []
        self.states = []
        self.channels = {name: [] for name in self.monitor_fns}

    def record(self, t, x):
        self.times.append(t)
        self.states.append(np.array(x))
        for name, fn in self.monitor_fns.items():
            self.channels[name].append(float(fn(t, x)))

    def build(self, status, step_errors, meta):
        return Trajectory(
            times=np.array(self.times),
            states=np.array(self.states),
            monitors={k: np.array(v) for k, v in self.channels.items()},
            status=status,
            step_errors=np.array(step_errors),
            meta=dict(meta or {}),
        )


def _checked(field, t, x):
    dx = np.asarray(field(x), dtype=float)
    if not np.all(np.isfinite(dx)):
        raise IntegrationAbort(
            f"vector field produced non-finite output at t={t:.6g}", t=t, state=np.array(x))
    return dx


def _rk4_step(field, t, x, h):
    k1 = _checked(field, t, x)
    k2 = _checked(field, t + h / 2, x + h / 2 * k1)
    k3 = _checked(field, t + h / 2, x + h / 2 * k2)
    k4 = _checked(field, t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(field, x0, cfg, region=None, monitors=None, meta=None):
    """Integrate x' = field(x) from x0 over cfg.horizon.

    region: optional predicate on states; the first step leaving it ends
    the record with status ``left_region``.  monitors: dict of named
    callables (t, x) -> float sampled every cfg.sample_stride accepted
    steps (the initial and final states are always sampled).
    """
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise IntegrationAbort("initial state has non-finite entries", t=0.0, state=x0)
    if region is not None and not region(x0):
        raise IntegrationAbort("initial state outside the region", t=0.0, state=x0)
    rec = _Recorder(monitors)
    rec.record(0.0, x0)
    if cfg.method == "rk4_fixed":
        return _integrate_rk4(field, x0, cfg, region, rec, meta)
    return _integrate_dopri(field, x0, cfg, region, rec, meta)


def _integrate_rk4(field, x0, cfg, region, rec, meta):
    n_steps = max(1, int(np.ceil(cfg.horizon / cfg.dt - 1e-12)))
    h = cfg.horizon / n_steps
    x, t = x0, 0.0
    status = "completed"
    for step in range(1, n_steps + 1):
        x_new = _rk4_step(field, t, x, h)
        if region is not None and not region(x_new):
            status = "left_region"
            break
        x, t = x_new, step * h
        if step % cfg.sample_stride == 0:
            rec.record(t, x)
    if rec.times[-1] != t:
        rec.record(t, x)
    return rec.build(status, [], meta)


def _integrate_dopri(field, x0, cfg, region, rec, meta):
    t, x = 0.0, x0
    h = min(cfg.dt_init, cfg.dt_max, cfg.horizon)
    status = "completed"
    step_errors = []
    err_prev = 1.0
    accepted = 0
    k_first = _checked(field, t, x)
    for _ in range(cfg.max_steps):
        if t >= cfg.horizon - 1e-15 * max(1.0, cfg.horizon):
            break
        h = min(h, cfg.horizon - t)
        ks = [k_first]
        for s in range(1, 7):
            xs = x + h * sum(a * k for a, k in zip(_DP_A[s], ks))
            ks.append(_checked(field, t + _DP_C[s] * h, xs))
        x5 = x + h * sum(b * k for b, k in zip(_DP_B5, ks))
        x4 = x + h * sum(b * k for b, k in zip(_DP_B4, ks))
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(x), np.abs(x5))
        err = float(np.sqrt(np.mean(((x5 - x4) / scale) ** 2)))
        if err <= 1.0:
            t_new = t + h
            if region is not None and not region(x5):
                status = "left_region"
                break
            t, x = t_new, x5
            k_first = ks[6]        # FSAL: stage 7 evaluates at (t_new, x5)
            accepted += 1
            step_errors.append(err)
            if accepted % cfg.sample_stride == 0:
                rec.record(t, x)
            # PI controller (beta = 0.4/5, alpha = 0.7/5)
            factor = 0.9 * err ** (-0.7 / 5) * err_prev ** (0.4 / 5) if err > 0 else 5.0
            err_prev = max(err, 1e-10)
        else:
            factor = max(0.9 * err ** (-1 / 5), 0.2)
        h = float(np.clip(h * np.clip(factor, 0.2, 5.0), 0.0, cfg.dt_max))
        if h < cfg.dt_min and t < cfg.horizon - 1e-15:
            status = "step_underflow"
            break
    else:
        status = "step_underflow"
    if rec.times[-1] != t:
        rec.record(t, x)
    return rec.build(status, step_errors, meta)


def invariant_report(traj):
    """Per-channel drift summary: max |x(t) - x(0)| and its relative form.

    Channels with non-finite samples are reported with NaN drifts rather
    than raising; a singular Hamiltonian evaluated on its locus is a
    legitimate -inf channel.
    """
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    report = {}
    for name, series in traj.monitors.items():
        first = series[0]
        if not np.all(np.isfinite(series)):
            report[name] = {"initial": float(first), "max_abs_drift": float("nan"),
                            "max_rel_drift": float("nan")}
            continue
        drift = float(np.max(np.abs(series - first)))
        report[name] = {
            "initial": float(first),
            "max_abs_drift": drift,
            "max_rel_drift": drift / max(1.0, abs(float(first))),
        }
    return report
