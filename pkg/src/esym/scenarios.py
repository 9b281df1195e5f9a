"""Built-in, named configurations reproducing the worked physical systems.

Each scenario packages a frame, an admissible Hamiltonian, optional metric
and gauge data, default initial conditions and monitor channels into a
ScenarioSpec that the CLI can run and the verification suites can probe.

Provenance notes name the physical system each configuration realizes; the
orientation convention throughout is i_{X_H} w = -dH with w the canonical
form of the phase space (see `esym.phasespace`).
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np
import sympy as sp

from .ecalculus import EFunction
from .errors import FrameError
from .estructure import make_custom_frame, make_foliation_structure, chart_symbols
from .fields import Chart, ScalarField
from .gauge import GaugeData, LieAlgebra, wong_flow_field
from .integrator import IntegratorConfig
from .phasespace import flow_field, split_state
from .riemann import EMetric, geodesic_flow_field, metric_sharp
from .symmetry import ActionGenerator


@dataclass
class ScenarioSpec:
    name: str
    provenance: str
    kind: str                                   # "flow" | "identity"
    state_names: tuple = ()
    frame: object = None
    metric: object = None
    gauge: object = None
    hamiltonian: object = None
    state0: np.ndarray = None
    field: object = None                        # state -> d state / dt
    monitors: dict = dataclass_field(default_factory=dict)
    region: object = None                       # predicate on flat states
    params: dict = dataclass_field(default_factory=dict)
    integrator_defaults: dict = dataclass_field(default_factory=dict)

    @property
    def dim(self):
        return len(self.state_names)


def _chart_region_predicate(frame):
    n = frame.chart.dim_n

    def region(state):
        return frame.chart.contains(np.asarray(state, dtype=float)[:n])

    return region


def _boundary_monitors(frame):
    out = {}
    for bg in frame.boundary_gens:
        name = frame.chart.coord_names[bg.coord]
        out[f"boundary_{name}"] = (lambda t, x, b=bg.coord: float(x[b]))
    return out


def _energy_monitor(hamiltonian, n_state):
    return lambda t, x: hamiltonian(np.asarray(x, dtype=float)[:n_state])


# -- rotation flow on the singular sphere chart ------------------------------


def scenario_radko_sphere(h0=0.5, theta0=1.0, m_theta=None):
    """Rotation-invariant flow on the surface with form (dh/h) ^ dtheta.

    Presented as the phase space of the one-dimensional frame E_1 = -h d/dh
    with fibre coordinate theta, so that the canonical form V* ^ E* equals
    (dh/h) ^ dtheta.  The rotation generator d/dtheta has moment map
    log|h|, an admissible (non-smooth) Hamiltonian whose frame gradient is
    the constant -1.  The flow of H = log|h| is uniform rotation; h = 0 is
    invariant.
    """
    chart = Chart("radko", ("h",), boundary=(0,))
    h = chart_symbols(("h",))
    frame = make_custom_frame(chart, [[-h[0]]], boundary_specs=((0, 0, 1),))
    frame.family = "radko_b_sphere"
    hamiltonian = EFunction(log_terms=((0, 1.0),), nvars=2)
    zero = ScalarField.constant(0.0, 2)
    one = ScalarField.constant(1.0, 2)
    generator = ActionGenerator((zero, one), label="rotation d/dtheta")
    state0 = np.array([h0, theta0])
    monitors = {"energy": _energy_monitor(hamiltonian, 2)}
    monitors.update(_boundary_monitors(frame))
    return ScenarioSpec(
        name="radko_sphere",
        provenance="Radko's topologically stable Poisson sphere: omega = (dh/h) ^ dtheta "
                   "with rotation moment map log|h|",
        kind="flow",
        state_names=("h", "theta"),
        frame=frame,
        hamiltonian=hamiltonian,
        state0=state0,
        field=flow_field(hamiltonian, frame),
        monitors=monitors,
        region=_chart_region_predicate(frame),
        params={"generator": generator, "moment_map": hamiltonian},
    )


# -- space of geodesics on the Lorentz plane ---------------------------------


def scenario_lorentz_plane(eps0=0.7, u0=0.3):
    """The space of space-like lines of the Lorentz plane near the light-like
    locus, with blown-up area form (1/eps) d eps ^ du.

    Same presentation as the sphere chart: frame E_1 = -eps d/d eps, fibre
    coordinate u.  The flow of H = u moves eps exponentially and keeps u
    fixed; eps = 0 (the light-like lines) is invariant.  The orientation is
    pinned by requiring det W = +1 for the canonical matrix.
    """
    chart = Chart("lorentz_plane", ("eps",), boundary=(0,))
    eps = chart_symbols(("eps",))
    frame = make_custom_frame(chart, [[-eps[0]]], boundary_specs=((0, 0, 1),))
    frame.family = "lorentz_b_plane"
    hamiltonian = EFunction(smooth=ScalarField.coordinate(1, 2))   # H = u
    state0 = np.array([eps0, u0])
    monitors = {"energy": _energy_monitor(hamiltonian, 2)}
    monitors.update(_boundary_monitors(frame))
    return ScenarioSpec(
        name="lorentz_plane",
        provenance="Khesin-Tabachnikov space of oriented geodesics of the Lorentz "
                   "plane: symplectic form (1/eps) d eps ^ du",
        kind="flow",
        state_names=("eps", "u"),
        frame=frame,
        hamiltonian=hamiltonian,
        state0=state0,
        field=flow_field(hamiltonian, frame),
        monitors=monitors,
        region=_chart_region_predicate(frame),
    )


# -- compactified planar restricted three-body problem -----------------------


def mcgehee_potential(kind="crtbp", mass_parameter=0.01, strength=1.0):
    """Potential U(X, Y) for the compactified problem, as a sympy expression
    in the chart variables after the substitution X = 2 cos(a)/x^2,
    Y = 2 sin(a)/x^2.

    kind: "zero" (free motion; the only choice valid on the x = 0 line),
    "kepler" (U = strength / r = strength x^2 / 2) or "crtbp" (two primaries
    of masses 1-mu and mu at (-mu, 0) and (1-mu, 0)).
    """
    x, a = sp.symbols("x alpha", real=True)
    if kind == "zero":
        return sp.Integer(0), (x, a)
    big_x = 2 * sp.cos(a) / x ** 2
    big_y = 2 * sp.sin(a) / x ** 2
    if kind == "kepler":
        return strength * x ** 2 / 2, (x, a)
    if kind == "crtbp":
        mu = sp.Float(mass_parameter)
        r1 = sp.sqrt((big_x + mu) ** 2 + big_y ** 2)
        r2 = sp.sqrt((big_x - 1 + mu) ** 2 + big_y ** 2)
        return (1 - mu) / r1 + mu / r2, (x, a)
    raise FrameError(f"unknown potential kind '{kind}'")


def scenario_mcgehee_3bp(potential="crtbp", mass_parameter=0.01, strength=1.0,
                         state0=(1.0, 0.3, 0.2, 0.8)):
    """McGehee compactification of the planar restricted three-body problem.

    The non-canonical change r = 2/x^2 sends infinity to the line x = 0 and
    turns the symplectic form into -(4/x^3) dx ^ dP_r + d alpha ^ dP_alpha,
    which blows up to third order.  Absorbing the coefficient into the
    generator, the frame is E_1 = -(x^3/4) d/dx, E_2 = d/d alpha, and the
    canonical machinery applies unchanged.  The Hamiltonian is

        H = P_r^2 / 2 + x^4 P_alpha^2 / 8 - U(2 cos(a)/x^2, 2 sin(a)/x^2)

    (the angular term is quadratic in P_alpha: it is P_alpha^2/(2 r^2)
    before the substitution).  With U = 0 the line x = 0 is invariant:
    dx/dt is proportional to x^3.
    """
    u_expr, (x, a) = mcgehee_potential(potential, mass_parameter, strength)
    if potential == "zero":
        def region(q):                 # x = 0 (infinity) is a valid locus
            return q[0] >= 0.0
    else:
        def region(q):                 # the potential blows up at x = 0
            return q[0] > 0.0
    chart = Chart("mcgehee", ("x", "alpha"), region=region, boundary=(0,))
    frame = make_custom_frame(chart, [[-x ** 3 / 4, sp.Integer(0)],
                                      [sp.Integer(0), sp.Integer(1)]],
                              boundary_specs=((0, 0, 3),), symbols=(x, a))
    frame.family = "mcgehee_b3"
    pr, pa = sp.symbols("P_r P_alpha", real=True)
    h_expr = pr ** 2 / 2 + x ** 4 * pa ** 2 / 8 - u_expr
    hamiltonian = EFunction(smooth=ScalarField.from_expr(h_expr, (x, a, pr, pa)))
    monitors = {"energy": _energy_monitor(hamiltonian, 4)}
    monitors.update(_boundary_monitors(frame))
    return ScenarioSpec(
        name="mcgehee_3bp",
        provenance="McGehee compactification of the circular planar restricted "
                   "three-body problem; the symplectic form gains a third-order "
                   "blow-up at the line at infinity",
        kind="flow",
        state_names=("x", "alpha", "P_r", "P_alpha"),
        frame=frame,
        hamiltonian=hamiltonian,
        state0=np.asarray(state0, dtype=float),
        field=flow_field(hamiltonian, frame),
        monitors=monitors,
        region=_chart_region_predicate(frame),
        params={"potential": potential, "mass_parameter": mass_parameter,
                "strength": strength},
    )


# -- Penrose-compactified Schwarzschild t-r plane -----------------------------


def penrose_metric_entries(mass):
    """Symbolic matrix entries of the compactified t-r block metric.

    In the corner chart (alpha, beta) with the horizon-exterior condition
    cot(alpha) > tan(beta) + 4M, the null coordinate v = cot(alpha) blows up
    at alpha = 0 and the generators vanishing quadratically there are
    E_1 = alpha^2 d/d alpha, E_2 = d/d beta.  With h = 1 - 2M/r and
    r = (cot(alpha) - tan(beta))/2 the metric in the dual frame basis is

        g11 = (1/h - h) alpha^4 csc(alpha)^4 / 4
        g12 = -(1/h + h) alpha^2 csc(alpha)^2 sec(beta)^2 / 4
        g22 = (1/h - h) sec(beta)^4 / 4,

    smooth up to alpha = 0 because alpha csc(alpha) extends smoothly and
    h -> 1 there.
    """
    alpha, beta = sp.symbols("alpha beta", real=True)
    r = (sp.cot(alpha) - sp.tan(beta)) / 2
    h = 1 - 2 * mass / r
    g11 = (1 / h - h) * alpha ** 4 * sp.csc(alpha) ** 4 / 4
    g12 = -(1 / h + h) * alpha ** 2 * sp.csc(alpha) ** 2 * sp.sec(beta) ** 2 / 4
    g22 = (1 / h - h) * sp.sec(beta) ** 4 / 4
    return (g11, g12, g22), (alpha, beta)


def scenario_penrose_blackhole(mass=1.0, state0=(0.2, 0.2, 0.3, -0.2),
                               gauge_potentials=None, charge0=(1.0,)):
    """Geodesics on the conformally compactified Schwarzschild t-r plane.

    The kinetic Hamiltonian m^T g^{-1} m stays bounded as alpha -> 0 (the
    compactified infinity) because the inverse metric is smooth there.  An
    optional electromagnetic block turns the geodesic flow into charged
    motion: a one-dimensional abelian algebra with connection components
    A_1(alpha, beta), A_2(alpha, beta) given as expression strings.
    """
    (g11, g12, g22), (alpha, beta) = penrose_metric_entries(mass)
    four_m = 4.0 * float(mass)

    def region(q):
        a, b = q
        if not (0.0 < a < np.pi / 2 and -np.pi / 2 < b < np.pi / 2):
            return False
        return 1.0 / np.tan(a) > np.tan(b) + four_m

    chart = Chart("penrose", ("alpha", "beta"), region=region, boundary=(0,))
    frame = make_custom_frame(chart, [[alpha ** 2, sp.Integer(0)],
                                      [sp.Integer(0), sp.Integer(1)]],
                              boundary_specs=((0, 0, 2),), symbols=(alpha, beta))
    frame.family = "penrose_corner"
    syms = (alpha, beta)
    entries = [[ScalarField.from_expr(g11, syms), ScalarField.from_expr(g12, syms)],
               [ScalarField.from_expr(g12, syms), ScalarField.from_expr(g22, syms)]]
    metric = EMetric(frame, entries, signature=(1, 1))
    hamiltonian = _kinetic_efunction(metric)
    monitors = {"energy": _energy_monitor(hamiltonian, 4)}
    monitors.update(_boundary_monitors(frame))

    gauge = None
    field = geodesic_flow_field(metric)
    state_names = ("alpha", "beta", "p_alpha", "p_beta")
    state0 = np.asarray(state0, dtype=float)
    if gauge_potentials is not None:
        from .expressions import parse_field

        a1, a2 = (parse_field(text, ("alpha", "beta")) for text in gauge_potentials)
        gauge = GaugeData(LieAlgebra.u1(), [[a1], [a2]], frame)
        field = wong_flow_field(hamiltonian, gauge)
        state_names = state_names + ("O1",)
        state0 = np.concatenate([state0, np.asarray(charge0, dtype=float)])
        monitors.update(_charge_monitors(gauge))
    return ScenarioSpec(
        name="penrose_blackhole",
        provenance="Penrose conformal compactification of the Schwarzschild t-r "
                    "plane outside the horizon; secants blow up quadratically at "
                    "the corner and the frame vanishes to second order",
        kind="flow",
        state_names=state_names,
        frame=frame,
        metric=metric,
        gauge=gauge,
        hamiltonian=hamiltonian,
        state0=state0,
        field=field,
        monitors=monitors,
        region=_chart_region_predicate(frame),
        params={"mass": float(mass)},
    )


def _kinetic_efunction(metric):
    """m^T g(q)^{-1} m as a smooth EFunction over the phase variables."""
    from .fields import field_from_callable

    frame = metric.frame
    n, p = frame.chart.dim_n, frame.rank_p

    def value(xm):
        q, m = xm[:n], xm[n:]
        return float(m @ metric_sharp(metric, q, m))

    return EFunction(smooth=field_from_callable(value, n + p, name="kinetic"))


def _charge_monitors(gauge):
    n, p = gauge.frame.chart.dim_n, gauge.frame.rank_p

    def make(name):
        def monitor(t, x, key=name):
            charge = np.asarray(x, dtype=float)[n + p:]
            return gauge.algebra.casimirs(charge)[key]
        return monitor

    sample = gauge.algebra.casimirs(np.zeros(gauge.algebra.dim_d))
    return {name: make(name) for name in sample}


# -- special relativity: flat space-time with the proper-time foliation ------


def scenario_minkowski_foliation(m0=(1.0, 0.1, 0.2, 0.05)):
    """Geodesics of flat space-time in an inertial chart.

    The natural phase space is foliated by the level sets of g(v, v); the
    geodesic flow is tangent to each leaf, so the causal character of the
    velocity (time-like, null, space-like) is invariant.  The monitor
    channel g_vv certifies leaf invariance; geodesics are straight lines in
    the chart coordinates.
    """
    frame = make_foliation_structure(4, 4, coord_names=("t", "x1", "x2", "x3"))
    frame.family = "minkowski_foliation"
    metric = EMetric.diagonal(frame, (-1.0, 1.0, 1.0, 1.0))
    hamiltonian = _kinetic_efunction(metric)

    def g_vv(t, state):
        pt = split_state(frame, state)
        v = 2.0 * metric_sharp(metric, pt.q, pt.m)
        return float(v @ metric.matrix(pt.q) @ v)

    monitors = {"energy": _energy_monitor(hamiltonian, 8), "g_vv": g_vv}
    state0 = np.concatenate([np.zeros(4), np.asarray(m0, dtype=float)])
    return ScenarioSpec(
        name="minkowski_foliation",
        provenance="Minkowski space-time of special relativity with the "
                   "proper-time foliation by level sets of the kinetic energy",
        kind="flow",
        state_names=("t", "x1", "x2", "x3", "m0", "m1", "m2", "m3"),
        frame=frame,
        metric=metric,
        hamiltonian=hamiltonian,
        state0=state0,
        field=geodesic_flow_field(metric),
        monitors=monitors,
        region=None,
    )


# -- spin Calogero-Moser reduced Hamiltonian ---------------------------------


def calogero_reduced_hamiltonian(a, big_x):
    """Both forms of the reduced Hamiltonian, which must agree.

    ``a`` is a vector of pairwise distinct real spectral parameters and
    ``big_x`` a Hermitian traceless matrix.  Returns (tr(X^2), reduced)
    where the reduced form separates a kinetic term from an inverse-square
    interaction built on the moment-map image mu = i [diag(a), X]:

        reduced = sum_i X_ii^2 + sum_{i != j} mu_ij mu_ji / (a_i - a_j)^2.
    """
    a = np.asarray(a, dtype=float)
    big_x = np.asarray(big_x, dtype=complex)
    n = len(a)
    if big_x.shape != (n, n):
        raise ValueError("matrix size must match the parameter vector")
    if np.max(np.abs(big_x - big_x.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(big_x))):
        raise ValueError("matrix must be Hermitian")
    if abs(np.trace(big_x).real) > 1e-10 * max(1.0, np.max(np.abs(big_x))):
        raise ValueError("matrix must be traceless")
    diff = a[:, None] - a[None, :]
    off = ~np.eye(n, dtype=bool)
    if np.min(np.abs(diff[off])) < 1e-12 * max(1.0, np.max(np.abs(a))):
        raise ValueError(
            "coincident parameters a_i = a_j: the reduced expression is undefined "
            "there (the quotient is stratified, not smooth)")
    trace_form = float(np.trace(big_x @ big_x).real)
    mu = 1j * (np.diag(a) @ big_x - big_x @ np.diag(a))
    interaction = (mu * mu.T)[off] / diff[off] ** 2
    reduced = float(np.sum(np.diag(big_x).real ** 2) + np.sum(interaction.real))
    return trace_form, reduced


def random_hermitian_traceless(n, rng):
    raw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    herm = (raw + raw.conj().T) / 2
    return herm - np.eye(n) * np.trace(herm) / n


def calogero_identity_report(n_values=(2, 3, 4), trials=20, seed=0):
    """Sampled agreement between the two Hamiltonian forms."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in n_values:
        for _ in range(trials):
            a = rng.normal(size=n)
            while np.min(np.abs(a[:, None] - a[None, :] + np.eye(n))) < 1e-3:
                a = rng.normal(size=n)
            big_x = random_hermitian_traceless(n, rng)
            t, r = calogero_reduced_hamiltonian(a, big_x)
            worst = max(worst, abs(t - r) / max(1.0, abs(t)))
    return {"trials": trials * len(n_values), "max_rel_disagreement": worst}


def scenario_calogero():
    """Identity scenario: no flow, only the two-form agreement check."""
    return ScenarioSpec(
        name="calogero_identity",
        provenance="spin Calogero-Moser system on su(n): reduced Hamiltonian "
                   "tr(X^2) = kinetic + inverse-square interaction",
        kind="identity",
        state_names=(),
        params={"n_values": (2, 3, 4)},
    )


# -- registry -----------------------------------------------------------------


SCENARIO_BUILDERS = {
    "radko_sphere": scenario_radko_sphere,
    "lorentz_plane": scenario_lorentz_plane,
    "mcgehee_3bp": scenario_mcgehee_3bp,
    "penrose_blackhole": scenario_penrose_blackhole,
    "minkowski_foliation": scenario_minkowski_foliation,
    "calogero_identity": scenario_calogero,
}


def build_scenario(name, **overrides):
    if name not in SCENARIO_BUILDERS:
        raise FrameError(f"unknown scenario '{name}'; see `esym list`")
    return SCENARIO_BUILDERS[name](**overrides)


def default_integrator_config(spec, **overrides):
    base = dict(method="rk45_adaptive", horizon=10.0, rtol=1e-10, atol=1e-12,
                dt_init=1e-4)
    base.update(spec.integrator_defaults)
    base.update(overrides)
    return IntegratorConfig(**base)
