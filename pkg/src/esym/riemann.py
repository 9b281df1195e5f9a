"""Metrics on a frame, musical isomorphisms and geodesic flow.

A metric is a symmetric p x p matrix of coefficient fields over the chart,
pairing frame components.  Pseudo-metrics are admitted through a signature
declaration (needed for space-time scenarios); positivity or the declared
signature is checked by sampling, not assumed.

The kinetic Hamiltonian follows the convention H(q, m) = m^T g(q)^{-1} m
without a 1/2 factor; trajectories coincide with the 1/2-convention up to
the time reparametrization t -> 2t.
"""

import numpy as np

from .errors import DegenerateMetricError, FrameError
from .phasespace import canonical_symplectic, pushforward_velocity


class EMetric:
    """Symmetric matrix of ScalarFields pairing frame components.

    signature: (n_plus, n_minus) eigenvalue sign counts; defaults to
    positive-definite (p, 0).
    """

    def __init__(self, frame, entries, signature=None):
        p = frame.rank_p
        if len(entries) != p or any(len(row) != p for row in entries):
            raise FrameError(f"metric must be {p} x {p} for this frame")
        self.frame = frame
        self.entries = entries
        self.signature = tuple(signature) if signature is not None else (p, 0)
        if sum(self.signature) != p:
            raise FrameError("signature counts must sum to the frame rank")
        self._check_symmetric_symbolic()

    def _check_symmetric_symbolic(self):
        import sympy as sp

        p = self.frame.rank_p
        for i in range(p):
            for j in range(i + 1, p):
                a, b = self.entries[i][j], self.entries[j][i]
                if a.expr is not None and b.expr is not None:
                    if sp.simplify(a.expr - b.expr) != 0:
                        raise FrameError(f"metric entries ({i},{j}) and ({j},{i}) differ")

    def matrix(self, q):
        q = self.frame.chart.require(q)
        p = self.frame.rank_p
        g = np.empty((p, p))
        for i in range(p):
            for j in range(p):
                g[i, j] = self.entries[i][j](q)
        return g

    def matrix_partial(self, q, coord):
        """Entrywise d g / d q_coord."""
        q = self.frame.chart.require(q)
        p = self.frame.rank_p
        dg = np.empty((p, p))
        for i in range(p):
            for j in range(p):
                dg[i, j] = self.entries[i][j].partial(q, coord)
        return dg

    def signature_at(self, q, tol=1e-10):
        eig = np.linalg.eigvalsh(self.matrix(q))
        return int(np.sum(eig > tol)), int(np.sum(eig < -tol))

    @staticmethod
    def identity(frame):
        from .fields import ScalarField

        p, n = frame.rank_p, frame.chart.dim_n
        one = ScalarField.constant(1.0, n)
        zero = ScalarField.constant(0.0, n)
        entries = [[one if i == j else zero for j in range(p)] for i in range(p)]
        return EMetric(frame, entries)

    @staticmethod
    def diagonal(frame, values):
        from .fields import ScalarField

        p, n = frame.rank_p, frame.chart.dim_n
        if len(values) != p:
            raise FrameError("need one diagonal value per generator")
        zero = ScalarField.constant(0.0, n)
        entries = [[ScalarField.constant(values[i], n) if i == j else zero
                    for j in range(p)] for i in range(p)]
        n_minus = sum(1 for v in values if v < 0)
        return EMetric(frame, entries, signature=(p - n_minus, n_minus))


def _solve(g, rhs, q):
    try:
        cond = np.linalg.cond(g)
    except np.linalg.LinAlgError:
        cond = np.inf
    if not np.isfinite(cond) or cond > 1e14:
        raise DegenerateMetricError(
            f"metric matrix is singular at q={np.array2string(np.asarray(q), precision=6)}")
    return np.linalg.solve(g, rhs)


def metric_sharp(metric, q, alpha):
    """Raise a covector: solve g(q) v = alpha."""
    alpha = np.asarray(alpha, dtype=float)
    return _solve(metric.matrix(q), alpha, q)


def metric_flat(metric, q, v):
    """Lower a vector: g(q) v."""
    return metric.matrix(q) @ np.asarray(v, dtype=float)


def kinetic_hamiltonian(metric, pt):
    """H(q, m) = m^T g(q)^{-1} m."""
    v = metric_sharp(metric, pt.q, pt.m)
    return float(pt.m @ v)


def kinetic_gradient(metric, pt):
    """grad of the kinetic Hamiltonian in frame components (base, fibre).

    d/dq_j (m^T g^{-1} m) = -v^T (dg/dq_j) v with v = g^{-1} m, contracted
    with the anchor for the base block; the fibre block is 2 v.
    """
    frame = metric.frame
    n, p = frame.chart.dim_n, frame.rank_p
    v = metric_sharp(metric, pt.q, pt.m)
    dq = np.array([-v @ metric.matrix_partial(pt.q, j) @ v for j in range(n)])
    grad = np.zeros(2 * p)
    grad[:p] = frame.anchor_matrix(pt.q) @ dq
    grad[p:] = 2.0 * v
    return grad


def geodesic_field(metric, pt):
    """Frame components of the kinetic Hamiltonian field (geodesic spray)."""
    omega = canonical_symplectic(metric.frame, pt).omega
    return np.linalg.solve(omega, kinetic_gradient(metric, pt))


def geodesic_flow_field(metric):
    """State-space field [q..., m...] -> d/dt for the geodesic flow."""
    from .phasespace import split_state

    def field(state):
        pt = split_state(metric.frame, state)
        x = geodesic_field(metric, pt)
        return pushforward_velocity(metric.frame, pt, x)

    return field
