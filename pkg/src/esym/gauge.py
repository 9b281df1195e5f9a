"""Principal-bundle data in a local trivialization and Wong dynamics.

A gauge block consists of Lie-algebra structure constants c_ab^c, connection
coefficient fields A[i][a](q) (frame index i, algebra index a) and a charge
vector O in the dual algebra.  The phase space extends (q, m) by O.

Conventions, fixed here and validated by the bracket tests:

* Curvature:  F_ij^a = E_i(A_j^a) - E_j(A_i^a) - sum_k C_ij^k A_k^a
              + sum_{bc} c_bc^a A_i^b A_j^c,  with E_i acting through the
  anchor.  The extra -C A term is required on frames whose generators do
  not commute; any wrong sign breaks the Jacobi identity of the coupled
  bracket below.
* Minimal coupling Psi(q, p, O) = (q, p + A(q) O, O) identifies the
  canonical bracket (A = 0 blocks) with the coupled bracket: for all f, g,
  {f o Psi, g o Psi}_canonical = {f, g}_coupled o Psi.
* The coupled bracket table, in components (E_1..E_p, m_1..m_p, O_1..O_d):
  the uncoupled canonical blocks, a momentum-momentum block
  B_ij + sum_a O_a F_ij^a, a momentum-charge block
  P[m_i, O_j] = -sum_{kl} O_l c_jk^l A_i^k, and the linear charge-charge
  block P[O_i, O_j] = sum_k O_k c_ij^k.
  These are exactly the blocks produced by pushing the canonical structure
  through Psi, so the Jacobi identity is inherited rather than imposed.
* Evolution is f' = <grad H, P^T columns>, i.e. z' = P^T grad H, matching
  the uncoupled convention where X_H = W^{-1} grad H.
"""

from dataclasses import dataclass

import numpy as np

from .errors import FrameError
from .phasespace import PhasePoint, momentum_weight_matrix


class LieAlgebra:
    """Structure constants c[a][b][c] with verified skewness and Jacobi."""

    def __init__(self, constants, name="custom", jacobi_tol=1e-12):
        c = np.asarray(constants, dtype=float)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise FrameError("structure constants must be a d x d x d array")
        if np.max(np.abs(c + np.transpose(c, (1, 0, 2)))) != 0.0:
            raise FrameError("structure constants must be skew in the lower indices")
        jac = (np.einsum("abm,mcd->abcd", c, c)
               + np.einsum("bcm,mad->abcd", c, c)
               + np.einsum("cam,mbd->abcd", c, c))
        if np.max(np.abs(jac)) > jacobi_tol:
            raise FrameError(f"structure constants violate the Jacobi identity "
                             f"(max residual {np.max(np.abs(jac)):.3e})")
        self.c = c
        self.c.flags.writeable = False
        self.dim_d = c.shape[0]
        self.name = name

    @property
    def is_abelian(self):
        return not np.any(self.c)

    def casimirs(self, charge):
        """Named conserved charge combinations used as trajectory monitors."""
        charge = np.asarray(charge, dtype=float)
        if self.is_abelian:
            return {f"O{a + 1}": float(charge[a]) for a in range(self.dim_d)}
        return {"charge_norm": float(np.linalg.norm(charge))}

    @staticmethod
    def u1():
        return LieAlgebra(np.zeros((1, 1, 1)), name="u1")

    @staticmethod
    def abelian(d):
        return LieAlgebra(np.zeros((d, d, d)), name=f"abelian{d}")

    @staticmethod
    def so3():
        return LieAlgebra(_levi_civita(), name="so3")

    @staticmethod
    def su2():
        # the standard basis e_a = -i sigma_a / 2 has [e_a, e_b] = eps_abc e_c
        return LieAlgebra(_levi_civita(), name="su2")

    @staticmethod
    def by_name(name):
        builders = {"u1": LieAlgebra.u1, "so3": LieAlgebra.so3, "su2": LieAlgebra.su2}
        if name not in builders:
            raise FrameError(f"unknown algebra '{name}'; expected one of {sorted(builders)}")
        return builders[name]()


def _levi_civita():
    eps = np.zeros((3, 3, 3))
    for (a, b, c), s in (((0, 1, 2), 1.0), ((1, 2, 0), 1.0), ((2, 0, 1), 1.0),
                         ((1, 0, 2), -1.0), ((2, 1, 0), -1.0), ((0, 2, 1), -1.0)):
        eps[a, b, c] = s
    return eps


class GaugeData:
    """Connection coefficients A[i][a] over a frame, plus the algebra."""

    def __init__(self, algebra, connection, frame):
        p, d = frame.rank_p, algebra.dim_d
        if len(connection) != p or any(len(row) != d for row in connection):
            raise FrameError(f"connection must be {p} x {d} (frame x algebra)")
        self.algebra = algebra
        self.connection = connection
        self.frame = frame

    def connection_matrix(self, q):
        q = self.frame.chart.require(q)
        p, d = self.frame.rank_p, self.algebra.dim_d
        a = np.empty((p, d))
        for i in range(p):
            for j in range(d):
                a[i, j] = self.connection[i][j](q)
        return a


@dataclass(frozen=True)
class GaugePhasePoint:
    """Phase point extended with a charge vector in the dual algebra."""

    q: np.ndarray
    m: np.ndarray
    charge: np.ndarray

    @staticmethod
    def make(gd, q, m, charge):
        base = PhasePoint.make(gd.frame, q, m)
        charge = np.asarray(charge, dtype=float)
        if charge.shape != (gd.algebra.dim_d,):
            raise FrameError(f"charge must have length d={gd.algebra.dim_d}")
        if not np.all(np.isfinite(charge)):
            raise FrameError("charge entries must be finite")
        return GaugePhasePoint(q=base.q, m=base.m, charge=charge)

    def base(self):
        return PhasePoint(q=self.q, m=self.m)

    def flat(self):
        return np.concatenate([self.q, self.m, self.charge])


def split_gauge_state(gd, state):
    n, p, d = gd.frame.chart.dim_n, gd.frame.rank_p, gd.algebra.dim_d
    state = np.asarray(state, dtype=float)
    return GaugePhasePoint.make(gd, state[:n], state[n:n + p], state[n + p:n + p + d])


def curvature(gd, q):
    """F[i, j, a] of the connection at q (see module docstring)."""
    frame = gd.frame
    q = frame.chart.require(q)
    p, d = frame.rank_p, gd.algebra.dim_d
    f = np.zeros((p, p, d))
    a_mat = gd.connection_matrix(q)
    c_frame = frame.structure_tensor(q)
    ea = np.empty((p, p, d))    # ea[i, j, a] = E_i(A_j^a)
    for i in range(p):
        for j in range(p):
            for a in range(d):
                ea[i, j, a] = frame.generator_derivative(i, gd.connection[j][a], q)
    f += ea - np.transpose(ea, (1, 0, 2))
    f -= np.einsum("ijk,ka->ija", c_frame, a_mat)
    f += np.einsum("bca,ib,jc->ija", gd.algebra.c, a_mat, a_mat)
    return f


def minimal_coupling_map(gd, pt):
    """(q, m, O) -> (q, m + A(q) O, O); see `minimal_coupling_inverse`."""
    a_mat = gd.connection_matrix(pt.q)
    return GaugePhasePoint(q=pt.q, m=pt.m + a_mat @ pt.charge, charge=pt.charge)


def minimal_coupling_inverse(gd, pt):
    """(q, m, O) -> (q, m - A(q) O, O)."""
    a_mat = gd.connection_matrix(pt.q)
    return GaugePhasePoint(q=pt.q, m=pt.m - a_mat @ pt.charge, charge=pt.charge)


def coupled_poisson_bivector(gd, pt):
    """Bracket table P[z_a, z_b] = {z_a, z_b} in components (E, m, O).

    With A = 0 this is the canonical structure extended by the linear
    charge-charge block; with a connection the momentum rows acquire the
    curvature and charge-coupling terms.
    """
    frame = gd.frame
    p, d = frame.rank_p, gd.algebra.dim_d
    total = 2 * p + d
    pm = np.zeros((total, total))
    base = PhasePoint(q=pt.q, m=pt.m)

    pm[:p, p:2 * p] = -np.eye(p)
    pm[p:2 * p, :p] = np.eye(p)

    b = momentum_weight_matrix(frame, base)
    f = curvature(gd, pt.q)
    pm[p:2 * p, p:2 * p] = b + np.einsum("a,ija->ij", pt.charge, f)

    a_mat = gd.connection_matrix(pt.q)
    # P[m_i, O_j] = -sum_{kl} O_l c_jk^l A_i^k
    mo = -np.einsum("l,jkl,ik->ij", pt.charge, gd.algebra.c, a_mat)
    pm[p:2 * p, 2 * p:] = mo
    pm[2 * p:, p:2 * p] = -mo.T

    # P[O_i, O_j] = sum_k O_k c_ij^k
    pm[2 * p:, 2 * p:] = np.einsum("k,ijk->ij", pt.charge, gd.algebra.c)
    return pm


def gauge_gradient(hamiltonian, gd, pt):
    """grad in components (E-base, momentum, charge) for an (q, m)-Hamiltonian.

    Wong Hamiltonians are pullbacks from the base phase space, so the
    charge block of the gradient vanishes identically.
    """
    from .phasespace import phase_gradient

    d = gd.algebra.dim_d
    grad_base = phase_gradient(hamiltonian, gd.frame, pt.base())
    return np.concatenate([grad_base, np.zeros(d)])


def wong_field(hamiltonian, gd, pt):
    """Equations of motion for a charged particle: (q', m', O').

    Contracts the coupled bracket with dH (z' = P^T grad H) and pushes the
    base block to ambient coordinates through the anchor.  For an abelian
    algebra the charge block is identically zero and is short-circuited,
    so charges are conserved exactly, bit for bit.
    """
    frame = gd.frame
    p, d = frame.rank_p, gd.algebra.dim_d
    grad = gauge_gradient(hamiltonian, gd, pt)
    pm = coupled_poisson_bivector(gd, pt)
    w = pm.T @ grad
    qdot = frame.anchor_matrix(pt.q).T @ w[:p]
    mdot = w[p:2 * p]
    odot = np.zeros(d) if gd.algebra.is_abelian else w[2 * p:]
    return np.concatenate([qdot, mdot, odot])


def wong_flow_field(hamiltonian, gd):
    """State-space field over flat states [q..., m..., O...]."""

    def field(state):
        pt = split_gauge_state(gd, state)
        return wong_field(hamiltonian, gd, pt)

    return field


def gauge_bracket(f_grad, g_grad, gd, pt):
    """{f, g} from precomputed component gradients (length 2p + d)."""
    pm = coupled_poisson_bivector(gd, pt)
    return float(f_grad @ pm @ g_grad)
