"""Phase space over a frame: Liouville form, canonical symplectic matrix,
Hamiltonian fields and Poisson brackets.

Conventions, fixed once and asserted in the tests:

* A phase point is (q, m): chart coordinates plus momenta dual to the
  frame generators.  The prolonged basis is ordered (E_1..E_p, V_1..V_p)
  with V_i = d/dm_i.
* The canonical symplectic form is

      w = sum_i V_i* ^ E_i*  -  1/2 sum_{ijk} m_i C_jk^i E_j* ^ E_k*,

  whose matrix in the ordered basis is W = [[-B, -I], [I, 0]] with
  B_jk = sum_i m_i C_jk^i(q); then w(V_j, E_k) = delta_jk and
  w(E_j, E_k) = -B_jk.  det W = 1 identically.
* Hamiltonian fields satisfy i_{X_H} w = -dH.  Componentwise the
  contraction of X with w is W^T X, so X_H solves W X_H = grad_H where
  grad_H = (<dH, E_i>_i, dH/dm_i).  In the flat case this is the
  classical q' = dH/dp, p' = -dH/dq.
* The bracket is {f, g} = w(X_f, X_g) = <grad g, X_f>; on the flat
  cotangent plane this makes {momentum, conjugate coordinate} = +1, and
  on a hypersurface frame {m_1, log|q_1|} = 1.

Hamiltonians are EFunctions over the n + p phase variables whose singular
ledger lives in base boundary coordinates only; fibre dependence must be
smooth.
"""

from dataclasses import dataclass

import numpy as np

from .ecalculus import EFunction
from .errors import FrameError
from .fields import ScalarField


@dataclass(frozen=True)
class PhasePoint:
    """State on the phase space of a frame: base point and momenta."""

    q: np.ndarray
    m: np.ndarray

    @staticmethod
    def make(frame, q, m):
        q = frame.chart.require(q)
        m = np.asarray(m, dtype=float)
        if m.shape != (frame.rank_p,):
            raise FrameError(f"momentum must have length p={frame.rank_p}")
        if not np.all(np.isfinite(m)):
            raise FrameError("momentum entries must be finite")
        return PhasePoint(q=q, m=m)

    def flat(self):
        return np.concatenate([self.q, self.m])


@dataclass(frozen=True)
class SymplecticMatrix:
    """The canonical form evaluated at a phase point, as a 2p x 2p matrix."""

    omega: np.ndarray

    @property
    def rank_p(self):
        return self.omega.shape[0] // 2

    def det(self):
        return float(np.linalg.det(self.omega))


def split_state(frame, state):
    n = frame.chart.dim_n
    state = np.asarray(state, dtype=float)
    return PhasePoint.make(frame, state[:n], state[n:n + frame.rank_p])


def liouville_components(frame, pt):
    """Components (m_1..m_p, 0..0) of the tautological one-form at pt."""
    p = frame.rank_p
    out = np.zeros(2 * p)
    out[:p] = pt.m
    return out


def momentum_weight_matrix(frame, pt):
    """B with B_jk = sum_i m_i C_jk^i(q)."""
    c = frame.structure_tensor(pt.q)          # axes (j, k, i) meaning C_jk^i
    return np.einsum("jki,i->jk", c, pt.m)


def canonical_symplectic(frame, pt):
    """Matrix [[-B, -I], [I, 0]] of the canonical form at pt."""
    p = frame.rank_p
    b = momentum_weight_matrix(frame, pt)
    omega = np.zeros((2 * p, 2 * p))
    omega[:p, :p] = -b
    omega[:p, p:] = -np.eye(p)
    omega[p:, :p] = np.eye(p)
    return SymplecticMatrix(omega=omega)


def phase_gradient(hamiltonian, frame, pt):
    """grad H = (<dH, E_1..E_p>, dH/dm_1..dm_p) at a phase point.

    The base block contracts the smooth part with the anchor and adds the
    singular ledger's smooth contributions; the fibre block is the plain
    momentum derivative of the smooth part.
    """
    n, p = frame.chart.dim_n, frame.rank_p
    if hamiltonian.nvars != n + p:
        raise FrameError(
            f"phase-space Hamiltonian needs {n + p} variables, has {hamiltonian.nvars}")
    hamiltonian.validate_for_frame(frame)
    x = pt.flat()
    grad = np.zeros(2 * p)
    if hamiltonian.smooth is not None:
        dq = np.array([hamiltonian.smooth.partial(x, j) for j in range(n)])
        grad[:p] = frame.anchor_matrix(pt.q) @ dq
        grad[p:] = [hamiltonian.smooth.partial(x, n + i) for i in range(p)]
    grad[:p] += hamiltonian.singular_frame_components(frame, x)
    return grad


def hamiltonian_field(hamiltonian, frame, pt):
    """Frame components (base, fibre) of X_H at pt, from W X = grad H."""
    omega = canonical_symplectic(frame, pt).omega
    grad = phase_gradient(hamiltonian, frame, pt)
    try:
        return np.linalg.solve(omega, grad)
    except np.linalg.LinAlgError as err:   # cannot happen while det W = 1
        raise FrameError(f"canonical form unexpectedly singular: {err}") from None


def field_equation_residual(hamiltonian, frame, pt):
    """Norm of i_{X_H} w + dH in components: ||W^T X_H + grad H||."""
    omega = canonical_symplectic(frame, pt).omega
    x = hamiltonian_field(hamiltonian, frame, pt)
    grad = phase_gradient(hamiltonian, frame, pt)
    return float(np.linalg.norm(omega.T @ x + grad))


def poisson_bracket(f, g, frame, pt):
    """{f, g} = w(X_f, X_g) = <grad g, X_f> at pt.

    Skewness makes {f, f} identically zero; the identical pair is
    short-circuited so the identity holds exactly, not to round-off.
    """
    if f is g:
        return 0.0
    omega = canonical_symplectic(frame, pt).omega
    grad_f = phase_gradient(f, frame, pt)
    grad_g = phase_gradient(g, frame, pt)
    x_f = np.linalg.solve(omega, grad_f)
    return float(grad_g @ x_f)


def pushforward_velocity(frame, pt, x):
    """Ambient velocity (q', m') from frame components of a phase field.

    q' = rho(q)^T x_base pushes the base part through the anchor; momenta
    are fibre coordinates already, so m' = x_fibre.  Length n + p.
    """
    p = frame.rank_p
    x = np.asarray(x, dtype=float)
    if x.shape != (2 * p,):
        raise FrameError(f"expected frame components of length {2 * p}")
    qdot = frame.anchor_matrix(pt.q).T @ x[:p]
    return np.concatenate([qdot, x[p:]])


def flow_field(hamiltonian, frame):
    """State-space vector field of the Hamiltonian flow, for integration.

    States are flat arrays [q..., m...]; the returned callable gives their
    time derivative with base velocities pushed to ambient coordinates.
    """

    def field(state):
        pt = split_state(frame, state)
        x = hamiltonian_field(hamiltonian, frame, pt)
        return pushforward_velocity(frame, pt, x)

    return field


# -- constructors for phase-space functions ---------------------------------


def phase_variable_names(frame, momentum_names=None):
    if momentum_names is None:
        momentum_names = tuple(f"m{i + 1}" for i in range(frame.rank_p))
    momentum_names = tuple(momentum_names)
    if len(momentum_names) != frame.rank_p:
        raise FrameError("need one momentum name per generator")
    return frame.chart.coord_names + momentum_names


def phase_function(frame, expr, momentum_names=None):
    """Smooth phase-space EFunction from a sympy expression or string."""
    import sympy as sp

    names = phase_variable_names(frame, momentum_names)
    symbols = tuple(sp.Symbol(nm, real=True) for nm in names)
    expr = sp.sympify(expr, locals={nm: s for nm, s in zip(names, symbols)})
    unknown = expr.free_symbols - set(symbols)
    if unknown:
        raise FrameError(
            f"unknown variables {sorted(str(s) for s in unknown)} in Hamiltonian; "
            f"this phase space has {', '.join(names)}")
    return EFunction(smooth=ScalarField.from_expr(expr, symbols))


def momentum_function(frame, i):
    """The coordinate function m_i as a smooth EFunction on phase space."""
    n, p = frame.chart.dim_n, frame.rank_p
    return EFunction(smooth=ScalarField.coordinate(n + i, n + p))


def coordinate_function(frame, j):
    """The coordinate function q_j as a smooth EFunction on phase space."""
    n, p = frame.chart.dim_n, frame.rank_p
    return EFunction(smooth=ScalarField.coordinate(j, n + p))
