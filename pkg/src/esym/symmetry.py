"""Moment-map and level-set diagnostics for Hamiltonian group actions.

Rather than materializing quotients, the module certifies the defining
condition i_{X#} w = -d<mu, X> pointwise: `moment_residual` measures the
component norm of i_{X#} w + d mu at a phase point, and `level_tangency`
measures |L_{X#} mu| = |<d mu, X#>|, which must vanish whenever the moment
condition holds (skewness of w).
"""

import numpy as np

from .errors import FrameError
from .phasespace import canonical_symplectic, phase_gradient


class ActionGenerator:
    """Fundamental vector field of a one-parameter action on phase space.

    components: 2p ScalarFields over the n + p phase variables, giving the
    base and fibre frame components of X#.
    """

    def __init__(self, components, label=""):
        self.components = tuple(components)
        self.label = label

    def at(self, frame, pt):
        if len(self.components) != 2 * frame.rank_p:
            raise FrameError("action generator needs 2p component fields")
        x = pt.flat()
        return np.array([field(x) for field in self.components])


def moment_residual(gen, mu, frame, pt):
    """|| i_{X#} w + d mu || in components: ||W^T X# + grad mu|| at pt.

    Zero certifies that mu is a moment map for the generator at this point;
    the singular ledger of mu keeps the gradient finite on the locus.
    """
    omega = canonical_symplectic(frame, pt).omega
    x = gen.at(frame, pt)
    grad = phase_gradient(mu, frame, pt)
    return float(np.linalg.norm(omega.T @ x + grad))


def level_tangency(gen, mu, frame, pt):
    """|L_{X#} mu| = |<grad mu, X#>| at pt; zero means X# is tangent to the
    mu-level through pt."""
    x = gen.at(frame, pt)
    grad = phase_gradient(mu, frame, pt)
    return float(abs(grad @ x))
