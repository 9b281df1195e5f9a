"""Singular tangent frames on coordinate charts.

A frame is a finite set of generating vector fields E_1..E_p written in
chart coordinates through anchor coefficients rho[i][j] (E_i = sum_j
rho_ij d/dq_j) together with structure functions C[i][j][k] expressing the
commutators [E_i, E_j] = sum_k C_ij^k E_k.  Built-in families cover
hypersurface-tangent frames of any order (q1^m d/dq1, ...), corner frames,
regular foliations, the elliptic frame on the plane, and a two-generator
frame with a nonzero structure function for exercising the C-terms.

The library verifies supplied structure functions pointwise rather than
inferring them: inference by least squares is ill-posed wherever the
anchor drops rank.
"""

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .errors import FrameError
from .fields import Chart, ScalarField

COMMUTATOR_FD_STEP = 1e-5


@dataclass(frozen=True)
class BoundaryGenerator:
    """Factorization of the anchor entry owning a boundary coordinate.

    The owning generator reads rho[gen][coord] = q_coord**order * reduced(q)
    with ``reduced`` smooth; this factorization is what makes gradients of
    log and negative-power Hamiltonian terms smooth across the locus.
    """

    coord: int
    gen: int
    order: int
    reduced: ScalarField


class EFrame:
    """A chart together with p generators, anchors and structure functions."""

    def __init__(self, chart, anchor, structure, family="custom", boundary_gens=(),
                 check=True):
        self.chart = chart
        self.anchor = anchor          # p x n nested lists of ScalarField
        self.rank_p = len(anchor)
        self.family = family
        self.boundary_gens = tuple(boundary_gens)
        n = chart.dim_n
        if self.rank_p < 1:
            raise FrameError("frame needs at least one generator")
        for row in anchor:
            if len(row) != n:
                raise FrameError("anchor rows must have chart dimension")
        p = self.rank_p
        if structure is None:
            zero = ScalarField.constant(0.0, n)
            structure = [[[zero for _ in range(p)] for _ in range(p)]
                         for _ in range(p)]
        self.structure = structure    # p x p x p of ScalarField, C[i][j][k]
        owned = {bg.coord for bg in self.boundary_gens}
        if owned != set(chart.boundary):
            raise FrameError("boundary generators must cover chart.boundary exactly")
        if check:
            self._check_skew_symbolic()

    def _check_skew_symbolic(self):
        p = self.rank_p
        for i in range(p):
            for j in range(i, p):
                for k in range(p):
                    a = self.structure[i][j][k]
                    b = self.structure[j][i][k]
                    if a.expr is not None and b.expr is not None:
                        if sp.simplify(a.expr + b.expr) != 0:
                            raise FrameError(
                                f"structure functions not skew: "
                                f"C[{i}][{j}][{k}] + C[{j}][{i}][{k}] != 0"
                            )

    # -- evaluation ------------------------------------------------------

    def anchor_matrix(self, q):
        """rho(q) as a (p, n) array; rows are generators in coordinates."""
        q = self.chart.require(q)
        p, n = self.rank_p, self.chart.dim_n
        rho = np.empty((p, n))
        for i in range(p):
            for j in range(n):
                rho[i, j] = self.anchor[i][j](q)
        return rho

    def structure_tensor(self, q):
        """C(q) as a (p, p, p) array, C[i, j, k]."""
        q = self.chart.require(q)
        p = self.rank_p
        c = np.empty((p, p, p))
        for i in range(p):
            for j in range(p):
                for k in range(p):
                    c[i, j, k] = self.structure[i][j][k](q)
        return c

    def generator_derivative(self, i, field, q):
        """E_i acting on a ScalarField through the anchor."""
        q = self.chart.require(q)
        return float(sum(self.anchor[i][j](q) * field.partial(q, j)
                         for j in range(self.chart.dim_n)))

    def boundary_info(self, coord):
        for bg in self.boundary_gens:
            if bg.coord == coord:
                return bg
        raise FrameError(f"coordinate {coord} is not a boundary coordinate of this frame")

    def boundary_order(self, coord):
        return self.boundary_info(coord).order

    def anchor_rank(self, q, tol=1e-10):
        return int(np.linalg.matrix_rank(self.anchor_matrix(q), tol=tol))

    def __repr__(self):
        return (f"EFrame(family={self.family!r}, chart={self.chart.name!r}, "
                f"p={self.rank_p}, n={self.chart.dim_n})")


# -- built-in families ----------------------------------------------------


def _coord_names(n, names=None):
    if names is not None:
        return tuple(names)
    return tuple(f"q{i + 1}" for i in range(n))


def chart_symbols(names):
    return tuple(sp.Symbol(nm, real=True) for nm in names)


def _sym_fields(exprs_matrix, symbols):
    return [[ScalarField.from_expr(e, symbols) for e in row] for row in exprs_matrix]


def make_b_structure(n, m=1, coord_names=None):
    """Frame q1^m d/dq1, d/dq2, ..., d/dqn, tangent to {q1 = 0} to order m."""
    if n < 1 or m < 1:
        raise FrameError(f"b-structure needs n >= 1 and m >= 1, got n={n}, m={m}")
    names = _coord_names(n, coord_names)
    chart = Chart(f"b{'' if m == 1 else m}_R{n}", names, boundary=(0,))
    syms = chart_symbols(names)
    exprs = [[sp.Integer(0)] * n for _ in range(n)]
    exprs[0][0] = syms[0] ** m
    for i in range(1, n):
        exprs[i][i] = sp.Integer(1)
    anchor = _sym_fields(exprs, syms)
    bg = BoundaryGenerator(coord=0, gen=0, order=m,
                           reduced=ScalarField.constant(1.0, n))
    tag = "b" if m == 1 else f"b^{m}"
    return EFrame(chart, anchor, None, family=f"{tag}(n={n})", boundary_gens=(bg,))


def make_corner_structure(n, k, coord_names=None):
    """Frame q1 d/dq1, ..., qk d/dqk, d/dq(k+1), ..., d/dqn (depth-k corner)."""
    if not 1 <= k <= n:
        raise FrameError(f"corner structure needs 1 <= k <= n, got k={k}, n={n}")
    names = _coord_names(n, coord_names)
    chart = Chart(f"corner{k}_R{n}", names, boundary=tuple(range(k)))
    syms = chart_symbols(names)
    exprs = [[sp.Integer(0)] * n for _ in range(n)]
    for i in range(k):
        exprs[i][i] = syms[i]
    for i in range(k, n):
        exprs[i][i] = sp.Integer(1)
    anchor = _sym_fields(exprs, syms)
    bgs = tuple(BoundaryGenerator(coord=i, gen=i, order=1,
                                  reduced=ScalarField.constant(1.0, n))
                for i in range(k))
    return EFrame(chart, anchor, None, family=f"corner(n={n},k={k})", boundary_gens=bgs)


def make_foliation_structure(n, p, coord_names=None):
    """Frame d/dq1, ..., d/dqp: leaves of a rank-p regular foliation."""
    if not 1 <= p <= n:
        raise FrameError(f"foliation structure needs 1 <= p <= n, got p={p}, n={n}")
    names = _coord_names(n, coord_names)
    chart = Chart(f"fol{p}_R{n}", names)
    syms = chart_symbols(names)
    exprs = [[sp.Integer(1) if i == j else sp.Integer(0) for j in range(n)]
             for i in range(p)]
    anchor = _sym_fields(exprs, syms)
    return EFrame(chart, anchor, None, family=f"foliation(n={n},p={p})")


def make_elliptic_structure():
    """Frame V = x dx + y dy, W = -y dx + x dy on the plane.

    Both generators vanish at the origin; V and W commute, so C = 0.
    """
    chart = Chart("elliptic_R2", ("x", "y"))
    x, y = chart_symbols(("x", "y"))
    anchor = _sym_fields([[x, y], [-y, x]], (x, y))
    return EFrame(chart, anchor, None, family="elliptic")


def make_vanishing_structure():
    """Frame E1 = x dx, E2 = x dy on the plane with [E1, E2] = E2.

    The single nonzero structure function C_12^2 = 1 makes this the
    smallest frame exercising every C-dependent code path.
    """
    chart = Chart("vanishing_R2", ("x", "y"))
    x, y = chart_symbols(("x", "y"))
    anchor = _sym_fields([[x, sp.Integer(0)], [sp.Integer(0), x]], (x, y))
    n = 2
    zero = ScalarField.constant(0.0, n)
    one = ScalarField.constant(1.0, n)
    minus_one = ScalarField.constant(-1.0, n)
    structure = [[[zero, zero], [zero, one]],
                 [[zero, minus_one], [zero, zero]]]
    return EFrame(chart, anchor, structure, family="vanishing")


def make_custom_frame(chart, anchor_exprs, structure_entries=None, boundary_specs=(),
                      symbols=None):
    """Frame from sympy expressions.

    ``anchor_exprs`` is a p x n matrix of sympy expressions over the chart
    symbols; ``structure_entries`` maps (i, j, k) -> expression for the
    nonzero C's (skew partners filled in automatically); ``boundary_specs``
    is a sequence of (coord, gen, order) triples, with the reduced factor
    computed symbolically from the anchor entry.
    """
    n = chart.dim_n
    if symbols is None:
        symbols = chart_symbols(chart.coord_names)
    symbols = tuple(symbols)
    anchor = _sym_fields([[sp.sympify(e) for e in row] for row in anchor_exprs],
                         symbols)
    p = len(anchor)
    zero = ScalarField.constant(0.0, n)
    structure = [[[zero for _ in range(p)] for _ in range(p)] for _ in range(p)]
    for (i, j, k), expr in (structure_entries or {}).items():
        expr = sp.sympify(expr)
        structure[i][j][k] = ScalarField.from_expr(expr, symbols)
        structure[j][i][k] = ScalarField.from_expr(-expr, symbols)
    bgs = []
    for (coord, gen, order) in boundary_specs:
        entry = sp.sympify(anchor_exprs[gen][coord])
        reduced = sp.cancel(entry / symbols[coord] ** order)
        _, den = sp.fraction(reduced)
        if den.has(symbols[coord]):
            raise FrameError(
                f"anchor entry {entry} does not vanish to order {order} in "
                f"{chart.coord_names[coord]}"
            )
        for other in range(p):
            # singular-ledger gradients assume one generator owns the column
            if other != gen and sp.sympify(anchor_exprs[other][coord]) != 0:
                raise FrameError(
                    f"boundary coordinate {chart.coord_names[coord]} must appear "
                    f"in exactly one generator; generator {other} also moves it")
        bgs.append(BoundaryGenerator(coord=coord, gen=gen, order=order,
                                     reduced=ScalarField.from_expr(reduced, symbols)))
    return EFrame(chart, anchor, structure, family="custom", boundary_gens=tuple(bgs))


# -- consistency diagnostics ----------------------------------------------


def commutator_components(frame, q, i, j):
    """Ambient components of [E_i, E_j] at q from anchors and their partials."""
    q = frame.chart.require(q)
    p, n = frame.rank_p, frame.chart.dim_n
    if not (0 <= i < p and 0 <= j < p):
        raise FrameError(f"generator indices ({i}, {j}) out of range for p={p}")
    out = np.zeros(n)
    for l in range(n):
        acc = 0.0
        for k in range(n):
            acc += frame.anchor[i][k](q) * frame.anchor[j][l].partial(q, k)
            acc -= frame.anchor[j][k](q) * frame.anchor[i][l].partial(q, k)
        out[l] = acc
    return out


def bracket_residual(frame, q, i, j):
    """Ambient norm of [E_i, E_j](q) - sum_k C_ij^k(q) E_k(q).

    Zero (within tolerance) certifies the declared structure functions at q.
    """
    comm = commutator_components(frame, q, i, j)
    rho = frame.anchor_matrix(q)
    c = np.array([frame.structure[i][j][k](q) for k in range(frame.rank_p)])
    return float(np.linalg.norm(comm - c @ rho))


def jacobi_residual(frame, q, i, j, k):
    """Frame-component norm of the cyclic sum of [[E_i, E_j], E_k] in C-form.

    Expanding [[E_i, E_j], E_k] = sum_m (sum_l C_ij^l C_lk^m - E_k(C_ij^m)) E_m,
    the cyclic sum over (i, j, k) of the E_m-coefficients must vanish for a
    genuine Lie algebroid.  The norm is taken over the coefficient vector so
    a violation is not masked where the anchor drops rank.
    """
    q = frame.chart.require(q)
    p = frame.rank_p
    for idx in (i, j, k):
        if not 0 <= idx < p:
            raise FrameError(f"generator index {idx} out of range for p={p}")
    coeff = np.zeros(p)
    for (a, b, c_) in ((i, j, k), (j, k, i), (k, i, j)):
        for m in range(p):
            quad = sum(frame.structure[a][b][l](q) * frame.structure[l][c_][m](q)
                       for l in range(p))
            deriv = frame.generator_derivative(c_, frame.structure[a][b][m], q)
            coeff[m] += quad - deriv
    return float(np.linalg.norm(coeff))


BUILTIN_FAMILIES = {
    "b": lambda: make_b_structure(2, 1),
    "b3": lambda: make_b_structure(2, 3),
    "corner": lambda: make_corner_structure(3, 2),
    "foliation": lambda: make_foliation_structure(3, 2),
    "elliptic": make_elliptic_structure,
    "vanishing": make_vanishing_structure,
}
