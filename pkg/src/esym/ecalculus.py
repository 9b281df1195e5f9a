"""Differential forms and admissible functions on a frame.

Forms of degree d are stored as coefficients over strictly increasing
index tuples in the dual generator basis E_1*..E_p*.  The exterior
derivative follows the Koszul formula with generator derivatives taken
through the anchor and commutators replaced by the structure functions:

    d w(E_i0..E_id) = sum_a (-1)^a E_ia( w(.. without ia ..) )
                    + sum_{a<b} (-1)^{a+b} w([E_ia, E_ib], .. without ia, ib ..)

For a function f this reduces to df = sum_i (sum_j rho_ij df/dq_j) E_i*,
and on a dual generator it gives d E_i* = -1/2 sum_{j,k} C_jk^i E_j* ^ E_k*.

Admissible Hamiltonians (EFunction) extend smooth functions by a singular
ledger: log terms g*log|q_b| and negative powers q_b^-k * g_k(q_b) in
boundary coordinates.  Their frame gradients are smooth because the
generator owning q_b vanishes there to order m > k.
"""

from itertools import combinations

import numpy as np

from .errors import FrameError, SingularTermError
from .fields import ScalarField, combine


def _sorted_with_sign(indices):
    """Sort an index tuple, returning (sign, tuple) or (0, None) on repeats."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    # insertion sort, counting transpositions
    for a in range(1, len(idx)):
        b = a
        while b > 0 and idx[b - 1] > idx[b]:
            idx[b - 1], idx[b] = idx[b], idx[b - 1]
            sign = -sign
            b -= 1
    return sign, tuple(idx)


class EForm:
    """A differential form in the dual frame basis.

    coeffs maps strictly increasing index tuples (length = degree, entries
    < rank_p) to ScalarFields over the chart coordinates.  Missing keys are
    zero.  A degree-0 form has the single key ().
    """

    def __init__(self, degree, rank_p, coeffs):
        if degree < 0:
            raise FrameError("form degree must be >= 0")
        self.degree = int(degree)
        self.rank_p = int(rank_p)
        clean = {}
        for key, field in coeffs.items():
            key = tuple(key)
            if len(key) != degree:
                raise FrameError(f"coefficient key {key} has wrong length for degree {degree}")
            if any(not 0 <= i < rank_p for i in key):
                raise FrameError(f"coefficient key {key} out of range for p={rank_p}")
            if list(key) != sorted(set(key)):
                raise FrameError(f"coefficient key {key} must be strictly increasing")
            clean[key] = field
        self.coeffs = clean

    @staticmethod
    def zero(degree, rank_p, nvars):
        return EForm(degree, rank_p, {})

    @staticmethod
    def function(field, rank_p):
        return EForm(0, rank_p, {(): field})

    @staticmethod
    def dual_generator(i, rank_p, nvars):
        """The basis one-form E_i*."""
        return EForm(1, rank_p, {(i,): ScalarField.constant(1.0, nvars)})

    def component(self, indices):
        """Coefficient field for an arbitrary (possibly unsorted) tuple.

        Returns (sign, field) with field None when the coefficient is zero.
        """
        sign, key = _sorted_with_sign(indices)
        if sign == 0:
            return 0, None
        return sign, self.coeffs.get(key)

    def evaluate(self, indices, q):
        sign, field = self.component(indices)
        if field is None:
            return 0.0
        return sign * field(q)

    def at(self, q):
        """All stored coefficients evaluated at q, as a dict."""
        return {key: field(q) for key, field in self.coeffs.items()}

    def max_abs(self, q):
        if not self.coeffs:
            return 0.0
        return max(abs(field(q)) for field in self.coeffs.values())

    def __repr__(self):
        keys = ", ".join(str(k) for k in sorted(self.coeffs)) or "0"
        return f"EForm(degree={self.degree}, p={self.rank_p}, keys=[{keys}])"


def _generator_derivative_field(frame, i, field):
    """E_i(field) as a ScalarField (anchor-contracted derivative)."""
    n = frame.chart.dim_n
    pieces = []
    for j in range(n):
        rho = frame.anchor[i][j]
        if rho.is_zero():
            continue
        pieces.append((rho, field.partial_field(j)))
    if not pieces:
        return ScalarField.constant(0.0, field.nvars)
    flat = [f for pair in pieces for f in pair]

    def build(vals):
        total = 0
        for t in range(0, len(vals), 2):
            total = total + vals[t] * vals[t + 1]
        return total

    return combine(build, flat, field.nvars, name=f"E{i}({field.name})")


def _linear_combination(terms, nvars):
    """sum of sign * field (terms = [(sign, field), ...]) as a ScalarField."""
    terms = [(s, f) for s, f in terms if s != 0 and f is not None and not f.is_zero()]
    if not terms:
        return ScalarField.constant(0.0, nvars)
    signs = [s for s, _ in terms]
    fields = [f for _, f in terms]

    def build(vals):
        total = 0
        for s, v in zip(signs, vals):
            total = total + s * v
        return total

    return combine(build, fields, nvars)


def _product(a, b, nvars):
    return combine(lambda v: v[0] * v[1], [a, b], nvars)


def e_differential(form, frame):
    """Exterior derivative of a form on the given frame."""
    p = frame.rank_p
    n = frame.chart.dim_n
    if form.degree >= p:
        return EForm.zero(form.degree + 1, p, n)
    new_coeffs = {}
    for key in combinations(range(p), form.degree + 1):
        terms = []
        for a, ia in enumerate(key):
            rest = key[:a] + key[a + 1:]
            sign, field = form.component(rest)
            if field is not None:
                terms.append(((-1) ** a * sign,
                              _generator_derivative_field(frame, ia, field)))
        for a in range(len(key)):
            for b in range(a + 1, len(key)):
                rest = tuple(x for t, x in enumerate(key) if t not in (a, b))
                for k in range(p):
                    cfield = frame.structure[key[a]][key[b]][k]
                    if cfield.is_zero():
                        continue
                    sign, wfield = form.component((k,) + rest)
                    if wfield is None:
                        continue
                    terms.append(((-1) ** (a + b) * sign, _product(cfield, wfield, n)))
        coeff = _linear_combination(terms, n)
        if not coeff.is_zero():
            new_coeffs[key] = coeff
    return EForm(form.degree + 1, p, new_coeffs)


def d_squared_residual(form, frame, q):
    """Max coefficient of d(d form) at q; zero certifies the cochain property."""
    q = frame.chart.require(q)
    dd = e_differential(e_differential(form, frame), frame)
    return dd.max_abs(q)


def interior_product(x_fields, form, frame):
    """Contraction of a form with a frame vector field (p coefficient fields)."""
    p, n = frame.rank_p, frame.chart.dim_n
    if form.degree == 0:
        return EForm.zero(0, p, n)
    new_coeffs = {}
    for key in combinations(range(p), form.degree - 1):
        terms = []
        for k in range(p):
            xk = x_fields[k]
            if xk.is_zero():
                continue
            sign, wfield = form.component((k,) + key)
            if wfield is None:
                continue
            terms.append((sign, _product(xk, wfield, n)))
        coeff = _linear_combination(terms, n)
        if not coeff.is_zero():
            new_coeffs[key] = coeff
    return EForm(max(form.degree - 1, 0), p, new_coeffs)


def lie_derivative(x_fields, form, frame):
    """Cartan formula L_X w = d i_X w + i_X d w for X given in frame components."""
    x_fields = list(x_fields)
    if len(x_fields) != frame.rank_p:
        raise FrameError("vector field needs one component per generator")
    a = e_differential(interior_product(x_fields, form, frame), frame)
    b = interior_product(x_fields, e_differential(form, frame), frame)
    p, n = frame.rank_p, frame.chart.dim_n
    keys = set(a.coeffs) | set(b.coeffs)
    coeffs = {}
    for key in keys:
        fa = a.coeffs.get(key)
        fb = b.coeffs.get(key)
        coeff = _linear_combination([(1, fa), (1, fb)], n)
        if not coeff.is_zero():
            coeffs[key] = coeff
    return EForm(form.degree, p, coeffs)


# -- admissible Hamiltonians ------------------------------------------------


class EFunction:
    """Smooth part plus a singular ledger of log and negative-power terms.

    ``smooth`` is a ScalarField over ``nvars`` variables (chart coordinates,
    optionally followed by momenta and charges).  ``log_terms`` is a
    sequence of (boundary index b, constant g) meaning g*log|x_b|;
    ``power_terms`` is a sequence of (b, k, g_k) with g_k a single-variable
    ScalarField, meaning x_b**(-k) * g_k(x_b).
    """

    def __init__(self, smooth=None, log_terms=(), power_terms=(), nvars=None):
        if smooth is None and nvars is None:
            raise ValueError("need nvars when there is no smooth part")
        self.nvars = int(nvars) if nvars is not None else smooth.nvars
        self.smooth = smooth
        self.log_terms = tuple((int(b), float(g)) for b, g in log_terms)
        self.power_terms = tuple((int(b), int(k), gk) for b, k, gk in power_terms)
        for b, k, gk in self.power_terms:
            if k < 1:
                raise SingularTermError(f"power term exponent must be >= 1, got {k}")
            if gk.nvars != 1:
                raise SingularTermError("power term coefficient must be a function "
                                        "of the boundary coordinate alone")

    @property
    def is_smooth(self):
        return not self.log_terms and not self.power_terms

    def validate_for_frame(self, frame):
        """Check the ledger against the frame's boundary orders."""
        boundary = set(frame.chart.boundary)
        for b, _ in self.log_terms:
            if b not in boundary:
                raise SingularTermError(
                    f"log term in coordinate {b}, which is not a boundary coordinate")
        for b, k, _ in self.power_terms:
            if b not in boundary:
                raise SingularTermError(
                    f"power term in coordinate {b}, which is not a boundary coordinate")
            m = frame.boundary_order(b)
            if k > m - 1:
                raise SingularTermError(
                    f"power q^-{k} needs frame order >= {k + 1}, frame has order {m}")
        return self

    def __call__(self, x):
        # the value may be non-finite on the singular locus; only the frame
        # gradient is guaranteed smooth there
        x = np.asarray(x, dtype=float)
        total = self.smooth(x) if self.smooth is not None else 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            for b, g in self.log_terms:
                total += g * np.log(np.abs(x[b]))
            for b, k, gk in self.power_terms:
                total += x[b] ** (-k) * gk(np.array([x[b]]))
        return float(total)

    def singular_frame_components(self, frame, x):
        """Ledger contribution to <df, E_i> for each generator (length p).

        Smooth across the boundary: the log term contributes
        g * reduced(q) * q_b**(m-1) and the power term contributes
        reduced(q) * (-k g_k q_b**(m-k-1) + g_k' q_b**(m-k)).
        """
        p = frame.rank_p
        comps = np.zeros(p)
        n = frame.chart.dim_n
        q = np.asarray(x, dtype=float)[:n]
        for b, g in self.log_terms:
            bg = frame.boundary_info(b)
            comps[bg.gen] += g * bg.reduced(q) * q[b] ** (bg.order - 1)
        for b, k, gk in self.power_terms:
            bg = frame.boundary_info(b)
            qb = np.array([q[b]])
            val = gk(qb)
            dval = gk.partial(qb, 0)
            comps[bg.gen] += bg.reduced(q) * (
                -k * val * q[b] ** (bg.order - k - 1) + dval * q[b] ** (bg.order - k)
            )
        return comps

    def smooth_partial(self, x, j):
        if self.smooth is None:
            return 0.0
        return self.smooth.partial(np.asarray(x, dtype=float), j)


def smooth_efunction(field):
    """Wrap a plain ScalarField as an EFunction with empty ledger."""
    return EFunction(smooth=field)


def e_function_frame_gradient(f, frame, q):
    """<df, E_i> for i = 1..p, valid on the singular locus as well."""
    q = frame.chart.require(q)
    f.validate_for_frame(frame)
    p, n = frame.rank_p, frame.chart.dim_n
    if f.nvars != n:
        raise FrameError("function has wrong variable count for this chart")
    comps = np.zeros(p)
    if f.smooth is not None:
        grad = np.array([f.smooth.partial(q, j) for j in range(n)])
        comps += frame.anchor_matrix(q) @ grad
    comps += f.singular_frame_components(frame, q)
    return comps
