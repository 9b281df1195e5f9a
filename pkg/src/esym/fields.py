"""Charts and scalar coefficient fields.

Every coefficient that enters a frame, a metric or a connection is a
``ScalarField``: a real-valued function of the chart coordinates together
with its partial derivatives.  Fields built from symbolic expressions carry
the expression and differentiate analytically; fields built from plain
Python callables fall back to central finite differences with a declared
step.
"""

import numpy as np
import sympy as sp

from .errors import RegionError

# Default relative step for central finite differences.  Commutator and
# curvature routines inherit it through ScalarField.partial.
DEFAULT_FD_STEP = 1e-5


class Chart:
    """A single coordinate chart with an optional validity predicate.

    Parameters
    ----------
    name : str
    coord_names : sequence of str, all distinct
    region : callable(np.ndarray) -> bool, optional
        Validity predicate; ``None`` means the whole coordinate space.
    boundary : sequence of int
        Indices of coordinates that are defining functions of singular loci.
    """

    def __init__(self, name, coord_names, region=None, boundary=()):
        coord_names = tuple(coord_names)
        if len(coord_names) < 1:
            raise ValueError("chart needs at least one coordinate")
        if len(set(coord_names)) != len(coord_names):
            raise ValueError("coordinate names must be distinct")
        for b in boundary:
            if not 0 <= b < len(coord_names):
                raise ValueError(f"boundary index {b} out of range")
        self.name = name
        self.coord_names = coord_names
        self.dim_n = len(coord_names)
        self.region = region
        self.boundary = tuple(boundary)

    def contains(self, q):
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dim_n,):
            return False
        if not np.all(np.isfinite(q)):
            return False
        if self.region is None:
            return True
        return bool(self.region(q))

    def require(self, q):
        """Return q as an array, raising RegionError outside the domain."""
        q = np.asarray(q, dtype=float)
        if not self.contains(q):
            raise RegionError(
                f"point {np.array2string(q, precision=6)} outside region of chart '{self.name}'"
            )
        return q

    def __repr__(self):
        return f"Chart({self.name!r}, coords={self.coord_names})"


class ScalarField:
    """Real function of chart coordinates with derivative access.

    ``expr`` is an optional sympy expression in ``symbols``; when present,
    partial derivatives are computed symbolically and derived fields
    (products, anchor derivatives, ...) stay analytic.  Otherwise ``fn`` is
    a plain callable and derivatives use central differences with step
    ``fd_step * max(1, |q_j|)``.
    """

    def __init__(self, fn, nvars, expr=None, symbols=None, fd_step=DEFAULT_FD_STEP, name=""):
        self._fn = fn
        self.nvars = int(nvars)
        self.expr = expr
        self.symbols = tuple(symbols) if symbols is not None else None
        self.fd_step = float(fd_step)
        self.name = name
        self._partial_cache = {}

    # -- constructors ----------------------------------------------------

    @staticmethod
    def from_expr(expr, symbols, fd_step=DEFAULT_FD_STEP):
        """Build a field from a sympy expression over the given symbols."""
        symbols = tuple(symbols)
        fn = _lambdify(expr, symbols)
        return ScalarField(fn, len(symbols), expr=expr, symbols=symbols,
                           fd_step=fd_step, name=str(expr))

    @staticmethod
    def constant(value, nvars):
        value = float(value)
        symbols = _default_symbols(nvars)
        return ScalarField(lambda q, v=value: v, nvars, expr=sp.Float(value) if value else sp.Integer(0),
                           symbols=symbols, name=str(value))

    @staticmethod
    def coordinate(j, nvars):
        symbols = _default_symbols(nvars)
        return ScalarField.from_expr(symbols[j], symbols)

    # -- evaluation ------------------------------------------------------

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        return float(self._fn(q))

    def partial(self, q, j):
        """d(field)/d(coordinate j) at q."""
        return self.partial_field(j)(q)

    def partial_field(self, j):
        """The j-th partial derivative as a ScalarField."""
        if j in self._partial_cache:
            return self._partial_cache[j]
        if self.expr is not None and self.symbols is not None:
            dexpr = sp.diff(self.expr, self.symbols[j])
            field = ScalarField.from_expr(dexpr, self.symbols, fd_step=self.fd_step)
        else:
            field = ScalarField(_central_difference(self._fn, j, self.fd_step),
                                self.nvars, fd_step=self.fd_step,
                                name=f"d({self.name})/dq{j}")
        self._partial_cache[j] = field
        return field

    def gradient(self, q):
        q = np.asarray(q, dtype=float)
        return np.array([self.partial(q, j) for j in range(self.nvars)])

    def is_zero(self):
        """True when the field is syntactically the zero expression."""
        return self.expr is not None and self.expr == 0

    def __repr__(self):
        return f"ScalarField({self.name or '<callable>'})"


def _central_difference(fn, j, step):
    def diff(q, fn=fn, j=j, step=step):
        h = step * max(1.0, abs(q[j]))
        qp = np.array(q, dtype=float)
        qm = np.array(q, dtype=float)
        qp[j] += h
        qm[j] -= h
        return (fn(qp) - fn(qm)) / (2.0 * h)

    return diff


def _lambdify(expr, symbols):
    raw = sp.lambdify(symbols, expr, modules=["numpy"])

    def fn(q, raw=raw):
        return float(raw(*q))

    return fn


_SYMBOL_CACHE = {}


def _default_symbols(nvars):
    if nvars not in _SYMBOL_CACHE:
        _SYMBOL_CACHE[nvars] = sp.symbols(f"_v0:{nvars}", real=True)
    return _SYMBOL_CACHE[nvars]


def field_from_callable(fn, nvars, fd_step=DEFAULT_FD_STEP, name=""):
    """Wrap a plain callable as a ScalarField (finite-difference partials)."""
    return ScalarField(fn, nvars, fd_step=fd_step, name=name)


def combine(fn_of_fields, fields, nvars, name=""):
    """Combine ScalarFields into a new one, staying symbolic when possible.

    ``fn_of_fields`` must accept a list of values (floats or sympy
    expressions) and return the combined value.  If every input field has a
    sympy expression over the same symbols, the combination is built
    symbolically so that analytic partials survive.
    """
    fields = list(fields)
    symbolic = all(f.expr is not None and f.symbols is not None for f in fields)
    if symbolic and fields:
        syms = fields[0].symbols
        if all(f.symbols == syms for f in fields):
            expr = fn_of_fields([f.expr for f in fields])
            return ScalarField.from_expr(expr, syms)

    def fn(q):
        return float(fn_of_fields([f(q) for f in fields]))

    return ScalarField(fn, nvars, name=name)
