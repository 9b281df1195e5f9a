"""The arithmetic expression grammar used by declaration files.

Coefficients in frame, metric, gauge and Hamiltonian blocks are quoted
strings over the chart variables, with operators ``+ - * / ^`` and the
functions ``sin cos tan sec csc log exp sqrt`` plus the constants ``pi``
and ``e``.  Parsing produces sympy expressions restricted to exactly this
vocabulary, so a typo in a config file fails loudly instead of evaluating
something unintended.

``log(qb)`` and negative powers ``qb^-k`` of a boundary coordinate are not
evaluated naively: `parse_efunction` splits them off into the singular
ledger of an admissible Hamiltonian.
"""

import sympy as sp
from sympy.parsing.sympy_parser import (
    parse_expr,
    standard_transformations,
    convert_xor,
)

from .errors import ConfigError
from .fields import ScalarField

_ALLOWED_FUNCTIONS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "tan": sp.tan,
    "sec": sp.sec,
    "csc": sp.csc,
    "log": sp.log,
    "exp": sp.exp,
    "sqrt": sp.sqrt,
}

_CONSTANTS = {"pi": sp.pi, "e": sp.E}

_TRANSFORMATIONS = standard_transformations + (convert_xor,)


def parse_expression(text, var_names):
    """Parse ``text`` into a sympy expression over the named variables.

    Raises ConfigError naming the offending expression on any syntax error
    or use of a symbol/function outside the grammar.
    """
    if not isinstance(text, str):
        raise ConfigError(f"expression must be a string, got {text!r}")
    symbols = {name: sp.Symbol(name, real=True) for name in var_names}
    local = dict(_ALLOWED_FUNCTIONS)
    local.update(_CONSTANTS)
    local.update(symbols)
    try:
        expr = parse_expr(text, local_dict=local, transformations=_TRANSFORMATIONS,
                          evaluate=True)
    except Exception as err:
        raise ConfigError(f"cannot parse expression {text!r}: {err}") from None
    _check_vocabulary(expr, text, set(symbols.values()))
    return expr, [symbols[name] for name in var_names]


_ALLOWED_FUNCTION_CLASSES = (sp.sin, sp.cos, sp.tan, sp.sec, sp.csc, sp.log, sp.exp)


def _check_vocabulary(expr, text, allowed_symbols):
    allowed_fns = _ALLOWED_FUNCTION_CLASSES   # sqrt parses to a rational power
    for node in sp.preorder_traversal(expr):
        if isinstance(node, sp.Symbol):
            if node not in allowed_symbols:
                raise ConfigError(
                    f"unknown variable '{node}' in expression {text!r}"
                )
        elif node.is_Function:
            if not isinstance(node, allowed_fns):
                raise ConfigError(
                    f"function '{type(node).__name__}' not in grammar, in expression {text!r}"
                )


def parse_field(text, var_names):
    """Parse an expression string directly into a ScalarField."""
    expr, symbols = parse_expression(text, var_names)
    return ScalarField.from_expr(expr, symbols)


def parse_efunction(text, var_names, boundary_coords):
    """Split an expression into (smooth expr, log terms, power terms).

    ``boundary_coords`` maps a variable index to its boundary status; log
    and negative-power terms are recognized only in those variables.  Log
    terms must have constant coefficients; the coefficient of ``qb^-k``
    may depend on ``qb`` alone.  Returns ``(smooth_expr, symbols,
    log_terms, power_terms)`` with log terms ``(b, float)`` and power
    terms ``(b, k, coeff_expr)``.
    """
    expr, symbols = parse_expression(text, var_names)
    boundary_syms = {symbols[b]: b for b in boundary_coords}

    smooth = sp.Integer(0)
    log_terms = []
    power_terms = []
    for term in sp.Add.make_args(sp.expand(expr)):
        handled = False
        for sym, b in boundary_syms.items():
            if _is_log_of(term, sym):
                coeff = sp.simplify(term / sp.log(sym))
                if coeff.free_symbols:
                    raise ConfigError(
                        f"log({sym}) coefficient must be constant, in expression {text!r}"
                    )
                log_terms.append((b, float(coeff)))
                handled = True
                break
            k = _negative_power_of(term, sym)
            if k is not None:
                coeff = sp.simplify(term * sym ** k)
                if coeff.free_symbols - {sym}:
                    raise ConfigError(
                        f"coefficient of {sym}^-{k} may depend only on {sym}, "
                        f"in expression {text!r}"
                    )
                power_terms.append((b, k, coeff))
                handled = True
                break
        if not handled:
            smooth = smooth + term
    return smooth, symbols, log_terms, power_terms


def _is_log_of(term, sym):
    logs = [n for n in sp.preorder_traversal(term) if isinstance(n, sp.log)]
    return any(n.args[0] == sym for n in logs)


def _negative_power_of(term, sym):
    """Degree k of sym in the denominator of term (None if not singular)."""
    num, den = sp.fraction(sp.together(term))
    try:
        k = sp.degree(den, sym)
    except sp.PolynomialError:
        return None
    if k is None or int(k) <= 0:
        return None
    return int(k)
