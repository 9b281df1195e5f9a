"""Run configuration files.

A run file is TOML with exactly one of a [scenario] block (built-in by
name, parameters overridable) or a [frame] block (custom build: frame plus
optional [metric] and [gauge] blocks and a [hamiltonian] block).  Shared
blocks: [initial], [integrator], [output], and a top-level seed.

Expressions are quoted strings in the shared grammar (see
`esym.expressions`); parse failures name the offending expression, and
dimension mismatches name the offending block.
"""

import sys
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .ecalculus import EFunction
from .errors import ConfigError
from .expressions import parse_efunction, parse_field
from .fields import Chart, ScalarField
from .estructure import (
    make_b_structure,
    make_corner_structure,
    make_custom_frame,
    make_elliptic_structure,
    make_foliation_structure,
    make_vanishing_structure,
)
from .gauge import GaugeData, LieAlgebra, wong_flow_field
from .integrator import IntegratorConfig
from .phasespace import flow_field, phase_variable_names
from .riemann import EMetric, geodesic_flow_field
from .scenarios import (
    SCENARIO_BUILDERS,
    ScenarioSpec,
    _boundary_monitors,
    _charge_monitors,
    _chart_region_predicate,
    _energy_monitor,
    _kinetic_efunction,
    build_scenario,
    default_integrator_config,
)


def load_config(path):
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            return _toml.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except _toml.TOMLDecodeError as err:
        raise ConfigError(f"config parse error in {path}: {err}") from None


class ResolvedRun:
    """A scenario spec plus integration and output settings."""

    def __init__(self, spec, integrator, outputs, seed, echo):
        self.spec = spec
        self.integrator = integrator
        self.outputs = outputs
        self.seed = seed
        self.echo = echo        # normalized config for the meta block


def resolve(config):
    if not isinstance(config, dict):
        raise ConfigError("config root must be a table")
    has_scenario = "scenario" in config
    has_frame = "frame" in config
    if has_scenario == has_frame:
        raise ConfigError("config must contain exactly one of [scenario] or [frame]")
    seed = int(config.get("seed", 0))
    if has_scenario:
        spec = _resolve_scenario(config["scenario"])
    else:
        spec = _resolve_custom(config)
    spec = _apply_initial(spec, config.get("initial"))
    integrator = _resolve_integrator(spec, config.get("integrator", {}))
    outputs = _resolve_outputs(config.get("output", {}))
    echo = _normalize(config)
    return ResolvedRun(spec, integrator, outputs, seed, echo)


def _resolve_scenario(block):
    name = block.get("name")
    if not name:
        raise ConfigError("[scenario] needs a 'name' key")
    if name not in SCENARIO_BUILDERS:
        raise ConfigError(
            f"[scenario] unknown name '{name}'; known: {', '.join(sorted(SCENARIO_BUILDERS))}")
    params = block.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("[scenario.params] must be a table")
    try:
        return build_scenario(name, **{k: _plain(v) for k, v in params.items()})
    except TypeError as err:
        raise ConfigError(f"[scenario.params] invalid for '{name}': {err}") from None


def _plain(value):
    if isinstance(value, list):
        return tuple(_plain(v) for v in value)
    return value


def _resolve_custom(config):
    frame = _build_frame(config["frame"])
    metric = _build_metric(config.get("metric"), frame)
    gauge = _build_gauge(config.get("gauge"), frame)
    ham_block = config.get("hamiltonian")
    if ham_block is None and metric is None:
        raise ConfigError("custom run needs a [hamiltonian] block (or a [metric] "
                          "block for the geodesic flow)")
    momenta = None
    if ham_block is not None:
        momenta = ham_block.get("momenta")
        hamiltonian = _build_hamiltonian(ham_block, frame, momenta)
    else:
        hamiltonian = _kinetic_efunction(metric)
    names = phase_variable_names(frame, momenta)
    monitors = {"energy": _energy_monitor(hamiltonian, len(names))}
    monitors.update(_boundary_monitors(frame))
    params = {}
    if gauge is not None:
        gauge_data, charge0 = gauge
        field = wong_flow_field(hamiltonian, gauge_data)
        names = names + tuple(f"O{i + 1}" for i in range(gauge_data.algebra.dim_d))
        monitors.update(_charge_monitors(gauge_data))
        if charge0 is not None:
            params["charge0"] = charge0
    elif ham_block is None:
        gauge_data = None
        field = geodesic_flow_field(metric)
    else:
        gauge_data = None
        field = flow_field(hamiltonian, frame)
    region = _combined_region(frame, config["frame"].get("region"))
    return ScenarioSpec(
        name="custom",
        provenance="user-declared frame",
        kind="flow",
        state_names=tuple(names),
        frame=frame,
        metric=metric,
        gauge=gauge_data,
        hamiltonian=hamiltonian,
        state0=None,
        field=field,
        monitors=monitors,
        region=region,
        params=params,
    )


def _combined_region(frame, box):
    """Chart region intersected with an optional [frame.region] coordinate box."""
    chart_ok = _chart_region_predicate(frame)
    if box is None:
        return chart_ok
    n = frame.chart.dim_n
    lo = np.asarray(box.get("min", [-np.inf] * n), dtype=float)
    hi = np.asarray(box.get("max", [np.inf] * n), dtype=float)
    if lo.shape != (n,) or hi.shape != (n,):
        raise ConfigError(f"[frame.region] min/max must have length {n}")

    def region(state):
        q = np.asarray(state, dtype=float)[:n]
        return chart_ok(state) and bool(np.all(q >= lo) and np.all(q <= hi))

    return region


def _build_frame(block):
    family = block.get("family")
    if family is None:
        raise ConfigError("[frame] needs a 'family' key")
    coords = block.get("coords")
    if family in ("b", "bm"):
        return make_b_structure(_require_int(block, "n", "frame"),
                                int(block.get("m", 1)), coord_names=coords)
    if family == "corner":
        return make_corner_structure(_require_int(block, "n", "frame"),
                                     _require_int(block, "k", "frame"),
                                     coord_names=coords)
    if family == "foliation":
        return make_foliation_structure(_require_int(block, "n", "frame"),
                                        _require_int(block, "p", "frame"),
                                        coord_names=coords)
    if family == "elliptic":
        return make_elliptic_structure()
    if family == "vanishing":
        return make_vanishing_structure()
    if family == "custom":
        return _build_custom_frame(block)
    raise ConfigError(f"[frame] unknown family '{family}'")


def _require_int(block, key, name):
    if key not in block:
        raise ConfigError(f"[{name}] missing required key '{key}'")
    return int(block[key])


def _build_custom_frame(block):
    custom = block.get("custom")
    if custom is None:
        raise ConfigError("[frame] family 'custom' needs a [frame.custom] block")
    coords = block.get("coords")
    anchor_texts = custom.get("anchor")
    if not anchor_texts:
        raise ConfigError("[frame.custom] needs an 'anchor' matrix of expressions")
    n = len(anchor_texts[0])
    if coords is None:
        coords = [f"q{i + 1}" for i in range(n)]
    if len(coords) != n:
        raise ConfigError("[frame.custom] anchor width must match the coords list")
    from .expressions import parse_expression

    anchor_exprs = []
    symbols = None
    for row in anchor_texts:
        if len(row) != n:
            raise ConfigError("[frame.custom] anchor rows must have equal length")
        exprs = []
        for text in row:
            expr, syms = parse_expression(text, coords)
            symbols = symbols or tuple(syms)
            exprs.append(expr)
        anchor_exprs.append(exprs)
    structure = {}
    for entry in custom.get("structure", []):
        try:
            i, j, k = int(entry["i"]), int(entry["j"]), int(entry["k"])
            text = entry["expr"]
        except (KeyError, TypeError):
            raise ConfigError("[frame.custom.structure] entries need i, j, k, expr") from None
        expr, _ = parse_expression(text, coords)
        structure[(i, j, k)] = expr
    boundary = [tuple(int(v) for v in triple) for triple in custom.get("boundary", [])]
    chart = Chart("custom", coords, boundary=tuple(b[0] for b in boundary))
    return make_custom_frame(chart, anchor_exprs, structure_entries=structure,
                             boundary_specs=boundary, symbols=symbols)


def _build_metric(block, frame):
    if block is None:
        return None
    entries_text = block.get("entries")
    p = frame.rank_p
    if not entries_text or len(entries_text) != p or any(len(r) != p for r in entries_text):
        raise ConfigError(f"[metric] entries must be a {p} x {p} matrix of expressions")
    entries = [[parse_field(text, frame.chart.coord_names) for text in row]
               for row in entries_text]
    signature = block.get("signature")
    return EMetric(frame, entries, signature=signature)


def _build_gauge(block, frame):
    if block is None:
        return None
    if "algebra" in block:
        algebra = LieAlgebra.by_name(block["algebra"])
    elif "constants" in block:
        algebra = LieAlgebra(np.asarray(block["constants"], dtype=float))
    else:
        raise ConfigError("[gauge] needs 'algebra' (name) or 'constants'")
    texts = block.get("connection")
    p, d = frame.rank_p, algebra.dim_d
    if not texts or len(texts) != p or any(len(r) != d for r in texts):
        raise ConfigError(f"[gauge] connection must be a {p} x {d} matrix of expressions")
    connection = [[parse_field(text, frame.chart.coord_names) for text in row]
                  for row in texts]
    charge = block.get("charge")
    charge0 = None if charge is None else np.asarray(charge, dtype=float)
    if charge0 is not None and charge0.shape != (d,):
        raise ConfigError(f"[gauge] charge must have length {d}")
    return GaugeData(algebra, connection, frame), charge0


def _build_hamiltonian(block, frame, momenta):
    text = block.get("expr")
    if not text:
        raise ConfigError("[hamiltonian] needs an 'expr' key")
    names = phase_variable_names(frame, momenta)
    boundary = {b: True for b in frame.chart.boundary}
    smooth_expr, symbols, log_terms, power_terms = parse_efunction(text, names, boundary)
    smooth = None
    if smooth_expr != 0:
        smooth = ScalarField.from_expr(smooth_expr, symbols)
    power_fields = []
    for b, k, coeff in power_terms:
        import sympy as sp

        coeff_sym = sp.Symbol(names[b], real=True)
        power_fields.append((b, k, ScalarField.from_expr(coeff, (coeff_sym,))))
    fn = EFunction(smooth=smooth, log_terms=log_terms, power_terms=power_fields,
                   nvars=len(names))
    try:
        fn.validate_for_frame(frame)
    except Exception as err:
        raise ConfigError(f"[hamiltonian] expression {text!r}: {err}") from None
    return fn


def _apply_initial(spec, block):
    if block is None:
        if spec.state0 is None and spec.kind == "flow":
            raise ConfigError("custom run needs an [initial] block")
        return spec
    if spec.kind != "flow":
        raise ConfigError("[initial] is only meaningful for flow scenarios")
    if "state" in block:
        state0 = np.asarray(block["state"], dtype=float)
    else:
        parts = []
        for key in ("q", "m", "charge"):
            if key in block:
                parts.append(np.asarray(block[key], dtype=float))
        if not parts:
            raise ConfigError("[initial] needs 'state' or 'q'/'m'(/'charge') arrays")
        state0 = np.concatenate(parts)
    if ("charge" not in block and "state" not in block
            and spec.params.get("charge0") is not None
            and len(state0) + len(spec.params["charge0"]) == len(spec.state_names)):
        state0 = np.concatenate([state0, spec.params["charge0"]])
    if len(state0) != len(spec.state_names):
        raise ConfigError(
            f"[initial] state has length {len(state0)}, expected "
            f"{len(spec.state_names)} ({', '.join(spec.state_names)})")
    spec.state0 = state0
    return spec


def _resolve_integrator(spec, block):
    known = {f.name for f in IntegratorConfig.__dataclass_fields__.values()}
    bad = set(block) - known
    if bad:
        raise ConfigError(f"[integrator] unknown keys: {', '.join(sorted(bad))}")
    try:
        return default_integrator_config(spec, **block)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"[integrator] {err}") from None


def _resolve_outputs(block):
    formats = block.get("formats", ["csv", "json"])
    if isinstance(formats, str):
        formats = [formats]
    for fmt in formats:
        if fmt not in ("csv", "json"):
            raise ConfigError(f"[output] unknown format '{fmt}'")
    plots = block.get("plots", [])
    pairs = []
    for item in plots:
        if isinstance(item, str):
            bits = item.split(":")
        else:
            bits = list(item)
        if len(bits) != 2:
            raise ConfigError(f"[output] plot pair '{item}' must be 'a:b'")
        pairs.append((bits[0], bits[1]))
    return {"formats": list(formats), "plots": pairs, "svg": bool(block.get("svg", False))}


def _normalize(value):
    if isinstance(value, dict):
        return {k: _normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value
