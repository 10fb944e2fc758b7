"""Key-value run configuration.

The format is line based: ``[section]`` headers, ``key = value`` entries,
``#`` comments.  Scalar values are bare; expression values (functions of t)
are double-quoted.  Parsing is not fail-fast: every problem is collected with
its line number and reported at once through ConfigError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .bvp import Geometry, annulus, ball, interval
from .errors import BlowupError, ConfigError
from .expansion import BExpansion
from .expressions import ExpressionError, compile_expression
from .nonlinearity import (
    F_RHO0_TAU,
    F_RHO_ETA,
    PURE_POWER,
    Nonlinearity,
    NonlinearityClass,
    make_nonlinearity,
)
from .weights import (
    WeightFunction,
    constant_weight,
    expflat_weight,
    fd_derivative,
    power_weight,
    weight_from_E,
    weight_from_W,
)

VERBS = ("classify", "profile", "predict", "solve", "verify")

# Allowed keys per section; a None schema entry means free-form numeric.
_SCHEMA = {
    "weight": {
        "family": ("power", "constant", "expflat", "expr", "from_E", "from_W"),
        "c0": float, "gamma": float, "c": float, "zeta": float, "nu": float,
        "expr": "expr", "alpha": float, "c1": float, "E": "expr",
        "d0": float, "d1": float, "W": "expr",
        "hint_zeta": float, "hint_tau": float,
    },
    "nonlinearity": {
        "C": float, "rho": float, "B": float, "eps": "expr",
        "class": (PURE_POWER, F_RHO_ETA, F_RHO0_TAU),
        "eta": float, "tau": float, "ell_star": float,
    },
    "expansion": {
        "form": ("first_order", "two_term"),
        "theta": float, "c_tilde": float,
    },
    "problem": {
        "geometry": ("interval", "ball", "annulus"),
        "L": float, "N": int, "R": float, "R0": float, "a": float,
        "closure": ("asymptotic", "dirichlet-M"),
        "eps_b": float, "mesh_level": int, "M0": float,
    },
    "verify": {
        "order": int, "d_cap": float, "tolerance": float,
    },
    "profile": {
        "t_min": float, "t_max": float, "points": int,
    },
}


@dataclass
class RunConfig:
    """Validated configuration: raw entries plus constructed domain objects."""

    sections: dict  # section -> {key: value}
    weight: Optional[WeightFunction] = None
    weight_hints: dict = field(default_factory=dict)
    nonlinearity: Optional[Nonlinearity] = None
    bexp: BExpansion = field(default_factory=BExpansion)
    geometry: Optional[Geometry] = None
    solver: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    profile_grid: dict = field(default_factory=dict)


def _parse_lines(text: str):
    """Raw pass: sections of {key: (value_string, line_no, quoted)}."""
    problems = []
    sections: dict = {}
    seen: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SCHEMA:
                problems.append(f"line {lineno}: unknown section [{current}]")
                current = None
            else:
                sections.setdefault(current, {})
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        if current is None:
            problems.append(f"line {lineno}: entry outside any section")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        quoted = len(value) >= 2 and value[0] == '"' and value[-1] == '"'
        if quoted:
            value = value[1:-1]
        prior = seen.get((current, key))
        if prior is not None:
            problems.append(
                f"line {lineno}: duplicate key '{key}' in [{current}] (first set on line {prior})"
            )
            continue
        seen[(current, key)] = lineno
        sections[current][key] = (value, lineno, quoted)
    return sections, problems


def _typed(section: str, entries: dict, problems: list) -> dict:
    out = {}
    schema = _SCHEMA[section]
    for key, (value, lineno, quoted) in entries.items():
        if key not in schema:
            problems.append(f"line {lineno}: unknown key '{key}' in [{section}]")
            continue
        kind = schema[key]
        try:
            if kind == "expr":
                if not quoted:
                    raise ExpressionError("expression values must be double-quoted", 0)
                out[key] = compile_expression(value)
            elif isinstance(kind, tuple):
                if value not in kind:
                    raise ValueError(f"must be one of {', '.join(kind)}")
                out[key] = value
            elif kind is int:
                out[key] = int(value)
            else:
                out[key] = float(value)
        except ExpressionError as exc:
            problems.append(f"line {lineno}: bad expression for '{key}': {exc}")
        except ValueError as exc:
            problems.append(f"line {lineno}: bad value for '{key}': {exc}")
    return out


def _build_weight(w: dict, problems: list):
    family = w.get("family")
    if family is None:
        problems.append("[weight] needs 'family'")
        return None, {}
    hints = {}
    if "hint_zeta" in w:
        hints["zeta"] = w["hint_zeta"]
    if "hint_tau" in w:
        hints["tau"] = w["hint_tau"]
    nu = w.get("nu", 1.0)
    try:
        if family == "power":
            return power_weight(w.get("c0", 1.0), w.get("gamma", 2.0), nu), hints
        if family == "constant":
            return constant_weight(w.get("c", 1.0), nu), hints
        if family == "expflat":
            return expflat_weight(w.get("zeta", 1.0), nu), hints
        if family == "expr":
            if "expr" not in w:
                problems.append("[weight] family expr needs 'expr'")
                return None, hints
            func = w["expr"]
            return WeightFunction(func, fd_derivative(func), nu, "expr"), hints
        if family == "from_E":
            if "E" not in w:
                problems.append("[weight] family from_E needs 'E'")
                return None, hints
            return (
                weight_from_E(w.get("c0", 1.0), w.get("alpha", 0.0), w["E"], w.get("c1", 0.5)),
                hints,
            )
        if "W" not in w:
            problems.append("[weight] family from_W needs 'W'")
            return None, hints
        return weight_from_W(w.get("d0", 1.0), w.get("d1", 0.5), w["W"]), hints
    except BlowupError as exc:
        problems.append(f"[weight] construction failed: {exc}")
        return None, hints


def _build_nonlinearity(n: dict, problems: list):
    kind = n.get("class", PURE_POWER)
    try:
        klass = NonlinearityClass(
            kind,
            eta=n.get("eta"),
            tau=n.get("tau"),
            ell_star=n.get("ell_star"),
        )
        eps = n.get("eps", lambda u: 0.0)
        return make_nonlinearity(n.get("C", 1.0), n.get("rho", 2.0), n.get("B", 1.0), eps, klass)
    except BlowupError as exc:
        problems.append(f"[nonlinearity] construction failed: {exc}")
        return None


def _build_geometry(p: dict, problems: list):
    kind = p.get("geometry", "interval")
    try:
        if kind == "interval":
            return interval(p.get("L", 1.0))
        if kind == "ball":
            return ball(p.get("N", 3), p.get("R", 1.0))
        return annulus(p.get("N", 3), p.get("R0", 0.5), p.get("R", 1.0))
    except BlowupError as exc:
        problems.append(f"[problem] geometry invalid: {exc}")
        return None


def parse_config(text: str, require: tuple = ()) -> RunConfig:
    """Parse and validate; raises ConfigError listing every problem found.

    ``require`` lists section names that must be present for the chosen verb.
    """
    sections_raw, problems = _parse_lines(text)
    typed = {name: _typed(name, entries, problems) for name, entries in sections_raw.items()}
    for name in require:
        if name not in typed:
            problems.append(f"missing required section [{name}]")
    if problems:
        raise ConfigError(problems)

    cfg = RunConfig(sections=typed)
    if "weight" in typed:
        cfg.weight, cfg.weight_hints = _build_weight(typed["weight"], problems)
    if "nonlinearity" in typed:
        cfg.nonlinearity = _build_nonlinearity(typed["nonlinearity"], problems)
    if "expansion" in typed:
        e = typed["expansion"]
        cfg.bexp = BExpansion(
            theta=e.get("theta", 1.0),
            c_tilde=e.get("c_tilde", 0.0),
            form=e.get("form", "first_order"),
        )
    if "problem" in typed:
        p = typed["problem"]
        cfg.geometry = _build_geometry(p, problems)
        cfg.solver = {
            "a": p.get("a", 0.0),
            "closure": p.get("closure", "asymptotic"),
            "eps_b": p.get("eps_b", 1e-5),
            "mesh_level": p.get("mesh_level", 2),
            "M0": p.get("M0", 100.0),
        }
        if cfg.solver["eps_b"] <= 0:
            problems.append("[problem] eps_b must be positive")
        if not 0 <= cfg.solver["mesh_level"] <= 10:
            problems.append("[problem] mesh_level must lie in 0..10")
    cfg.verify = dict(typed.get("verify", {}))
    if "tolerance" in cfg.verify and not 0 < cfg.verify["tolerance"] < 1:
        problems.append("[verify] tolerance must lie in (0, 1)")
    cfg.profile_grid = dict(typed.get("profile", {}))
    if problems:
        raise ConfigError(problems)
    return cfg
