"""Command-line front end.

Verbs: classify | profile | predict | solve | verify, each reading a
key-value config file and writing delimited text artifacts (plus an SVG chart
for verify) into the output directory.

Exit codes: 0 success, 1 config error, 2 precondition violation,
3 solver nonconvergence, 4 verification failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bvp import (  # noqa: E402
    RadialProblem,
    eigenvalue_first_dirichlet,
    solve_large_solution,
    verify_first_order,
    verify_second_order,
)
from .config import RunConfig, parse_config  # noqa: E402
from .errors import (  # noqa: E402
    BlowupError,
    ConfigError,
    InconclusiveError,
    NonconvergenceError,
    UnsupportedGeometryError,
)
from .expansion import predict  # noqa: E402
from .limits import geometric_grid  # noqa: E402
from .profiles import HProfile, lemma_aux_report, profile_table  # noqa: E402
from .weights import classify_weight  # noqa: E402

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PRECONDITION = 2
EXIT_NONCONVERGENCE = 3
EXIT_VERIFY_FAILED = 4

TOL_ENV_VAR = "BLOWUP_DEFAULT_TOL"

_REQUIRED = {
    "classify": ("weight",),
    "profile": ("weight", "nonlinearity"),
    "predict": ("weight", "nonlinearity"),
    "solve": ("weight", "nonlinearity", "problem"),
    "verify": ("weight", "nonlinearity", "problem"),
}


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _default_tolerance(cfg: RunConfig) -> float:
    if "tolerance" in cfg.verify:
        return cfg.verify["tolerance"]
    env = os.environ.get(TOL_ENV_VAR)
    if env is not None:
        try:
            tol = float(env)
        except ValueError as exc:
            raise ConfigError([f"{TOL_ENV_VAR}={env!r} is not a number"]) from exc
        if not 0 < tol < 1:
            raise ConfigError([f"{TOL_ENV_VAR} must lie in (0, 1)"])
        return tol
    return 0.02


def _classification(cfg: RunConfig):
    return classify_weight(cfg.weight, **cfg.weight_hints)


def _limit_field(est) -> float:
    return float("nan") if est is None else est.value


def run_classify(cfg: RunConfig, out: Path) -> int:
    rep = _classification(cfg)
    lines = [
        f"subclass: {rep.subclass}",
        f"ell0 = lim K/k = {rep.ell0.value:.12g} (converged: {rep.ell0.converged})",
        f"ell1 = lim (K/k)' = {rep.ell1.value:.12g} (converged: {rep.ell1.converged})",
    ]
    if rep.alpha is not None:
        lines.append(f"alpha = 1/ell1 - 1 = {rep.alpha:.12g}")
    if rep.Lstar is not None:
        lines.append(f"Lstar = lim t^-zeta (K/k)' = {rep.Lstar.value:.12g} at zeta = {rep.zeta}")
    if rep.Lsharp is not None:
        lines.append(f"Lsharp = lim (-ln t)^tau ((K/k)' - ell1) = {rep.Lsharp.value:.12g} at tau = {rep.tau}")
    (out / "classify.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_csv(
        out / "classify.csv",
        ["subclass", "ell0", "ell1", "alpha", "zeta", "Lstar", "tau", "Lsharp"],
        [[
            rep.subclass,
            rep.ell0.value,
            rep.ell1.value,
            float("nan") if rep.alpha is None else rep.alpha,
            float("nan") if rep.zeta is None else rep.zeta,
            _limit_field(rep.Lstar),
            float("nan") if rep.tau is None else rep.tau,
            _limit_field(rep.Lsharp),
        ]],
    )
    return EXIT_OK


def run_profile(cfg: RunConfig, out: Path) -> int:
    g = cfg.profile_grid
    builder = HProfile(cfg.nonlinearity, cfg.weight)
    t_hi = g.get("t_max", min(0.25, 0.9 * builder.t_max))
    t_lo = g.get("t_min", t_hi * 1e-3)
    n = g.get("points", 20)
    ratio = (t_lo / t_hi) ** (1.0 / max(n - 1, 1))
    ts = geometric_grid(t_hi, ratio, n)
    rows = profile_table(cfg.nonlinearity, cfg.weight, ts)
    _write_csv(out / "profile.csv", ["t", "h", "h_prime", "h_second", "phi"], rows)
    rep = _classification(cfg)
    report = lemma_aux_report(cfg.nonlinearity, cfg.weight, rep)
    _write_csv(
        out / "profile_limits.csv",
        ["name", "estimate", "target", "tol", "passed"],
        [[r.name, r.estimate.value, r.target, r.tol, str(r.passed)] for r in report],
    )
    return EXIT_OK


_FORMULAS = {
    "xi0": "xi0 = ((2 + ell1*rho)/(2 + rho))^(1/rho)",
    "phi_leading": "phi coefficient = (2*(2 + ell1*rho)/rho^2)^(1/rho)",
    "algebraic": "chi = (Lstar/2)*H(theta - zeta) - (c_tilde/rho)*H(zeta - theta)"
    " [- (ell_star/rho)*(rho*zeta*Lstar/(2*(1+zeta)))^tau1*(1/(rho+2) + ln xi0) in the modulated sub-case]",
    "logarithmic": "chi_tilde = Lsharp/(2 + rho*ell1)"
    " [- (ell_star/rho)*(rho*ell1/2)^tau*(2*(1-ell1)/((rho+2)*(rho*ell1+2)) + ln xi0) in the modulated sub-case]",
}


def run_predict(cfg: RunConfig, out: Path) -> int:
    rep = _classification(cfg)
    pred = predict(cfg.nonlinearity, rep, cfg.bexp)
    lines = [
        f"case: {pred.case_tag}",
        f"order: {pred.order}",
        f"leading coefficient [{pred.case_tag}] {_FORMULAS['xi0']} = {pred.leading:.12g}",
        f"phi form [{pred.case_tag}] {_FORMULAS['phi_leading']} = {pred.phi_leading:.12g}",
    ]
    if pred.order == 2:
        if pred.rate_kind == "algebraic":
            lines.append(f"rate: d^varpi with varpi = min(theta, zeta) = {pred.rate:.12g}")
            lines.append(
                f"second coefficient [{pred.case_tag}] {_FORMULAS['algebraic']} = {pred.second_coeff:.12g}"
            )
        else:
            lines.append(f"rate: (-ln d)^-tau with tau = {pred.rate:.12g}")
            lines.append(
                f"second coefficient [{pred.case_tag}] {_FORMULAS['logarithmic']} = {pred.second_coeff:.12g}"
            )
    for key in sorted(pred.inputs_echo):
        lines.append(f"input {key} = {pred.inputs_echo[key]}")
    (out / "predict.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_csv(
        out / "predict.csv",
        ["case_tag", "order", "leading", "phi_leading", "rate_kind", "rate", "second_coeff"],
        [[
            pred.case_tag,
            pred.order,
            pred.leading,
            pred.phi_leading,
            pred.rate_kind or "",
            float("nan") if pred.rate is None else pred.rate,
            float("nan") if pred.second_coeff is None else pred.second_coeff,
        ]],
    )
    return EXIT_OK


def _solve(cfg: RunConfig):
    rep = _classification(cfg)
    pred = predict(cfg.nonlinearity, rep, cfg.bexp)
    builder = HProfile(cfg.nonlinearity, cfg.weight)
    geometry = cfg.geometry
    k = cfg.weight
    bexp = cfg.bexp

    def b(x: float) -> float:
        d = geometry.distance(x)
        kv = k.func(d)
        if bexp.form == "two_term":
            return kv * kv * (1.0 + bexp.c_tilde * d ** bexp.theta)
        return kv * kv

    problem = RadialProblem(geometry=geometry, a=cfg.solver["a"], b=b, f=cfg.nonlinearity)

    def boundary_value(d: float) -> float:
        second = pred.second_term(d) if pred.order == 2 else 0.0
        return pred.leading * builder.h(d) * (1.0 + second)

    sol = solve_large_solution(
        problem,
        mesh_level=cfg.solver["mesh_level"],
        closure=cfg.solver["closure"],
        eps_b=cfg.solver["eps_b"],
        boundary_value=boundary_value,
        M0=cfg.solver["M0"],
    )
    return rep, pred, builder, sol


def _solution_rows(pred, builder, sol):
    rows = []
    for x, d, u in zip(sol.x, sol.d, sol.u):
        try:
            href = pred.leading * builder.h(float(d))
            ratio = float(u) / href
        except BlowupError:
            href, ratio = float("nan"), float("nan")
        R = float("nan")
        if pred.order == 2 and math.isfinite(ratio) and 0 < d < 1:
            if pred.rate_kind == "algebraic":
                R = (ratio - 1.0) * d ** -pred.rate
            else:
                R = (ratio - 1.0) * (-math.log(d)) ** pred.rate
        rows.append([x, d, u, href, ratio, R])
    return rows


def run_solve(cfg: RunConfig, out: Path) -> int:
    rep, pred, builder, sol = _solve(cfg)
    _write_csv(out / "solution.csv", ["x", "d", "u", "leading_profile", "ratio", "R"], _solution_rows(pred, builder, sol))
    hist = sol.diagnostics["residual_history"]
    lam = sol.diagnostics.get("lambda_first")
    lines = [
        f"closure: {sol.closure}",
        f"eps_b: {sol.eps_b}",
        f"mesh_level: {sol.mesh_level}",
        f"nodes: {len(sol.x)}",
        f"newton iterations: {len(hist)}",
        f"final scaled residual: {hist[-1]:.6g}",
        "admissibility: b > 0 in the interior, so every real a is admissible"
        + (f"; first Dirichlet eigenvalue of the geometry = {lam:.12g}" if lam is not None else ""),
    ]
    (out / "diagnostics.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


def run_verify(cfg: RunConfig, out: Path) -> int:
    tol = _default_tolerance(cfg)
    rep, pred, builder, sol = _solve(cfg)
    d_cap = cfg.verify.get("d_cap")
    order = cfg.verify.get("order", pred.order)

    est1 = verify_first_order(sol, pred, builder, d_cap=d_cap)
    ok1 = est1.converged and abs(est1.value - 1.0) <= tol
    lines = [
        f"first-order ratio u/(xi0*h(d)) [case {pred.case_tag}; {_FORMULAS['xi0']}]:"
        f" limit = {est1.value:.12g}, stderr = {est1.stderr:.3g},"
        f" target = 1 +/- {tol:g} -> {'PASS' if ok1 else 'FAIL'}"
    ]
    ok2 = True
    if order >= 2 and pred.order == 2:
        formula = _FORMULAS["algebraic" if pred.rate_kind == "algebraic" else "logarithmic"]
        tol2 = max(0.1 * max(1.0, abs(pred.second_coeff)), tol)
        try:
            coeff, est2 = verify_second_order(sol, pred, builder, d_cap=d_cap)
            ok2 = est2.converged and abs(coeff - pred.second_coeff) <= tol2
            lines.append(
                f"second-order coefficient [case {pred.case_tag}; {formula}]:"
                f" fitted = {coeff:.12g}, predicted = {pred.second_coeff:.12g},"
                f" tolerance = {tol2:g} -> {'PASS' if ok2 else 'FAIL'}"
            )
        except InconclusiveError as exc:
            ok2 = False
            lines.append(f"second-order coefficient [case {pred.case_tag}]: INCONCLUSIVE ({exc})")
    (out / "verify.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # Plot data: two-column series plus a self-contained SVG chart.
    series = []
    for d, u in zip(sol.skeleton_d, sol.skeleton_u):
        try:
            series.append((float(d), float(u) / (pred.leading * builder.h(float(d)))))
        except BlowupError:
            continue
    _write_csv(out / "ratio_vs_d.dat", ["d", "ratio"], [[d, r] for d, r in series])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx([d for d, _ in series], [r for _, r in series], marker="o", label="u / (xi0 h(d))")
    ax.axhline(1.0, linestyle="--", linewidth=0.8, label="target")
    ax.set_xlabel("distance to boundary d")
    ax.set_ylabel("ratio")
    ax.set_title(f"boundary ratio, case {pred.case_tag}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "ratio_vs_d.svg")
    plt.close(fig)
    return EXIT_OK if (ok1 and ok2) else EXIT_VERIFY_FAILED


_RUNNERS = {
    "classify": run_classify,
    "profile": run_profile,
    "predict": run_predict,
    "solve": run_solve,
    "verify": run_verify,
}


def _parse_sweep(spec: str):
    if "=" not in spec:
        raise ConfigError([f"--sweep needs 'section.key=v1,v2', got {spec!r}"])
    target, values = spec.split("=", 1)
    if "." not in target:
        raise ConfigError([f"--sweep target must be 'section.key', got {target!r}"])
    section, key = target.split(".", 1)
    vals = [v.strip() for v in values.split(",") if v.strip()]
    if not vals:
        raise ConfigError([f"--sweep {spec!r} lists no values"])
    return section.strip(), key.strip(), vals


def _override_text(text: str, section: str, key: str, value: str) -> str:
    """Replace key in section (or append it) at the raw-text level."""
    out = []
    in_section = False
    replaced = False
    appended = False
    for line in text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            if in_section and not replaced and not appended:
                out.append(f"{key} = {value}")
                appended = True
            in_section = stripped[1:-1].strip() == section
            out.append(line)
            continue
        if in_section and "=" in stripped and stripped.split("=", 1)[0].strip() == key:
            out.append(f"{key} = {value}")
            replaced = True
            continue
        out.append(line)
    if not replaced and not appended:
        if in_section:
            out.append(f"{key} = {value}")
        else:
            out.extend([f"[{section}]", f"{key} = {value}"])
    return "\n".join(out) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="blowup",
        description="Boundary blow-up asymptotics: classification, profiles, "
        "expansion predictions, and numerical verification.",
    )
    parser.add_argument("verb", choices=sorted(_RUNNERS))
    parser.add_argument("--config", required=True, help="path to the key-value config file")
    parser.add_argument("--out", required=True, help="output directory (created if missing)")
    parser.add_argument(
        "--sweep",
        default=None,
        help="section.key=v1,v2,... run once per value in a subdirectory",
    )
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    runs = [("", text)]
    if args.sweep is not None:
        try:
            section, key, vals = _parse_sweep(args.sweep)
        except ConfigError as exc:
            for p in exc.problems:
                print(f"config error: {p}", file=sys.stderr)
            return EXIT_CONFIG
        runs = [
            (f"{section}.{key}={v}", _override_text(text, section, key, v)) for v in vals
        ]

    worst = EXIT_OK
    for tag, run_text in runs:
        out = Path(args.out)
        if tag:
            out = out / tag.replace("=", "_").replace(".", "_")
        out.mkdir(parents=True, exist_ok=True)
        try:
            cfg = parse_config(run_text, require=_REQUIRED[args.verb])
            code = _RUNNERS[args.verb](cfg, out)
        except ConfigError as exc:
            for p in exc.problems:
                print(f"config error: {p}", file=sys.stderr)
            code = EXIT_CONFIG
        except NonconvergenceError as exc:
            print(f"nonconvergence: {exc}", file=sys.stderr)
            code = EXIT_NONCONVERGENCE
        except (UnsupportedGeometryError, InconclusiveError, BlowupError) as exc:
            print(f"precondition: {exc}", file=sys.stderr)
            code = EXIT_PRECONDITION
        if tag:
            print(f"[{tag}] -> exit {code}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
