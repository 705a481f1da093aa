"""Command-line front end: experiments in, CSV/JSON reports and figures out.

Exit codes: 0 on success, 1 on a numeric failure (non-normalizable density,
failed audit, rate row above its bound), 2 on an input error (bad spec
string, malformed JSON, invalid parameters).

Output is deterministic: identical configuration and seed give byte-identical
files. ``STEIN_PAIRS_THREADS`` caps the worker threads used by the n-list
studies; rows are always emitted in increasing n.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from . import plotting
from .bernoulli_laplace import (
    kolmogorov_to_exponential,
    lipschitz_family,
    smooth_distance,
    spectral_measure,
)
from .bounds import PairStatistics, theorem_1_1, theorem_1_1_best, theorem_1_2, theorem_3_1
from .curie_weiss import (
    RateRow,
    RateStudy,
    SpinModel,
    exact_magnetization_law,
    glauber_sampler,
    verify_lemma_5_1,
)
from .limit_law import HypothesisError, NotNormalizableError, certify_hypotheses, law_from_spec
from .numerics import kolmogorov_distance
from .stein import TestFunction, audit_bounds, solve, solve_indicator

EXIT_NUMERIC = 1
EXIT_INPUT = 2


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _write_lines(out, lines):
    text = "\n".join(lines) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def _write_json(out, doc):
    text = json.dumps(doc, indent=2)
    if out is None:
        click.echo(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text + "\n")


def _common(fn):
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None,
                      help="Output file; stdout when omitted.")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                      default="csv", show_default=True, help="Report format.")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True,
                      help="Master RNG seed.")(fn)
    fn = click.option("--tol", type=float, default=1e-10, show_default=True,
                      help="Quadrature tolerance.")(fn)
    return fn


def _parse_ns(text: str) -> list[int]:
    try:
        ns = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        _fail(EXIT_INPUT, f"invalid n-list: {text!r}")
    if not ns:
        _fail(EXIT_INPUT, "n-list must be nonempty")
    if any(n <= 0 for n in ns):
        _fail(EXIT_INPUT, "every n must be a positive integer")
    return sorted(set(ns))


def _workers(n_tasks: int) -> int:
    cap = os.environ.get("STEIN_PAIRS_THREADS")
    if cap is not None:
        try:
            cap_n = int(cap)
        except ValueError:
            _fail(EXIT_INPUT, f"STEIN_PAIRS_THREADS must be an integer, got {cap!r}")
        if cap_n < 1:
            _fail(EXIT_INPUT, "STEIN_PAIRS_THREADS must be >= 1")
        return min(cap_n, n_tasks)
    return min(4, n_tasks)


def _fan_out(fn, ns):
    """Map fn over n values with a thread pool; results ordered by n."""
    with ThreadPoolExecutor(max_workers=_workers(len(ns))) as pool:
        return list(pool.map(fn, ns))


def _build_law(spec: str, c0, tol):
    try:
        return law_from_spec(spec, c0=c0, tol=tol)
    except NotNormalizableError as exc:
        _fail(EXIT_NUMERIC, str(exc))
    except HypothesisError as exc:
        _fail(EXIT_NUMERIC, str(exc))
    except ValueError as exc:
        _fail(EXIT_INPUT, str(exc))


def _test_function(spec: str) -> TestFunction:
    if spec == "identity":
        return TestFunction(
            h=lambda w: np.asarray(w, dtype=float),
            h_prime=lambda w: np.ones_like(np.asarray(w, dtype=float)),
            lip_norm=1.0, kind="lipschitz", name="identity",
        )
    if spec == "const":
        return TestFunction(
            h=lambda w: np.ones_like(np.asarray(w, dtype=float)),
            h_prime=lambda w: np.zeros_like(np.asarray(w, dtype=float)),
            sup_norm=1.0, lip_norm=0.0, kind="bounded", name="const",
        )
    if spec == "cos":
        return TestFunction(
            h=np.cos,
            h_prime=lambda w: -np.sin(np.asarray(w, dtype=float)),
            sup_norm=1.0, lip_norm=1.0, kind="lipschitz", name="cos",
        )
    if spec.startswith("indicator:"):
        try:
            z = float(spec.split(":", 1)[1])
        except ValueError:
            _fail(EXIT_INPUT, f"invalid indicator threshold in {spec!r}")
        return TestFunction.indicator(z)
    _fail(EXIT_INPUT,
          f"unknown test function {spec!r} "
          "(expected identity, const, cos, or indicator:<z>)")


@click.group()
@click.version_option(package_name="stein-pairs", prog_name="stein-pairs")
def main():
    """Exchangeable-pair Stein toolkit: limit laws, Stein solutions,
    Berry-Esseen bound evaluation, and exact model oracles."""


@main.command("law")
@click.option("--spec", required=True,
              help="Law preset: gaussian | quartic:<n> | gennorm:<a>:<b> | "
                   "exponential:<l> | poly:<c3>.")
@click.option("--c0", type=float, default=None, help="Override the scale constant c0.")
@click.option("--points", type=int, default=501, show_default=True,
              help="Number of table rows.")
@click.option("--plot", type=click.Path(dir_okay=False), default=None,
              help="Also render a density/CDF figure to this file.")
@_common
def cmd_law(spec, c0, points, plot, out, fmt, seed, tol):
    """Tabulate the density and CDF of a constructed limit law."""
    law = _build_law(spec, c0, tol)
    ts = np.linspace(law.lo, law.hi, points)
    ps = law.p(ts)
    fs = law.cdf(ts)
    if fmt == "csv":
        lines = [f"# law={law.name} c0={_fmt(law.c0)} c1={_fmt(law.c1)}", "t,p,F"]
        lines += [f"{_fmt(t)},{_fmt(p)},{_fmt(F)}" for t, p, F in zip(ts, ps, fs)]
        _write_lines(out, lines)
    else:
        _write_json(out, {
            "law": law.name,
            "c0": law.c0,
            "c1": law.c1,
            "rows": [{"t": float(t), "p": float(p), "F": float(F)}
                     for t, p, F in zip(ts, ps, fs)],
        })
    if plot is not None:
        plotting.law_plot(law, plot)


@main.command("stein")
@click.option("--spec", required=True, help="Law preset (see `law --help`).")
@click.option("--h", "h_spec", default="identity", show_default=True,
              help="Test function: identity | const | cos | indicator:<z>.")
@click.option("--points", type=int, default=501, show_default=True)
@click.option("--audit-out", type=click.Path(dir_okay=False), default=None,
              help="Write the JSON bound audit here (stdout when omitted).")
@_common
def cmd_stein(spec, h_spec, points, audit_out, out, fmt, seed, tol):
    """Solve the Stein equation for one test function and audit the
    solution against the certified sup-norm bounds."""
    law = _build_law(spec, None, tol)
    h = _test_function(h_spec)
    try:
        report = certify_hypotheses(law)
        if h.kind == "indicator":
            solution = solve_indicator(law, h.z)
        else:
            solution = solve(law, h)
        audit = audit_bounds(law, h, report, law.default_grid())
    except HypothesisError as exc:
        _write_json(audit_out, {"passed": False, "error": str(exc)})
        sys.exit(EXIT_INPUT)

    ws = np.linspace(law.lo, law.hi, points)
    if fmt == "csv":
        lines = ["w,f,f_prime,residual"]
        lines += [
            f"{_fmt(w)},{_fmt(solution.f(w))},{_fmt(solution.f_prime(w))},"
            f"{_fmt(solution.residual(w))}"
            for w in ws
        ]
        _write_lines(out, lines)
    else:
        _write_json(out, {
            "law": law.name,
            "h": h.name,
            "rows": [{"w": float(w), "f": float(solution.f(w)),
                      "f_prime": float(solution.f_prime(w)),
                      "residual": float(solution.residual(w))} for w in ws],
        })
    _write_json(audit_out, json.loads(audit.to_json()))
    if not audit.passed:
        sys.exit(EXIT_NUMERIC)


@main.group("cw")
def cmd_curie_weiss():
    """Curie-Weiss magnetization at the critical temperature."""


@cmd_curie_weiss.command("verify")
@click.option("--n", "n_list", required=True, help="Comma-separated spin counts.")
@_common
def cw_verify(n_list, out, fmt, seed, tol):
    """Check the exact drift/variance deviations and moment bounds."""
    ns = _parse_ns(n_list)
    reports = _fan_out(lambda n: verify_lemma_5_1(SpinModel(n)), ns)
    if fmt == "csv":
        lines = ["n,drift_dev,quad_dev,e_abs_w3,e_w6,pass"]
        lines += [
            f"{r.n},{_fmt(r.drift_dev)},{_fmt(r.quad_dev)},"
            f"{_fmt(r.e_abs_w3)},{_fmt(r.e_w6)},{str(r.passed).lower()}"
            for r in reports
        ]
        _write_lines(out, lines)
    else:
        _write_json(out, [
            {"n": r.n, "drift_dev": r.drift_dev, "quad_dev": r.quad_dev,
             "e_abs_w3": r.e_abs_w3, "e_w6": r.e_w6, "pass": r.passed}
            for r in reports
        ])
    if not all(r.passed for r in reports):
        sys.exit(EXIT_NUMERIC)


@cmd_curie_weiss.command("rate")
@click.option("--n", "n_list", required=True, help="Comma-separated spin counts.")
@click.option("--plot", type=click.Path(dir_okay=False), default=None,
              help="Render a log-log KS-vs-n figure to this file.")
@_common
def cw_rate(n_list, plot, out, fmt, seed, tol):
    """Exact Kolmogorov distance to the quartic limit for each n."""
    ns = _parse_ns(n_list)
    law = law_from_spec("quartic:1", tol=tol)

    def one(n):
        exact = exact_magnetization_law(SpinModel(n)).as_discrete_law()
        ks = kolmogorov_distance(exact, law.cdf)
        return RateRow(n=n, ks=ks, ks_sqrt_n=ks * np.sqrt(n))

    rows = _fan_out(one, ns)
    slope = None
    if len(rows) >= 2:
        slope = float(np.polyfit(np.log([r.n for r in rows]),
                                 np.log([r.ks for r in rows]), 1)[0])
    study = RateStudy(rows=tuple(rows), slope=slope)
    if fmt == "csv":
        lines = [f"# slope={'' if slope is None else _fmt(slope)}"]
        lines += list(study.csv_rows())
        _write_lines(out, lines)
    else:
        _write_json(out, {
            "slope": slope,
            "rows": [{"n": r.n, "ks": r.ks, "ks_sqrt_n": r.ks_sqrt_n}
                     for r in rows],
        })
    if plot is not None:
        plotting.rate_plot(rows, slope, plot)


@cmd_curie_weiss.command("sample")
@click.option("--n", type=int, required=True, help="Spin count.")
@click.option("--steps", type=int, default=1, show_default=True,
              help="Glauber steps per chain.")
@click.option("--chains", type=int, default=1, show_default=True)
@click.option("--burn-in", type=int, default=0, show_default=True)
@click.option("--init", type=click.Choice(["stationary", "up"]),
              default="stationary", show_default=True)
@_common
def cw_sample(n, steps, chains, burn_in, init, out, fmt, seed, tol):
    """Draw (W, W') exchangeable pairs from the Glauber dynamics."""
    if n < 2:
        _fail(EXIT_INPUT, "n must be at least 2")
    if steps <= burn_in or chains < 1:
        _fail(EXIT_INPUT, "need steps > burn_in and chains >= 1")
    W, Wp = glauber_sampler(SpinModel(n), steps=steps, seed=seed,
                            burn_in=burn_in, chains=chains, init=init)
    if fmt == "csv":
        lines = ["w,w_prime"]
        lines += [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(W, Wp)]
        _write_lines(out, lines)
    else:
        _write_json(out, {"w": W.tolist(), "w_prime": Wp.tolist()})


@main.group("bl")
def cmd_bernoulli_laplace():
    """Bernoulli-Laplace urn: spectral measure and exponential limit."""


@cmd_bernoulli_laplace.command("spectrum")
@click.option("--n", type=int, required=True, help="Urn size (n of 2n balls).")
@_common
def bl_spectrum(n, out, fmt, seed, tol):
    """Exact eigenvalues, spectral weights, and the rescaled support points."""
    if n < 1:
        _fail(EXIT_INPUT, "n must be a positive integer")
    measure = spectral_measure(n)
    if fmt == "csv":
        _write_lines(out, list(measure.csv_rows()))
    else:
        _write_json(out, [
            {"n": n, "i": i, "lambda": float(measure.lam[i]),
             "pi": float(measure.pi[i]), "mu": float(measure.mu[i])}
            for i in range(n + 1)
        ])


@cmd_bernoulli_laplace.command("verify")
@click.option("--n", "n_list", required=True, help="Comma-separated urn sizes.")
@_common
def bl_verify(n_list, out, fmt, seed, tol):
    """Smooth-function and Kolmogorov distances to the exponential limit
    against the 12/sqrt(n) bound."""
    ns = _parse_ns(n_list)
    family = lipschitz_family()

    def one(n):
        bound = 12.0 * n**-0.5
        worst = max(smooth_distance(n, h) / h.lip_norm for h in family)
        return n, bound, worst, kolmogorov_to_exponential(n)

    rows = _fan_out(one, ns)
    if fmt == "csv":
        lines = ["n,bound_12_over_sqrt_n,max_family_distance,ks_to_exp"]
        lines += [f"{n},{_fmt(bound)},{_fmt(worst)},{_fmt(ks)}"
                  for n, bound, worst, ks in rows]
        _write_lines(out, lines)
    else:
        _write_json(out, [
            {"n": n, "bound_12_over_sqrt_n": bound,
             "max_family_distance": worst, "ks_to_exp": ks}
            for n, bound, worst, ks in rows
        ])
    if any(worst > bound for _, bound, worst, _ in rows):
        sys.exit(EXIT_NUMERIC)


@main.command("bounds")
@click.option("--stats", "stats_path", required=True,
              type=click.Path(exists=False, dir_okay=False),
              help="PairStatistics JSON file.")
@click.option("--theorem", "which",
              type=click.Choice(["smooth-i", "smooth-ii", "smooth-best",
                                 "kolmogorov", "exponential-smooth",
                                 "exponential-kolmogorov"]),
              default="exponential-smooth", show_default=True,
              help="Which bound evaluator to apply.")
@click.option("--law", "law_spec", default=None,
              help="Law preset; required for the non-exponential evaluators.")
@_common
def cmd_bounds(stats_path, which, law_spec, out, fmt, seed, tol):
    """Evaluate a Berry-Esseen bound formula on serialized pair statistics."""
    try:
        with open(stats_path) as fh:
            text = fh.read()
    except OSError as exc:
        _fail(EXIT_INPUT, f"cannot read stats file: {exc}")
    try:
        stats = PairStatistics.from_json(text)
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        _fail(EXIT_INPUT, f"invalid PairStatistics JSON: {exc}")

    try:
        if which.startswith("exponential"):
            variant = which.split("-", 1)[1]
            value = theorem_3_1(stats, variant=variant)
        else:
            if law_spec is None:
                _fail(EXIT_INPUT, f"--law is required for --theorem {which}")
            law = _build_law(law_spec, None, tol)
            report = certify_hypotheses(law)
            if which == "smooth-i":
                value = theorem_1_1(stats, law, report, variant="i")
            elif which == "smooth-ii":
                value = theorem_1_1(stats, law, report, variant="ii")
            elif which == "smooth-best":
                value = theorem_1_1_best(stats, law, report)
            else:
                value = theorem_1_2(stats, law, report)
    except ValueError as exc:
        _fail(EXIT_NUMERIC, str(exc))
    _write_json(out, json.loads(value.to_json()))


if __name__ == "__main__":
    main()
