"""Command-line front end.

Subcommands: moments, rate, compare, aux, graphsim, bell, identities.
Every run first echoes one JSON header line with the resolved configuration
and tool version; tabular output goes to ``--out`` as CSV or JSON, written
atomically.  Exit codes: 0 success, 2 usage error, 3 numeric or domain
error, 4 I/O error.
"""

from __future__ import annotations

import csv
import decimal
import functools
import io
import json
import math
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import click

from . import __version__, auxdist, graphsim
from . import asymptotics as asym
from . import moments as mom
from . import weights as wts
from .errors import CpmError

EXIT_NUMERIC = 3
EXIT_IO = 4

HEADER_SCHEMA: dict[str, type] = {
    "tool": str,
    "version": str,
    "command": str,
    "config": dict,
}


def validate_header(obj: object) -> dict:
    """Check a parsed header line against the embedded schema."""
    if not isinstance(obj, dict):
        raise ValueError("header must be a JSON object")
    for key, typ in HEADER_SCHEMA.items():
        if key not in obj:
            raise ValueError(f"header missing key {key!r}")
        if not isinstance(obj[key], typ):
            raise ValueError(f"header key {key!r} must be {typ.__name__}")
    return obj


def _echo_header(command: str, config: dict) -> None:
    click.echo(json.dumps(
        {"tool": "cpm", "version": __version__, "command": command, "config": config},
        sort_keys=True,
    ))


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except CpmError as exc:
            click.echo(f"cpm: error: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)
        except OSError as exc:
            click.echo(f"cpm: i/o error: {exc}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cpm-tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_table(path: str, fieldnames: list[str], rows: list[dict], fmt: str) -> None:
    if fmt == "json":
        _atomic_write(path, json.dumps(rows, indent=2) + "\n")
        return
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _atomic_write(path, buf.getvalue())


def read_table(path: str) -> list[dict]:
    """Parse a table previously written by this tool (CSV or JSON)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("["):
        return json.loads(text)
    return list(csv.DictReader(io.StringIO(text)))


def format_exact(value: Fraction | None) -> str:
    """Ratio rendered as a 30-significant-digit decimal string."""
    if value is None:
        return ""
    with decimal.localcontext() as ctx:
        ctx.prec = 30
        d = decimal.Decimal(value.numerator) / decimal.Decimal(value.denominator)
    return str(d)


def format_log(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.17g}"


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__, prog_name="cpm")
def main() -> None:
    """Compound Poisson moment calculator and experiment driver."""


@main.command()
@click.option("--weights", "weights_spec", required=True,
              help="unit | gaussian:V2 | gamma:m,theta | bernoulli | exponential | logfact | custom:path.json")
@click.option("--k", "k_max", type=int, required=True, help="Largest moment order.")
@click.option("--x", "x_text", required=True, help="Poisson intensity (integer, decimal or ratio).")
@click.option("--exact/--log", "exact", default=True,
              help="Exact rational recurrence (default) or log-space values.")
@click.option("--finite-n", "finite_n", type=int, default=None,
              help="Use the exact finite-population moment for this n instead.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@_guarded
def moments(weights_spec, k_max, x_text, exact, finite_n, out_path, fmt):
    """Tabulate M_0(x) .. M_k(x)."""
    model = wts.from_spec(weights_spec)
    x = Fraction(x_text)
    _echo_header("moments", {
        "weights": weights_spec, "k": k_max, "x": str(x), "exact": exact,
        "finite_n": finite_n, "out": out_path, "format": fmt,
    })
    rows = []
    if exact:
        for k in range(k_max + 1):
            if finite_n is not None:
                mv = mom.finite_n_moment(model, k, finite_n, x)
            else:
                mv = mom.moment_recurrence(model, k, x)
            row = {
                "k": k, "x": str(x), "method": mv.method,
                "value": format_exact(mv.value_exact),
                "log_value": format_log(mv.value_log),
            }
            if fmt == "json":
                # JSON carries the ratio alongside the 30-digit decimal
                row["value_ratio"] = str(mv.value_exact)
            rows.append(row)
    else:
        seq = mom.log_moment_sequence(model, k_max, float(x))
        rows = [
            {"k": k, "x": str(x), "method": "recurrence", "value": "",
             "log_value": format_log(float(seq[k]))}
            for k in range(k_max + 1)
        ]
    _write_table(out_path, ["k", "x", "method", "value", "log_value"], rows, fmt)


@main.command()
@click.option("--weights", "weights_spec", required=True)
@click.option("--chi", type=float, required=True, help="Intensity-to-order ratio x/k.")
@_guarded
def rate(weights_spec, chi):
    """Print the limiting rate: chi, tilt u, psi, fluctuation prefactor."""
    model = wts.from_spec(weights_spec)
    _echo_header("rate", {"weights": weights_spec, "chi": chi})
    rv = asym.rate_function(model, chi)
    click.echo(json.dumps({
        "chi": chi, "u": rv.saddle.u, "psi": rv.psi, "prefactor": rv.prefactor,
        "residual": rv.saddle.residual,
    }, sort_keys=True))


@main.command()
@click.option("--weights", "weights_spec", required=True)
@click.option("--chi", type=float, required=True)
@click.option("--k-max", "k_max", type=int, required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@_guarded
def compare(weights_spec, chi, k_max, out_path, fmt):
    """Exact log-moments against the refined prediction along k, x = chi k."""
    model = wts.from_spec(weights_spec)
    _echo_header("compare", {
        "weights": weights_spec, "chi": chi, "k_max": k_max, "out": out_path, "format": fmt,
    })
    rv = asym.rate_function(model, chi)
    step = 2 if model.parity_even_only else 1
    rows = []
    for k in range(step, k_max + 1, step):
        x = chi * k
        log_exact = mom.log_moment(model, k, x)
        log_pred = asym.refined_prediction(model, k, chi)
        rate_gap = abs((log_exact - k * math.log(x)) / k - rv.psi)
        rows.append({
            "k": k,
            "log_exact": format_log(log_exact),
            "log_predicted": format_log(log_pred),
            "rate_gap": format_log(rate_gap),
        })
    _write_table(out_path, ["k", "log_exact", "log_predicted", "rate_gap"], rows, fmt)


@main.command()
@click.option("--weights", "weights_spec", required=True)
@click.option("--x", "x_val", type=float, default=None, help="Intensity (direct tilt mode).")
@click.option("--u", "u_val", type=float, default=None, help="Tilt parameter (direct mode).")
@click.option("--llt-chi", "llt_chi", type=float, default=None,
              help="Ratio x/k for the local-limit mode; supply --k too.")
@click.option("--k", "k_val", type=int, default=None, help="Order for the local-limit mode.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@_guarded
def aux(weights_spec, x_val, u_val, llt_chi, k_val, out_path, fmt):
    """Emit the tilted law's pmf and a summary line (mean, variance, r_k)."""
    model = wts.from_spec(weights_spec)
    if llt_chi is not None:
        if k_val is None:
            raise click.UsageError("--llt-chi requires --k")
        sol = asym.solve_saddle(model, llt_chi)
        x_eff, u_eff = llt_chi * k_val, sol.u
    else:
        if x_val is None or u_val is None:
            raise click.UsageError("either give --x and --u, or --llt-chi with --k")
        x_eff, u_eff = x_val, u_val
    _echo_header("aux", {
        "weights": weights_spec, "x": x_eff, "u": u_eff, "llt_chi": llt_chi,
        "k": k_val, "out": out_path, "format": fmt,
    })
    dist = auxdist.build_aux(model, x_eff, u_eff)
    rows = [
        {"j": j, "p_j": format_log(math.exp(lp))}
        for j, lp in enumerate(dist.log_pmf)
        if lp > -math.inf
    ]
    _write_table(out_path, ["j", "p_j"], rows, fmt)
    summary = {
        "mean": dist.mean, "variance": dist.variance, "log_G": dist.log_G,
        "support_cap": dist.support_cap,
    }
    if llt_chi is not None:
        summary["r_k"] = auxdist.local_limit_check(model, llt_chi, k_val)
    click.echo(json.dumps(summary, sort_keys=True))


@main.command(name="graphsim")
@click.option("--n", type=int, required=True, help="Vertex count.")
@click.option("--kappa", type=float, required=True, help="Edge intensity: rho = kappa ln n.")
@click.option("--weights", "weights_spec", required=True,
              help="exponential | normal:V2 | gamma:m,theta | bernoulli | unit")
@click.option("--s", "s_text", required=True, help="Deviation levels, comma separated.")
@click.option("--trials", type=int, required=True)
@click.option("--seed", type=int, envvar="CPM_SEED", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@_guarded
def graphsim_cmd(n, kappa, weights_spec, s_text, trials, seed, out_path, fmt):
    """Monte Carlo deviation probabilities of the maximal weighted degree."""
    s_values = tuple(float(part) for part in s_text.split(","))
    _echo_header("graphsim", {
        "n": n, "kappa": kappa, "weights": weights_spec, "s": list(s_values),
        "trials": trials, "seed": seed, "out": out_path, "format": fmt,
    })
    config = graphsim.config_from_kappa(n, kappa, weights_spec, s_values, trials, seed)
    result = graphsim.deviation_experiment(config)
    rows = [
        {
            "n": n,
            "kappa": format_log(kappa),
            "s": format_log(s),
            "p_hat": format_log(p),
            "ci": format_log(ci),
            "bound": format_log(bound),
            "threshold": format_log(result.threshold_s),
            "vacuous_flag": int(vac),
        }
        for s, p, ci, bound, vac in zip(
            result.s_values, result.p_hat, result.ci_half_width, result.bound, result.vacuous
        )
    ]
    _write_table(out_path, ["n", "kappa", "s", "p_hat", "ci", "bound", "threshold", "vacuous_flag"], rows, fmt)


@main.command()
@click.option("--k", type=int, required=True)
@_guarded
def bell(k):
    """Print the k-th Bell number."""
    _echo_header("bell", {"k": k})
    click.echo(str(mom.bell_number(k)))


@main.command()
@_guarded
def identities() -> None:
    """Run the exact combinatorial identity suites and print a pass/fail table."""
    _echo_header("identities", {})
    checks: list[tuple[str, bool]] = []

    ok = all(
        mom.composition_identity_lhs(k, p) == math.comb(k - 1, p - 1)
        for p in range(1, 9)
        for k in range(p, 13)
    )
    checks.append(("composition multinomial sum = C(k-1, p-1), p <= 8", ok))

    exp_model = wts.exponential()
    ok = all(
        math.factorial(k) * mom.exp_identity_sum(k, x)
        == mom.moment_recurrence(exp_model, k, x).value_exact
        for k in range(1, 13)
        for x in (1, 3, Fraction(7, 2))
    )
    checks.append(("k! S_k(x) = exponential-weight moment, k <= 12", ok))

    lf_model = wts.log_factorial()
    ok = all(
        math.factorial(k) * mom.factorial_identity_rising(k, x)
        == mom.moment_recurrence(lf_model, k, x).value_exact
        for k in range(1, 13)
        for x in (1, 3, Fraction(7, 2))
    )
    checks.append(("k! T_k(x) = factorial-weight moment, k <= 12", ok))

    known = {0: 1, 2: 1, 4: 4, 6: 25, 8: 262, 10: 3991}
    ok = all(mom.even_partition_number(t) == v for t, v in known.items())
    checks.append(("even-order recurrence reproduces its reference values", ok))

    width = max(len(name) for name, _ in checks)
    failed = False
    for name, passed in checks:
        click.echo(f"{name:<{width}}  {'PASS' if passed else 'FAIL'}")
        failed = failed or not passed
    if failed:
        sys.exit(EXIT_NUMERIC)


if __name__ == "__main__":
    main()
