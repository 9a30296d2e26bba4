"""Command-line surface.

Exit codes: 0 success, 1 check failure, 2 usage or parse error, 3 budget
exhausted.  All emitted JSON/CSV is a pure function of the configuration
(including the seed), so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import dimension, expansion, svg as svgmod, verify as verifymod
from .config import RunConfig
from .errors import BudgetExceededError, DomainError
from .gaussian import GaussianInt, parse_exact_complex


class CheckFailure(Exception):
    """A verification-style command found a failing check."""


def engine_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BudgetExceededError as exc:
            click.echo(f"budget exhausted: {exc}", err=True)
            sys.exit(3)
        except CheckFailure as exc:
            click.echo(f"check failure: {exc}", err=True)
            sys.exit(1)
        except (DomainError, ZeroDivisionError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _emit(ctx: click.Context, payload: dict, rows: list[dict] | None = None) -> None:
    """Write the JSON or CSV form of a result to --out or stdout."""
    fmt = ctx.obj["format"]
    out: Path | None = ctx.obj["out"]
    if fmt == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        rows = rows if rows is not None else [payload]
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _parse_alphabet(spec: str) -> dimension.DigitSet:
    """Alphabet specs: inline JSON pairs, @file of pairs, or annulus:LO:HI."""
    if spec.startswith("@"):
        data = json.loads(Path(spec[1:]).read_text())
        return dimension.DigitSet.from_branches(GaussianInt.from_pair(p) for p in data)
    if spec.startswith("annulus:"):
        try:
            _, lo, hi = spec.split(":")
            return dimension.DigitSet.annulus(int(lo), int(hi) + 1)
        except ValueError as exc:
            raise DomainError(f"bad annulus spec {spec!r}; use annulus:LO:HI") from exc
    try:
        data = json.loads(spec)
    except json.JSONDecodeError as exc:
        raise DomainError(f"bad alphabet spec {spec!r}") from exc
    return dimension.DigitSet.from_branches(GaussianInt.from_pair(p) for p in data)


def _digit_sequence_source(source: str, horizon: int) -> np.ndarray:
    if source == "lattice":
        return np.sqrt(dimension.DigitSet.lattice_with_zero().norm_sq_array(horizon))
    if source == "d2":
        return np.sqrt(dimension.DigitSet.d2().norm_sq_array(horizon))
    if source.startswith("power:"):
        p = float(source.split(":", 1)[1])
        return np.arange(1, horizon + 1, dtype=np.float64) ** p
    raise DomainError(f"unknown tau source {source!r}; use lattice, d2 or power:<p>")


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", type=click.Path(), default=None, help="Write output here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
def cli(ctx, config_path, seed, out, fmt):
    """Hurwitz continued fractions, their branch system and dimension tools."""
    try:
        config = RunConfig.from_file(config_path) if config_path else RunConfig()
        config = config.override(seed=seed)
    except DomainError as exc:
        raise click.UsageError(str(exc)) from exc
    ctx.obj = {"config": config, "out": Path(out) if out else None, "format": fmt}


@cli.command()
@click.argument("z")
@click.option("--max-digits", type=int, default=None)
@click.pass_context
@engine_errors
def expand(ctx, z, max_digits):
    """Hurwitz digit expansion of an exact point, e.g. "2/5+0/1 i"."""
    config: RunConfig = ctx.obj["config"]
    point = parse_exact_complex(z)
    result = expansion.expand(point, max_digits or config.max_digits)
    roundtrip = expansion.evaluate(result.digits) == point if result.terminated else False
    click.echo(f"digits: {result.digits}", err=True)
    click.echo(f"terminated: {result.terminated}  roundtrip: {roundtrip}", err=True)
    payload = {
        "input": z,
        "digits": [d.to_pair() for d in result.digits],
        "display": str(result.digits),
        "terminated": result.terminated,
        "roundtrip_ok": roundtrip,
    }
    rows = [
        {"index": i + 1, "re": d.re, "im": d.im} for i, d in enumerate(result.digits)
    ]
    _emit(ctx, payload, rows)


@cli.command("eval")
@click.argument("word")
@click.pass_context
@engine_errors
def eval_word(ctx, word):
    """Evaluate a digit word given as JSON pairs, e.g. "[[3,0],[-2,0]]"."""
    if word.startswith("@"):
        text = Path(word[1:]).read_text()
    else:
        text = word
    try:
        digits = expansion.DigitWord.from_json(text)
    except (ValueError, KeyError) as exc:
        raise DomainError(f"bad word {word!r}: {exc}") from exc
    value = expansion.evaluate(digits)
    click.echo(f"value: {value}", err=True)
    payload = {
        "word": [d.to_pair() for d in digits],
        "re": str(value.re),
        "im": str(value.im),
        "display": str(value),
    }
    _emit(ctx, payload)


@cli.command()
@click.argument("k", type=int)
@click.argument("l", type=int)
@click.pass_context
@engine_errors
def classify(ctx, k, l):
    """Classify a digit as invalid, exceptional or regular."""
    digit = GaussianInt(k, l)
    cls = expansion.classify_digit(digit)
    click.echo(f"({k},{l}): {cls}", err=True)
    _emit(ctx, {"digit": [k, l], "norm_sq": digit.norm_sq(), "class": cls})


@cli.command()
@click.option("--norm-sq-max", type=int, default=8, show_default=True)
@click.option("--include-exceptional/--regular-only", default=True, show_default=True)
@click.option("--stroke-width", type=float, default=0.002, show_default=True)
@click.pass_context
@engine_errors
def tessellate(ctx, norm_sq_max, include_exceptional, stroke_width):
    """Render the first-digit cylinder tessellation of the unit box as SVG."""
    spec = svgmod.TessellationSpec(
        norm_sq_max=norm_sq_max,
        include_exceptional=include_exceptional,
        stroke_width=stroke_width,
    )
    document = svgmod.render_svg(spec)
    out: Path | None = ctx.obj["out"]
    if out is not None:
        Path(out).write_text(document)
        click.echo(f"wrote {out} ({len(svgmod.region_digits(spec))} regions)", err=True)
    else:
        click.echo(document, nl=False)


@cli.command()
@click.option("--source", default="lattice", show_default=True,
              help="lattice, d2 or power:<p> for x_n = n^p.")
@click.option("--horizon", type=int, default=None)
@click.pass_context
@engine_errors
def tau(ctx, source, horizon):
    """Convergence exponent estimate of a norm sequence."""
    config: RunConfig = ctx.obj["config"]
    horizon = horizon or config.horizon
    norms = _digit_sequence_source(source, horizon)
    est = dimension.tau_exponent(norms, horizon)
    click.echo(f"tau estimate: {est.estimate:.6f} (ratio max {est.ratio_max:.6f})", err=True)
    payload = dict(est.to_json(), source=source)
    step = max(1, horizon // 10_000)
    rows = [
        {"n": int(est.trajectory_n[i]), "x": est.trajectory_x[i],
         "ratio": est.trajectory_ratio[i]}
        for i in range(0, horizon, step)
    ]
    _emit(ctx, payload, rows)


@cli.command()
@click.option("--alphabet", required=True, help="JSON pairs, @file or annulus:LO:HI (norm_sq).")
@click.option("--n", "word_len", type=int, required=True)
@click.option("--s", type=float, required=True)
@click.option("--mode", type=click.Choice(["sup_norm", "base_point"]), default="sup_norm")
@click.pass_context
@engine_errors
def pressure(ctx, alphabet, word_len, s, mode):
    """Partition sum with distortion brackets at one (n, s)."""
    config: RunConfig = ctx.obj["config"]
    est = dimension.partition_sum(
        _parse_alphabet(alphabet), word_len, s, mode, max_words=config.max_words
    )
    click.echo(
        f"log Z/n = {est.log_zn_over_n:.6f} bracket [{est.lower_bracket:.6f}, "
        f"{est.upper_bracket:.6f}]",
        err=True,
    )
    _emit(ctx, est.to_json())


@cli.command()
@click.option("--alphabet", required=True)
@click.option("--tol", type=float, default=None)
@click.option("--n-max", type=int, default=12, show_default=True)
@click.pass_context
@engine_errors
def dim(ctx, alphabet, tol, n_max):
    """Bowen-dimension bracket via pressure bisection."""
    config: RunConfig = ctx.obj["config"]
    result = dimension.bowen_dimension(
        _parse_alphabet(alphabet),
        tol=tol or config.bisection_tol,
        n_max=n_max,
        max_words=config.max_words,
    )
    click.echo(
        f"s in [{result.s_low:.6f}, {result.s_high:.6f}] "
        f"(n={result.n_used}, conclusive={result.conclusive})",
        err=True,
    )
    _emit(ctx, result.to_json())


@cli.command()
@click.option("--set", "set_name", default="d2", show_default=True,
              help="d2, lattice or minnormsq:<ns>.")
@click.option("--f", "growth", required=True, help="Growth expression over n, e.g. 'n+3'.")
@click.option("--eps", type=float, default=0.5, show_default=True)
@click.option("--horizon", type=int, default=10_000, show_default=True)
@click.option("--ratio-tol", type=float, default=None)
@click.option("--validate/--no-validate", default=True, show_default=True)
@click.option("--emit", type=click.Choice(["blocks", "subexp"]), default="blocks",
              show_default=True, help="Row content for CSV output.")
@click.pass_context
@engine_errors
def schedule(ctx, set_name, growth, eps, horizon, ratio_tol, validate, emit):
    """Build (and validate) a non-autonomous block schedule."""
    config: RunConfig = ctx.obj["config"]
    if set_name == "d2":
        digit_set = dimension.DigitSet.d2()
    elif set_name == "lattice":
        digit_set = dimension.DigitSet.lattice()
    elif set_name.startswith("minnormsq:"):
        digit_set = dimension.DigitSet.with_min_norm_sq(int(set_name.split(":", 1)[1]))
    else:
        raise DomainError(f"unknown digit set {set_name!r}")
    fn = dimension.GrowthFunction(growth)
    sched = dimension.build_schedule(
        digit_set, fn, eps=eps, horizon=horizon, ratio_tol=ratio_tol or config.ratio_tol
    )
    if sched.warning:
        click.echo(f"warning: {sched.warning}", err=True)
    payload = sched.to_json()
    if emit == "subexp":
        traj = dimension.subexp_check(sched)
        payload["subexp"] = traj.to_json()
        rows = [
            {"n": int(n), "ratio": r}
            for n, r in zip(traj.n.tolist(), traj.ratio.tolist())
        ]
    else:
        rows = [dict(b.to_json(), block=b.index) for b in sched.blocks]
    if validate:
        report = dimension.validate_schedule(sched, fn)
        payload["validation"] = report
        failed = [c for c in report if c["status"] != "pass"]
        _emit(ctx, payload, rows)
        if failed:
            raise CheckFailure(f"{len(failed)} schedule checks failed")
    else:
        _emit(ctx, payload, rows)
    click.echo(
        f"{len(sched.blocks)} blocks, horizon {sched.horizon}, "
        f"tau estimate {sched.tau_estimate:.4f}",
        err=True,
    )


@cli.command()
@click.argument("suite", type=click.Choice(verifymod.SUITES))
@click.pass_context
@engine_errors
def verify(ctx, suite):
    """Run a bundled invariant suite; exit 0 iff everything passes."""
    config: RunConfig = ctx.obj["config"]
    checks = verifymod.run_suite(suite, config)
    passed = all(c["status"] == "pass" for c in checks)
    payload = {"suite": suite, "passed": passed, "checks": checks}
    rows = [{"check": c["check"], "status": c["status"]} for c in checks]
    _emit(ctx, payload, rows)
    for c in checks:
        click.echo(f"{c['status']:>4}  {c['check']}", err=True)
    if not passed:
        raise CheckFailure(f"suite {suite} has failing checks")


def main() -> None:
    cli(prog_name="hurwitzcf")


if __name__ == "__main__":
    main()
