import functools
import json
import logging
import math
import sys
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import click
import numpy as np

from .config import Config
from .constants import EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_PASS, EXIT_USAGE
from .covers.annulus import AnnularCover
from .covers.intersections import intersection_sets, neighbor_bound
from .cubes.norms import carleson_constant, f1inf_norm, finf1_norm_def, finf1_norm_tent
from .equivalence.decider import classify_spaces, decide_equivalence, det_quotient_bound, inclusion_window
from .exceptions import ConfigError, HypothesisError, ToolkitError
from .experiments import (
    analyzing_profile,
    experiment_atom_train,
    experiment_coincidence,
    experiment_convolution_battery,
    experiment_convolution_envelope,
    experiment_detquotient,
    experiment_dilated_convolution,
    experiment_khintchine,
    experiment_khintchine_battery,
    experiment_maximal,
    experiment_pairing_battery,
    experiment_q_detection,
    experiment_sequence_oracles,
    experiment_single_atom,
    run_suite,
)
from .linalg.expansive import dilation_exponents
from .linalg.models import ExpansiveMatrix
from .output.report import ExperimentReport, SuiteReport, Table, write_report
from .parsing.readers import FieldParser, MatrixParser, SequenceParser
from .quasinorm.step import StepQuasiNorm, equivalence_ratio, expansive_consequence_constant, quasi_triangle_constant
from .tlnorm.fields import TLParams
from .tlnorm.maximal import maximal_tl_norm, maximal_tl_norm_pinf
from .tlnorm.norms import norm_value

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

VERDICT_EXIT = {"PASS": EXIT_PASS, "FAIL": EXIT_FAIL, "INCONCLUSIVE": EXIT_INCONCLUSIVE}
EQUIVALENCE_EXIT = {"equivalent": EXIT_PASS, "inequivalent": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}


@click.group()
@click.version_option()
def cli() -> None:
    """Numerical toolkit for anisotropic homogeneous Triebel-Lizorkin spaces."""
    pass


def common_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """--config and --verbose on every command."""

    @click.option("--config", "config_path", type=click.Path(), help="TOML config file (defaults: ATL_* env vars)")
    @click.option("--verbose", is_flag=True, help="Enable verbose logging")
    @functools.wraps(func)
    def wrapper(config_path: str | None, verbose: bool, **kwargs: Any) -> Any:
        if verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        return func(config=_setup_config(config_path), **kwargs)

    return wrapper


def _setup_config(config_path: str | None) -> Config:
    """Load and validate configuration; exits with the usage status on any problem."""
    try:
        config = Config.from_file(config_path) if config_path else Config()
    except ConfigError as e:
        logger.error(str(e))
        sys.exit(EXIT_USAGE)

    errors = config.validate()
    if errors:
        logger.error("Configuration validation failed:")
        for error in errors:
            logger.error(f"  - {error}")
        sys.exit(EXIT_USAGE)

    return config


@contextmanager
def usage_errors() -> Iterator[None]:
    """Bad inputs and failed preconditions end the command with the usage status."""
    try:
        yield
    except (ToolkitError, ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        sys.exit(EXIT_USAGE)


def load_matrix(config: Config, source: str) -> ExpansiveMatrix:
    """A matrix file path, or the name of a matrix in the config."""
    if Path(source).is_file():
        return MatrixParser().parse_matrix_file(source)
    if source in config.matrices:
        return config.matrix(source)
    raise ConfigError(f"{source!r} is neither a matrix file nor a configured matrix name")


def parse_floats(text: str) -> list[float]:
    return [float(token) for token in text.replace(" ", "").split(",") if token]


def parse_range(text: str) -> tuple[int, int]:
    """``lo..hi`` with inclusive integer ends."""
    lo, sep, hi = text.partition("..")
    if not sep:
        raise ValueError(f"range must look like lo..hi, got {text!r}")
    return int(lo), int(hi)


def emit(report: ExperimentReport | SuiteReport, config: Config, out: str | None) -> None:
    """Print the summary between rules and persist JSON plus CSV tables when ``out`` is set."""
    report.provenance.setdefault("config", config.provenance())
    print("\n" + "=" * 80)
    print(report.to_markdown())
    print("=" * 80 + "\n")
    if out:
        target = Path(out)
        if target.suffix == ".json":
            write_report(report, target.parent, json_name=target.name)
        else:
            write_report(report, target)


def emit_json(payload: dict[str, Any], out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2, default=str)
    print(text)
    if out:
        Path(out).write_text(text + "\n")
        logger.info(f"Report written to {out}")


@cli.command()
@click.option("--matrix", "matrix_source", required=True, help="Matrix file or configured matrix name")
@click.option("--point", help="Comma-separated point x1,x2,...")
@click.option("--against", help="Second matrix: sweep the equivalence ratio over growing scale ranges")
@click.option("--ranges", default="5,10,20,40", show_default=True, help="Scale ranges of the sweep")
@click.option("--samples", default=1000, show_default=True, help="Points per sampled constant")
@click.option("--out", help="Output directory or report .json path")
@common_options
def rho(
    config: Config,
    matrix_source: str,
    point: str | None,
    against: str | None,
    ranges: str,
    samples: int,
    out: str | None,
) -> None:
    """Step quasi-norm ρ_A: values, sampled constants and equivalence-ratio sweeps."""
    with usage_errors():
        A = load_matrix(config, matrix_source)
        q = StepQuasiNorm.for_matrix(A, config.theta)
        report = ExperimentReport(name="rho", params={"samples": samples}, seeds=[config.seed])
        report.provenance["A"] = A.to_record()

        if point:
            x = np.array(parse_floats(point))
            row = Table(name="point", columns=["point", "scale_index", "rho"])
            zero = not np.any(x)
            row.add(x.tolist(), None if zero else q.scale_index(x), q.rho(x))
            report.tables.append(row)

        exponents = dilation_exponents(A, config.margin)
        constants = Table(name="constants", columns=["quasi_triangle", "expansive_consequence"])
        constants.add(
            quasi_triangle_constant(q, samples, config.seed),
            expansive_consequence_constant(q, exponents, samples, config.seed),
        )
        report.tables.append(constants)

        if against:
            qb = StepQuasiNorm.for_matrix(load_matrix(config, against), config.theta)
            sweep = Table(name="sweep", columns=["scale", "ratio"])
            for scale_range in (int(r) for r in parse_floats(ranges)):
                lo, hi = equivalence_ratio(q, qb, samples, config.seed, scale_range)
                sweep.add(scale_range, hi / lo)
            report.tables.append(sweep)

        report.verdict = "PASS"
    emit(report, config, out)


@cli.command()
@click.option("--a", "a_source", required=True, help="Matrix A (file or configured name)")
@click.option("--b", "b_source", required=True, help="Matrix B (file or configured name)")
@click.option("--range", "i_range", default="-20..20", show_default=True, help="Index range lo..hi of i")
@click.option("--out", help="Write the JSON here as well")
@common_options
def covers(config: Config, a_source: str, b_source: str, i_range: str, out: str | None) -> None:
    """Intersection sets J(i), I(j) of the annular covers of A and B."""
    with usage_errors():
        A, B = load_matrix(config, a_source), load_matrix(config, b_source)
        shape = config.settings().shape
        cover_a = AnnularCover.for_matrix(A, shape, config.theta)
        cover_b = AnnularCover.for_matrix(B, shape, config.theta)
        sets = intersection_sets(cover_a, cover_b, parse_range(i_range), workers=config.workers)
        payload = {**sets.to_record(), "N": neighbor_bound(cover_a)}
    emit_json(payload, out)


@cli.command()
@click.option("--a", "a_source", required=True, help="Matrix A (file or configured name)")
@click.option("--b", "b_source", required=True, help="Matrix B (file or configured name)")
@click.option("--depth", type=int, help="Sweep depth K (default from config)")
@click.option("--alpha", type=float, help="Smoothness of the A-side weight, for the inclusion window")
@click.option("--beta", type=float, help="Smoothness of the B-side weight, for the inclusion window")
@click.option("--out", help="Write the JSON here as well")
@common_options
def equiv(
    config: Config,
    a_source: str,
    b_source: str,
    depth: int | None,
    alpha: float | None,
    beta: float | None,
    out: str | None,
) -> None:
    """Decide whether A and B are equivalent; exit 0 equivalent, 1 inequivalent, 2 inconclusive."""
    with usage_errors():
        A, B = load_matrix(config, a_source), load_matrix(config, b_source)
        K = depth or config.depth
        shape = config.settings().shape
        verdict = decide_equivalence(A, B, K, config.slope_tol, config.cover_cap, shape, config.workers)
        payload: dict[str, Any] = verdict.to_record()
        if alpha is not None and beta is not None:
            quotient = det_quotient_bound(A, B, K, shape, config.workers)
            payload["det_quotient"] = {"value": quotient.value, "unbounded": quotient.unbounded}
            if not quotient.unbounded:
                try:
                    payload["inclusion_window"] = inclusion_window(A, B, alpha, beta, quotient.value, K, shape)
                except (HypothesisError, RuntimeError) as e:
                    logger.warning(f"Inclusion window not established: {e}")
                    payload["inclusion_window"] = None
    emit_json(payload, out)
    sys.exit(EQUIVALENCE_EXIT[verdict.verdict])


@cli.command()
@click.option("--a", "a_source", required=True, help="Matrix A (file or configured name)")
@click.option("--b", "b_source", required=True, help="Matrix B (file or configured name)")
@click.option("--params1", required=True, help="α,p,q of the A-side space")
@click.option("--params2", required=True, help="α,p,q of the B-side space")
@common_options
def classify(config: Config, a_source: str, b_source: str, params1: str, params2: str) -> None:
    """Decide whether two anisotropic Triebel-Lizorkin spaces coincide."""
    with usage_errors():
        A, B = load_matrix(config, a_source), load_matrix(config, b_source)
        first, second = parse_floats(params1), parse_floats(params2)
        if len(first) != 3 or len(second) != 3:
            raise ValueError("parameters must be three numbers α,p,q")
        comparison = classify_spaces(
            A,
            B,
            (first[0], first[1], first[2]),
            (second[0], second[1], second[2]),
            K=config.depth,
            slope_tol=config.slope_tol,
            cover_cap=config.cover_cap,
            workers=config.workers,
        )
    print(f"coincide: {comparison.coincide} ({comparison.reason})")
    if comparison.coincide is None:
        sys.exit(EXIT_INCONCLUSIVE)
    sys.exit(EXIT_PASS if comparison.coincide else EXIT_FAIL)


@cli.command("tl-norm")
@click.option("--matrix", "matrix_source", required=True, help="Matrix file or configured matrix name")
@click.option("--field", "field_path", required=True, type=click.Path(), help="Binary sampled field")
@click.option("--alpha", default=0.0, show_default=True)
@click.option("--p", default=2.0, show_default=True, help="Integrability (inf allowed)")
@click.option("--q", default=2.0, show_default=True, help="Summability (inf allowed)")
@click.option("--maximal", is_flag=True, help="Peetre maximal characterization")
@click.option("--beta", type=float, help="Peetre exponent (default max(1/p, 1/q) + 1)")
@common_options
def tl_norm(
    config: Config,
    matrix_source: str,
    field_path: str,
    alpha: float,
    p: float,
    q: float,
    maximal: bool,
    beta: float | None,
) -> None:
    """‖f‖ in Ḟ^α_{p,q}(A) for a sampled field."""
    with usage_errors():
        A = load_matrix(config, matrix_source)
        f = FieldParser().parse_field_file(field_path)
        settings = config.settings()
        prof = analyzing_profile(A, settings)
        params = TLParams(alpha, p, q, beta=beta)
        if not maximal:
            value = norm_value(f, A, prof, params, config.workers)
        elif math.isinf(p):
            value = maximal_tl_norm_pinf(f, A, prof, params, config.lattice_density, workers=config.workers)
        else:
            value = maximal_tl_norm(f, A, prof, params, workers=config.workers)
    emit_json({"alpha": alpha, "p": p, "q": q, "maximal": maximal, "value": value}, None)


EXPERIMENTS = (
    "khintchine",
    "khintchine-battery",
    "single-atom",
    "detquotient",
    "atom-train",
    "q-detection",
    "coincidence",
    "maximal",
    "convolution",
    "dilated-convolution",
    "convolution-envelope",
    "sequence-oracles",
    "pairing",
)


def run_experiment(name: str, config: Config, options: dict[str, Any]) -> ExperimentReport:
    """Dispatch one named experiment with the matrices and parameters in ``options``."""
    settings = config.settings()

    def matrix(key: str) -> ExpansiveMatrix:
        if not options.get(key):
            raise ConfigError(f"experiment {name} needs --{key}")
        return load_matrix(config, options[key])

    alpha, beta, p, q = options["alpha"], options["beta"], options["p"], options["q"]
    depth = config.depth
    runners: dict[str, Callable[[], ExperimentReport]] = {
        "khintchine": lambda: experiment_khintchine(
            parse_floats(options["coeffs"] or "1"), p, options["trials"], config.seed
        ),
        "khintchine-battery": lambda: experiment_khintchine_battery(n_trials=options["trials"], seed=config.seed),
        "single-atom": lambda: experiment_single_atom(matrix("a"), alpha, p, q, settings=settings),
        "detquotient": lambda: experiment_detquotient(
            matrix("a"), matrix("b"), alpha, beta or 0.0, p, options["p2"] or p, q, settings=settings
        ),
        "atom-train": lambda: experiment_atom_train(matrix("a"), alpha, p, q, settings=settings),
        "q-detection": lambda: experiment_q_detection(matrix("a"), matrix("b"), p, q, settings=settings, depth=depth),
        "coincidence": lambda: experiment_coincidence(
            matrix("a"), matrix("b"), alpha, p, q, settings=settings, depth=depth
        ),
        "maximal": lambda: experiment_maximal(matrix("a"), alpha, p, q, beta, settings=settings),
        "convolution": lambda: experiment_convolution_battery(settings=settings),
        "dilated-convolution": lambda: experiment_dilated_convolution(matrix("a"), p, settings=settings),
        "convolution-envelope": lambda: experiment_convolution_envelope(matrix("a"), p, settings=settings),
        "sequence-oracles": lambda: experiment_sequence_oracles(
            [matrix("a")], seed=config.seed, workers=config.workers
        ),
        "pairing": lambda: experiment_pairing_battery(matrix("a"), seed=config.seed, workers=config.workers),
    }
    logger.info(f"Running experiment {name}")
    return runners[name]()


@cli.command()
@click.argument("name", type=click.Choice(EXPERIMENTS))
@click.option("--a", help="Matrix A (file or configured name)")
@click.option("--b", help="Matrix B (file or configured name)")
@click.option("--alpha", default=0.0, show_default=True)
@click.option("--beta", type=float)
@click.option("--p", default=2.0, show_default=True, help="Integrability (inf allowed)")
@click.option("--p2", type=float, help="B-side integrability for detquotient")
@click.option("--q", default=2.0, show_default=True, help="Summability (inf allowed)")
@click.option("--coeffs", help="Comma-separated coefficients for khintchine")
@click.option("--trials", default=10_000, show_default=True, help="Monte Carlo trials")
@click.option("--out", help="Output directory or report .json path")
@common_options
def experiment(config: Config, name: str, out: str | None, **options: Any) -> None:
    """Run one named experiment; exit 0 PASS, 1 FAIL, 2 inconclusive."""
    with usage_errors():
        report = run_experiment(name, config, options)
    emit(report, config, out)
    sys.exit(VERDICT_EXIT[report.verdict])


@cli.command()
@click.option("--matrix", "matrix_source", required=True, help="Matrix file or configured matrix name")
@click.option("--seq", "seq_path", required=True, type=click.Path(), help="Cube sequence file")
@click.option("--op", type=click.Choice(["f1inf", "finf1", "finf1-tent", "carleson"]), required=True)
@click.option("--method", type=click.Choice(["bruteforce", "greedy"]), default="bruteforce", show_default=True)
@common_options
def cubes(config: Config, matrix_source: str, seq_path: str, op: str, method: str) -> None:
    """Sequence norms of a finite cube sequence."""
    with usage_errors():
        A = load_matrix(config, matrix_source)
        c = SequenceParser().parse_sequence_file(seq_path, A)
        payload: dict[str, Any] = {"op": op, "cubes": len(c)}
        if op == "f1inf":
            payload["value"] = f1inf_norm(c)
        elif op == "finf1":
            payload["value"] = finf1_norm_def(c)
        elif op == "finf1-tent":
            payload["value"] = finf1_norm_tent(c)
        else:
            estimate = carleson_constant(c, "greedy" if method == "greedy" else "bruteforce")
            payload.update(method=method, value=estimate.value, lower=estimate.lower, upper=estimate.upper)
    emit_json(payload, None)


@cli.command()
@click.option("--only", help="Comma-separated criterion numbers to run (default: all)")
@click.option("--out", help="Output directory (default from config)")
@common_options
def suite(config: Config, only: str | None, out: str | None) -> None:
    """Run the acceptance battery; partial results are written as each criterion finishes."""
    selected = [token.strip() for token in only.split(",")] if only else None
    result = run_suite(config.settings(), config.depth, out or config.output_dir, selected, config.provenance())
    print("\n" + "=" * 80)
    print(result.to_markdown())
    print("=" * 80 + "\n")
    sys.exit(VERDICT_EXIT[result.verdict])


def main() -> None:
    """Console entry point; click usage errors exit with the usage status instead of click's 2."""
    try:
        cli(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except click.ClickException as e:
        e.show()
        sys.exit(EXIT_USAGE)


if __name__ == "__main__":
    main()
