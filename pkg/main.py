import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.cli.config_loader import load_config
from app.cli.readings import dump_readings, load_readings
from app.cli.report_writer import EXIT_ERROR, dump_couplings, emit_report, exit_code_for
from app.cli.synthetic import generate_synthetic, synthetic_specs
from app.engine.normalization import format_validation_error, validate_config
from app.engine.orchestrator import run_stream
from app.models.manifest import AnomalyInjection, ReportFormat, RunManifest, SyntheticParameters
from app.models.sensor import EngineConfig, TraceMode, ValidatedModel
from app.utils.errors import EngineError, ManifestError
from app.utils.helpers import LoggingHelper

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logger = logging.getLogger(__name__)


class EngineArgumentParser(argparse.ArgumentParser):
    """Argument errors exit with code 1 like every other error, not argparse's 2"""

    def error(self, message):
        raise ManifestError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = EngineArgumentParser(
        prog="sensorsweep",
        description=(
            "Exhaustive early-warning evaluation of clustered sensor networks. "
            "Exit codes: 0 = no alarm, 2 = alarm raised, 1 = error."
        ),
    )
    parser.add_argument("--config", help="JSON config file with sensors and engine settings")

    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--readings", help="CSV readings file (timestamp,sensor_id,raw_value)")
    source.add_argument("--synthetic", action="store_true", help="generate seeded synthetic readings")

    synthetic = parser.add_argument_group("synthetic readings")
    synthetic.add_argument("--layout", help="cluster sizes when no config is given, e.g. 4,3")
    synthetic.add_argument("--cycles", type=int, default=10, help="number of cycles (default 10)")
    synthetic.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    synthetic.add_argument("--baseline", type=float, default=0.2, help="centre of the normal band on the unit scale")
    synthetic.add_argument("--jitter", type=float, default=0.01, help="half width of the normal band")
    synthetic.add_argument(
        "--anomaly",
        action="append",
        default=[],
        metavar="SENSOR:CYCLE[:MAGNITUDE]",
        help="push SENSOR toward its maximum at CYCLE (repeatable)",
    )
    synthetic.add_argument("--save-readings", help="also write the generated readings to this CSV file")

    engine = parser.add_argument_group("engine")
    engine.add_argument("--threshold", type=float, help="override the safety threshold (required without --config)")
    engine.add_argument("--trace-mode", choices=[mode.value for mode in TraceMode], help="per-sequence detail in reports")
    engine.add_argument("--max-sensors", type=int, help="largest cluster evaluated without override")
    engine.add_argument("--no-guard", action="store_true", help="evaluate clusters above the guard anyway")
    engine.add_argument("--no-prune", action="store_true", help="compute every level before deciding survival")
    engine.add_argument("--workers", type=int, help="worker processes per cluster")
    engine.add_argument("--fail-fast", action="store_true", help="stop at the first failing cycle")

    output = parser.add_argument_group("output")
    output.add_argument("--format", choices=[fmt.value for fmt in ReportFormat], default=ReportFormat.JSON.value)
    output.add_argument("--output", help="report file (default stdout)")
    output.add_argument("--dump-couplings", metavar="DIR", help="write one coupling matrix CSV per cluster")
    output.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def build_manifest(args: argparse.Namespace) -> RunManifest:
    """Turn parsed flags into a validated run manifest"""
    try:
        synthetic = None
        if args.synthetic:
            layout = [int(size) for size in args.layout.split(",")] if args.layout else None
            synthetic = SyntheticParameters(
                layout=layout,
                cycles=args.cycles,
                seed=args.seed,
                baseline=args.baseline,
                jitter=args.jitter,
                anomalies=[AnomalyInjection.parse(text) for text in args.anomaly],
            )
        return RunManifest(
            config_path=args.config,
            readings_path=args.readings,
            synthetic=synthetic,
            output_format=ReportFormat(args.format),
            output_path=args.output,
            couplings_dir=args.dump_couplings,
            save_readings_path=args.save_readings,
        )
    except ValidationError as e:
        raise ManifestError(format_validation_error(e)) from e
    except ValueError as e:
        raise ManifestError(str(e)) from e


def build_model(args: argparse.Namespace, manifest: RunManifest) -> ValidatedModel:
    """Load or synthesize the sensor network and apply flag overrides"""
    overrides = {
        "threshold": args.threshold,
        "trace_mode": args.trace_mode,
        "max_sensors_guard": args.max_sensors,
        "workers": args.workers,
    }
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if args.no_guard:
        overrides["enforce_guard"] = False
    if args.no_prune:
        overrides["prune"] = False
    if args.fail_fast:
        overrides["fail_fast"] = True

    try:
        if manifest.config_path is not None:
            return load_config(manifest.config_path).with_config(**overrides)
        if "threshold" not in overrides:
            raise ManifestError("--threshold is required when no --config is given")
        return validate_config(synthetic_specs(manifest.synthetic.layout), EngineConfig(**overrides))
    except ValidationError as e:
        raise ManifestError(format_validation_error(e)) from e


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, force=True)

    manifest = build_manifest(args)
    model = build_model(args, manifest)
    logger.info(f"Running with clusters {model.cluster_sizes} and threshold {model.config.threshold}")

    if manifest.couplings_dir is not None:
        dump_couplings(model, manifest.couplings_dir)

    if manifest.synthetic is not None:
        frames = generate_synthetic(manifest, model)
        if manifest.save_readings_path is not None:
            frames = dump_readings(frames, manifest.save_readings_path)
    else:
        frames = load_readings(manifest.readings_path)

    outcomes = run_stream(frames, model)
    emit_report(outcomes, manifest.output_format, manifest.output_path)
    return exit_code_for(outcomes)


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point; returns the process exit code"""
    try:
        return run(argv)
    except EngineError as e:
        LoggingHelper.log_error(e, "run")
        sys.stderr.write(f"error: {e.detail}\n")
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Unexpected failure: {e}", exc_info=True)
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
