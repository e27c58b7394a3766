"""Experiment driver: generate or load scenarios, run both pipelines, report.

Subcommands:
    gen    generate a scenario bundle (truth/map/motions/detections)
    run    run integration-only and corrected pipelines, write reports
    sweep  repeat an experiment over values of one config key

All outputs are plain text keyed only by the experiment spec and seed, so a
re-run reproduces them byte for byte. Exit codes: 0 success, 2 config error,
3 scenario error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .fusion import FusionConfig, fuse, parse_kv_file
from .metrics import DEFAULT_SUB_LENGTHS, ErrorReport, evaluate, write_report
from .odometry import integrate, save_trajectory
from .simulator import (
    MILD_DRIFT,
    PATH_KINDS,
    DetectorModel,
    OdometryNoiseModel,
    Scenario,
    load_scenario,
    make_scenario,
    save_scenario,
)

# Error percentages below this are indistinguishable from float round-off in
# an exactly consistent scenario; ratios against them are reported as
# sentinels instead of meaningless dust quotients.
ZERO_ERROR_EPS = 1e-9

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SCENARIO = 3
EXIT_IO = 4


class ConfigError(Exception):
    """Invalid experiment spec, config file, or CLI parameter."""


class ScenarioError(Exception):
    """Scenario that cannot be generated, loaded, or evaluated."""


_NOISE_KEYS = ("trans_bias", "trans_sigma", "rot_bias", "rot_sigma")
_DETECTOR_KEYS = ("detect_radius", "false_rate", "confidence_mean", "confidence_sigma")
_GEN_KEYS = ("kind", "length_m", "step_m", "d_th") + _NOISE_KEYS + _DETECTOR_KEYS
_FUSION_KEYS = ("delta", "lambda_s", "lambda_tr", "lambda_theta", "t_w", "bandwidth")


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a scenario source, fusion settings, metrics, seed."""

    scenario_dir: Optional[Path] = None
    kind: Optional[str] = None
    length_m: Optional[float] = None
    step_m: Optional[float] = None
    d_th: float = 1.0
    noise: OdometryNoiseModel = MILD_DRIFT
    detector: DetectorModel = DetectorModel()
    fusion: FusionConfig = FusionConfig()
    sub_lengths: tuple[float, ...] = DEFAULT_SUB_LENGTHS
    seed: int = 0
    out_dir: Optional[Path] = None

    def __post_init__(self) -> None:
        generates = self.kind is not None
        if generates == (self.scenario_dir is not None):
            raise ConfigError(
                "exactly one scenario source required: either scenario_dir or "
                "generation parameters (kind/length_m/step_m)"
            )
        if generates and (self.length_m is None or self.step_m is None):
            raise ConfigError("generated scenarios need kind, length_m and step_m")


def load_spec(path: str | Path, out_dir: Optional[str | Path] = None) -> ExperimentSpec:
    """Build an ExperimentSpec from a flat ``key = value`` file.

    ``out_dir`` (the --out flag) overrides any out_dir key in the file.
    """
    try:
        raw = parse_kv_file(path)
    except (ValueError, OSError) as e:
        if isinstance(e, OSError):
            raise
        raise ConfigError(str(e)) from e
    try:
        spec = _spec_from_mapping(raw, Path(path).parent)
    except (ValueError, KeyError) as e:
        raise ConfigError(str(e)) from e
    if out_dir is not None:
        spec = dataclasses.replace(spec, out_dir=Path(out_dir))
    if spec.out_dir is None:
        raise ConfigError("no output directory: pass --out or set out_dir in the spec")
    return spec


def _spec_from_mapping(raw: dict[str, str], base: Path) -> ExperimentSpec:
    known = {
        "scenario_dir",
        "kind",
        "length_m",
        "step_m",
        "d_th",
        "fusion_config",
        "sub_lengths",
        "seed",
        "out_dir",
        *_NOISE_KEYS,
        *_DETECTOR_KEYS,
    }
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown spec key {key!r}")

    noise_kwargs = {k: float(raw[k]) for k in _NOISE_KEYS if k in raw}
    detector_kwargs = {}
    if "detect_radius" in raw:
        detector_kwargs["detect_radius"] = float(raw["detect_radius"])
    if "false_rate" in raw:
        detector_kwargs["false_rate"] = float(raw["false_rate"])
    if "confidence_mean" in raw:
        detector_kwargs["true_confidence_mean"] = float(raw["confidence_mean"])
    if "confidence_sigma" in raw:
        detector_kwargs["confidence_sigma"] = float(raw["confidence_sigma"])

    fusion = FusionConfig()
    if "fusion_config" in raw:
        fusion_path = Path(raw["fusion_config"])
        if not fusion_path.is_absolute():
            fusion_path = base / fusion_path
        fusion = FusionConfig.from_file(fusion_path)

    sub_lengths = DEFAULT_SUB_LENGTHS
    if "sub_lengths" in raw:
        sub_lengths = tuple(float(v) for v in raw["sub_lengths"].split(",") if v.strip())
        if not sub_lengths:
            raise ConfigError("sub_lengths must list at least one length")

    scenario_dir = None
    if "scenario_dir" in raw:
        scenario_dir = Path(raw["scenario_dir"])
        if not scenario_dir.is_absolute():
            scenario_dir = base / scenario_dir
        if set(raw) & set(_GEN_KEYS):
            raise ConfigError("scenario_dir and generation parameters are mutually exclusive")

    return ExperimentSpec(
        scenario_dir=scenario_dir,
        kind=raw.get("kind"),
        length_m=float(raw["length_m"]) if "length_m" in raw else None,
        step_m=float(raw["step_m"]) if "step_m" in raw else None,
        d_th=float(raw.get("d_th", 1.0)),
        noise=dataclasses.replace(MILD_DRIFT, **noise_kwargs),
        detector=DetectorModel(**detector_kwargs),
        fusion=fusion,
        sub_lengths=sub_lengths,
        seed=int(raw.get("seed", 0)),
        out_dir=Path(raw["out_dir"]) if "out_dir" in raw else None,
    )


def _build_scenario(spec: ExperimentSpec) -> Scenario:
    try:
        if spec.scenario_dir is not None:
            return load_scenario(spec.scenario_dir)
        return make_scenario(
            spec.kind,
            spec.length_m,
            spec.step_m,
            spec.d_th,
            spec.noise,
            spec.detector,
            spec.seed,
        )
    except OSError:
        raise
    except (ValueError, KeyError) as e:
        raise ScenarioError(str(e)) from e


@dataclass(frozen=True)
class ExperimentResult:
    metric: ErrorReport
    topometric: ErrorReport
    translation_ratio: float | str
    rotation_ratio: float | str


def improvement_ratio(metric_err: float, topo_err: float) -> float | str:
    """Metric-over-topometric quotient with sentinels for (near-)zero errors."""
    m = 0.0 if metric_err < ZERO_ERROR_EPS else metric_err
    t = 0.0 if topo_err < ZERO_ERROR_EPS else topo_err
    if t == 0.0:
        return "undefined" if m == 0.0 else "inf"
    return m / t


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run both pipelines on the spec's scenario and write all artifacts."""
    scenario = _build_scenario(spec)
    out = spec.out_dir
    out.mkdir(parents=True, exist_ok=True)

    origin = scenario.ground_truth.origin
    try:
        metric_est = integrate(origin, scenario.motions)
        topo_est = fuse(
            scenario.motions,
            scenario.detections,
            scenario.topo_map,
            origin,
            spec.fusion,
        )
        report_metric = evaluate(metric_est, scenario.ground_truth, spec.sub_lengths)
        report_topo = evaluate(topo_est, scenario.ground_truth, spec.sub_lengths)
    except (ValueError, KeyError) as e:
        raise ScenarioError(str(e)) from e

    save_scenario(scenario, out)
    save_trajectory(metric_est, out / "estimate_metric.txt")
    save_trajectory(topo_est, out / "estimate_topometric.txt")
    write_report(report_metric, out / "report_metric.csv", out / "report_metric.json")
    write_report(report_topo, out / "report_topometric.csv", out / "report_topometric.json")

    t_ratio = improvement_ratio(report_metric.avg_translation_pct, report_topo.avg_translation_pct)
    r_ratio = improvement_ratio(
        report_metric.avg_rotation_deg_per_m, report_topo.avg_rotation_deg_per_m
    )
    improvement = {
        "metric": {
            "avg_translation_pct": report_metric.avg_translation_pct,
            "avg_rotation_deg_per_m": report_metric.avg_rotation_deg_per_m,
        },
        "topometric": {
            "avg_translation_pct": report_topo.avg_translation_pct,
            "avg_rotation_deg_per_m": report_topo.avg_rotation_deg_per_m,
        },
        "translation_ratio": t_ratio,
        "rotation_ratio": r_ratio,
    }
    (out / "improvement.json").write_text(json.dumps(improvement, sort_keys=True, indent=2) + "\n")
    return ExperimentResult(report_metric, report_topo, t_ratio, r_ratio)


def sweep(
    spec: ExperimentSpec, parameter: str, values: Sequence[str]
) -> list[tuple[str, float, float]]:
    """One experiment per value of ``parameter``, each in its own subdirectory.

    Returns (value, trans_pct, rot_deg_per_m) rows of the corrected
    pipeline's summary and writes them to sweep.csv in the spec's out_dir.
    """
    if not values:
        raise ConfigError("sweep needs at least one value")
    rows = []
    for value in values:
        sub = dataclasses.replace(
            _override(spec, parameter, value),
            out_dir=spec.out_dir / f"{parameter}={value}",
        )
        result = run_experiment(sub)
        rows.append(
            (value, result.topometric.avg_translation_pct, result.topometric.avg_rotation_deg_per_m)
        )
    lines = ["value,trans_pct,rot_deg_per_m"]
    lines += [f"{v},{t!r},{r!r}" for v, t, r in rows]
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    (spec.out_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
    return rows


def _override(spec: ExperimentSpec, parameter: str, value: str) -> ExperimentSpec:
    try:
        if parameter in _FUSION_KEYS:
            typed = int(value) if parameter == "t_w" else float(value)
            return dataclasses.replace(
                spec, fusion=dataclasses.replace(spec.fusion, **{parameter: typed})
            )
        if parameter == "seed":
            return dataclasses.replace(spec, seed=int(value))
        if parameter in _GEN_KEYS:
            if spec.scenario_dir is not None:
                raise ConfigError(
                    f"cannot sweep generation parameter {parameter!r} over a loaded scenario"
                )
            if parameter in _NOISE_KEYS:
                return dataclasses.replace(
                    spec, noise=dataclasses.replace(spec.noise, **{parameter: float(value)})
                )
            if parameter == "confidence_mean":
                return dataclasses.replace(
                    spec,
                    detector=dataclasses.replace(spec.detector, true_confidence_mean=float(value)),
                )
            if parameter in _DETECTOR_KEYS:
                return dataclasses.replace(
                    spec, detector=dataclasses.replace(spec.detector, **{parameter: float(value)})
                )
            if parameter == "kind":
                return dataclasses.replace(spec, kind=value)
            return dataclasses.replace(spec, **{parameter: float(value)})
    except (ValueError, TypeError) as e:
        raise ConfigError(f"bad value {value!r} for parameter {parameter!r}: {e}") from e
    raise ConfigError(f"unknown sweep parameter {parameter!r}")


def _cmd_gen(args: argparse.Namespace) -> int:
    noise = OdometryNoiseModel(
        trans_bias=args.trans_bias,
        trans_sigma=args.trans_sigma,
        rot_bias=args.rot_bias,
        rot_sigma=args.rot_sigma,
    )
    detector = DetectorModel(
        detect_radius=args.detect_radius,
        true_confidence_mean=args.confidence_mean,
        false_rate=args.false_rate,
        confidence_sigma=args.confidence_sigma,
    )
    try:
        scenario = make_scenario(
            args.kind, args.length, args.step, args.d_th, noise, detector, args.seed
        )
    except ValueError as e:
        raise ScenarioError(str(e)) from e
    save_scenario(scenario, args.out)
    print(
        f"wrote scenario: {len(scenario.ground_truth)} poses, "
        f"{len(scenario.topo_map)} nodes, {len(scenario.detections)} detections -> {args.out}"
    )
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec, args.out)
    result = run_experiment(spec)
    print(
        "metric:      "
        f"translation {result.metric.avg_translation_pct:.4f} %, "
        f"rotation {result.metric.avg_rotation_deg_per_m:.4f} deg/m"
    )
    print(
        "topometric:  "
        f"translation {result.topometric.avg_translation_pct:.4f} %, "
        f"rotation {result.topometric.avg_rotation_deg_per_m:.4f} deg/m"
    )
    print(f"improvement: translation {result.translation_ratio}, rotation {result.rotation_ratio}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec, args.out)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    rows = sweep(spec, args.param, values)
    for value, trans, rot in rows:
        print(f"{args.param}={value}: translation {trans:.4f} %, rotation {rot:.4f} deg/m")
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topometric", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a scenario bundle")
    gen.add_argument("--kind", required=True, choices=PATH_KINDS)
    gen.add_argument("--length", required=True, type=float, help="path length, meters")
    gen.add_argument("--step", required=True, type=float, help="step length, meters")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, type=Path)
    gen.add_argument("--d-th", dest="d_th", type=float, default=1.0)
    gen.add_argument("--trans-bias", type=float, default=MILD_DRIFT.trans_bias)
    gen.add_argument("--trans-sigma", type=float, default=MILD_DRIFT.trans_sigma)
    gen.add_argument("--rot-bias", type=float, default=MILD_DRIFT.rot_bias)
    gen.add_argument("--rot-sigma", type=float, default=MILD_DRIFT.rot_sigma)
    gen.add_argument("--detect-radius", type=float, default=DetectorModel().detect_radius)
    gen.add_argument("--false-rate", type=float, default=DetectorModel().false_rate)
    gen.add_argument(
        "--confidence-mean", type=float, default=DetectorModel().true_confidence_mean
    )
    gen.add_argument("--confidence-sigma", type=float, default=DetectorModel().confidence_sigma)

    run = sub.add_parser("run", help="run one experiment from a spec file")
    run.add_argument("--spec", required=True, type=Path)
    run.add_argument("--out", type=Path, default=None)

    swp = sub.add_parser("sweep", help="run one experiment per parameter value")
    swp.add_argument("--spec", required=True, type=Path)
    swp.add_argument("--param", required=True)
    swp.add_argument("--values", required=True, help="comma-separated list")
    swp.add_argument("--out", type=Path, default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    handlers = {"gen": _cmd_gen, "run": _cmd_run, "sweep": _cmd_sweep}
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        _emit_error("config", e)
        return EXIT_CONFIG
    except ScenarioError as e:
        _emit_error("scenario", e)
        return EXIT_SCENARIO
    except OSError as e:
        _emit_error("io", e)
        return EXIT_IO


def _emit_error(kind: str, err: Exception) -> None:
    print(json.dumps({"error": kind, "message": str(err)}), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
