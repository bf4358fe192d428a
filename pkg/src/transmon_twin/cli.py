"""Command-line entry point: emulate, fit and report subcommands.

Exit codes: 0 success, 1 runtime failure, 2 validation failure. Relative
input paths are resolved against the working directory first and then
against ``$TRANSMON_TWIN_CONFIG_DIR`` when set. All report files are
deterministic for a fixed manifest and seed (no timestamps, sorted keys).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .benchmarks import benchmark_suite, build_circuit
from .circuits import Circuit, load_circuit
from .device import bundled_device_path, load_device
from .distributions import (
    distribution_from_json,
    distribution_to_json,
    sample,
    tvd,
)
from .emulate import emulate, ideal_distribution
from .fitting import (
    ABLATION_ROWS,
    DifferentialEvolutionConfig,
    FitProblem,
    ablation_report,
    fit,
    parameter_names,
)
from .transpiler import (
    NoiseParams,
    NoiseToggles,
    format_noisy_circuit,
    params_from_dict,
    params_to_dict,
    transpile_noise,
)
from .scheduling import schedule_alap
from .validation import ValidationError

CONFIG_DIR_ENV = "TRANSMON_TWIN_CONFIG_DIR"

TOGGLE_NAMES = (
    "single_qubit_gate_error",
    "two_qubit_gate_error",
    "spam_error",
    "passive_decay",
    "crosstalk",
)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc!r}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transmon-twin",
        description="Digital twin of a fixed-coupling transmon QPU.",
    )
    sub = parser.add_subparsers(required=True)

    em = sub.add_parser("emulate", help="emulate circuits under the noise model")
    em.add_argument("--device", default=None, help="calibration file (default: bundled)")
    em.add_argument("--circuit", action="append", default=[], help="circuit text file")
    em.add_argument("--suite", action="store_true", help="use the benchmark suite")
    em.add_argument("--shots", type=int, default=100_000)
    em.add_argument("--seed", type=int, default=0)
    em.add_argument("--coupling-mode", choices=("shared", "per-pair"), default="per-pair")
    em.add_argument(
        "--toggle-off", action="append", default=[], choices=TOGGLE_NAMES,
        help="disable an error family (repeatable)",
    )
    em.add_argument("--params", default=None, help="JSON file with noise parameters")
    em.add_argument("--out", required=True, help="output directory")
    em.set_defaults(func=cmd_emulate)

    ft = sub.add_parser("fit", help="fit noise parameters to reference data")
    ft.add_argument("--config", required=True, help="fit configuration TOML")
    ft.add_argument("--out", required=True, help="output directory")
    ft.set_defaults(func=cmd_fit)

    rp = sub.add_parser("report", help="TVD-over-time table for reference clusters")
    rp.add_argument("--results", required=True, help="directory of cluster subdirectories")
    rp.add_argument("--device", default=None, help="calibration file (default: bundled)")
    rp.add_argument("--fit-result", default=None, help="fit_result.json with parameters")
    rp.add_argument("--out", required=True, help="output directory")
    rp.set_defaults(func=cmd_report)
    return parser


def _resolve(path: str | None, *, default: Path | None = None) -> Path:
    if path is None:
        if default is None:
            raise ValidationError("no path given")
        return default
    p = Path(path)
    if p.exists():
        return p
    base = os.environ.get(CONFIG_DIR_ENV)
    if base and not p.is_absolute():
        candidate = Path(base) / p
        if candidate.exists():
            return candidate
    raise ValidationError(f"path not found: {path}")


def _toggles_from_off_list(off: list[str]) -> NoiseToggles:
    return NoiseToggles(**{name: name not in off for name in TOGGLE_NAMES})


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# --- emulate -----------------------------------------------------------------


def cmd_emulate(args) -> int:
    device_path = _resolve(args.device, default=bundled_device_path())
    device = load_device(device_path)
    if args.shots < 1:
        raise ValidationError(f"shots must be >= 1, got {args.shots}")
    toggles = _toggles_from_off_list(args.toggle_off)
    if args.params:
        payload = json.loads(_resolve(args.params).read_text())
        params = params_from_dict(payload)
        params = NoiseParams(
            coupling_mode=params.coupling_mode,
            j_values=params.j_values,
            cz_fidelities=params.cz_fidelities,
            toggles=toggles,
            decay_during_measurement=params.decay_during_measurement,
        )
    else:
        params = NoiseParams.from_device(
            device, coupling_mode=args.coupling_mode, toggles=toggles
        )

    circuits: list[Circuit] = [load_circuit(_resolve(p)) for p in args.circuit]
    if args.suite:
        circuits += [build_circuit(spec, device) for spec in benchmark_suite(device)]
    if not circuits:
        raise ValidationError("nothing to emulate: pass --circuit and/or --suite")

    out = Path(args.out)
    summary = {
        "device": {"path": str(device_path), "hash": device.content_hash()},
        "seed": args.seed,
        "shots": args.shots,
        "params": params_to_dict(params),
        "circuits": {},
    }
    for circuit in circuits:
        label = circuit.label or f"circuit{len(summary['circuits'])}"
        scheduled = schedule_alap(circuit, device)
        noisy = transpile_noise(scheduled, device, params)
        exact = emulate(circuit, device, params, scheduled=scheduled)
        counts = sample(exact, args.shots, args.seed)
        ideal = ideal_distribution(circuit)
        tvd_vs_ideal = tvd(exact, ideal)
        meta = {"circuit": label, "device_hash": device.content_hash(), "seed": args.seed}
        _write(out / f"{label}.exact.json", distribution_to_json(exact, **meta))
        _write(out / f"{label}.counts.json", distribution_to_json(counts, **meta))
        _write(out / f"{label}.schedule.txt", format_noisy_circuit(noisy))
        summary["circuits"][label] = {"tvd_vs_ideal": tvd_vs_ideal}
    _write(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"emulated {len(circuits)} circuit(s) -> {out}")
    return 0


# --- fit ---------------------------------------------------------------------


def cmd_fit(args) -> int:
    config_path = _resolve(args.config)
    try:
        config = tomllib.loads(config_path.read_text()).get("fit", {})
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"cannot parse fit config {config_path}: {exc}") from exc

    device_path = (
        _resolve(config["device"]) if "device" in config else bundled_device_path()
    )
    device = load_device(device_path)
    refs_dir = _resolve(config.get("references"))
    specs = benchmark_suite(device)
    by_label = {spec.label: spec for spec in specs}

    references = {}
    for spec in specs:
        path = refs_dir / f"{spec.label}.json"
        if path.exists():
            references[spec.label], _ = distribution_from_json(path.read_text())

    train_labels, test_labels = _split_labels(config, specs, references)
    if not train_labels:
        raise ValidationError("no training circuits with references available")
    missing = [l for l in train_labels + test_labels if l not in references]
    if missing:
        raise ValidationError(f"missing reference files for: {missing}")

    toggles = _toggles_from_off_list(list(config.get("toggles_off", [])))
    shots_per_eval = int(config.get("shots_per_eval", 0)) or None
    problem = FitProblem(
        device=device,
        train_set=tuple(
            (build_circuit(by_label[l], device), references[l]) for l in train_labels
        ),
        test_set=tuple(
            (build_circuit(by_label[l], device), references[l]) for l in test_labels
        ),
        coupling_mode=str(config.get("coupling_mode", "shared")),
        j_bounds=tuple(config.get("j_bounds", (0.0, 1.0e7))),
        fidelity_bounds=tuple(config.get("fidelity_bounds", (0.8, 1.0))),
        toggles=toggles,
        shots_per_eval=shots_per_eval,
    )
    de_config = DifferentialEvolutionConfig(
        population=int(config["population"]) if config.get("population") else None,
        mutation=float(config.get("mutation", 0.7)),
        recombination=float(config.get("recombination", 0.9)),
        generations=int(config.get("generations", 200)),
        workers=int(config.get("workers", 1)),
    )
    seed = int(config.get("seed", 0))
    result = fit(problem, de_config, seed=seed)

    out = Path(args.out)
    n_total = len([s for s in specs if s.label in references])
    manifest = {
        "device": {"path": str(device_path), "hash": device.content_hash()},
        "config": str(config_path),
        "seed": seed,
        "train_labels": list(train_labels),
        "test_labels": list(test_labels),
        "train_fraction": len(train_labels) / n_total if n_total else 0.0,
        "train_all_trainable": all(by_label[l].trainable for l in train_labels),
    }
    payload = {
        "parameter_names": list(parameter_names(problem)),
        "vector": list(result.vector),
        "params": params_to_dict(result.params),
        "train_cost": result.train_cost,
        "test_cost": result.test_cost,
        "history": list(result.history),
        "seed": result.seed,
        "evaluations": result.evaluations,
        "manifest": manifest,
    }
    _write(out / "fit_result.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _write(out / "parameter_table.txt", _parameter_table(result.params))
    if problem.test_set:
        rows = ablation_report(result.params, problem)
        csv = "configuration,mean_test_tvd\n" + "".join(
            f"{label},{value!r}\n" for label, value in rows
        )
        _write(out / "ablation.csv", csv)
    print(
        f"fit done: train cost {result.train_cost:.6f}, "
        f"test cost {result.test_cost:.6f} -> {out}"
    )
    return 0


def _split_labels(config, specs, references):
    if "train_labels" in config or "test_labels" in config:
        train = list(config.get("train_labels", []))
        test = list(config.get("test_labels", []))
        known = {s.label for s in specs}
        unknown = [l for l in train + test if l not in known]
        if unknown:
            raise ValidationError(f"unknown circuit labels in config: {unknown}")
        return train, test
    trainable = [s.label for s in specs if s.trainable and s.label in references]
    rest = [s.label for s in specs if not s.trainable and s.label in references]
    fraction = config.get("train_fraction")
    if fraction is not None:
        fraction = float(fraction)
        if not (0.0 < fraction <= 1.0):
            raise ValidationError(f"train_fraction must be in (0, 1], got {fraction}")
        n_refs = len(trainable) + len(rest)
        take = max(1, math.floor(fraction * n_refs + 0.5))
        take = min(take, len(trainable))
        held_out = trainable[take:]
        return trainable[:take], held_out + rest
    return trainable, rest


def _parameter_table(params: NoiseParams) -> str:
    lines = ["CZ fidelity (u-v)"]
    for (u, v), f in sorted(params.cz_fidelities.items()):
        lines.append(f"  {u}-{v}: {f:.6f}")
    lines.append("Always-on interaction strength J [kHz] (u-v)")
    for (u, v), j in sorted(params.j_values.items()):
        lines.append(f"  {u}-{v}: {j / 1e3:.6f}")
    return "\n".join(lines) + "\n"


# --- report ------------------------------------------------------------------


def cmd_report(args) -> int:
    results_dir = _resolve(args.results)
    device_path = _resolve(args.device, default=bundled_device_path())
    device = load_device(device_path)
    if args.fit_result:
        payload = json.loads(_resolve(args.fit_result).read_text())
        params = params_from_dict(payload["params"])
    else:
        params = NoiseParams.from_device(device)

    clusters = sorted(p for p in results_dir.iterdir() if p.is_dir())
    if not clusters:
        raise ValidationError(f"no cluster directories under {results_dir}")
    specs = benchmark_suite(device)

    # Model predictions don't depend on the cluster: compute once per config.
    predictions: dict[str, dict[str, object]] = {}
    for row_label, toggle in ABLATION_ROWS:
        p = params if toggle is None else params.with_toggles(**{toggle: False})
        predictions[row_label] = {
            spec.label: emulate(build_circuit(spec, device), device, p)
            for spec in specs
        }

    lines = ["cluster,configuration,mean_tvd,n_circuits,complete"]
    for cluster in clusters:
        refs = {}
        for spec in specs:
            path = cluster / f"{spec.label}.json"
            if path.exists():
                refs[spec.label], _ = distribution_from_json(path.read_text())
        complete = len(refs) == len(specs)
        for row_label, _toggle in ABLATION_ROWS:
            if refs:
                mean = sum(
                    tvd(predictions[row_label][l], r) for l, r in refs.items()
                ) / len(refs)
                mean_repr = repr(mean)
            else:
                mean_repr = ""
            lines.append(
                f"{cluster.name},{row_label},{mean_repr},{len(refs)},{str(complete).lower()}"
            )
    out = Path(args.out)
    _write(out / "report.csv", "\n".join(lines) + "\n")
    manifest = {
        "device": {"path": str(device_path), "hash": device.content_hash()},
        "params": params_to_dict(params),
        "clusters": [c.name for c in clusters],
    }
    _write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"report written for {len(clusters)} cluster(s) -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
