import json
from dataclasses import replace

import pytest

from transmon_twin.benchmarks import benchmark_suite, build_circuit
from transmon_twin.circuits import save_circuit
from transmon_twin.cli import main
from transmon_twin.device import bundled_device_path, load_device, save_device
from transmon_twin.distributions import distribution_to_json
from transmon_twin.emulate import emulate
from transmon_twin.transpiler import NoiseParams


@pytest.fixture(scope="module")
def device():
    return load_device(bundled_device_path())


def write_suite_references(device, refs_dir, params, labels=None):
    refs_dir.mkdir(parents=True, exist_ok=True)
    for spec in benchmark_suite(device):
        if labels is not None and spec.label not in labels:
            continue
        circuit = build_circuit(spec, device)
        dist = emulate(circuit, device, params)
        (refs_dir / f"{spec.label}.json").write_text(
            distribution_to_json(dist, circuit=spec.label)
        )


def test_emulate_circuit_file(tmp_path, device):
    spec = benchmark_suite(device)[0]
    circuit = build_circuit(spec, device)
    circ_path = tmp_path / "ghz.circ"
    save_circuit(circuit, circ_path)
    out = tmp_path / "out"
    code = main([
        "emulate", "--circuit", str(circ_path), "--shots", "5000",
        "--seed", "4", "--out", str(out),
    ])
    assert code == 0
    assert (out / "ghz.exact.json").exists()
    assert (out / "ghz.counts.json").exists()
    assert (out / "ghz.schedule.txt").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seed"] == 4
    assert summary["device"]["hash"] == device.content_hash()
    assert "ghz" in summary["circuits"]
    assert summary["circuits"]["ghz"]["tvd_vs_ideal"] > 0.0
    # noisy GHZ keeps its two dominant peaks with nonzero leakage elsewhere
    exact = json.loads((out / "ghz.exact.json").read_text())["weights"]
    ordered = sorted(exact, key=exact.get, reverse=True)
    assert set(ordered[:2]) == {"000", "111"}
    assert exact[ordered[2]] > 0.0


def test_emulate_all_noise_off_matches_ideal(tmp_path, device):
    out = tmp_path / "out"
    code = main([
        "emulate", "--suite", "--shots", "10",
        "--toggle-off", "single_qubit_gate_error",
        "--toggle-off", "two_qubit_gate_error",
        "--toggle-off", "spam_error",
        "--toggle-off", "passive_decay",
        "--toggle-off", "crosstalk",
        "--out", str(out),
    ])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["circuits"]) == 8
    for entry in summary["circuits"].values():
        assert entry["tvd_vs_ideal"] < 1e-9


def test_emulate_with_explicit_params_file(tmp_path, device):
    from transmon_twin.transpiler import params_to_dict

    params = NoiseParams(
        coupling_mode="shared",
        j_values={e: 0.0 for e in device.edges},
        cz_fidelities={e: 1.0 for e in device.edges},
    )
    params_path = tmp_path / "params.json"
    params_path.write_text(json.dumps(params_to_dict(params)))
    out = tmp_path / "out"
    ideal_dev = tmp_path / "ideal.toml"
    save_device(device.idealized(), ideal_dev)
    code = main([
        "emulate", "--device", str(ideal_dev), "--suite", "--shots", "10",
        "--params", str(params_path), "--out", str(out),
    ])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    for entry in summary["circuits"].values():
        assert entry["tvd_vs_ideal"] < 1e-9


def test_emulate_missing_device_exits_2(tmp_path, capsys):
    code = main([
        "emulate", "--device", str(tmp_path / "ghost.toml"), "--suite",
        "--out", str(tmp_path / "out"),
    ])
    assert code == 2
    assert "ghost.toml" in capsys.readouterr().err


def test_emulate_requires_input(tmp_path):
    assert main(["emulate", "--out", str(tmp_path / "o")]) == 2


def test_emulate_determinism(tmp_path, device):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = main(["emulate", "--suite", "--shots", "300", "--seed", "8",
                     "--out", str(out)])
        assert code == 0
        outs.append(out)
    files_a = sorted(p.name for p in outs[0].iterdir())
    files_b = sorted(p.name for p in outs[1].iterdir())
    assert files_a == files_b
    for name in files_a:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def fit_config(tmp_path, device_path, refs, **extra):
    lines = [
        "[fit]",
        f'device = "{device_path}"',
        f'references = "{refs}"',
        'coupling_mode = "shared"',
        "population = 8",
        "generations = 2",
        "seed = 5",
    ]
    for key, value in extra.items():
        if isinstance(value, str):
            lines.append(f'{key} = "{value}"')
        elif isinstance(value, bool):
            lines.append(f"{key} = {str(value).lower()}")
        elif isinstance(value, (list, tuple)):
            rendered = ", ".join(
                f'"{v}"' if isinstance(v, str) else repr(v) for v in value
            )
            lines.append(f"{key} = [{rendered}]")
        else:
            lines.append(f"{key} = {value}")
    path = tmp_path / "fit.toml"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_fit_round_trip_small_budget(tmp_path, device):
    params = NoiseParams.from_device(device, coupling_mode="shared")
    refs = tmp_path / "refs"
    write_suite_references(device, refs, params)
    config = fit_config(tmp_path, bundled_device_path(), refs)
    out = tmp_path / "fit_out"
    assert main(["fit", "--config", str(config), "--out", str(out)]) == 0
    payload = json.loads((out / "fit_result.json").read_text())
    assert payload["parameter_names"] == ["J", "cz_fidelity_0_2", "cz_fidelity_1_2", "cz_fidelity_2_3"]
    assert len(payload["history"]) == 3  # init + 2 generations
    assert payload["manifest"]["train_labels"] == [
        "ghz_012", "w_012", "ghz_023", "w_023", "ghz_123", "w_123"
    ]
    assert payload["manifest"]["test_labels"] == ["ghz_0123", "w_0123"]
    assert payload["manifest"]["train_all_trainable"] is True
    table = (out / "parameter_table.txt").read_text()
    assert "CZ fidelity" in table and "0-2" in table
    ablation = (out / "ablation.csv").read_text().splitlines()
    assert ablation[0] == "configuration,mean_test_tvd"
    assert len(ablation) == 7  # header + 6 rows


def test_fit_train_fraction_split(tmp_path, device):
    params = NoiseParams.from_device(device, coupling_mode="shared")
    refs = tmp_path / "refs"
    write_suite_references(device, refs, params)
    config = fit_config(tmp_path, bundled_device_path(), refs, train_fraction=0.125)
    out = tmp_path / "fit_out"
    assert main(["fit", "--config", str(config), "--out", str(out)]) == 0
    manifest = json.loads((out / "fit_result.json").read_text())["manifest"]
    # 12.5% of the 8-circuit cluster = 1 circuit, drawn from the 3-qubit pool
    assert manifest["train_labels"] == ["ghz_012"]
    assert manifest["train_fraction"] == pytest.approx(0.125)
    assert manifest["train_all_trainable"] is True
    assert len(manifest["test_labels"]) == 7


def test_fit_invalid_bounds_exit_2(tmp_path, device, capsys):
    params = NoiseParams.from_device(device, coupling_mode="shared")
    refs = tmp_path / "refs"
    write_suite_references(device, refs, params, labels={"ghz_012"})
    config = fit_config(
        tmp_path, bundled_device_path(), refs,
        train_labels=["ghz_012"], test_labels=[], fidelity_bounds=[0.8, 1.4],
    )
    assert main(["fit", "--config", str(config), "--out", str(tmp_path / "o")]) == 2
    assert "inside" in capsys.readouterr().err


def test_fit_missing_references_exit_2(tmp_path, device):
    refs = tmp_path / "refs"
    refs.mkdir()
    config = fit_config(tmp_path, bundled_device_path(), refs)
    assert main(["fit", "--config", str(config), "--out", str(tmp_path / "o")]) == 2


def test_fit_unparseable_reference_exit_2(tmp_path, device):
    params = NoiseParams.from_device(device, coupling_mode="shared")
    refs = tmp_path / "refs"
    write_suite_references(device, refs, params)
    (refs / "ghz_012.json").write_text("{broken")
    config = fit_config(tmp_path, bundled_device_path(), refs)
    assert main(["fit", "--config", str(config), "--out", str(tmp_path / "o")]) == 2


def test_report_clusters_and_incomplete_rows(tmp_path, device):
    params = NoiseParams.from_device(device, coupling_mode="shared")
    results = tmp_path / "results"
    write_suite_references(device, results / "t00", params)
    write_suite_references(device, results / "t01", params)
    (results / "t01" / "w_0123.json").unlink()
    out = tmp_path / "report"
    assert main(["report", "--results", str(results), "--out", str(out)]) == 0
    lines = (out / "report.csv").read_text().splitlines()
    assert lines[0] == "cluster,configuration,mean_tvd,n_circuits,complete"
    rows = [line.split(",") for line in lines[1:]]
    t00 = [r for r in rows if r[0] == "t00"]
    t01 = [r for r in rows if r[0] == "t01"]
    assert len(t00) == 6 and len(t01) == 6
    assert all(r[4] == "true" and r[3] == "8" for r in t00)
    assert all(r[4] == "false" and r[3] == "7" for r in t01)


def test_report_drift_scenario_monotone(tmp_path, device):
    # references regenerated with shrinking T2: the fixed model drifts away
    results = tmp_path / "drift"
    params = NoiseParams.from_device(device, coupling_mode="shared")
    for i, scale in enumerate((1.0, 0.6, 0.3)):
        drifted = replace(
            device,
            qubits=tuple(replace(q, t2=q.t2 * scale) for q in device.qubits),
        )
        write_suite_references(drifted, results / f"t{i:02d}", params)
    out = tmp_path / "report"
    assert main(["report", "--results", str(results), "--out", str(out)]) == 0
    lines = (out / "report.csv").read_text().splitlines()[1:]
    full_rows = [l.split(",") for l in lines if l.split(",")[1] == "Full model"]
    tvds = [float(r[2]) for r in sorted(full_rows, key=lambda r: r[0])]
    assert tvds[0] < tvds[1] < tvds[2]


def test_report_empty_results_exit_2(tmp_path):
    empty = tmp_path / "none"
    empty.mkdir()
    assert main(["report", "--results", str(empty), "--out", str(tmp_path / "o")]) == 2


def test_config_dir_env_resolution(tmp_path, device, monkeypatch):
    config_dir = tmp_path / "cfg"
    config_dir.mkdir()
    save_device(device, config_dir / "dev.toml")
    monkeypatch.setenv("TRANSMON_TWIN_CONFIG_DIR", str(config_dir))
    out = tmp_path / "out"
    code = main(["emulate", "--device", "dev.toml", "--suite", "--shots", "10",
                 "--out", str(out)])
    assert code == 0
