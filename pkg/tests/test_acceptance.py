"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria complete. Every tolerance is pinned here; the round-trip fit uses
the default optimizer budget and a fixed seed.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

import transmon_twin as tt
from conftest import make_device, random_density_matrix
from oracles import run_superop_chain
from test_scheduling import random_circuit
from transmon_twin.channels import thermal_state
from transmon_twin.cli import main
from transmon_twin.distributions import exact_distribution
from transmon_twin.fitting import ablation_report
from transmon_twin.scheduling import schedule_alap
from transmon_twin.simulator import run
from transmon_twin.transpiler import NoiseOp, transpile_noise

SEED = 7
TRUE_J = 4.0e6  # shared coupling strength used to generate round-trip truths
TABLE_FIDELITIES = {(0, 2): 0.987, (1, 2): 0.964, (2, 3): 0.917}


@contextmanager
def criterion(num: int, name: str, limit_s: float):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"[FAIL] criterion {num}: {name}")
        raise
    elapsed = time.perf_counter() - start
    status = "PASS" if elapsed <= limit_s else "FAIL"
    print(f"[{status}] criterion {num}: {name} ({elapsed:.2f}s, limit {limit_s:g}s)")
    assert elapsed <= limit_s, f"criterion {num} exceeded its {limit_s}s runtime limit"


@pytest.fixture(scope="module")
def device():
    return tt.load_device(tt.bundled_device_path())


@pytest.fixture(scope="module")
def suite_circuits(device):
    return {s.label: (s, tt.build_circuit(s, device)) for s in tt.benchmark_suite(device)}


def shared_params(device, j, fidelities, toggles=None):
    return tt.NoiseParams(
        coupling_mode="shared",
        j_values={e: j for e in device.edges},
        cz_fidelities=dict(fidelities),
        toggles=toggles or tt.NoiseToggles(),
    )


def test_criterion_1_cptp_suite():
    with criterion(1, "CPTP property suite", limit_s=5.0):
        rng = np.random.default_rng(101)
        channels = [
            tt.amplitude_damping(0.0, 0.0),
            tt.amplitude_damping(0.37, 0.048),
            tt.amplitude_damping(1.0, 0.052),
            tt.dephasing(0.0),
            tt.dephasing(0.006),
            tt.dephasing(0.5),
            tt.two_qubit_dephasing(0.01625),
            tt.two_qubit_dephasing(0.75),
            tt.thermal_decay(40e-6, 18e-6, 0.048, 13e-9),
            tt.thermal_decay(32.5e-6, 16.2e-6, 0.05, 1500e-9),
            tt.zz_phase_channel(0.31450871949174797, 45e-9),
            # composed products close under composition as well
            tt.channels.compose(tt.dephasing(0.2), tt.amplitude_damping(0.3, 0.05)),
            tt.channels.compose(
                tt.two_qubit_dephasing(0.4), tt.zz_phase_channel(2.0e4, 45e-9)
            ),
        ]
        for channel in channels:
            dim = 2**channel.arity
            completeness = sum(k.conj().T @ k for k in channel.kraus_ops)
            assert np.max(np.abs(completeness - np.eye(dim))) <= 1e-12, channel.label
            for _ in range(100):
                rho = random_density_matrix(rng, dim)
                out = channel.apply(rho)
                assert abs(np.trace(out).real - 1.0) <= 1e-12
                assert abs(np.trace(out).imag) <= 1e-12
                assert np.max(np.abs(out - out.conj().T)) <= 1e-12
                assert np.linalg.eigvalsh(out).min() >= -1e-10


def test_criterion_2_thermal_fixed_points():
    with criterion(2, "thermal fixed points", limit_s=2.0):
        rng = np.random.default_rng(202)

        def trace_distance(a, b):
            return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())

        for p1 in (0.0, 0.048, 0.2):
            reset = tt.amplitude_damping(1.0, p1)
            target = thermal_state(p1)
            for _ in range(20):
                rho = random_density_matrix(rng, 2)
                assert trace_distance(reset.apply(rho), target) <= 1e-10
        t1, t2 = 40e-6, 18e-6
        decay = tt.thermal_decay(t1, t2, 0.048, 100 * t1)
        target = thermal_state(0.048)
        for _ in range(20):
            rho = random_density_matrix(rng, 2)
            assert trace_distance(decay.apply(rho), target) <= 1e-9


def test_criterion_3_single_layer_transpilation_golden(device):
    with criterion(3, "single-layer transpilation golden", limit_s=1.0):
        circuit = tt.Circuit(5, (tt.circuits.rx(1, 0.4), tt.circuits.cz(2, 3)))
        noisy = transpile_noise(
            schedule_alap(circuit, device), device, tt.NoiseParams.from_device(device)
        )
        def sig(op):
            if isinstance(op, NoiseOp):
                return (op.rule, op.qubits, round(op.duration * 1e9, 9))
            return ("gate", op.kind, op.qubits)

        assert [sig(op) for op in noisy.layers[0].ops] == [
            ("gate", "rx", (1,)),
            ("single_qubit_gate_error", (1,), 0.0),
            ("gate", "cz", (2, 3)),
            ("two_qubit_gate_error", (2, 3), 0.0),
            ("idle_decay", (0,), 45.0),
            ("idle_decay", (1,), 13.0),
            ("idle_decay", (4,), 45.0),
            ("crosstalk", (0, 2), 45.0),
            ("crosstalk", (1, 2), 45.0),
            ("crosstalk", (2, 3), 45.0),
            ("crosstalk", (2, 4), 45.0),
        ]


def analytic_target(spec):
    k = len(spec.qubit_subset)
    if spec.family == "ghz":
        return exact_distribution({"0" * k: 0.5, "1" * k: 0.5})
    probs = {}
    for i in range(k):
        key = "".join("1" if j == i else "0" for j in range(k))
        probs[key] = 1.0 / k
    return exact_distribution(probs)


def test_criterion_4_ideal_limit(device, suite_circuits):
    with criterion(4, "ideal-limit emulation of the benchmark suite", limit_s=10.0):
        ideal_device = device.idealized()
        params = shared_params(ideal_device, 0.0, {e: 1.0 for e in ideal_device.edges})
        for label, (spec, _) in suite_circuits.items():
            circuit = tt.build_circuit(spec, ideal_device)
            dist = tt.emulate(circuit, ideal_device, params)
            assert tt.tvd(dist, analytic_target(spec)) <= 1e-9, label
        ghz4 = tt.build_circuit(suite_circuits["ghz_0123"][0], ideal_device)
        probs = tt.emulate(ghz4, ideal_device, params).probabilities()
        assert probs["0000"] == pytest.approx(0.5, abs=1e-9)
        assert probs["1111"] == pytest.approx(0.5, abs=1e-9)


def test_criterion_5_oracle_equivalence():
    with criterion(5, "engine vs superoperator-chain oracle", limit_s=60.0):
        rng = np.random.default_rng(505)
        devices = [
            make_device(2, [(0, 1)], noisy=True),
            make_device(3, [(0, 1), (1, 2)], noisy=True),
            make_device(3, [(0, 1), (1, 2), (0, 2)], noisy=True),
        ]
        for i in range(25):
            dev = devices[i % len(devices)]
            circuit = random_circuit(dev, rng, n_gates=12)
            noisy = transpile_noise(
                schedule_alap(circuit, dev), dev, tt.NoiseParams.from_device(dev)
            )
            engine = run(noisy).data
            oracle = run_superop_chain(noisy)
            assert np.max(np.abs(engine - oracle)) <= 1e-9, circuit.label


def round_trip_problem(device, suite_circuits, truth):
    refs = {
        label: tt.emulate(circ, device, truth)
        for label, (_, circ) in suite_circuits.items()
    }
    return tt.FitProblem(
        device=device,
        train_set=tuple(
            (circ, refs[label])
            for label, (spec, circ) in suite_circuits.items()
            if spec.trainable
        ),
        test_set=tuple(
            (circ, refs[label])
            for label, (spec, circ) in suite_circuits.items()
            if not spec.trainable
        ),
        coupling_mode="shared",
        j_bounds=(0.0, 1.0e7),
        fidelity_bounds=(0.8, 1.0),
    )


def test_criterion_6_round_trip_fit(device, suite_circuits):
    with criterion(6, "round-trip parameter recovery (default DE budget)", limit_s=1800.0):
        truth = shared_params(device, TRUE_J, TABLE_FIDELITIES)
        problem = round_trip_problem(device, suite_circuits, truth)
        result = tt.fit(problem, tt.DifferentialEvolutionConfig(), seed=SEED)
        assert result.train_cost <= 0.01
        j_fit = result.params.j_values[(0, 2)]
        assert abs(j_fit - TRUE_J) / TRUE_J <= 0.15, f"J recovered as {j_fit}"
        for edge, truth_f in TABLE_FIDELITIES.items():
            fitted = result.params.cz_fidelities[edge]
            assert abs(fitted - truth_f) <= 0.005, (edge, fitted, truth_f)


def test_criterion_7_ablation_ordering(device, suite_circuits):
    with criterion(7, "ablation ordering at calibration-magnitude noise", limit_s=300.0):
        # all channels active; J at the per-pair kHz magnitudes of the
        # bundled calibration, fidelities at its optimized values
        truth = tt.NoiseParams.from_device(device, coupling_mode="per-pair")
        refs = {
            label: tt.emulate(circ, device, truth)
            for label, (_, circ) in suite_circuits.items()
        }
        problem = tt.FitProblem(
            device=device,
            train_set=tuple(
                (circ, refs[label])
                for label, (spec, circ) in suite_circuits.items()
                if spec.trainable
            ),
            test_set=tuple(
                (circ, refs[label])
                for label, (spec, circ) in suite_circuits.items()
                if not spec.trainable
            ),
            coupling_mode="per-pair",
        )
        rows = dict(ablation_report(truth, problem))
        assert rows["No SPAM errors"] > rows["Full model"]
        assert rows["No 2-qubit gate errors"] > rows["Full model"]
        assert rows["Full model"] <= 1e-9  # self-consistent references


def test_criterion_8_byte_identical_reports(device, tmp_path):
    with criterion(8, "byte-identical reports across reruns", limit_s=600.0):
        # emulate: same manifest + seed twice
        emu_dirs = []
        for name in ("emu_a", "emu_b"):
            out = tmp_path / name
            assert main([
                "emulate", "--suite", "--shots", "100000", "--seed", str(SEED),
                "--out", str(out),
            ]) == 0
            emu_dirs.append(out)
        _assert_dirs_identical(*emu_dirs)

        # fit + ablation: identical config and seed, reduced budget (the
        # determinism of the pipeline does not depend on the budget)
        refs = tmp_path / "refs"
        refs.mkdir()
        truth = shared_params(device, TRUE_J, TABLE_FIDELITIES)
        for label, (spec, circ) in (
            (s.label, (s, tt.build_circuit(s, device))) for s in tt.benchmark_suite(device)
        ):
            dist = tt.emulate(circ, device, truth)
            (refs / f"{label}.json").write_text(
                tt.distributions.distribution_to_json(dist, circuit=label)
            )
        config = tmp_path / "fit.toml"
        config.write_text(
            "[fit]\n"
            f'references = "{refs}"\n'
            'coupling_mode = "shared"\n'
            "population = 8\n"
            "generations = 2\n"
            f"seed = {SEED}\n"
        )
        fit_dirs = []
        for name in ("fit_a", "fit_b"):
            out = tmp_path / name
            assert main(["fit", "--config", str(config), "--out", str(out)]) == 0
            fit_dirs.append(out)
        _assert_dirs_identical(*fit_dirs)

        # report over a reference cluster, twice
        cluster = tmp_path / "results" / "t00"
        cluster.mkdir(parents=True)
        for path in refs.iterdir():
            (cluster / path.name).write_bytes(path.read_bytes())
        rep_dirs = []
        for name in ("rep_a", "rep_b"):
            out = tmp_path / name
            assert main([
                "report", "--results", str(tmp_path / "results"), "--out", str(out)
            ]) == 0
            rep_dirs.append(out)
        _assert_dirs_identical(*rep_dirs)


def _assert_dirs_identical(a, b):
    names_a = sorted(p.name for p in a.iterdir())
    names_b = sorted(p.name for p in b.iterdir())
    assert names_a == names_b
    for name in names_a:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
