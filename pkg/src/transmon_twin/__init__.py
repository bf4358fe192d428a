"""Calibration-driven digital twin of a fixed-coupling transmon QPU.

The package transpiles circuits into noisy circuits under a parametric error
model (reset, decay, gate dephasing, readout confusion, always-on ZZ
crosstalk), evaluates them with an exact density-matrix engine, and fits the
model's free parameters to reference shot data with differential evolution.
"""

from .benchmarks import BenchmarkSpec, benchmark_suite, build_circuit, ghz_circuit, w_circuit
from .channels import (
    QuantumChannel,
    amplitude_damping,
    dephasing,
    dephasing_from_fidelity,
    thermal_decay,
    two_qubit_dephasing,
    two_qubit_dephasing_from_fidelity,
    zz_phase,
    zz_phase_channel,
)
from .circuits import Circuit, Gate, load_circuit, parse_circuit, save_circuit
from .device import (
    CouplingCalibration,
    DeviceModel,
    QubitCalibration,
    bundled_device_path,
    load_device,
    save_device,
    zz_rate,
)
from .distributions import ShotDistribution, apply_confusion, sample, tvd
from .emulate import emulate, ideal_distribution
from .fitting import (
    DifferentialEvolutionConfig,
    FitProblem,
    FitResult,
    ablation_report,
    cost,
    fit,
)
from .scheduling import ScheduledCircuit, build_dag, schedule_alap
from .simulator import DensityMatrix, apply_channel, apply_gate, probabilities, run
from .transpiler import (
    NoiseParams,
    NoiseToggles,
    NoisyCircuit,
    crosstalk_edges,
    transpile_noise,
)
from .twin import TransmonTwin
from .validation import ValidationError

__version__ = "0.1.0"

__all__ = [
    "BenchmarkSpec",
    "benchmark_suite",
    "build_circuit",
    "ghz_circuit",
    "w_circuit",
    "QuantumChannel",
    "amplitude_damping",
    "dephasing",
    "dephasing_from_fidelity",
    "thermal_decay",
    "two_qubit_dephasing",
    "two_qubit_dephasing_from_fidelity",
    "zz_phase",
    "zz_phase_channel",
    "Circuit",
    "Gate",
    "load_circuit",
    "parse_circuit",
    "save_circuit",
    "CouplingCalibration",
    "DeviceModel",
    "QubitCalibration",
    "bundled_device_path",
    "load_device",
    "save_device",
    "zz_rate",
    "ShotDistribution",
    "apply_confusion",
    "sample",
    "tvd",
    "emulate",
    "ideal_distribution",
    "DifferentialEvolutionConfig",
    "FitProblem",
    "FitResult",
    "ablation_report",
    "cost",
    "fit",
    "ScheduledCircuit",
    "build_dag",
    "schedule_alap",
    "DensityMatrix",
    "apply_channel",
    "apply_gate",
    "probabilities",
    "run",
    "NoiseParams",
    "NoiseToggles",
    "NoisyCircuit",
    "crosstalk_edges",
    "transpile_noise",
    "TransmonTwin",
    "ValidationError",
]
