"""End-to-end emulation pipeline: schedule, transpile, evaluate, read out."""

from __future__ import annotations

from .circuits import Circuit
from .device import DeviceModel
from .distributions import ShotDistribution, apply_confusion, exact_distribution, sample
from .scheduling import ScheduledCircuit, schedule_alap
from .simulator import DEFAULT_MAX_QUBITS, probabilities, run, run_gates
from .transpiler import NoiseParams, NoisyCircuit, transpile_noise

__all__ = ["emulate", "ideal_distribution", "noisy_probabilities"]


def noisy_probabilities(
    noisy: NoisyCircuit, *, max_qubits: int = DEFAULT_MAX_QUBITS
) -> ShotDistribution:
    """Exact outcome distribution of a noisy circuit, confusion included."""
    state = run(noisy, max_qubits=max_qubits)
    pos = {q: i for i, q in enumerate(noisy.register)}
    measured = tuple(pos[q] for q in sorted(noisy.measured_qubits))
    dist = exact_distribution(probabilities(state, measured))
    if noisy.confusion:
        ranks = {q: r for r, q in enumerate(sorted(noisy.measured_qubits))}
        matrices = {ranks[q]: m for q, m in noisy.confusion.items()}
        dist = apply_confusion(dist, matrices)
    return dist


def emulate(
    circuit: Circuit,
    device: DeviceModel,
    params: NoiseParams,
    *,
    shots: int | None = None,
    seed: int = 0,
    scheduled: ScheduledCircuit | None = None,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> ShotDistribution:
    """Emulate a circuit under the noise model.

    Returns the exact distribution when ``shots`` is None, otherwise a
    reproducible multinomial sample of it. A prebuilt schedule can be passed
    to amortize scheduling across repeated evaluations (the fitter does).
    """
    if scheduled is None:
        scheduled = schedule_alap(circuit, device)
    noisy = transpile_noise(scheduled, device, params)
    dist = noisy_probabilities(noisy, max_qubits=max_qubits)
    if shots is None:
        return dist
    return sample(dist, shots, seed)


def ideal_distribution(circuit: Circuit) -> ShotDistribution:
    """Noise-free outcome distribution of a circuit (no device needed)."""
    state = run_gates(circuit.gates, circuit.num_qubits)
    return exact_distribution(
        probabilities(state, tuple(sorted(circuit.measured_qubits)))
    )
