"""GHZ- and W-state preparation circuits in the native gate set.

The native set is {rx, ry, rz, cz} with CZ allowed only on coupling edges, so
both families fan out through the hub qubit of the star. Hadamards are
realized as ry(pi/2) after rz(pi) (exact up to global phase); correctness of
every generated circuit is enforced against analytic target states by the
test suite, not by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuits import Circuit, Gate, cz, measure, rx, ry, rz
from .device import DeviceModel
from .validation import ValidationError

__all__ = ["BenchmarkSpec", "ghz_circuit", "w_circuit", "build_circuit", "benchmark_suite"]


@dataclass(frozen=True)
class BenchmarkSpec:
    family: str  # "ghz" | "w"
    qubit_subset: tuple[int, ...]
    label: str
    trainable: bool = True

    def __post_init__(self):
        if self.family not in ("ghz", "w"):
            raise ValidationError(f"unknown benchmark family '{self.family}'")
        if len(self.qubit_subset) < 2:
            raise ValidationError("benchmark subset needs at least 2 qubits")
        if len(set(self.qubit_subset)) != len(self.qubit_subset):
            raise ValidationError("benchmark subset has duplicate qubits")


def _hub(device: DeviceModel, subset: tuple[int, ...]) -> int:
    """The subset member coupled to every other member."""
    for c in subset:
        if all(s == c or device.has_edge((c, s)) for s in subset):
            return c
    raise ValidationError(
        f"subset {subset} is not realizable: no member couples to all others"
    )


def _check_spec(spec: BenchmarkSpec, device: DeviceModel) -> int:
    active = set(device.active_qubits)
    if not set(spec.qubit_subset) <= active:
        raise ValidationError(
            f"benchmark '{spec.label}' uses inactive qubits "
            f"{sorted(set(spec.qubit_subset) - active)}"
        )
    return _hub(device, spec.qubit_subset)


def _hadamard(qubit: int) -> list[Gate]:
    return [rz(qubit, math.pi), ry(qubit, math.pi / 2)]


def _cnot(control: int, target: int) -> list[Gate]:
    return [*_hadamard(target), cz(control, target), *_hadamard(target)]


def ghz_circuit(spec: BenchmarkSpec, device: DeviceModel) -> Circuit:
    """GHZ preparation: hub superposition fanned out over the star edges."""
    hub = _check_spec(spec, device)
    targets = sorted(q for q in spec.qubit_subset if q != hub)
    gates: list[Gate] = [ry(hub, math.pi / 2)]
    for t in targets:
        # target starts in |0>, so the leading Hadamard reduces to ry(pi/2)
        gates += [ry(t, math.pi / 2), cz(hub, t), *_hadamard(t)]
    gates += [measure(q) for q in sorted(spec.qubit_subset)]
    return Circuit(
        num_qubits=max(q.index for q in device.qubits) + 1,
        gates=tuple(gates),
        label=spec.label,
    )


def w_circuit(spec: BenchmarkSpec, device: DeviceModel) -> Circuit:
    """W-state preparation: a single excitation on the hub, split off to each
    leaf in turn by a controlled rotation plus an excitation swap-back."""
    hub = _check_spec(spec, device)
    leaves = sorted(q for q in spec.qubit_subset if q != hub)
    k = len(spec.qubit_subset)
    gates: list[Gate] = [rx(hub, math.pi)]
    for i, leaf in enumerate(leaves, start=1):
        theta = 2.0 * math.asin(math.sqrt(1.0 / (k - i + 1)))
        # controlled-ry(theta) from hub onto the leaf
        gates += [ry(leaf, theta / 2), *_cnot(hub, leaf)]
        gates += [ry(leaf, -theta / 2), *_cnot(hub, leaf)]
        # return the excitation to the hub branch
        gates += _cnot(leaf, hub)
    gates += [measure(q) for q in sorted(spec.qubit_subset)]
    return Circuit(
        num_qubits=max(q.index for q in device.qubits) + 1,
        gates=tuple(gates),
        label=spec.label,
    )


def build_circuit(spec: BenchmarkSpec, device: DeviceModel) -> Circuit:
    builder = ghz_circuit if spec.family == "ghz" else w_circuit
    return builder(spec, device)


def benchmark_suite(device: DeviceModel) -> tuple[BenchmarkSpec, ...]:
    """The fixed 8-circuit benchmark cluster for a 4-active-qubit star.

    GHZ and W over every 3-qubit active subset containing the hub (trainable)
    plus GHZ and W over all four active qubits (test-only). Deterministic
    composition and labels.
    """
    active = tuple(sorted(device.active_qubits))
    if len(active) < 4:
        raise ValidationError("benchmark suite needs at least 4 active qubits")
    hub = _hub(device, active)
    others = [q for q in active if q != hub]
    specs: list[BenchmarkSpec] = []
    for i in range(len(others)):
        for j in range(i + 1, len(others)):
            subset = tuple(sorted((hub, others[i], others[j])))
            tag = "".join(str(q) for q in subset)
            specs.append(BenchmarkSpec("ghz", subset, f"ghz_{tag}", trainable=True))
            specs.append(BenchmarkSpec("w", subset, f"w_{tag}", trainable=True))
    full = tuple(active)
    tag = "".join(str(q) for q in full)
    specs.append(BenchmarkSpec("ghz", full, f"ghz_{tag}", trainable=False))
    specs.append(BenchmarkSpec("w", full, f"w_{tag}", trainable=False))
    return tuple(specs)
