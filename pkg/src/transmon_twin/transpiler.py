"""Noise transpilation: turn a scheduled circuit into a noisy instruction stream.

Error rules, applied per layer in a fixed, documented order (the physical
ordering is arbitrary, so one deterministic choice is pinned and every inserted
instruction carries a rule tag for auditing):

1. state preparation (before the first layer): full-strength damping to each
   register qubit's thermal state;
2. per gate, in layer order: the gate, then its dephasing error (single-qubit
   dephasing after rx/ry, two-qubit dephasing after cz; rz is virtual and
   error-free); any leading idle gap on the gate's qubits decays *before* it;
3. trailing idle decay for every register qubit with slack in the layer
   (decay during a gate's own execution is considered part of the gate error);
4. always-on ZZ crosstalk, pairwise over every coupling edge touching the
   circuit, in ascending label order, for the maximum busy time of the pair.

The simulated register is expanded to include inactive coupled neighbors; they
receive state prep and idle decay but no gates. Readout confusion is classical
and attached as post-processing metadata, not as channel instructions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .channels import (
    QuantumChannel,
    amplitude_damping,
    dephasing,
    dephasing_from_fidelity,
    thermal_decay,
    two_qubit_dephasing,
    two_qubit_dephasing_from_fidelity,
    zz_phase_channel,
)
from .circuits import Gate
from .device import DeviceModel, zz_rate_from
from .scheduling import ScheduledCircuit, ScheduledLayer
from .validation import ValidationError

__all__ = [
    "NoiseToggles",
    "NoiseParams",
    "NoiseOp",
    "NoisyLayer",
    "NoisyCircuit",
    "crosstalk_edges",
    "transpile_noise",
    "format_noisy_circuit",
    "params_to_dict",
    "params_from_dict",
]


@dataclass(frozen=True)
class NoiseToggles:
    """Switches for the individual error families."""

    single_qubit_gate_error: bool = True
    two_qubit_gate_error: bool = True
    spam_error: bool = True
    passive_decay: bool = True
    crosstalk: bool = True

    def replace(self, **kwargs) -> "NoiseToggles":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class NoiseParams:
    """Free parameters of the noise model plus the error toggles.

    ``coupling_mode`` selects whether one shared J drives every coupler
    ("shared") or each edge keeps its own value ("per-pair"). ``j_values``
    maps label-ordered edges to J in Hz; in shared mode all entries are equal.
    ``cz_fidelities`` maps edges to average CZ fidelities; an edge only needs
    an entry if a CZ acts on it. ``decay_during_measurement`` controls whether
    unmeasured register qubits keep decaying during the measurement layer.
    """

    coupling_mode: str = "shared"
    j_values: dict[tuple[int, int], float] = field(default_factory=dict)
    cz_fidelities: dict[tuple[int, int], float] = field(default_factory=dict)
    toggles: NoiseToggles = field(default_factory=NoiseToggles)
    decay_during_measurement: bool = True

    def __post_init__(self):
        if self.coupling_mode not in ("shared", "per-pair"):
            raise ValidationError(f"unknown coupling_mode '{self.coupling_mode}'")
        for edge, j in self.j_values.items():
            if j < 0:
                raise ValidationError(f"J for edge {edge} must be >= 0, got {j}")
        if self.coupling_mode == "shared" and len(set(self.j_values.values())) > 1:
            raise ValidationError("shared coupling_mode requires one common J value")
        for edge, f in self.cz_fidelities.items():
            two_qubit_dephasing_from_fidelity(f)  # range check

    @classmethod
    def from_device(cls, device: DeviceModel, *, coupling_mode: str = "per-pair",
                    toggles: NoiseToggles | None = None) -> "NoiseParams":
        """Seed parameters from the calibration snapshot."""
        j_values = {c.key: c.coupling_j for c in device.couplings}
        if coupling_mode == "shared" and j_values:
            common = max(j_values.values())
            j_values = {k: common for k in j_values}
        fidelities = {
            c.key: c.cz_fidelity for c in device.couplings if c.cz_fidelity is not None
        }
        return cls(
            coupling_mode=coupling_mode,
            j_values=j_values,
            cz_fidelities=fidelities,
            toggles=toggles or NoiseToggles(),
        )

    def with_toggles(self, **kwargs) -> "NoiseParams":
        return replace(self, toggles=self.toggles.replace(**kwargs))

    def j_for(self, edge: tuple[int, int], device: DeviceModel) -> float:
        key = (min(edge), max(edge))
        if key in self.j_values:
            return self.j_values[key]
        return device.coupling(key).coupling_j

    def fidelity_for(self, edge: tuple[int, int], device: DeviceModel) -> float:
        key = (min(edge), max(edge))
        if key in self.cz_fidelities:
            return self.cz_fidelities[key]
        fid = device.coupling(key).cz_fidelity
        if fid is None:
            raise ValidationError(f"no CZ fidelity available for edge {key}")
        return fid


@dataclass(frozen=True, eq=False)
class NoiseOp:
    """An inserted noise instruction, tagged with the rule that produced it."""

    rule: str
    qubits: tuple[int, ...]
    channel: QuantumChannel
    duration: float = 0.0

    def __repr__(self):
        qs = ",".join(f"q{q}" for q in self.qubits)
        return f"NoiseOp({self.rule}@{qs}: {self.channel.label})"


@dataclass(frozen=True)
class NoisyLayer:
    source: ScheduledLayer
    ops: tuple[Gate | NoiseOp, ...]


@dataclass(frozen=True)
class NoisyCircuit:
    """A scheduled circuit with interleaved noise instructions.

    Stripping every :class:`NoiseOp` from the layers recovers the input
    schedule gate-for-gate. ``confusion`` carries the classical readout maps
    keyed by measured qubit label.
    """

    schedule: ScheduledCircuit
    register: tuple[int, ...]
    prep_ops: tuple[NoiseOp, ...]
    layers: tuple[NoisyLayer, ...]
    confusion: dict[int, np.ndarray]

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        return self.schedule.measured_qubits

    def all_ops(self):
        yield from self.prep_ops
        for layer in self.layers:
            yield from layer.ops

    def stripped_gates(self) -> tuple[Gate, ...]:
        return tuple(
            op for layer in self.layers for op in layer.ops if isinstance(op, Gate)
        )


def crosstalk_edges(
    device: DeviceModel, circuit_qubits: set[int] | tuple[int, ...]
) -> tuple[tuple[int, int], ...]:
    """Coupling edges with at least one endpoint among the circuit qubits,
    in ascending (min label, max label) order."""
    qs = set(circuit_qubits)
    return tuple(
        sorted(c.key for c in device.couplings if qs & set(c.qubits))
    )


def transpile_noise(
    scheduled: ScheduledCircuit, device: DeviceModel, params: NoiseParams
) -> NoisyCircuit:
    """Insert the parametric error model into a scheduled circuit.

    Raises:
        ValidationError: on a CZ outside the coupling graph or missing
            calibration entries for a required edge.
    """
    circuit_qubits = set(scheduled.circuit.used_qubits)
    edges = crosstalk_edges(device, circuit_qubits)
    register = sorted(circuit_qubits | {q for edge in edges for q in edge})
    toggles = params.toggles

    rates = {}
    if toggles.crosstalk:
        for edge in edges:
            coupling = device.coupling(edge)
            rates[edge] = zz_rate_from(
                params.j_for(edge, device),
                device.qubit(coupling.qubits[0]),
                device.qubit(coupling.qubits[1]),
            )

    decay_cache: dict[tuple[int, float], NoiseOp] = {}

    def decay_op(qubit: int, span: float) -> NoiseOp:
        op = decay_cache.get((qubit, span))
        if op is None:
            cal = device.qubit(qubit)
            op = NoiseOp(
                rule="idle_decay",
                qubits=(qubit,),
                channel=thermal_decay(cal.t1, cal.t2, cal.p_excited, span),
                duration=span,
            )
            decay_cache[(qubit, span)] = op
        return op

    prep_ops = tuple(
        NoiseOp(
            rule="state_prep",
            qubits=(q,),
            channel=amplitude_damping(1.0, device.qubit(q).p_excited),
        )
        for q in register
        if toggles.spam_error
    )

    deph1_ops: dict[int, NoiseOp] = {}

    def deph1_op(qubit: int) -> NoiseOp:
        op = deph1_ops.get(qubit)
        if op is None:
            delta = dephasing_from_fidelity(device.qubit(qubit).single_qubit_fidelity)
            op = NoiseOp(
                rule="single_qubit_gate_error",
                qubits=(qubit,),
                channel=dephasing(delta),
            )
            deph1_ops[qubit] = op
        return op

    deph2_ops: dict[tuple[int, int], NoiseOp] = {}

    layers = []
    for layer in scheduled.layers:
        ops: list[Gate | NoiseOp] = []
        for gate in layer.gates:
            if toggles.passive_decay:
                # leading gap (hand-built schedules only; ALAP leaves none)
                for q in gate.qubits:
                    pre, _ = layer.idle_gaps(q)
                    if pre > 0.0 and gate.is_timed:
                        ops.append(decay_op(q, pre))
            ops.append(gate)
            if gate.kind in ("rx", "ry") and toggles.single_qubit_gate_error:
                ops.append(deph1_op(gate.qubits[0]))
            elif gate.kind == "cz" and toggles.two_qubit_gate_error:
                edge = (min(gate.qubits), max(gate.qubits))
                op = deph2_ops.get(edge)
                if op is None:
                    delta2 = two_qubit_dephasing_from_fidelity(
                        params.fidelity_for(edge, device)
                    )
                    op = NoiseOp(
                        rule="two_qubit_gate_error",
                        qubits=gate.qubits,
                        channel=two_qubit_dephasing(delta2),
                    )
                    deph2_ops[edge] = op
                ops.append(op)
        if toggles.passive_decay and (
            not layer.is_measurement or params.decay_during_measurement
        ):
            for q in register:
                _, post = layer.idle_gaps(q)
                if post > 0.0:
                    ops.append(decay_op(q, post))
        if toggles.crosstalk:
            for edge in edges:
                d = max(layer.busy_time(edge[0]), layer.busy_time(edge[1]))
                ops.append(
                    NoiseOp(
                        rule="crosstalk",
                        qubits=edge,
                        channel=zz_phase_channel(rates[edge], d),
                        duration=d,
                    )
                )
        layers.append(NoisyLayer(source=layer, ops=tuple(ops)))

    confusion = {}
    if toggles.spam_error:
        confusion = {
            q: device.qubit(q).confusion for q in scheduled.measured_qubits
        }
    return NoisyCircuit(
        schedule=scheduled,
        register=tuple(register),
        prep_ops=prep_ops,
        layers=tuple(layers),
        confusion=confusion,
    )


def params_to_dict(params: NoiseParams) -> dict:
    """JSON-friendly view of NoiseParams (edges keyed as 'u-v')."""
    return {
        "coupling_mode": params.coupling_mode,
        "j_values": {f"{u}-{v}": j for (u, v), j in sorted(params.j_values.items())},
        "cz_fidelities": {
            f"{u}-{v}": f for (u, v), f in sorted(params.cz_fidelities.items())
        },
        "toggles": {
            "single_qubit_gate_error": params.toggles.single_qubit_gate_error,
            "two_qubit_gate_error": params.toggles.two_qubit_gate_error,
            "spam_error": params.toggles.spam_error,
            "passive_decay": params.toggles.passive_decay,
            "crosstalk": params.toggles.crosstalk,
        },
        "decay_during_measurement": params.decay_during_measurement,
    }


def params_from_dict(data: dict) -> NoiseParams:
    def edge(key: str) -> tuple[int, int]:
        u, v = key.split("-")
        return (int(u), int(v))

    return NoiseParams(
        coupling_mode=data.get("coupling_mode", "shared"),
        j_values={edge(k): float(v) for k, v in data.get("j_values", {}).items()},
        cz_fidelities={
            edge(k): float(v) for k, v in data.get("cz_fidelities", {}).items()
        },
        toggles=NoiseToggles(**data.get("toggles", {})),
        decay_during_measurement=bool(data.get("decay_during_measurement", True)),
    )


def format_noisy_circuit(noisy: NoisyCircuit) -> str:
    """Annotated schedule pretty-printer (one block per layer, rule tags)."""
    ns = 1e-9
    lines = [f"register: {' '.join(f'q{q}' for q in noisy.register)}"]
    if noisy.prep_ops:
        lines.append("prep:")
        for op in noisy.prep_ops:
            lines.append(f"  [state_prep] q{op.qubits[0]} {op.channel.label}")
    for i, layer in enumerate(noisy.layers):
        head = "measurement layer" if layer.source.is_measurement else f"layer {i}"
        lines.append(f"{head} (duration {layer.source.duration / ns:g} ns):")
        for op in layer.ops:
            if isinstance(op, Gate):
                qs = " ".join(f"q{q}" for q in op.qubits)
                angle = "" if op.angle is None else f" {op.angle:.6g}"
                lines.append(f"  [gate] {op.kind} {qs}{angle}".rstrip())
            else:
                qs = " ".join(f"q{q}" for q in op.qubits)
                extra = f" ({op.duration / ns:g} ns)" if op.rule in ("idle_decay", "crosstalk") else ""
                lines.append(f"  [{op.rule}] {qs}{extra}")
    if noisy.confusion:
        lines.append(
            "readout confusion: " + " ".join(f"q{q}" for q in sorted(noisy.confusion))
        )
    return "\n".join(lines) + "\n"
