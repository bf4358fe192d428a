"""Dependency DAG, layer partition and as-late-as-possible scheduling.

The scheduler turns a gate list into sequential layers, each holding at most
one timed instruction per qubit. Virtual gates (rz, barrier) consume no time
and ride along inside the layer of the next timed instruction on their wire,
preserving wire order. Every timed gate is placed in the latest layer its
successors allow (measurements form a single terminal layer), which is what
"as late as possible" means at layer granularity.

Per layer the schedule records each qubit's busy time and idle gap; gates are
aligned to the layer start, so slack trails the instruction. All timelines end
together: each qubit's busy + idle time in a layer equals the layer duration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuits import Circuit, Gate
from .device import DeviceModel
from .validation import ValidationError

__all__ = ["build_dag", "schedule_alap", "ScheduledLayer", "ScheduledCircuit"]

# gaps below a femtosecond are floating-point dust, not physics
_TIME_EPS = 1e-15


def build_dag(circuit: Circuit) -> list[list[int]]:
    """Adjacency list of gate dependencies.

    Nodes are gate positions in the circuit; an edge i -> j means gate j
    consumes a qubit last touched by gate i (barriers fence all their qubits,
    a bare barrier fences every wire). Topological order is the input order.
    """
    successors: list[list[int]] = [[] for _ in circuit.gates]
    last_on_wire: dict[int, int] = {}
    for j, gate in enumerate(circuit.gates):
        wires = gate.qubits if gate.qubits else tuple(range(circuit.num_qubits))
        preds = {last_on_wire[q] for q in wires if q in last_on_wire}
        for i in sorted(preds):
            successors[i].append(j)
        for q in wires:
            last_on_wire[q] = j
    return successors


@dataclass(frozen=True)
class ScheduledLayer:
    """One time slice of the schedule.

    ``gates`` keeps the original circuit order (so wire order between a
    virtual gate and its timed successor is preserved). ``gate_durations``
    maps participating qubits to their instruction time; ``idle_before``
    holds leading gaps for hand-built schedules (the ALAP scheduler always
    aligns gates to the layer start, leaving only trailing slack).
    """

    gates: tuple[Gate, ...]
    start: float
    duration: float
    gate_durations: dict[int, float]
    idle_before: dict[int, float]
    is_measurement: bool = False

    def busy_time(self, qubit: int) -> float:
        return self.gate_durations.get(qubit, 0.0)

    def idle_gaps(self, qubit: int) -> tuple[float, float]:
        """(leading, trailing) idle time for a qubit inside this layer."""
        pre = self.idle_before.get(qubit, 0.0)
        post = self.duration - self.busy_time(qubit) - pre
        if abs(pre) < _TIME_EPS:
            pre = 0.0
        if abs(post) < _TIME_EPS:
            post = 0.0
        return pre, max(post, 0.0)

    def idle_time(self, qubit: int) -> float:
        pre, post = self.idle_gaps(qubit)
        return pre + post


@dataclass(frozen=True)
class ScheduledCircuit:
    circuit: Circuit
    layers: tuple[ScheduledLayer, ...]

    @property
    def num_qubits(self) -> int:
        return self.circuit.num_qubits

    @property
    def total_duration(self) -> float:
        return sum(layer.duration for layer in self.layers)

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        return self.circuit.measured_qubits

    def gate_sequence(self) -> tuple[Gate, ...]:
        """All gates in schedule order (used by strip-and-compare checks)."""
        return tuple(g for layer in self.layers for g in layer.gates)


def schedule_alap(
    circuit: Circuit, device: DeviceModel, *, mode: str = "alap"
) -> ScheduledCircuit:
    """Partition a circuit into timed layers (ALAP by default).

    ``mode="asap"`` exists as a test-only toggle; it packs gates as early as
    possible instead. Measurements always land in one final layer.

    Raises:
        ValidationError: when a gate kind has no configured duration, or a CZ
            sits on a pair that is not a coupling edge.
    """
    if mode not in ("alap", "asap"):
        raise ValidationError(f"unknown scheduling mode '{mode}'")
    for gate in circuit.gates:
        if gate.is_timed:
            device.duration(gate.kind)
        if gate.kind == "cz" and not device.has_edge(gate.qubits):
            raise ValidationError(
                f"cz on ({gate.qubits[0]}, {gate.qubits[1]}) is not a coupling edge"
            )

    successors = build_dag(circuit)
    predecessors: list[list[int]] = [[] for _ in circuit.gates]
    for i, succ in enumerate(successors):
        for j in succ:
            predecessors[j].append(i)

    timed = [
        i
        for i, g in enumerate(circuit.gates)
        if g.is_timed and g.kind != "measure"
    ]
    measures = [i for i, g in enumerate(circuit.gates) if g.kind == "measure"]
    virtual = [i for i, g in enumerate(circuit.gates) if not g.is_timed]

    depth = _layer_depths(circuit, successors, predecessors, mode)
    num_timed_layers = max((depth[i] for i in timed), default=0)

    # Bucket timed gates per layer; rz/barrier attach to the layer of the next
    # timed instruction on their wire (the measurement layer if none).
    buckets: dict[int, list[int]] = {k: [] for k in range(1, num_timed_layers + 1)}
    measure_bucket: list[int] = list(measures)
    tail_bucket: list[int] = []
    for i in timed:
        buckets[depth[i]].append(i)
    for i in virtual:
        target = _next_timed_layer(i, successors, circuit, depth)
        if target == "measure":
            measure_bucket.append(i)
        elif target is None:
            tail_bucket.append(i)
        else:
            buckets[target].append(i)
    if tail_bucket:
        if num_timed_layers:
            buckets[num_timed_layers].extend(tail_bucket)
        else:
            buckets = {1: tail_bucket}
            num_timed_layers = 1

    layers: list[ScheduledLayer] = []
    clock = 0.0
    for k in range(1, num_timed_layers + 1):
        members = sorted(buckets.get(k, ()))
        gates = tuple(circuit.gates[i] for i in members)
        durations: dict[int, float] = {}
        for g in gates:
            if not g.is_timed:
                continue
            d = device.duration(g.kind)
            for q in g.qubits:
                if q in durations:
                    raise ValidationError(f"layer {k} holds two timed gates on qubit {q}")
                durations[q] = d
        layer_duration = max(durations.values(), default=0.0)
        layers.append(
            ScheduledLayer(
                gates=gates,
                start=clock,
                duration=layer_duration,
                gate_durations=durations,
                idle_before={},
            )
        )
        clock += layer_duration
    if measures:
        members = sorted(measure_bucket)
        gates = tuple(circuit.gates[i] for i in members)
        d = device.duration("measure")
        durations = {g.qubits[0]: d for g in gates if g.kind == "measure"}
        layers.append(
            ScheduledLayer(
                gates=gates,
                start=clock,
                duration=d,
                gate_durations=durations,
                idle_before={},
                is_measurement=True,
            )
        )
    return ScheduledCircuit(circuit=circuit, layers=tuple(layers))


def _layer_depths(circuit, successors, predecessors, mode) -> dict[int, int]:
    """Layer index (1-based, from the front) for every timed non-measure gate.

    ALAP: a gate's distance from the end equals the longest chain of timed
    gates after it, so it sits in the latest layer its successors allow.
    Virtual gates are transparent (they add no thickness); measurements act
    as the terminal boundary.
    """
    n = len(circuit.gates)

    def thickness(i: int) -> int:
        g = circuit.gates[i]
        return 1 if (g.is_timed and g.kind != "measure") else 0

    if mode == "alap":
        rdepth = [0] * n
        for i in reversed(range(n)):
            below = max((rdepth[j] for j in successors[i]), default=0)
            rdepth[i] = below + thickness(i)
        total = max(rdepth, default=0)
        return {i: total - rdepth[i] + 1 for i in range(n) if thickness(i)}
    fdepth = [0] * n
    for i in range(n):
        above = max((fdepth[j] for j in predecessors[i]), default=0)
        fdepth[i] = above + thickness(i)
    return {i: fdepth[i] for i in range(n) if thickness(i)}


def _next_timed_layer(i, successors, circuit, depth):
    """Layer a virtual gate attaches to: its earliest timed descendant's."""
    frontier = list(successors[i])
    best: int | None = None
    hits_measure = False
    while frontier:
        j = frontier.pop()
        g = circuit.gates[j]
        if g.kind == "measure":
            hits_measure = True
        elif g.is_timed:
            best = depth[j] if best is None else min(best, depth[j])
        else:
            frontier.extend(successors[j])
    if best is not None:
        return best
    return "measure" if hits_measure else None
