"""Gate-level circuit representation and the one-gate-per-line text format.

Grammar (one statement per line, ``#`` starts a comment):

    qubits 5            # optional header; otherwise max index + 1 is used
    rx q0 1.5708
    ry q1 -0.7854
    rz q2 3.1416
    cz q0 q2
    barrier             # optional qubit list; bare barrier fences everything
    measure q0 q1 q2

Rotation angles are radians. Noise instructions are never part of user
circuits; they are produced only by the noise transpiler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .validation import ValidationError

__all__ = ["Gate", "Circuit", "rx", "ry", "rz", "cz", "measure", "barrier",
           "parse_circuit", "format_circuit", "load_circuit", "save_circuit"]

ROTATION_KINDS = ("rx", "ry", "rz")
GATE_KINDS = ROTATION_KINDS + ("cz", "measure", "barrier")


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValidationError(f"unknown gate kind '{self.kind}'")
        if self.kind in ROTATION_KINDS:
            if len(self.qubits) != 1:
                raise ValidationError(f"{self.kind} takes exactly one qubit")
            if self.angle is None or not math.isfinite(self.angle):
                raise ValidationError(f"{self.kind} needs a finite angle")
        elif self.kind == "cz":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValidationError("cz takes two distinct qubits")
        if self.kind in ("cz", "measure", "barrier") and self.angle is not None:
            raise ValidationError(f"{self.kind} takes no angle")

    @property
    def is_timed(self) -> bool:
        """Whether the gate occupies physical time (rz and barrier do not)."""
        return self.kind not in ("rz", "barrier")


def rx(qubit: int, angle: float) -> Gate:
    return Gate("rx", (qubit,), angle)


def ry(qubit: int, angle: float) -> Gate:
    return Gate("ry", (qubit,), angle)


def rz(qubit: int, angle: float) -> Gate:
    return Gate("rz", (qubit,), angle)


def cz(a: int, b: int) -> Gate:
    return Gate("cz", (a, b))


def measure(qubit: int) -> Gate:
    return Gate("measure", (qubit,))


def barrier(*qubits: int) -> Gate:
    return Gate("barrier", tuple(qubits))


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list over ``num_qubits`` named wires."""

    num_qubits: int
    gates: tuple[Gate, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        measured: list[int] = []
        last_gate_seen_after_measure: set[int] = set()
        for gate in self.gates:
            for q in gate.qubits:
                if not (0 <= q < self.num_qubits):
                    raise ValidationError(
                        f"gate {gate.kind} references qubit {q} outside "
                        f"0..{self.num_qubits - 1}"
                    )
                if q in measured and gate.kind != "barrier":
                    raise ValidationError(
                        f"qubit {q} is used after its measurement"
                    )
            if gate.kind == "measure":
                q = gate.qubits[0]
                if q in measured:
                    raise ValidationError(f"qubit {q} measured twice")
                measured.append(q)
        object.__setattr__(self, "_measured", tuple(measured))

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        return self._measured

    @property
    def used_qubits(self) -> tuple[int, ...]:
        """Qubits that carry at least one gate or measurement."""
        used = set()
        for gate in self.gates:
            used.update(gate.qubits)
        return tuple(sorted(used))

    def __len__(self) -> int:
        return len(self.gates)


# --- text format --------------------------------------------------------


def parse_circuit(text: str, *, num_qubits: int | None = None, label: str = "") -> Circuit:
    gates: list[Gate] = []
    declared = num_qubits
    max_index = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0].lower(), parts[1:]

        def fail(msg: str):
            raise ValidationError(f"line {lineno}: {msg} ('{line}')")

        if kind == "qubits":
            if len(args) != 1 or not args[0].isdigit():
                fail("qubits header takes one integer")
            declared = int(args[0])
            continue
        if kind in ROTATION_KINDS:
            if len(args) != 2:
                fail(f"{kind} takes a qubit and an angle")
            q = _parse_qubit(args[0], fail)
            try:
                angle = float(args[1])
            except ValueError:
                fail(f"bad angle '{args[1]}'")
            gates.append(Gate(kind, (q,), angle))
            max_index = max(max_index, q)
        elif kind == "cz":
            if len(args) != 2:
                fail("cz takes two qubits")
            a, b = (_parse_qubit(a, fail) for a in args)
            gates.append(Gate("cz", (a, b)))
            max_index = max(max_index, a, b)
        elif kind == "measure":
            if not args:
                fail("measure takes at least one qubit")
            for arg in args:
                q = _parse_qubit(arg, fail)
                gates.append(Gate("measure", (q,)))
                max_index = max(max_index, q)
        elif kind == "barrier":
            qs = tuple(_parse_qubit(a, fail) for a in args)
            gates.append(Gate("barrier", qs))
            max_index = max(max_index, *qs) if qs else max_index
        else:
            fail(f"unknown statement '{kind}'")
    n = declared if declared is not None else max_index + 1
    if n <= 0:
        raise ValidationError("circuit has no qubits")
    return Circuit(num_qubits=n, gates=tuple(gates), label=label)


def _parse_qubit(token: str, fail) -> int:
    if not token.startswith("q") or not token[1:].isdigit():
        fail(f"bad qubit token '{token}' (expected e.g. q0)")
    return int(token[1:])


def format_circuit(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.num_qubits}"]
    for gate in circuit.gates:
        qs = " ".join(f"q{q}" for q in gate.qubits)
        if gate.kind in ROTATION_KINDS:
            lines.append(f"{gate.kind} {qs} {gate.angle!r}")
        else:
            lines.append(f"{gate.kind} {qs}".rstrip())
    return "\n".join(lines) + "\n"


def load_circuit(path: str | Path, *, num_qubits: int | None = None) -> Circuit:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"circuit file not found: {path}")
    return parse_circuit(path.read_text(), num_qubits=num_qubits, label=path.stem)


def save_circuit(circuit: Circuit, path: str | Path) -> None:
    Path(path).write_text(format_circuit(circuit))
