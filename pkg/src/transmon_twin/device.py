"""Device calibration model: the physical snapshot the noise model consumes.

A :class:`DeviceModel` bundles per-qubit physics (coherence times, residual
excitation, readout confusion, single-qubit gate fidelity), per-pair coupling
data (quasi-coupling strength, CZ fidelity), gate durations and the coupling
topology. Calibration files are TOML with sections ``[device]``, ``[qubit.N]``,
``[coupling.U_V]`` and ``[durations]``; see the README for the schema.

Units: files store frequencies in GHz, anharmonicities in MHz, coupling
strengths in kHz and all times in ns. Everything is converted to SI (Hz,
seconds) on load and stays SI internally.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .validation import ValidationError, check_confusion_matrix, check_probability

__all__ = [
    "QubitCalibration",
    "CouplingCalibration",
    "DeviceModel",
    "load_device",
    "save_device",
    "zz_rate",
    "bundled_device_path",
]

TWO_PI = 2.0 * math.pi

GHZ = 1e9
MHZ = 1e6
KHZ = 1e3
NS = 1e-9


@dataclass(frozen=True, eq=False)
class QubitCalibration:
    """Calibration snapshot for one qubit (SI units).

    Attributes:
        index: qubit label on the device.
        frequency: qubit transition frequency in Hz.
        anharmonicity: transmon anharmonicity in Hz.
        t1: longitudinal relaxation time in seconds.
        t2: transversal dephasing time in seconds.
        p_excited: residual excited-state population after reset.
        confusion: 2x2 readout confusion matrix, rows = observed outcome,
            columns = prepared state.
        single_qubit_fidelity: average single-qubit gate fidelity from
            randomized benchmarking.
    """

    index: int
    frequency: float
    anharmonicity: float
    t1: float
    t2: float
    p_excited: float
    confusion: np.ndarray
    single_qubit_fidelity: float

    def __post_init__(self):
        tag = f"qubit {self.index}"
        check_probability(f"{tag} p_excited", self.p_excited)
        if not self.t1 > 0:
            raise ValidationError(f"{tag}: t1 must be > 0, got {self.t1}")
        if not self.t2 > 0:
            raise ValidationError(f"{tag}: t2 must be > 0, got {self.t2}")
        if self.t2 > 2.0 * self.t1:
            raise ValidationError(f"{tag}: t2 exceeds 2*t1 ({self.t2} > 2*{self.t1})")
        if not (0.5 <= self.single_qubit_fidelity <= 1.0):
            raise ValidationError(
                f"{tag}: single_qubit_fidelity must lie in [0.5, 1], "
                f"got {self.single_qubit_fidelity}"
            )
        m = check_confusion_matrix(self.confusion, context=f"{tag} confusion matrix")
        m.setflags(write=False)
        object.__setattr__(self, "confusion", m)


@dataclass(frozen=True)
class CouplingCalibration:
    """Calibration for one fixed coupler.

    ``qubits`` is frequency-ordered: the first entry is the higher-frequency
    qubit, so the detuning used by :func:`zz_rate` is positive. ``key`` gives
    the label-ordered (min, max) pair used everywhere deterministic edge
    ordering matters.
    """

    qubits: tuple[int, int]
    coupling_j: float
    cz_fidelity: float | None = None

    def __post_init__(self):
        u, v = self.qubits
        if u == v:
            raise ValidationError(f"coupling ({u}, {v}) is a self-loop")
        if self.coupling_j < 0:
            raise ValidationError(
                f"coupling ({u}, {v}): coupling_j must be >= 0, got {self.coupling_j}"
            )
        if self.cz_fidelity is not None and not (0.25 <= self.cz_fidelity <= 1.0):
            raise ValidationError(
                f"coupling ({u}, {v}): cz_fidelity must lie in [0.25, 1], "
                f"got {self.cz_fidelity}"
            )

    @property
    def key(self) -> tuple[int, int]:
        return (min(self.qubits), max(self.qubits))


@dataclass(frozen=True)
class DeviceModel:
    """Immutable calibration snapshot of the whole device.

    Safe to share read-only across concurrent circuit evaluations.
    """

    name: str
    qubits: tuple[QubitCalibration, ...]
    couplings: tuple[CouplingCalibration, ...]
    durations: dict[str, float]
    active_qubits: tuple[int, ...]

    def __post_init__(self):
        indices = {q.index for q in self.qubits}
        if len(indices) != len(self.qubits):
            raise ValidationError("duplicate qubit indices in device")
        seen = set()
        for c in self.couplings:
            if c.key in seen:
                raise ValidationError(f"duplicate coupling edge {c.key}")
            seen.add(c.key)
            for q in c.qubits:
                if q not in indices:
                    raise ValidationError(f"coupling {c.key} references unknown qubit {q}")
            hi, lo = c.qubits
            if self.qubit(hi).frequency <= self.qubit(lo).frequency:
                raise ValidationError(
                    f"coupling {c.key}: first qubit must have the higher frequency"
                )
        for kind, dur in self.durations.items():
            if dur < 0:
                raise ValidationError(f"duration for '{kind}' must be >= 0, got {dur}")
        if self.durations.get("rz", 0.0) != 0.0:
            raise ValidationError("rz is a virtual gate and must have duration 0")
        for q in self.active_qubits:
            if q not in indices:
                raise ValidationError(f"active qubit {q} not in device")

    def qubit(self, index: int) -> QubitCalibration:
        for q in self.qubits:
            if q.index == index:
                return q
        raise ValidationError(f"no qubit with index {index}")

    def coupling(self, pair: tuple[int, int]) -> CouplingCalibration:
        key = (min(pair), max(pair))
        for c in self.couplings:
            if c.key == key:
                return c
        raise ValidationError(f"no coupling between qubits {pair}")

    def has_edge(self, pair: tuple[int, int]) -> bool:
        key = (min(pair), max(pair))
        return any(c.key == key for c in self.couplings)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Coupling edges as label-ordered (min, max) pairs, sorted."""
        return tuple(sorted(c.key for c in self.couplings))

    def neighbors(self, qubit: int) -> tuple[int, ...]:
        out = []
        for c in self.couplings:
            if qubit in c.qubits:
                out.append(c.qubits[0] if c.qubits[1] == qubit else c.qubits[1])
        return tuple(sorted(out))

    def duration(self, kind: str) -> float:
        try:
            return self.durations[kind]
        except KeyError:
            raise ValidationError(f"no duration configured for gate kind '{kind}'") from None

    def idealized(self) -> "DeviceModel":
        """Copy with perfect fidelities, no residual excitation, identity
        readout and infinite coherence. Used for ideal-limit checks."""
        inf = float("inf")
        qubits = tuple(
            replace(
                q,
                t1=inf,
                t2=inf,
                p_excited=0.0,
                confusion=np.eye(2),
                single_qubit_fidelity=1.0,
            )
            for q in self.qubits
        )
        couplings = tuple(replace(c, cz_fidelity=1.0) for c in self.couplings)
        return replace(self, qubits=qubits, couplings=couplings)

    def content_hash(self) -> str:
        """Stable hash of the calibration content, embedded in reports."""
        payload = json.dumps(_to_plain(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def zz_rate(device: DeviceModel, pair: tuple[int, int]) -> float:
    """Always-on ZZ interaction rate for a coupled pair, in rad/s.

    Computed from the pair's quasi-coupling strength J, the detuning
    Delta = f_u - f_v (higher minus lower frequency) and the two
    anharmonicities: 2*pi * J^2 * (1/(Delta - a_u) - 1/(Delta - a_v)).
    The 2*pi makes the result an angular rate so that the crosstalk phase
    over a duration d is directly rate*d.

    Raises:
        ValidationError: if the pair is not a coupling edge or the detuning
            coincides with an anharmonicity (interaction pole).
    """
    coupling = device.coupling(pair)
    return zz_rate_from(
        coupling.coupling_j,
        device.qubit(coupling.qubits[0]),
        device.qubit(coupling.qubits[1]),
    )


def zz_rate_from(
    coupling_j: float, high: QubitCalibration, low: QubitCalibration
) -> float:
    """Same as :func:`zz_rate` but with an explicit J (used by the fitter)."""
    delta = high.frequency - low.frequency
    for q in (high, low):
        if delta == q.anharmonicity:
            raise ValidationError(
                f"crosstalk pole: detuning equals anharmonicity on qubit {q.index}"
            )
    return (
        TWO_PI
        * coupling_j**2
        * (1.0 / (delta - high.anharmonicity) - 1.0 / (delta - low.anharmonicity))
    )


# --- calibration file I/O ---------------------------------------------------


def load_device(path: str | Path) -> DeviceModel:
    """Load and validate a calibration file.

    Raises:
        ValidationError: on a malformed file or any violated invariant; the
            message names the offending qubit or pair.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"calibration file not found: {path}")
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"cannot parse calibration file {path}: {exc}") from exc
    return device_from_dict(data)


def device_from_dict(data: dict) -> DeviceModel:
    dev = data.get("device", {})
    qubits = []
    for key, section in sorted(data.get("qubit", {}).items(), key=lambda kv: int(kv[0])):
        index = int(key)
        try:
            qubits.append(
                QubitCalibration(
                    index=index,
                    frequency=float(section["frequency_ghz"]) * GHZ,
                    anharmonicity=float(section["anharmonicity_mhz"]) * MHZ,
                    t1=float(section["t1_ns"]) * NS,
                    t2=float(section["t2_ns"]) * NS,
                    p_excited=float(section["p_excited"]),
                    confusion=section["confusion"],
                    single_qubit_fidelity=float(section["single_qubit_fidelity"]),
                )
            )
        except KeyError as exc:
            raise ValidationError(f"qubit {index}: missing field {exc}") from exc
    couplings = []
    for key, section in sorted(data.get("coupling", {}).items()):
        try:
            a, b = (int(part) for part in key.split("_"))
        except ValueError:
            raise ValidationError(
                f"coupling section name must be 'U_V' with integer labels, got '{key}'"
            ) from None
        by_index = {q.index: q for q in qubits}
        if a not in by_index or b not in by_index:
            raise ValidationError(f"coupling {key} references unknown qubit")
        hi, lo = (a, b) if by_index[a].frequency > by_index[b].frequency else (b, a)
        fid = section.get("cz_fidelity")
        couplings.append(
            CouplingCalibration(
                qubits=(hi, lo),
                coupling_j=float(section["coupling_khz"]) * KHZ,
                cz_fidelity=None if fid is None else float(fid),
            )
        )
    durations = {k: float(v) * NS for k, v in data.get("durations", {}).items()}
    return DeviceModel(
        name=str(dev.get("name", "unnamed")),
        qubits=tuple(qubits),
        couplings=tuple(couplings),
        durations=durations,
        active_qubits=tuple(int(q) for q in dev.get("active_qubits", [])),
    )


def save_device(device: DeviceModel, path: str | Path) -> None:
    """Write a calibration file that round-trips through :func:`load_device`."""
    lines = ["[device]", f'name = "{device.name}"']
    lines.append(f"active_qubits = [{', '.join(str(q) for q in device.active_qubits)}]")
    lines.append("")
    lines.append("[durations]")
    for kind, dur in sorted(device.durations.items()):
        lines.append(f"{kind} = {dur / NS!r}")
    for q in device.qubits:
        lines.append("")
        lines.append(f"[qubit.{q.index}]")
        lines.append(f"frequency_ghz = {q.frequency / GHZ!r}")
        lines.append(f"anharmonicity_mhz = {q.anharmonicity / MHZ!r}")
        lines.append(f"t1_ns = {q.t1 / NS!r}")
        lines.append(f"t2_ns = {q.t2 / NS!r}")
        lines.append(f"p_excited = {q.p_excited!r}")
        rows = ", ".join(
            "[" + ", ".join(repr(float(x)) for x in row) + "]" for row in q.confusion
        )
        lines.append(f"confusion = [{rows}]")
        lines.append(f"single_qubit_fidelity = {q.single_qubit_fidelity!r}")
    for c in device.couplings:
        lines.append("")
        lines.append(f"[coupling.{c.key[0]}_{c.key[1]}]")
        lines.append(f"coupling_khz = {c.coupling_j / KHZ!r}")
        if c.cz_fidelity is not None:
            lines.append(f"cz_fidelity = {c.cz_fidelity!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def bundled_device_path() -> Path:
    """Path of the example calibration file shipped with the package."""
    return Path(__file__).parent / "data" / "soprano_d.toml"


def _to_plain(device: DeviceModel) -> dict:
    return {
        "name": device.name,
        "active_qubits": list(device.active_qubits),
        "durations": {k: repr(v) for k, v in sorted(device.durations.items())},
        "qubits": [
            {
                "index": q.index,
                "frequency": repr(q.frequency),
                "anharmonicity": repr(q.anharmonicity),
                "t1": repr(q.t1),
                "t2": repr(q.t2),
                "p_excited": repr(q.p_excited),
                "confusion": [[repr(float(x)) for x in row] for row in q.confusion],
                "single_qubit_fidelity": repr(q.single_qubit_fidelity),
            }
            for q in device.qubits
        ],
        "couplings": [
            {
                "qubits": list(c.qubits),
                "coupling_j": repr(c.coupling_j),
                "cz_fidelity": None if c.cz_fidelity is None else repr(c.cz_fidelity),
            }
            for c in device.couplings
        ],
    }
