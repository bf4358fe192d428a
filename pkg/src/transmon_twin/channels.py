"""Constructors for the noise channels as explicit Kraus-operator sets.

Every channel is a CPTP map represented by a finite list of 2x2 or 4x4
complex matrices. Constructors are closed-form, so completeness
(sum K^dag K = I) is validated at 1e-12 absolute on construction.
Channels are immutable values; construction and application are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .validation import ValidationError, check_in_range, check_probability

__all__ = [
    "QuantumChannel",
    "identity_channel",
    "amplitude_damping",
    "dephasing",
    "two_qubit_dephasing",
    "thermal_decay",
    "zz_phase",
    "zz_phase_channel",
    "dephasing_from_fidelity",
    "two_qubit_dephasing_from_fidelity",
    "compose",
    "thermal_state",
]

COMPLETENESS_TOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A CPTP map over one or two qubits as a Kraus-operator set."""

    kraus_ops: tuple[np.ndarray, ...]
    label: str

    def __post_init__(self):
        dim = self.kraus_ops[0].shape[0]
        if dim not in (2, 4):
            raise ValidationError(f"channel '{self.label}': unsupported dimension {dim}")
        total = np.zeros((dim, dim), dtype=complex)
        for k in self.kraus_ops:
            if k.shape != (dim, dim):
                raise ValidationError(f"channel '{self.label}': inconsistent Kraus shapes")
            total += k.conj().T @ k
        if np.max(np.abs(total - np.eye(dim))) > COMPLETENESS_TOL:
            raise ValidationError(
                f"channel '{self.label}' violates Kraus completeness by "
                f"{np.max(np.abs(total - np.eye(dim))):.3e}"
            )
        for k in self.kraus_ops:
            k.setflags(write=False)

    @property
    def arity(self) -> int:
        return 1 if self.kraus_ops[0].shape[0] == 2 else 2

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Apply the map to a density matrix of matching dimension."""
        out = np.zeros_like(rho)
        for k in self.kraus_ops:
            out += k @ rho @ k.conj().T
        return out

    def __repr__(self):
        return f"QuantumChannel({self.label})"


@lru_cache(maxsize=64)
def identity_channel(arity: int = 1) -> QuantumChannel:
    dim = 2**arity
    return QuantumChannel((np.eye(dim, dtype=complex),), label=f"id{arity}")


# channels are immutable values, so the parametric constructors memoize:
# the fitter rebuilds the same channels for every candidate and circuit


@lru_cache(maxsize=16384)
def amplitude_damping(gamma: float, p_excited: float) -> QuantumChannel:
    """Generalized amplitude damping toward the thermal state.

    The four Kraus operators damp toward the single-qubit thermal state with
    excited population ``p_excited``; ``gamma`` in [0, 1] controls the damping
    strength and gamma = 1 maps every input to that thermal state.
    """
    g = check_probability("gamma", gamma)
    p = check_probability("p_excited", p_excited)
    sq = math.sqrt
    ops = (
        sq(1 - p) * np.array([[1, 0], [0, sq(1 - g)]], dtype=complex),
        sq(1 - p) * np.array([[0, sq(g)], [0, 0]], dtype=complex),
        sq(p) * np.array([[sq(1 - g), 0], [0, 1]], dtype=complex),
        sq(p) * np.array([[0, 0], [sq(g), 0]], dtype=complex),
    )
    return QuantumChannel(ops, label=f"gamp(gamma={g!r},p1={p!r})")


@lru_cache(maxsize=16384)
def dephasing(delta: float) -> QuantumChannel:
    """Phase-flip channel: rho -> (1 - delta) rho + delta Z rho Z."""
    d = check_in_range("delta", delta, 0.0, 0.5)
    ops = (math.sqrt(1 - d) * _I2, math.sqrt(d) * _Z)
    return QuantumChannel(ops, label=f"deph(delta={d!r})")


@lru_cache(maxsize=16384)
def two_qubit_dephasing(delta2: float) -> QuantumChannel:
    """Two-qubit dephasing: mixes Z x I, I x Z and Z x Z flips equally.

    rho -> (1 - delta2) rho + delta2/3 (Z1 rho Z1 + Z2 rho Z2 + Z1Z2 rho Z1Z2)
    with delta2 in [0, 3/4].
    """
    d = check_in_range("delta2", delta2, 0.0, 0.75)
    w = math.sqrt(d / 3.0)
    ops = (
        math.sqrt(1 - d) * np.eye(4, dtype=complex),
        w * np.kron(_Z, _I2),
        w * np.kron(_I2, _Z),
        w * np.kron(_Z, _Z),
    )
    return QuantumChannel(ops, label=f"deph2(delta2={d!r})")


@lru_cache(maxsize=16384)
def thermal_decay(t1: float, t2: float, p_excited: float, dt: float) -> QuantumChannel:
    """T1/T2 decay over a duration: dephasing composed after damping.

    The damping strength is 1 - exp(-dt/T1) and the dephasing probability
    (1 - exp(-dt/T2))/2, so for dt >> T1, T2 any input is driven to the
    thermal state. Materialized as a single Kraus set (product closure,
    at most 8 operators).
    """
    if dt < 0:
        raise ValidationError(f"decay duration must be >= 0, got {dt}")
    if not (t1 > 0 and t2 > 0):
        raise ValidationError(f"t1 and t2 must be > 0, got t1={t1}, t2={t2}")
    gamma = 1.0 - math.exp(-dt / t1)
    delta = 0.5 * (1.0 - math.exp(-dt / t2))
    channel = compose(dephasing(delta), amplitude_damping(gamma, p_excited))
    return QuantumChannel(
        channel.kraus_ops, label=f"decay(t1={t1!r},t2={t2!r},p1={p_excited!r},dt={dt!r})"
    )


def zz_phase(angle: float) -> np.ndarray:
    """Diagonal two-qubit unitary exp(-i * angle * Z x Z)."""
    lo = complex(math.cos(angle), -math.sin(angle))
    hi = lo.conjugate()
    return np.diag([lo, hi, hi, lo]).astype(complex)


@lru_cache(maxsize=16384)
def zz_phase_channel(rate: float, duration: float) -> QuantumChannel:
    """Always-on ZZ crosstalk over a layer, as a one-operator unitary channel."""
    if duration < 0:
        raise ValidationError(f"crosstalk duration must be >= 0, got {duration}")
    angle = rate * duration
    return QuantumChannel(
        (zz_phase(angle),), label=f"crosstalk(rate={rate!r},d={duration!r})"
    )


def dephasing_from_fidelity(fbar: float) -> float:
    """Single-qubit dephasing probability from average gate fidelity:
    delta1 = 3/2 (1 - F), valid for F in [2/3, 1]."""
    f = check_in_range("single-qubit fidelity", fbar, 2.0 / 3.0, 1.0)
    return 1.5 * (1.0 - f)


def two_qubit_dephasing_from_fidelity(fbar2: float) -> float:
    """Two-qubit dephasing probability from average CZ fidelity:
    delta2 = 5 (1 - F2) / 4, valid for F2 in [0.4, 1]."""
    f = check_in_range("CZ fidelity", fbar2, 0.4, 1.0)
    return 5.0 * (1.0 - f) / 4.0


def compose(after: QuantumChannel, before: QuantumChannel) -> QuantumChannel:
    """Channel composition after o before as the Kraus product closure."""
    if after.arity != before.arity:
        raise ValidationError("cannot compose channels of different arity")
    ops = tuple(a @ b for a in after.kraus_ops for b in before.kraus_ops)
    return QuantumChannel(ops, label=f"({after.label} o {before.label})")


def thermal_state(p_excited: float) -> np.ndarray:
    """Single-qubit thermal state (1-p)|0><0| + p|1><1|."""
    p = check_probability("p_excited", p_excited)
    return np.diag([1.0 - p, p]).astype(complex)
