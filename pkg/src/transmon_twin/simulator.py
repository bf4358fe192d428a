"""Exact density-matrix evaluation of (noisy) circuits.

States are dense 2^n x 2^n complex matrices over the active register, which
keeps every operation a couple of small matmuls (the register is capped at 6
qubits by default). Basis convention: basis index i corresponds to the
bitstring of i written MSB-first, and bit position 0 (leftmost) is the lowest
qubit index in the register. Operators on subsets of qubits are expanded to
the full register once and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .channels import QuantumChannel, zz_phase
from .circuits import Gate
from .validation import ValidationError, check_density_matrix

if TYPE_CHECKING:  # pragma: no cover
    from .transpiler import NoisyCircuit

__all__ = [
    "DensityMatrix",
    "gate_matrix",
    "expand_operator",
    "apply_gate",
    "apply_channel",
    "run_gates",
    "run",
    "probabilities",
    "DEFAULT_MAX_QUBITS",
]

DEFAULT_MAX_QUBITS = 6


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    num_qubits: int
    data: np.ndarray

    @classmethod
    def ground_state(cls, num_qubits: int) -> "DensityMatrix":
        dim = 2**num_qubits
        data = np.zeros((dim, dim), dtype=complex)
        data[0, 0] = 1.0
        return cls(num_qubits, data)

    def validate(
        self, *, herm_tol: float = 1e-10, trace_tol: float = 1e-10, eig_floor: float = -1e-9
    ) -> None:
        check_density_matrix(
            self.data, herm_tol=herm_tol, trace_tol=trace_tol, eig_floor=eig_floor
        )


# --- operator plumbing -------------------------------------------------------

_gate_cache: dict[tuple, np.ndarray] = {}
_expand_cache: dict[tuple, np.ndarray] = {}
_stack_cache: dict[tuple, np.ndarray] = {}
_axes_cache: dict[tuple, tuple] = {}
_EXPAND_CACHE_LIMIT = 16384


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    """Unitary for a gate kind; rotations need an angle, crosstalk uses
    ``kind='zz'`` with the accumulated phase as the angle."""
    key = (kind, angle)
    cached = _gate_cache.get(key)
    if cached is not None:
        return cached
    if kind == "rx":
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        mat = np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    elif kind == "ry":
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        mat = np.array([[c, -s], [s, c]], dtype=complex)
    elif kind == "rz":
        mat = np.array(
            [[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]], dtype=complex
        )
    elif kind == "cz":
        mat = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    elif kind == "zz":
        mat = zz_phase(angle)
    else:
        raise ValidationError(f"gate kind '{kind}' has no unitary")
    mat.setflags(write=False)
    _gate_cache[key] = mat
    return mat


def expand_operator(op: np.ndarray, qubits: tuple[int, ...], num_qubits: int) -> np.ndarray:
    """Embed a 1- or 2-qubit operator on the given register positions via
    identity padding. Results are cached by operator content."""
    if any(not (0 <= q < num_qubits) for q in qubits):
        raise ValidationError(f"qubit positions {qubits} out of range for n={num_qubits}")
    if len(set(qubits)) != len(qubits):
        raise ValidationError(f"repeated qubit in {qubits}")
    key = (op.tobytes(), op.shape[0], qubits, num_qubits)
    cached = _expand_cache.get(key)
    if cached is not None:
        return cached
    k = len(qubits)
    if op.shape != (2**k, 2**k):
        raise ValidationError(
            f"operator shape {op.shape} does not match {k} qubit(s)"
        )
    rest = [q for q in range(num_qubits) if q not in qubits]
    full = np.kron(op, np.eye(2 ** (num_qubits - k), dtype=complex))
    # kron order is (qubits..., rest...); permute tensor axes into 0..n-1.
    order = list(qubits) + rest
    tensor = full.reshape((2,) * (2 * num_qubits))
    perm = [order.index(q) for q in range(num_qubits)]
    tensor = np.transpose(tensor, perm + [num_qubits + p for p in perm])
    full = np.ascontiguousarray(tensor.reshape(2**num_qubits, 2**num_qubits))
    full.setflags(write=False)
    if len(_expand_cache) >= _EXPAND_CACHE_LIMIT:
        _expand_cache.clear()
    _expand_cache[key] = full
    return full


def _compact_superop(ops: tuple[np.ndarray, ...]) -> np.ndarray:
    """Transfer matrix sum_k K (x) conj(K) over the active qubits only
    (4x4 for one qubit, 16x16 for two), cached by operator content."""
    key = tuple(op.tobytes() for op in ops) + (ops[0].shape[0],)
    hit = _stack_cache.get(key)
    if hit is None:
        hit = sum(np.kron(op, op.conj()) for op in ops)
        if len(_stack_cache) >= _EXPAND_CACHE_LIMIT:
            _stack_cache.clear()
        _stack_cache[key] = hit
    return hit


def _axis_orders(qubits: tuple[int, ...], n: int) -> tuple[tuple, tuple]:
    """Axis permutation gathering the active row/col axes up front, plus its
    inverse. Cached; applying a channel is then one reshape-gemm-reshape."""
    key = (qubits, n)
    hit = _axes_cache.get(key)
    if hit is None:
        if any(not (0 <= q < n) for q in qubits) or len(set(qubits)) != len(qubits):
            raise ValidationError(f"qubit positions {qubits} invalid for n={n}")
        rest = [q for q in range(n) if q not in qubits]
        perm = [*qubits, *(n + q for q in qubits), *rest, *(n + q for q in rest)]
        inv = np.argsort(perm)
        hit = (tuple(perm), tuple(int(i) for i in inv))
        _axes_cache[key] = hit
    return hit


def _kraus_apply(
    rho: np.ndarray, ops: tuple[np.ndarray, ...], qubits: tuple[int, ...], n: int
) -> np.ndarray:
    """rho -> sum_k K rho K^dag via the active-axes transfer matrix."""
    k = len(qubits)
    ds = 2**k
    dr = 2 ** (n - k)
    super_op = _compact_superop(ops)
    perm, inv = _axis_orders(qubits, n)
    t = rho.reshape((2,) * (2 * n)).transpose(perm).reshape(ds * ds, dr * dr)
    out = super_op @ t
    return out.reshape((2,) * (2 * n)).transpose(inv).reshape(2**n, 2**n)


def apply_gate(state: DensityMatrix, gate: Gate) -> DensityMatrix:
    """Apply a unitary gate: rho -> U rho U^dag (identity-padded embedding).

    Measure and barrier gates are not unitaries and are rejected.
    """
    if gate.kind in ("measure", "barrier"):
        raise ValidationError(f"'{gate.kind}' is not a unitary gate")
    u = gate_matrix(gate.kind, gate.angle)
    return DensityMatrix(
        state.num_qubits, _kraus_apply(state.data, (u,), gate.qubits, state.num_qubits)
    )


def apply_channel(
    state: DensityMatrix, channel: QuantumChannel, qubits: tuple[int, ...]
) -> DensityMatrix:
    """Apply a Kraus channel on a qubit subset: rho -> sum_k K rho K^dag."""
    if channel.arity != len(qubits):
        raise ValidationError(
            f"channel '{channel.label}' has arity {channel.arity}, got {len(qubits)} qubits"
        )
    n = state.num_qubits
    return DensityMatrix(n, _kraus_apply(state.data, channel.kraus_ops, qubits, n))


def run_gates(
    gates: Iterable[Gate],
    num_qubits: int,
    *,
    register: tuple[int, ...] | None = None,
) -> DensityMatrix:
    """Noise-free evaluation of a gate list, starting from |0...0>.

    ``register`` maps circuit qubit labels to register positions when the
    simulated register is a subset/superset of the circuit wires.
    """
    pos = _position_map(register, num_qubits)
    state = DensityMatrix.ground_state(num_qubits)
    rho = state.data
    for gate in gates:
        if gate.kind in ("measure", "barrier"):
            continue
        qs = tuple(pos[q] for q in gate.qubits)
        rho = _kraus_apply(rho, (gate_matrix(gate.kind, gate.angle),), qs, num_qubits)
    return DensityMatrix(num_qubits, rho)


def run(
    noisy: "NoisyCircuit",
    *,
    validate: bool = False,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> DensityMatrix:
    """Evaluate a noise-transpiled circuit to its final density matrix.

    Applies the state-preparation channels, then every layer's instruction
    stream in order. With ``validate=True`` the state is checked for trace,
    Hermiticity and positivity after every instruction.
    """
    n = len(noisy.register)
    if n > max_qubits:
        raise ValidationError(
            f"register of {n} qubits exceeds the configured cap of {max_qubits}"
        )
    pos = {q: i for i, q in enumerate(noisy.register)}
    state = DensityMatrix.ground_state(n)
    rho = state.data
    for op in noisy.all_ops():
        rho = _apply_op(rho, op, pos, n)
        if validate:
            check_density_matrix(
                rho, herm_tol=1e-9, trace_tol=1e-9, eig_floor=-1e-9,
                context=f"state after {op!r}",
            )
    return DensityMatrix(n, rho)


def _apply_op(rho: np.ndarray, op, pos: dict[int, int], n: int) -> np.ndarray:
    if isinstance(op, Gate):
        if op.kind in ("measure", "barrier"):
            return rho
        qs = tuple(pos[q] for q in op.qubits)
        return _kraus_apply(rho, (gate_matrix(op.kind, op.angle),), qs, n)
    # noise instruction carrying a Kraus channel
    qs = tuple(pos[q] for q in op.qubits)
    return _kraus_apply(rho, op.channel.kraus_ops, qs, n)


def probabilities(
    state: DensityMatrix, measured_qubits: tuple[int, ...]
) -> dict[str, float]:
    """Exact outcome distribution over the measured qubits.

    Marginalizes the diagonal; keys are bitstrings whose leftmost character
    is the measured qubit with the lowest register position.
    """
    n = state.num_qubits
    ms = tuple(sorted(measured_qubits))
    if any(not (0 <= q < n) for q in ms):
        raise ValidationError(f"measured qubits {ms} out of range for n={n}")
    if not ms:
        return {"": 1.0}
    diag = np.real(np.diag(state.data)).clip(min=0.0)
    m = len(ms)
    idx = np.arange(2**n)
    out_idx = np.zeros(2**n, dtype=int)
    for rank, q in enumerate(ms):
        bit = (idx >> (n - 1 - q)) & 1
        out_idx |= bit << (m - 1 - rank)
    marg = np.bincount(out_idx, weights=diag, minlength=2**m)
    total = marg.sum()
    if total > 0:
        marg = marg / total
    return {format(i, f"0{m}b"): float(p) for i, p in enumerate(marg)}


def _position_map(register: tuple[int, ...] | None, num_qubits: int) -> dict[int, int]:
    if register is None:
        return {q: q for q in range(num_qubits)}
    if len(register) != num_qubits:
        raise ValidationError("register size does not match qubit count")
    return {q: i for i, q in enumerate(register)}
