import numpy as np
import pytest

from transmon_twin.device import (
    CouplingCalibration,
    DeviceModel,
    QubitCalibration,
    bundled_device_path,
    load_device,
)

NS = 1e-9


@pytest.fixture(scope="session")
def device() -> DeviceModel:
    return load_device(bundled_device_path())


def make_qubit(index, *, frequency=5e9, anharmonicity=2e8, t1=40e-6, t2=18e-6,
               p_excited=0.0, error=0.0, fidelity=1.0) -> QubitCalibration:
    return QubitCalibration(
        index=index,
        frequency=frequency,
        anharmonicity=anharmonicity,
        t1=t1,
        t2=t2,
        p_excited=p_excited,
        confusion=np.array([[1 - error, error], [error, 1 - error]]),
        single_qubit_fidelity=fidelity,
    )


def make_device(num_qubits, edges, *, noisy=False, durations=None) -> DeviceModel:
    """Small programmatic device for unit tests; chain frequencies upward."""
    qubits = []
    for i in range(num_qubits):
        kwargs = {"frequency": 4.5e9 + 0.4e9 * i, "anharmonicity": 2e8 + 1e7 * ((-1) ** i) * (i + 1)}
        if noisy:
            kwargs.update(p_excited=0.03 + 0.01 * i, error=0.02 + 0.005 * i,
                          fidelity=0.995, t1=35e-6 + 2e-6 * i, t2=15e-6 + 1e-6 * i)
        qubits.append(make_qubit(i, **kwargs))
    by_index = {q.index: q for q in qubits}
    couplings = []
    for a, b in edges:
        hi, lo = (a, b) if by_index[a].frequency > by_index[b].frequency else (b, a)
        couplings.append(
            CouplingCalibration(qubits=(hi, lo), coupling_j=2.0e6, cz_fidelity=0.97 if noisy else 1.0)
        )
    return DeviceModel(
        name=f"test-{num_qubits}q",
        qubits=tuple(qubits),
        couplings=tuple(couplings),
        durations=durations
        or {"rx": 32 * NS, "ry": 32 * NS, "rz": 0.0, "cz": 45 * NS, "measure": 1500 * NS},
        active_qubits=tuple(range(num_qubits)),
    )


@pytest.fixture
def two_qubit_device() -> DeviceModel:
    return make_device(2, [(0, 1)], noisy=True)


@pytest.fixture
def three_qubit_device() -> DeviceModel:
    return make_device(3, [(0, 1), (1, 2)], noisy=True)


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)
