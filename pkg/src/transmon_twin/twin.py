"""The digital-twin estimator: a sklearn-style facade over the pipeline.

``TransmonTwin`` composes the scheduler, noise transpiler, density-matrix
engine and fitter behind the usual estimator protocol: construction captures
hyperparameters verbatim, ``fit`` learns the free noise parameters from
reference shot data, ``predict``/``sample`` emulate circuits under the current
parameters, ``transform`` exposes the noise transpilation, and
``get_params``/``set_params`` follow the sklearn contract (duck-typed; no
sklearn dependency).
"""

from __future__ import annotations

import inspect
from pathlib import Path

from .circuits import Circuit
from .device import DeviceModel, load_device
from .distributions import ShotDistribution, tvd
from .emulate import emulate
from .fitting import (
    DEFAULT_J_MAX,
    DifferentialEvolutionConfig,
    FitProblem,
    FitResult,
    fit as run_fit,
)
from .scheduling import schedule_alap
from .simulator import DEFAULT_MAX_QUBITS
from .transpiler import NoiseParams, NoiseToggles, NoisyCircuit, transpile_noise
from .validation import ValidationError

__all__ = ["TransmonTwin"]


class TransmonTwin:
    """Calibration-driven digital twin of a fixed-coupling transmon QPU.

    Args:
        device: a :class:`DeviceModel` or a calibration file path.
        params: optional explicit :class:`NoiseParams`; defaults to values
            seeded from the device calibration.
        coupling_mode: "shared" (one J for all couplers, the fitting default)
            or "per-pair".
        toggles: error-family switches applied to default parameters.
        j_bounds / fidelity_bounds: fit search space.
        de_config: optimizer settings (population, F, CR, generations).
        seed: seed for the fit.
        shots: default shot count for :meth:`sample`.
        max_qubits: register size cap for the exact engine.
    """

    def __init__(
        self,
        device: DeviceModel | str | Path,
        *,
        params: NoiseParams | None = None,
        coupling_mode: str = "shared",
        toggles: NoiseToggles | None = None,
        j_bounds: tuple[float, float] = (0.0, DEFAULT_J_MAX),
        fidelity_bounds: tuple[float, float] = (0.8, 1.0),
        de_config: DifferentialEvolutionConfig | None = None,
        seed: int = 0,
        shots: int = 100_000,
        max_qubits: int = DEFAULT_MAX_QUBITS,
    ):
        self.device = device
        self.params = params
        self.coupling_mode = coupling_mode
        self.toggles = toggles
        self.j_bounds = j_bounds
        self.fidelity_bounds = fidelity_bounds
        self.de_config = de_config
        self.seed = seed
        self.shots = shots
        self.max_qubits = max_qubits

    # -- sklearn protocol ---------------------------------------------------

    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return [name for name in sig.parameters if name != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params) -> "TransmonTwin":
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValidationError(
                    f"invalid parameter '{key}' for TransmonTwin; "
                    f"valid parameters: {sorted(valid)}"
                )
            setattr(self, key, value)
        return self

    # -- resolution helpers ---------------------------------------------------

    def device_model(self) -> DeviceModel:
        if isinstance(self.device, DeviceModel):
            return self.device
        return load_device(self.device)

    def noise_params(self) -> NoiseParams:
        """Fitted parameters when available, otherwise the configured or
        calibration-derived defaults."""
        if getattr(self, "params_", None) is not None:
            return self.params_
        if self.params is not None:
            return self.params
        return NoiseParams.from_device(
            self.device_model(),
            coupling_mode=self.coupling_mode,
            toggles=self.toggles,
        )

    # -- estimator surface ----------------------------------------------------

    def fit(
        self,
        circuits: list[Circuit],
        references: list[ShotDistribution],
        *,
        test_circuits: list[Circuit] | None = None,
        test_references: list[ShotDistribution] | None = None,
    ) -> "TransmonTwin":
        """Fit the free noise parameters to reference distributions."""
        if len(circuits) != len(references):
            raise ValidationError("circuits and references must align one-to-one")
        test_pairs = ()
        if test_circuits is not None:
            if test_references is None or len(test_circuits) != len(test_references):
                raise ValidationError("test circuits and references must align")
            test_pairs = tuple(zip(test_circuits, test_references))
        problem = FitProblem(
            device=self.device_model(),
            train_set=tuple(zip(circuits, references)),
            test_set=test_pairs,
            coupling_mode=self.coupling_mode,
            j_bounds=self.j_bounds,
            fidelity_bounds=self.fidelity_bounds,
            toggles=self.toggles or NoiseToggles(),
        )
        result: FitResult = run_fit(problem, self.de_config, seed=self.seed)
        self.params_ = result.params
        self.result_ = result
        self.train_cost_ = result.train_cost
        self.test_cost_ = result.test_cost
        return self

    def transform(self, circuit: Circuit) -> NoisyCircuit:
        """Noise-transpile a circuit under the current parameters."""
        device = self.device_model()
        return transpile_noise(schedule_alap(circuit, device), device, self.noise_params())

    def predict(self, circuit: Circuit) -> ShotDistribution:
        """Exact outcome distribution of a circuit under the noise model."""
        return emulate(
            circuit, self.device_model(), self.noise_params(), max_qubits=self.max_qubits
        )

    def sample(
        self, circuit: Circuit, shots: int | None = None, seed: int | None = None
    ) -> ShotDistribution:
        """Finite-shot counts, reproducible per seed."""
        return emulate(
            circuit,
            self.device_model(),
            self.noise_params(),
            shots=shots if shots is not None else self.shots,
            seed=seed if seed is not None else self.seed,
            max_qubits=self.max_qubits,
        )

    def score(
        self, circuits: list[Circuit], references: list[ShotDistribution]
    ) -> float:
        """Negative mean TVD against references (greater is better)."""
        if len(circuits) != len(references):
            raise ValidationError("circuits and references must align one-to-one")
        if not circuits:
            raise ValidationError("score needs at least one circuit")
        total = sum(
            tvd(self.predict(c), ref) for c, ref in zip(circuits, references)
        )
        return -total / len(circuits)
