"""Differential-evolution fit of the noise parameters to reference shot data.

The free parameters are the crosstalk coupling strength(s) J and the CZ
fidelities of the active edges; the cost is the mean total variation distance
between emulated and reference distributions over the training circuits.
Evaluation is exact (no sampling noise) unless the problem requests shots.

The optimizer is synchronous DE/rand/1/bin with bound clipping: all trial
vectors of a generation are built from the current population, evaluated
(optionally across worker threads, reduced by index so results are
order-independent), then selected. Deterministic per seed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit
from .device import DeviceModel
from .distributions import ShotDistribution, tvd
from .emulate import emulate
from .scheduling import ScheduledCircuit, schedule_alap
from .transpiler import NoiseParams, NoiseToggles
from .validation import ValidationError

__all__ = [
    "DEFAULT_J_MAX",
    "DifferentialEvolutionConfig",
    "FitProblem",
    "FitResult",
    "parameter_names",
    "cost",
    "fit",
    "ablation_report",
    "ABLATION_ROWS",
]

DEFAULT_J_MAX = 1.0e7  # Hz; generous ceiling for transmon quasi-couplings


@dataclass(frozen=True)
class DifferentialEvolutionConfig:
    population: int | None = None  # None -> 15 * num_params
    mutation: float = 0.7
    recombination: float = 0.9
    generations: int = 200
    workers: int = 1

    def __post_init__(self):
        if self.population is not None and self.population < 4:
            raise ValidationError("DE population must be >= 4")
        if not (0.0 < self.mutation <= 2.0):
            raise ValidationError(f"mutation factor out of range: {self.mutation}")
        if not (0.0 <= self.recombination <= 1.0):
            raise ValidationError(f"recombination rate out of range: {self.recombination}")

    def population_size(self, num_params: int) -> int:
        return self.population if self.population is not None else 15 * num_params


@dataclass(frozen=True)
class FitProblem:
    """Training/test data plus the parameter space for one fit."""

    device: DeviceModel
    train_set: tuple[tuple[Circuit, ShotDistribution], ...]
    test_set: tuple[tuple[Circuit, ShotDistribution], ...]
    coupling_mode: str = "shared"
    j_bounds: tuple[float, float] = (0.0, DEFAULT_J_MAX)
    fidelity_bounds: tuple[float, float] = (0.8, 1.0)
    toggles: NoiseToggles = field(default_factory=NoiseToggles)
    shots_per_eval: int | None = None
    sample_seed: int = 0

    def __post_init__(self):
        for name, (lo, hi) in (("J", self.j_bounds), ("fidelity", self.fidelity_bounds)):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValidationError(f"{name} bounds must be finite and ordered: ({lo}, {hi})")
        flo, fhi = self.fidelity_bounds
        if flo < 0.4 or fhi > 1.0:
            raise ValidationError("fidelity bounds must stay inside [0.4, 1]")
        train = {c.label for c, _ in self.train_set}
        test = {c.label for c, _ in self.test_set}
        if train & test:
            raise ValidationError(f"train/test circuits overlap: {sorted(train & test)}")

    @property
    def coupling_edges(self) -> tuple[tuple[int, int], ...]:
        return self.device.edges

    @property
    def fidelity_edges(self) -> tuple[tuple[int, int], ...]:
        active = set(self.device.active_qubits)
        return tuple(e for e in self.device.edges if set(e) <= active)

    @property
    def num_params(self) -> int:
        nj = 1 if self.coupling_mode == "shared" else len(self.coupling_edges)
        return nj + len(self.fidelity_edges)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        nj = 1 if self.coupling_mode == "shared" else len(self.coupling_edges)
        lo = [self.j_bounds[0]] * nj + [self.fidelity_bounds[0]] * len(self.fidelity_edges)
        hi = [self.j_bounds[1]] * nj + [self.fidelity_bounds[1]] * len(self.fidelity_edges)
        return np.array(lo), np.array(hi)

    def decode(self, vector: np.ndarray) -> NoiseParams:
        """Turn an optimizer vector into NoiseParams."""
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (self.num_params,):
            raise ValidationError(
                f"parameter vector must have length {self.num_params}, got {vector.shape}"
            )
        if self.coupling_mode == "shared":
            j_values = {edge: float(vector[0]) for edge in self.coupling_edges}
            tail = vector[1:]
        else:
            nj = len(self.coupling_edges)
            j_values = {
                edge: float(vector[i]) for i, edge in enumerate(self.coupling_edges)
            }
            tail = vector[nj:]
        fidelities = {
            edge: float(tail[i]) for i, edge in enumerate(self.fidelity_edges)
        }
        return NoiseParams(
            coupling_mode=self.coupling_mode,
            j_values=j_values,
            cz_fidelities=fidelities,
            toggles=self.toggles,
        )

    def prior_vector(self) -> np.ndarray:
        """Calibration-derived parameter vector (used only to break ties)."""
        prior = NoiseParams.from_device(self.device, coupling_mode="per-pair")
        js = [prior.j_values[e] for e in self.coupling_edges]
        if self.coupling_mode == "shared":
            js = [max(js)] if js else [0.0]
        lo, hi = self.fidelity_bounds
        fids = [
            prior.cz_fidelities.get(e, (lo + hi) / 2.0) for e in self.fidelity_edges
        ]
        return np.array(js + fids)


def parameter_names(problem: FitProblem) -> tuple[str, ...]:
    if problem.coupling_mode == "shared":
        names = ["J"]
    else:
        names = [f"J_{u}_{v}" for u, v in problem.coupling_edges]
    names += [f"cz_fidelity_{u}_{v}" for u, v in problem.fidelity_edges]
    return tuple(names)


@dataclass(frozen=True)
class FitResult:
    params: NoiseParams
    vector: tuple[float, ...]
    train_cost: float
    test_cost: float
    history: tuple[float, ...]
    seed: int
    evaluations: int


def cost(
    params: NoiseParams,
    problem: FitProblem,
    *,
    subset: str = "train",
    schedules: dict[str, ScheduledCircuit] | None = None,
) -> float:
    """Mean TVD between emulated and reference distributions."""
    pairs = problem.train_set if subset == "train" else problem.test_set
    if not pairs:
        raise ValidationError(f"{subset} set is empty")
    total = 0.0
    for i, (circuit, reference) in enumerate(pairs):
        scheduled = schedules.get(circuit.label) if schedules else None
        try:
            predicted = emulate(
                circuit,
                problem.device,
                params,
                shots=problem.shots_per_eval,
                seed=problem.sample_seed + i,
                scheduled=scheduled,
            )
        except Exception as exc:
            raise RuntimeError(
                f"emulation failed for circuit '{circuit.label}': {exc}"
            ) from exc
        total += tvd(predicted, reference)
    return total / len(pairs)


def fit(
    problem: FitProblem,
    de_config: DifferentialEvolutionConfig | None = None,
    seed: int = 0,
) -> FitResult:
    """DE/rand/1/bin over the problem bounds; deterministic per seed.

    Returns the best member after the generation budget is exhausted (exact
    cost ties are broken toward the calibration prior), with the test cost
    evaluated once on the final parameters.
    """
    config = de_config or DifferentialEvolutionConfig()
    lo, hi = problem.bounds()
    d = problem.num_params
    np_size = config.population_size(d)
    if np_size < 4:
        raise ValidationError("DE population must be >= 4")
    rng = np.random.default_rng(seed)

    schedules = {
        c.label: schedule_alap(c, problem.device) for c, _ in problem.train_set
    }

    def evaluate(vectors: np.ndarray) -> np.ndarray:
        def one(vec):
            return cost(problem.decode(vec), problem, schedules=schedules)

        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                return np.array(list(pool.map(one, vectors)))
        return np.array([one(vec) for vec in vectors])

    pop = lo + rng.random((np_size, d)) * (hi - lo)
    fitness = evaluate(pop)
    evaluations = np_size
    history = [float(fitness.min())]

    for _ in range(config.generations):
        trials = np.empty_like(pop)
        for i in range(np_size):
            r1, r2, r3 = _distinct_indices(rng, np_size, i)
            mutant = pop[r1] + config.mutation * (pop[r2] - pop[r3])
            mutant = np.clip(mutant, lo, hi)
            cross = rng.random(d) < config.recombination
            cross[rng.integers(d)] = True
            trials[i] = np.where(cross, mutant, pop[i])
        trial_fitness = evaluate(trials)
        evaluations += np_size
        improved = trial_fitness <= fitness
        pop[improved] = trials[improved]
        fitness[improved] = trial_fitness[improved]
        history.append(float(fitness.min()))

    best_cost = fitness.min()
    candidates = np.flatnonzero(fitness == best_cost)
    if len(candidates) > 1:
        prior = problem.prior_vector()
        scale = np.where(hi > lo, hi - lo, 1.0)
        dist = [np.linalg.norm((pop[i] - prior) / scale) for i in candidates]
        best_index = int(candidates[int(np.argmin(dist))])
    else:
        best_index = int(candidates[0])
    best_vector = pop[best_index]
    best_params = problem.decode(best_vector)
    test_cost = cost(best_params, problem, subset="test") if problem.test_set else float("nan")
    return FitResult(
        params=best_params,
        vector=tuple(float(x) for x in best_vector),
        train_cost=float(fitness[best_index]),
        test_cost=float(test_cost),
        history=tuple(history),
        seed=seed,
        evaluations=evaluations,
    )


def _distinct_indices(rng: np.random.Generator, size: int, exclude: int):
    picks = []
    while len(picks) < 3:
        r = int(rng.integers(size))
        if r != exclude and r not in picks:
            picks.append(r)
    return picks


ABLATION_ROWS: tuple[tuple[str, str | None], ...] = (
    ("Full model", None),
    ("No passive errors", "passive_decay"),
    ("No SPAM errors", "spam_error"),
    ("No 2-qubit gate errors", "two_qubit_gate_error"),
    ("No 1-qubit gate errors", "single_qubit_gate_error"),
    ("No Always-on", "crosstalk"),
)


def ablation_report(
    params: NoiseParams, problem: FitProblem
) -> tuple[tuple[str, float], ...]:
    """Mean test-set TVD with each error family toggled off in turn."""
    rows = []
    for label, toggle in ABLATION_ROWS:
        p = params if toggle is None else params.with_toggles(**{toggle: False})
        rows.append((label, cost(p, problem, subset="test")))
    return tuple(rows)
