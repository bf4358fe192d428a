"""Shot distributions: sampling, readout confusion, TVD and serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .validation import ValidationError, check_confusion_matrix

__all__ = [
    "ShotDistribution",
    "exact_distribution",
    "apply_confusion",
    "sample",
    "tvd",
    "distribution_to_json",
    "distribution_from_json",
]


@dataclass(frozen=True)
class ShotDistribution:
    """Outcome weights keyed by fixed-width bitstrings.

    ``shots`` is None for exact probability distributions; otherwise the
    weights are integer counts from a finite-shot sample. Leftmost bit is
    the lowest measured qubit index.
    """

    weights: dict[str, float]
    shots: int | None = None

    def __post_init__(self):
        widths = {len(k) for k in self.weights}
        if len(widths) > 1:
            raise ValidationError(f"mixed bitstring widths in distribution: {widths}")
        for key in self.weights:
            if set(key) - {"0", "1"}:
                raise ValidationError(f"bad outcome key '{key}'")

    @property
    def width(self) -> int:
        return len(next(iter(self.weights))) if self.weights else 0

    @property
    def is_exact(self) -> bool:
        return self.shots is None

    def probabilities(self) -> dict[str, float]:
        total = sum(self.weights.values())
        if total <= 0:
            raise ValidationError("distribution has no weight")
        return {k: v / total for k, v in sorted(self.weights.items())}


def exact_distribution(probs: dict[str, float]) -> ShotDistribution:
    return ShotDistribution(dict(probs), shots=None)


def apply_confusion(
    dist: ShotDistribution, matrices: dict[int, np.ndarray]
) -> ShotDistribution:
    """Push a distribution through per-bit readout confusion matrices.

    ``matrices`` maps bit positions (0 = leftmost) to 2x2 column-stochastic
    matrices C with C[observed, prepared]. Bits without a matrix pass
    through unchanged. Works on exact distributions; counts are normalized
    first and the result is exact.
    """
    m = dist.width
    for k, mat in matrices.items():
        if not (0 <= k < m):
            raise ValidationError(f"confusion bit position {k} out of range")
        check_confusion_matrix(mat, context=f"confusion at bit {k}")
    probs = dist.probabilities()
    vec = np.zeros(2**m)
    for key, p in probs.items():
        vec[int(key, 2)] = p
    tensor = vec.reshape((2,) * m) if m else vec
    for k, mat in sorted(matrices.items()):
        tensor = np.moveaxis(np.tensordot(np.asarray(mat, float), tensor, axes=([1], [k])), 0, k)
    vec = tensor.reshape(-1)
    return ShotDistribution(
        {format(i, f"0{m}b"): float(p) for i, p in enumerate(vec)}, shots=None
    )


def sample(dist: ShotDistribution, shots: int, seed: int) -> ShotDistribution:
    """Multinomial sample of a distribution; reproducible per seed.

    Readout confusion belongs upstream (see :func:`apply_confusion`): the
    exact distribution is transformed first, then sampled, which is
    statistically identical to flipping individual shots.
    """
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    probs = dist.probabilities()
    keys = sorted(probs)
    pvals = np.array([probs[k] for k in keys])
    pvals = pvals / pvals.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, pvals)
    return ShotDistribution(
        {k: int(c) for k, c in zip(keys, counts) if c > 0}, shots=shots
    )


def tvd(p: ShotDistribution, q: ShotDistribution) -> float:
    """Total variation distance: half the L1 distance over the key union."""
    if p.width != q.width and p.weights and q.weights:
        raise ValidationError(
            f"distributions have different widths ({p.width} vs {q.width})"
        )
    pp, qq = p.probabilities(), q.probabilities()
    keys = set(pp) | set(qq)
    return 0.5 * sum(abs(pp.get(k, 0.0) - qq.get(k, 0.0)) for k in keys)


def distribution_to_json(dist: ShotDistribution, **metadata) -> str:
    payload = {
        "weights": {k: dist.weights[k] for k in sorted(dist.weights)},
        "shots": dist.shots,
    }
    payload.update(metadata)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def distribution_from_json(text: str) -> tuple[ShotDistribution, dict]:
    try:
        payload = json.loads(text)
        weights = payload.pop("weights")
        shots = payload.pop("shots", None)
    except (json.JSONDecodeError, KeyError, AttributeError) as exc:
        raise ValidationError(f"bad distribution file: {exc}") from exc
    return ShotDistribution(dict(weights), shots=shots), payload
