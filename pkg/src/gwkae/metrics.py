"""Localization accuracy metrics over (true, predicted) damage-center pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

from .errors import ConfigError, DataError, UsageError


@dataclass(frozen=True)
class EvaluationPair:
    truth: tuple[float, float]
    prediction: tuple[float, float]

    def __post_init__(self):
        coords = (*self.truth, *self.prediction)
        if not all(math.isfinite(c) for c in coords):
            raise DataError(f"non-finite coordinate in pair {self}")

    @property
    def error(self) -> float:
        return math.hypot(self.prediction[0] - self.truth[0], self.prediction[1] - self.truth[1])


@dataclass(frozen=True)
class MetricConfig:
    """L is the characteristic structure length used to normalize MRE."""

    L: float = 200.0

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0):
            raise ConfigError(f"L must be > 0, got {self.L}")


def rmse(pairs: list[EvaluationPair]) -> float:
    """Root mean square of the Euclidean center errors, in millimetres."""
    if not pairs:
        raise UsageError("rmse needs at least one pair")
    return math.sqrt(sum(p.error**2 for p in pairs) / len(pairs))


def mre(pairs: list[EvaluationPair], cfg: MetricConfig = MetricConfig()) -> float:
    """Mean Euclidean error relative to the characteristic length, in percent."""
    if not pairs:
        raise UsageError("mre needs at least one pair")
    return sum(p.error / cfg.L for p in pairs) / len(pairs) * 100.0


def mape(pairs: list[EvaluationPair]) -> float:
    """Mean absolute percentage error over both coordinates of every pair."""
    if not pairs:
        raise UsageError("mape needs at least one pair")
    terms = []
    for idx, p in enumerate(pairs):
        for truth_c, pred_c in zip(p.truth, p.prediction):
            if truth_c == 0:
                raise DataError(f"pair {idx} ({p.truth} -> {p.prediction}): "
                                "MAPE undefined for a zero true coordinate")
            terms.append(abs((pred_c - truth_c) / truth_c))
    return sum(terms) / len(terms) * 100.0


def evaluate(pairs: list[EvaluationPair], cfg: MetricConfig = MetricConfig()) -> dict:
    """All metrics for a pair list, JSON-ready."""
    return {
        "n": len(pairs),
        "rmse_mm": rmse(pairs),
        "mre_percent": mre(pairs, cfg),
        "mape_percent": mape(pairs),
        "L_mm": cfg.L,
    }


def match_pairs(truths: list[tuple[float, float]],
                predictions: list[tuple[float, float]]) -> list[EvaluationPair]:
    """Pair each truth with a distinct prediction, minimizing total distance.

    Exhaustive over permutations; intended for the handful of damages a
    structure carries, not for large point sets. With unequal counts the
    surplus on either side is left unmatched.
    """
    if not truths or not predictions:
        raise DataError("cannot match empty truth or prediction lists")
    n = min(len(truths), len(predictions))
    if max(len(truths), len(predictions)) > 8:
        raise UsageError("match_pairs is exhaustive; more than 8 points is unsupported")
    best, best_cost = None, math.inf
    for perm in permutations(range(len(predictions)), n):
        cost = sum(
            math.hypot(truths[i][0] - predictions[j][0], truths[i][1] - predictions[j][1])
            for i, j in enumerate(perm)
        )
        if cost < best_cost:
            best, best_cost = perm, cost
    return [EvaluationPair(tuple(truths[i]), tuple(predictions[j])) for i, j in enumerate(best)]
