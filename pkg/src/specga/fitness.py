"""Weighted-sum fitness of a chromosome against a QoS request.

Each gene contributes ``w * |x - x_d| / x_d`` while the deviation is
smaller than the desired index, and the full weight ``w`` otherwise.  The
cumulative value ``F`` is the sum over genes (lower is better) and the
percentage score is ``100 * (1 - F)`` (higher is better).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .genome import Chromosome, GeneSpec

DEFAULT_WEIGHTS = (0.25, 0.25, 0.25, 0.25)
WEIGHT_SUM_TOL = 1e-12


class QosError(ValueError):
    """Invalid QoS request (bad weights or target)."""


@dataclass(frozen=True)
class QosRequest:
    target: Chromosome
    weights: tuple[float, float, float, float] = DEFAULT_WEIGHTS

    def __post_init__(self):
        if not isinstance(self.target, Chromosome):
            object.__setattr__(self, "target", Chromosome.from_genes(self.target))
        weights = tuple(float(w) for w in self.weights)
        if len(weights) != 4:
            raise QosError(f"expected 4 weights, got {len(weights)}")
        if any(not math.isfinite(w) or w < 0 for w in weights):
            raise QosError(f"weights must be finite and non-negative: {weights}")
        if abs(math.fsum(weights) - 1.0) > WEIGHT_SUM_TOL:
            raise QosError(f"weights must sum to 1, got {math.fsum(weights)!r}")
        object.__setattr__(self, "weights", weights)


@dataclass(frozen=True)
class FitnessReport:
    per_gene: tuple[float, float, float, float]
    cumulative: float
    percent: float

    def csv_fields(self) -> list[str]:
        return [f"{v:.6f}" for v in (*self.per_gene, self.cumulative, self.percent)]

    def csv_fragment(self) -> str:
        """``f1,f2,f3,f4,F,percent`` with six decimals."""
        return ",".join(self.csv_fields())


def gene_fitness(x: int, x_d: int, w: float, spec: Optional[GeneSpec] = None) -> float:
    if spec is not None:
        spec.check(x)
        spec.check(x_d)
    if x_d <= 0:
        raise QosError(f"desired index must be positive, got {x_d}")
    if not 0.0 <= w <= 1.0:
        raise QosError(f"weight {w} outside [0, 1]")
    deviation = abs(x - x_d)
    if deviation < x_d:
        return w * deviation / x_d
    return w


def evaluate(c: Chromosome, q: QosRequest) -> FitnessReport:
    per_gene = tuple(
        gene_fitness(x, x_d, w)
        for x, x_d, w in zip(c.genes, q.target.genes, q.weights)
    )
    cumulative = math.fsum(per_gene)
    return FitnessReport(per_gene, cumulative, 100.0 * (1.0 - cumulative))


def quality(report: FitnessReport) -> float:
    """Selection weight for the roulette wheel: ``1 - F``, floored at zero."""
    return max(0.0, 1.0 - report.cumulative)


def gene_distance(a: Chromosome, b: Chromosome, weights=DEFAULT_WEIGHTS) -> float:
    """Fitness of ``b`` measured as if ``a`` were the desired target."""
    return math.fsum(gene_fitness(x, x_d, w) for x, x_d, w in zip(b.genes, a.genes, weights))

