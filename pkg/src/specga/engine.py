"""Generational GA: roulette selection with elitism, gene-boundary crossover,
single-bit mutation, and an exhaustive oracle for checking results."""

from __future__ import annotations

import bisect
import csv
import enum
import io
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .environment import GA_STREAM, stream_rng
from .fitness import FitnessReport, QosRequest, evaluate, quality
from .genome import GENOTYPE_BITS, Chromosome, decode, encode

log = logging.getLogger(__name__)

HISTORY_HEADER = (
    "generation", "best_F", "mean_F", "best_percent",
    "best_freq", "best_pow", "best_ber", "best_mod",
)


class ConfigError(ValueError):
    pass


class Mode(enum.Enum):
    UNCONSTRAINED = "free"
    POOL_CONSTRAINED = "pool"


class Termination(enum.Enum):
    MAX_GENERATIONS = "max_generations"
    TARGET_REACHED = "target_reached"


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 20
    crossover_fraction: float = 0.8
    elite_count: int = 2
    # one bit flip per offspring on average, i.e. a 1/19 per-bit rate
    mutation_rate: float = 1.0
    max_generations: int = 100
    target_percent: Optional[float] = None
    mode: Mode = Mode.UNCONSTRAINED
    rng_seed: int = 0

    def validate(self) -> None:
        if self.population_size < 2:
            raise ConfigError(f"population_size must be >= 2, got {self.population_size}")
        if not 0 <= self.elite_count < self.population_size:
            raise ConfigError(
                f"elite_count must be in [0, population_size), got {self.elite_count}"
            )
        if not 0.0 <= self.crossover_fraction <= 1.0:
            raise ConfigError(f"crossover_fraction must be in [0, 1], got {self.crossover_fraction}")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError(f"mutation_rate must be in [0, 1], got {self.mutation_rate}")
        if self.max_generations < 1:
            raise ConfigError(f"max_generations must be >= 1, got {self.max_generations}")
        if self.target_percent is not None and not math.isfinite(self.target_percent):
            raise ConfigError("target_percent must be finite")
        if not isinstance(self.mode, Mode):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError(f"rng_seed must be an unsigned 64-bit integer, got {self.rng_seed}")


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best: Chromosome
    best_F: float
    mean_F: float
    best_percent: float

    def csv_row(self) -> list[str]:
        return [
            str(self.generation),
            f"{self.best_F:.6f}",
            f"{self.mean_F:.6f}",
            f"{self.best_percent:.6f}",
            *(str(g) for g in self.best.genes),
        ]


@dataclass
class GaResult:
    best: Chromosome
    report: FitnessReport
    history: list[GenerationStats]
    generations_run: int
    terminated_by: Termination
    uniform_fallbacks: int = field(default=0, compare=False)


def select_roulette(population: Sequence, qualities: Sequence[float], rng: np.random.Generator):
    """Pick one member with probability proportional to its quality.

    An all-zero wheel degrades to a uniform pick.
    """
    if not population or len(population) != len(qualities):
        raise ValueError("population and qualities must be non-empty and equal length")
    cumulative = list(itertools.accumulate(qualities))
    total = cumulative[-1]
    if total <= 0.0:
        log.warning("roulette wheel has zero total quality; selecting uniformly")
        return population[int(rng.integers(len(population)))]
    spin = rng.random() * total
    # bisect_right skips zero-width slots
    i = bisect.bisect_right(cumulative, spin)
    return population[min(i, len(population) - 1)]


def select_elites(population: Sequence[Chromosome], reports: Sequence[FitnessReport],
                  elite_count: int) -> list[Chromosome]:
    if elite_count > len(population):
        raise ValueError(f"elite_count {elite_count} exceeds population size {len(population)}")
    # sorted() is stable, so equal F keeps the earlier population index first
    order = sorted(range(len(population)), key=lambda i: reports[i].cumulative)
    return [population[i] for i in order[:elite_count]]


def crossover(a: Chromosome, b: Chromosome, cut: Optional[int] = None,
              rng: Optional[np.random.Generator] = None) -> tuple[Chromosome, Chromosome]:
    """Swap tails at a gene boundary; ``cut`` is the number of leading genes kept (1..3)."""
    if cut is None:
        if rng is None:
            raise ValueError("either cut or rng is required")
        cut = int(rng.integers(1, 4))
    if not 1 <= cut <= 3:
        raise ValueError(f"cut must be a gene boundary 1..3, got {cut}")
    ga, gb = a.genes, b.genes
    return (Chromosome(*ga[:cut], *gb[cut:]), Chromosome(*gb[:cut], *ga[cut:]))


def mutate(c: Chromosome, rng: Optional[np.random.Generator] = None,
           position: Optional[int] = None) -> Chromosome:
    """Flip one of the 19 genotype bits (uniform unless ``position`` is forced)."""
    if position is None:
        position = int(rng.integers(GENOTYPE_BITS))
    return decode(encode(c).flip(position))


def brute_force_best(candidates: Iterable[Chromosome], request: QosRequest
                     ) -> tuple[Chromosome, FitnessReport]:
    best = best_report = None
    for c in candidates:
        report = evaluate(c, request)
        if best_report is None or report.cumulative < best_report.cumulative:
            best, best_report = c, report
    if best is None:
        raise ValueError("brute_force_best needs at least one candidate")
    return best, best_report


class _PoolSnapper:
    """Maps any chromosome onto the closest pool member (ties: pool order).

    Distance is the fitness of a member scored as if the chromosome being
    snapped were the QoS target.
    """

    def __init__(self, pool: Sequence[Chromosome], weights):
        self.pool = list(pool)
        self._genes = np.array([c.genes for c in self.pool], dtype=float)
        self._weights = np.asarray(weights, dtype=float)
        self._cache: dict[Chromosome, Chromosome] = {}
        for c in self.pool:
            self._cache.setdefault(c, c)

    def __call__(self, c: Chromosome) -> Chromosome:
        hit = self._cache.get(c)
        if hit is None:
            ref = np.array(c.genes, dtype=float)
            dev = np.abs(self._genes - ref)
            per_gene = np.where(dev < ref, dev / ref, 1.0) * self._weights
            hit = self.pool[int(np.argmin(per_gene.sum(axis=1)))]
            self._cache[c] = hit
        return hit


def _initial_population(config: GaConfig, pool: Sequence[Chromosome],
                        rng: np.random.Generator) -> list[Chromosome]:
    n = config.population_size
    if len(pool) == n:
        return list(pool)
    if len(pool) < n:
        raise ConfigError(f"initial pool has {len(pool)} chromosomes, need at least {n}")
    picks = rng.choice(len(pool), size=n, replace=False)
    return [pool[int(i)] for i in picks]


def evolve(config: GaConfig, request: QosRequest, initial_pool: Sequence[Chromosome],
           observer: Optional[Callable[[int, list], None]] = None) -> GaResult:
    """Run the GA until ``target_percent`` is reached or ``max_generations`` are evaluated.

    Generation 1 is the initial population.  A pool larger than
    ``population_size`` is sampled without replacement; in pool-constrained
    mode it is also the set every non-elite offspring is snapped back onto.
    ``observer(generation, population)`` is called once per evaluated
    generation with a copy of the population.
    """
    config.validate()
    pool = list(initial_pool)
    if not pool:
        raise ConfigError("initial pool is empty")
    rng = stream_rng(config.rng_seed, GA_STREAM)
    population = _initial_population(config, pool, rng)
    snap = _PoolSnapper(pool, request.weights) if config.mode is Mode.POOL_CONSTRAINED else None
    n = config.population_size
    cache: dict[Chromosome, FitnessReport] = {}

    def report_of(c):
        r = cache.get(c)
        if r is None:
            r = cache[c] = evaluate(c, request)
        return r

    history: list[GenerationStats] = []
    best_ever = best_ever_report = None
    terminated = Termination.MAX_GENERATIONS
    fallbacks = 0

    for generation in itertools.count(1):
        if observer is not None:
            observer(generation, list(population))
        reports = [report_of(c) for c in population]
        fs = [r.cumulative for r in reports]
        best_i = fs.index(min(fs))
        best, best_report = population[best_i], reports[best_i]
        history.append(GenerationStats(
            generation, best, best_report.cumulative,
            math.fsum(fs) / n, best_report.percent,
        ))
        if best_ever_report is None or best_report.cumulative < best_ever_report.cumulative:
            best_ever, best_ever_report = best, best_report

        if config.target_percent is not None and best_report.percent >= config.target_percent:
            terminated = Termination.TARGET_REACHED
            break
        if generation >= config.max_generations:
            break

        next_population = select_elites(population, reports, config.elite_count)
        qualities = [quality(r) for r in reports]
        if math.fsum(qualities) <= 0.0:
            fallbacks += 1
        while len(next_population) < n:
            a = select_roulette(population, qualities, rng)
            b = select_roulette(population, qualities, rng)
            if rng.random() < config.crossover_fraction:
                children = crossover(a, b, rng=rng)
            else:
                children = (a, b)
            for child in children:
                if len(next_population) == n:
                    break
                if rng.random() < config.mutation_rate:
                    child = mutate(child, rng)
                if snap is not None:
                    child = snap(child)
                next_population.append(child)
        population = next_population

    return GaResult(
        best=best_ever,
        report=best_ever_report,
        history=history,
        generations_run=len(history),
        terminated_by=terminated,
        uniform_fallbacks=fallbacks,
    )


def history_csv(result: GaResult) -> str:
    buf = io.StringIO()
    write_history(result, buf)
    return buf.getvalue()


def write_history(result: GaResult, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(HISTORY_HEADER)
    for stats in result.history:
        writer.writerow(stats.csv_row())
