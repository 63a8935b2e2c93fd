"""Stand-in for the sensed RF environment: seeded pools of random chromosomes."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from .genome import GENE_SPECS, Chromosome, GeneRangeError

# stream tags keep the sensing draws independent of the GA loop draws
SENSE_STREAM = 0x5E45
GA_STREAM = 0x6A6A


class PoolError(ValueError):
    """Bad pool contents; ``index`` points at the offending entry when known."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream]))


@dataclass(frozen=True)
class EnvironmentPool:
    chromosomes: tuple[Chromosome, ...]
    seed: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.chromosomes)

    def __len__(self) -> int:
        return len(self.chromosomes)

    def __iter__(self):
        return iter(self.chromosomes)

    def __getitem__(self, i):
        return self.chromosomes[i]


def sense(seed: int, size: int) -> EnvironmentPool:
    """Draw ``size`` chromosomes, each gene uniform over its index range."""
    if size < 1:
        raise PoolError(f"pool size must be >= 1, got {size}")
    rng = stream_rng(seed, SENSE_STREAM)
    columns = [
        rng.integers(spec.min_index, spec.max_index + 1, size=size)
        for spec in GENE_SPECS
    ]
    chromosomes = tuple(
        Chromosome(*(int(v) for v in row)) for row in zip(*columns)
    )
    return EnvironmentPool(chromosomes, seed=seed)


def pool_from_list(chromosomes: Iterable) -> EnvironmentPool:
    out = []
    for i, item in enumerate(chromosomes):
        if isinstance(item, Chromosome):
            out.append(item)
            continue
        try:
            out.append(Chromosome.from_genes(item))
        except (GeneRangeError, TypeError) as exc:
            raise PoolError(f"invalid chromosome at index {i}: {exc}", index=i) from exc
    if not out:
        raise PoolError("pool must contain at least one chromosome")
    return EnvironmentPool(tuple(out))


def parse_pool(text: str) -> EnvironmentPool:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            genes = [int(tok) for tok in line.split(",")]
        except ValueError as exc:
            raise PoolError(f"line {lineno}: expected 'freq,power,ber,mod' integers") from exc
        if len(genes) != 4:
            raise PoolError(f"line {lineno}: expected 4 values, got {len(genes)}")
        rows.append(genes)
    return pool_from_list(rows)


def load_pool(path: Union[str, os.PathLike]) -> EnvironmentPool:
    with open(path, encoding="utf-8") as fh:
        return parse_pool(fh.read())


def save_pool(pool: EnvironmentPool, path: Union[str, os.PathLike]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# freq,power,ber,mod\n")
        if pool.seed is not None:
            fh.write(f"# seed={pool.seed}\n")
        for c in pool:
            fh.write("{},{},{},{}\n".format(*c.genes))
