"""Genetic-algorithm decision engine for cognitive-radio spectrum allocation."""

from .engine import (
    ConfigError,
    GaConfig,
    GaResult,
    GenerationStats,
    Mode,
    Termination,
    brute_force_best,
    crossover,
    evolve,
    history_csv,
    mutate,
    select_elites,
    select_roulette,
)
from .environment import EnvironmentPool, PoolError, load_pool, pool_from_list, save_pool, sense
from .fitness import FitnessReport, QosError, QosRequest, evaluate, gene_fitness, quality
from .genome import (
    GENE_SPECS,
    Chromosome,
    Gene,
    GeneRangeError,
    GeneSpec,
    Genotype,
    decode,
    encode,
    full_space,
    gene_to_physical,
)

__version__ = "0.1.0"
