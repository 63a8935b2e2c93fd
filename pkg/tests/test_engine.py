import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specga.engine import (
    HISTORY_HEADER,
    ConfigError,
    GaConfig,
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
from specga.environment import pool_from_list, sense
from specga.fitness import QosRequest, evaluate
from specga.genome import GENOTYPE_BITS, Chromosome, encode, full_space, needs_repair

TARGET = Chromosome(50, 41, 3, 3)
REQUEST = QosRequest(TARGET)

chromosomes = st.builds(
    Chromosome,
    st.integers(1, 100), st.integers(1, 50), st.integers(1, 8), st.integers(1, 4),
)


def reports_for(population):
    return [evaluate(c, REQUEST) for c in population]


class TestRoulette:
    def test_degenerate_wheel(self):
        rng = np.random.default_rng(0)
        pop = ["a", "b"]
        assert all(select_roulette(pop, [1.0, 0.0], rng) == "a" for _ in range(1000))
        assert all(select_roulette(pop, [0.0, 1.0], rng) == "b" for _ in range(1000))

    @pytest.mark.parametrize("qualities", [
        [0.75, 0.25],
        [1.0, 1.0, 1.0, 1.0],
        [0.1, 0.0, 0.6, 0.3],
    ])
    def test_frequencies_match_proportions(self, qualities):
        rng = np.random.default_rng(11)
        pop = list(range(len(qualities)))
        draws = [select_roulette(pop, qualities, rng) for _ in range(10_000)]
        freq = np.bincount(draws, minlength=len(pop)) / len(draws)
        expected = np.array(qualities) / sum(qualities)
        assert np.all(np.abs(freq - expected) <= 0.02)

    def test_all_zero_falls_back_to_uniform(self, caplog):
        rng = np.random.default_rng(3)
        draws = [select_roulette([0, 1], [0.0, 0.0], rng) for _ in range(4000)]
        assert abs(np.mean(draws) - 0.5) < 0.03
        assert "uniformly" in caplog.text

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError):
            select_roulette([1, 2], [1.0], np.random.default_rng(0))
        with pytest.raises(ValueError):
            select_roulette([], [], np.random.default_rng(0))


class TestElites:
    def test_zero(self):
        pop = sense(1, 10).chromosomes
        assert select_elites(pop, reports_for(pop), 0) == []

    def test_target_is_elite(self):
        pop = list(sense(1, 10).chromosomes) + [TARGET]
        assert select_elites(pop, reports_for(pop), 1) == [TARGET]

    def test_ties_keep_population_order(self):
        # symmetric deviations around the target give identical F
        low, high = Chromosome(40, 41, 3, 3), Chromosome(60, 41, 3, 3)
        assert evaluate(low, REQUEST).cumulative == evaluate(high, REQUEST).cumulative
        pop = [Chromosome(1, 1, 1, 1), high, low]
        assert select_elites(pop, reports_for(pop), 1) == [high]
        pop = [low, high]
        assert select_elites(pop, reports_for(pop), 1) == [low]

    @given(st.lists(chromosomes, min_size=1, max_size=30), st.data())
    def test_matches_sorted_oracle(self, pop, data):
        k = data.draw(st.integers(0, len(pop)))
        reports = reports_for(pop)
        keyed = sorted((r.cumulative, i) for i, r in enumerate(reports))
        assert select_elites(pop, reports, k) == [pop[i] for _, i in keyed[:k]]


class TestCrossover:
    a, b = Chromosome(50, 41, 3, 3), Chromosome(10, 20, 7, 1)

    def test_cut_after_second_gene(self):
        assert crossover(self.a, self.b, cut=2) == (Chromosome(50, 41, 7, 1), Chromosome(10, 20, 3, 3))

    def test_cut_after_first_gene(self):
        assert crossover(self.a, self.b, cut=1) == (Chromosome(50, 20, 7, 1), Chromosome(10, 41, 3, 3))

    def test_cut_after_third_gene(self):
        assert crossover(self.a, self.b, cut=3) == (Chromosome(50, 41, 3, 1), Chromosome(10, 20, 7, 3))

    def test_identical_parents(self):
        for cut in (1, 2, 3):
            assert crossover(self.a, self.a, cut=cut) == (self.a, self.a)

    def test_bad_cut(self):
        with pytest.raises(ValueError):
            crossover(self.a, self.b, cut=0)
        with pytest.raises(ValueError):
            crossover(self.a, self.b, cut=4)

    def test_random_cut_is_uniform_over_boundaries(self):
        rng = np.random.default_rng(5)
        a, b = Chromosome(1, 1, 1, 1), Chromosome(2, 2, 2, 2)
        cuts = [sum(g == 1 for g in crossover(a, b, rng=rng)[0].genes) for _ in range(6000)]
        counts = np.bincount(cuts, minlength=4)
        assert counts[0] == 0
        assert np.all(np.abs(counts[1:] / 6000 - 1 / 3) < 0.03)

    @given(chromosomes, chromosomes, st.integers(1, 3))
    def test_children_take_whole_genes_from_parents(self, a, b, cut):
        c1, c2 = crossover(a, b, cut=cut)
        for i in range(4):
            assert {c1.genes[i], c2.genes[i]} == {a.genes[i], b.genes[i]}
            assert c1.genes[i] == (a if i < cut else b).genes[i]
        # gene-aligned cut: the children's bit strings are splices of the parents'
        assert not needs_repair(encode(c1)) and not needs_repair(encode(c2))


class TestMutate:
    def test_lowest_modulation_bit(self):
        assert mutate(TARGET, position=GENOTYPE_BITS - 1) == Chromosome(50, 41, 3, 4)

    def test_highest_frequency_bit_clamps(self):
        # 49 + 64 = 113 -> index 114, clamped
        assert mutate(TARGET, position=0) == Chromosome(100, 41, 3, 3)

    @given(chromosomes, st.integers(0, GENOTYPE_BITS - 1))
    def test_always_valid_and_single_bit(self, c, pos):
        m = mutate(c, position=pos)
        flipped = encode(c).flip(pos)
        if not needs_repair(flipped):
            assert bin(encode(m).value ^ encode(c).value).count("1") == 1
            assert mutate(m, position=pos) == c

    def test_random_position(self):
        rng = np.random.default_rng(9)
        changed = sum(mutate(TARGET, rng) != TARGET for _ in range(500))
        # only clamp-to-self flips leave the chromosome unchanged
        assert changed > 400


class TestBruteForce:
    def test_full_space_returns_target(self):
        best, report = brute_force_best(full_space(), REQUEST)
        assert best == TARGET and report.cumulative == 0.0

    def test_small_pool(self):
        best, report = brute_force_best(
            [Chromosome(100, 41, 3, 3), Chromosome(60, 41, 3, 3)], REQUEST)
        assert best == Chromosome(60, 41, 3, 3)
        assert report.cumulative == pytest.approx(0.05)

    def test_ties_keep_enumeration_order(self):
        low, high = Chromosome(40, 41, 3, 3), Chromosome(60, 41, 3, 3)
        assert brute_force_best([high, low], REQUEST)[0] == high
        assert brute_force_best(iter([low, high]), REQUEST)[0] == low

    def test_singleton_and_empty(self):
        c = Chromosome(7, 7, 7, 4)
        assert brute_force_best([c], REQUEST)[0] == c
        with pytest.raises(ValueError):
            brute_force_best([], REQUEST)


class TestEvolve:
    def test_target_in_pool_is_kept(self):
        pool = list(sense(3, 19).chromosomes) + [TARGET]
        result = evolve(GaConfig(max_generations=30), REQUEST, pool)
        assert result.best == TARGET
        assert result.report.cumulative == 0.0
        assert all(s.best == TARGET and s.best_F == 0.0 for s in result.history)

    def test_target_percent_stops_early(self):
        pool = list(sense(3, 19).chromosomes) + [TARGET]
        result = evolve(GaConfig(target_percent=100.0), REQUEST, pool)
        assert result.terminated_by is Termination.TARGET_REACHED
        assert result.generations_run == 1

    def test_runs_to_max_generations(self):
        result = evolve(GaConfig(max_generations=17, rng_seed=4), REQUEST, sense(4, 20).chromosomes)
        assert result.terminated_by is Termination.MAX_GENERATIONS
        assert result.generations_run == len(result.history) == 17
        assert [s.generation for s in result.history] == list(range(1, 18))

    @pytest.mark.parametrize("kwargs", [
        dict(population_size=1, elite_count=0),
        dict(elite_count=20),
        dict(elite_count=-1),
        dict(crossover_fraction=1.5),
        dict(mutation_rate=-0.1),
        dict(max_generations=0),
        dict(rng_seed=-1),
        dict(rng_seed=2**64),
        dict(target_percent=float("nan")),
    ])
    def test_bad_config(self, kwargs):
        with pytest.raises(ConfigError):
            evolve(GaConfig(**kwargs), REQUEST, sense(0, 20).chromosomes)

    def test_pool_too_small(self):
        with pytest.raises(ConfigError):
            evolve(GaConfig(), REQUEST, sense(0, 10).chromosomes)

    def test_larger_pool_is_sampled(self):
        pool = sense(8, 50).chromosomes
        seen = []
        evolve(GaConfig(max_generations=1, rng_seed=8), REQUEST, pool,
               observer=lambda g, pop: seen.append(pop))
        assert len(seen[0]) == 20
        assert len(set(map(id, seen[0]))) == 20
        assert set(seen[0]) <= set(pool)

    def test_deterministic(self):
        pool = sense(21, 20).chromosomes
        config = GaConfig(rng_seed=21, max_generations=60)
        assert evolve(config, REQUEST, pool) == evolve(config, REQUEST, pool)

    def test_seed_changes_run(self):
        pool = sense(21, 20).chromosomes
        a = evolve(GaConfig(rng_seed=1), REQUEST, pool)
        b = evolve(GaConfig(rng_seed=2), REQUEST, pool)
        assert a.history != b.history

    @pytest.mark.parametrize("pop_size, elites", [(20, 2), (5, 2), (6, 1), (2, 1), (7, 0)])
    def test_population_size_is_constant(self, pop_size, elites):
        sizes = []
        evolve(GaConfig(population_size=pop_size, elite_count=elites, max_generations=25, rng_seed=3),
               REQUEST, sense(3, pop_size).chromosomes,
               observer=lambda g, pop: sizes.append(len(pop)))
        assert sizes == [pop_size] * 25

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**64 - 1), st.integers(1, 5), st.sampled_from(list(Mode)))
    def test_elitism_monotone(self, seed, elites, mode):
        config = GaConfig(elite_count=elites, mode=mode, rng_seed=seed, max_generations=40)
        pool = sense(seed, 30 if mode is Mode.POOL_CONSTRAINED else 20).chromosomes
        result = evolve(config, REQUEST, pool)
        fs = [s.best_F for s in result.history]
        assert all(b <= a for a, b in zip(fs, fs[1:]))
        assert result.report.cumulative == fs[-1]

    def test_without_elites_best_ever_is_returned(self):
        config = GaConfig(elite_count=0, rng_seed=12, max_generations=80)
        result = evolve(config, REQUEST, sense(12, 20).chromosomes)
        assert result.report.cumulative == min(s.best_F for s in result.history)

    def test_history_stat_invariants(self):
        result = evolve(GaConfig(rng_seed=30), REQUEST, sense(30, 20).chromosomes)
        for s in result.history:
            assert s.best_F <= s.mean_F
            assert s.best_percent == pytest.approx(100 * (1 - s.best_F), abs=1e-12)
            assert evaluate(s.best, REQUEST).cumulative == s.best_F

    def test_pool_constrained_stays_in_pool(self):
        pool = sense(17, 50).chromosomes
        members = set(pool)
        populations = []
        config = GaConfig(mode=Mode.POOL_CONSTRAINED, rng_seed=17, max_generations=60)
        result = evolve(config, REQUEST, pool, observer=lambda g, pop: populations.append(pop))
        assert all(c in members for pop in populations for c in pop)
        assert result.best in members

    def test_pool_constrained_finds_pool_optimum(self):
        pool = sense(40, 50).chromosomes
        config = GaConfig(mode=Mode.POOL_CONSTRAINED, rng_seed=40, max_generations=200)
        expected, report = brute_force_best(pool, REQUEST)
        result = evolve(config, REQUEST, pool)
        assert result.report.cumulative == report.cumulative

    def test_never_beats_exhaustive_optimum(self):
        request = QosRequest(Chromosome(13, 7, 8, 1), (0.4, 0.3, 0.2, 0.1))
        _, oracle = brute_force_best(full_space(), request)
        for seed in range(5):
            result = evolve(GaConfig(rng_seed=seed), request, sense(seed, 20).chromosomes)
            assert result.report.cumulative >= oracle.cumulative

    def test_all_zero_quality_falls_back(self):
        request = QosRequest(Chromosome(1, 1, 1, 1))
        pool = [Chromosome(100, 50, 8, 4)] * 4
        config = GaConfig(population_size=4, elite_count=1, mutation_rate=0.0, max_generations=3)
        result = evolve(config, request, pool)
        assert result.uniform_fallbacks == 2
        assert result.report.cumulative == pytest.approx(1.0)


def test_history_csv():
    result = evolve(GaConfig(rng_seed=2, max_generations=10), REQUEST, sense(2, 20).chromosomes)
    lines = history_csv(result).splitlines()
    assert lines[0] == ",".join(HISTORY_HEADER)
    assert len(lines) == 11
    for line, stats in zip(lines[1:], result.history):
        fields = line.split(",")
        assert int(fields[0]) == stats.generation
        assert abs(float(fields[3]) - 100 * (1 - float(fields[1]))) <= 1e-4
        assert tuple(map(int, fields[4:])) == stats.best.genes


def test_pool_wrapper_accepted():
    pool = pool_from_list([TARGET] * 20)
    result = evolve(GaConfig(max_generations=2), REQUEST, pool)
    assert result.best == TARGET


def test_pool_snapper_matches_scalar_distance():
    from specga.engine import _PoolSnapper
    from specga.fitness import gene_distance

    pool = sense(77, 50).chromosomes
    weights = (0.4, 0.3, 0.2, 0.1)
    snap = _PoolSnapper(pool, weights)
    for c in sense(78, 300):
        distances = [gene_distance(c, m, weights) for m in pool]
        best = min(distances)
        # float summation order may differ; accept any member within rounding of the minimum
        assert gene_distance(c, snap(c), weights) <= best + 1e-12
        if sorted(distances)[1] - best > 1e-9:
            assert snap(c) == pool[distances.index(best)]
    for m in pool:
        assert snap(m) == m
