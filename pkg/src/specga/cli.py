"""Experiment runner: evolve a QoS request and write convergence CSVs.

Exit status: 0 success, 2 bad flags/config, 3 unreadable pool file, 1 anything else.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .engine import ConfigError, GaConfig, GaResult, Mode, evolve, write_history
from .environment import EnvironmentPool, PoolError, load_pool, sense
from .fitness import QosError, QosRequest
from .genome import Chromosome, GeneRangeError, describe

SEED_ENV = "SPECGA_SEED"
DEFAULT_OUT = "history.csv"

EXIT_OK, EXIT_FAILURE, EXIT_USAGE, EXIT_POOL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class PoolFileError(Exception):
    pass


@dataclass(frozen=True)
class SeededPool:
    seed: int
    size: int


@dataclass(frozen=True)
class FilePool:
    path: Path


@dataclass(frozen=True)
class RunSpec:
    request: QosRequest
    ga: GaConfig
    pool_source: object  # SeededPool | FilePool
    output_path: Optional[Path] = None
    repeats: int = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _weights(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"weights must be comma-separated numbers: {text!r}")


def _mode(text: str) -> Mode:
    try:
        return Mode(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mode must be 'free' or 'pool', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="specga", description=__doc__.splitlines()[0], argument_default=None)
    g = p.add_argument_group("QoS request")
    g.add_argument("--target-freq", type=int, help="desired frequency band index (1-100), default 50")
    g.add_argument("--target-pow", type=int, help="desired power index (1-50), default 41")
    g.add_argument("--target-ber", type=int, help="desired BER index (1-8), default 3")
    g.add_argument("--target-mod", type=int, help="desired modulation index (1-4), default 3")
    g.add_argument("--weights", type=_weights, help="four comma-separated weights summing to 1")
    g = p.add_argument_group("GA")
    g.add_argument("--pop-size", type=int)
    g.add_argument("--crossover-fraction", type=float)
    g.add_argument("--elite-count", type=int)
    g.add_argument("--mutation-rate", type=float)
    g.add_argument("--max-generations", type=int)
    g.add_argument("--target-percent", type=float, help="stop once the best score reaches this %%")
    g.add_argument("--mode", type=_mode, help="free (default) or pool")
    g = p.add_argument_group("run")
    g.add_argument("--seed", type=int, help=f"base seed (fallback: ${SEED_ENV}, then 0)")
    g.add_argument("--pool-file", type=Path)
    g.add_argument("--pool-size", type=int, help="seeded pool size, default pop size")
    g.add_argument("--repeats", type=int)
    g.add_argument("--out", type=Path, help=f"history CSV path, default {DEFAULT_OUT}")
    g.add_argument("--config", type=Path, help="key=value file using flag names")
    return p


def read_config(path: Path, parser: argparse.ArgumentParser) -> dict:
    """Parse a ``key = value`` file into argparse destinations."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    actions = {a.dest: a for a in parser._actions if a.dest not in ("help", "config")}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        dest = key.strip().lstrip("-").replace("-", "_")
        action = actions.get(dest)
        if action is None:
            raise UsageError(f"{path}:{lineno}: unknown key {key.strip()!r}")
        try:
            values[dest] = action.type(raw.strip()) if action.type else raw.strip()
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key.strip()}: {exc}")
    return values


def parse_args(argv: Optional[Sequence[str]] = None, environ=None) -> RunSpec:
    environ = os.environ if environ is None else environ
    parser = build_parser()
    ns = parser.parse_args(argv)
    opts = read_config(ns.config, parser) if ns.config else {}
    opts.update({k: v for k, v in vars(ns).items() if v is not None and k != "config"})

    if "pool_file" in opts and ("seed" in opts or "pool_size" in opts):
        raise UsageError("--pool-file conflicts with a seeded pool (--seed/--pool-size)")

    seed = opts.get("seed")
    if seed is None:
        env_seed = environ.get(SEED_ENV)
        try:
            seed = int(env_seed) if env_seed else 0
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env_seed!r}")

    try:
        target = Chromosome(
            opts.get("target_freq", 50), opts.get("target_pow", 41),
            opts.get("target_ber", 3), opts.get("target_mod", 3),
        )
        request = QosRequest(target, opts.get("weights", (0.25, 0.25, 0.25, 0.25)))
        ga = GaConfig(
            population_size=opts.get("pop_size", 20),
            crossover_fraction=opts.get("crossover_fraction", 0.8),
            elite_count=opts.get("elite_count", 2),
            mutation_rate=opts.get("mutation_rate", GaConfig.mutation_rate),
            max_generations=opts.get("max_generations", 100),
            target_percent=opts.get("target_percent"),
            mode=opts.get("mode", Mode.UNCONSTRAINED),
            rng_seed=seed,
        )
        ga.validate()
    except (GeneRangeError, QosError, ConfigError) as exc:
        raise UsageError(str(exc))

    if "pool_file" in opts:
        source = FilePool(opts["pool_file"])
    else:
        size = opts.get("pool_size", ga.population_size)
        if size < ga.population_size:
            raise UsageError(f"--pool-size {size} is smaller than --pop-size {ga.population_size}")
        source = SeededPool(seed, size)

    repeats = opts.get("repeats", 1)
    if repeats < 1:
        raise UsageError(f"--repeats must be >= 1, got {repeats}")
    return RunSpec(request, ga, source, opts.get("out", Path(DEFAULT_OUT)), repeats)


def derive_seed(base: int, k: int) -> int:
    """Deterministic per-repeat seed; repeat 0 keeps the base seed."""
    if k == 0:
        return base
    return int(np.random.SeedSequence([base, k]).generate_state(1, np.uint64)[0])


def run_path(out: Path, k: int, repeats: int) -> Path:
    if repeats == 1:
        return out
    return out.with_name(f"{out.stem}_r{k + 1}{out.suffix}")


def summary(result: GaResult) -> str:
    lines = [
        f"best: {describe(result.best)}",
        f"F = {result.report.cumulative:.6f}",
        f"percent = {result.report.percent:.6f}",
        f"generations = {result.generations_run} ({result.terminated_by.value})",
    ]
    return "\n".join(lines)


def run(spec: RunSpec, stdout=None) -> int:
    stdout = stdout or sys.stdout
    file_pool: Optional[EnvironmentPool] = None
    if isinstance(spec.pool_source, FilePool):
        try:
            file_pool = load_pool(spec.pool_source.path)
        except (OSError, PoolError) as exc:
            raise PoolFileError(f"cannot read pool file {spec.pool_source.path}: {exc}") from exc

    results = []
    for k in range(spec.repeats):
        seed = derive_seed(spec.ga.rng_seed, k)
        if file_pool is not None:
            pool = file_pool
        else:
            pool = sense(seed, spec.pool_source.size)
        result = evolve(replace(spec.ga, rng_seed=seed), spec.request, pool.chromosomes)
        results.append(result)
        if spec.output_path is not None:
            path = run_path(spec.output_path, k, spec.repeats)
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                write_history(result, fh)
        if spec.repeats == 1:
            print(summary(result), file=stdout)
        else:
            print(f"run {k + 1}: seed={seed} F={result.report.cumulative:.6f} "
                  f"percent={result.report.percent:.6f} best={result.best}", file=stdout)

    if spec.repeats > 1:
        threshold = spec.ga.target_percent if spec.ga.target_percent is not None else 100.0
        hits = sum(r.report.percent >= threshold for r in results)
        print(f"aggregate: {hits}/{len(results)} runs reached {threshold:g}% "
              f"(success fraction {hits / len(results):.3f})", file=stdout)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        spec = parse_args(argv)
    except UsageError as exc:
        print(f"specga: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(spec)
    except PoolFileError as exc:
        print(f"specga: error: {exc}", file=sys.stderr)
        return EXIT_POOL
    except Exception as exc:  # noqa: BLE001
        print(f"specga: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
