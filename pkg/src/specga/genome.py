"""Gene definitions and the 19-bit chromosome encoding.

A chromosome carries four 1-based gene indices (frequency band, transmit
power, bit error rate, modulation).  On the bit level every index is stored
as ``index - 1`` in a fixed-width unsigned field, most significant bit
first, fields ordered frequency | power | ber | modulation::

    fffffff pppppp bbbb mm      (7 + 6 + 4 + 2 = 19 bits)

Bit patterns that decode outside a gene's range are clamped back to the
nearest bound.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterator, Union


class GeneRangeError(ValueError):
    """A gene index lies outside its allowed range."""


class Gene(enum.Enum):
    FREQUENCY = "freq"
    POWER = "power"
    BER = "ber"
    MODULATION = "mod"


MODULATION_NAMES = ("BPSK", "QPSK", "8-QAM", "16-QAM")

# band plan: 40-840 MHz in 8 MHz steps; power: -90..-40 dBm in 1 dB steps
FREQ_BASE_MHZ = 40
FREQ_STEP_MHZ = 8
POWER_BASE_DBM = -90


@dataclass(frozen=True)
class GeneSpec:
    gene: Gene
    min_index: int
    max_index: int
    bit_width: int

    @property
    def max_raw(self) -> int:
        return (1 << self.bit_width) - 1

    def contains(self, index: int) -> bool:
        return self.min_index <= index <= self.max_index

    def check(self, index: int) -> int:
        if isinstance(index, bool) or not isinstance(index, int) or not self.contains(index):
            raise GeneRangeError(
                f"{self.gene.name.lower()} index {index!r} outside "
                f"{self.min_index}..{self.max_index}"
            )
        return index

    def indices(self) -> range:
        return range(self.min_index, self.max_index + 1)


GENE_SPECS = (
    GeneSpec(Gene.FREQUENCY, 1, 100, 7),
    GeneSpec(Gene.POWER, 1, 50, 6),
    GeneSpec(Gene.BER, 1, 8, 4),
    GeneSpec(Gene.MODULATION, 1, 4, 2),
)
SPEC_BY_GENE = {spec.gene: spec for spec in GENE_SPECS}
GENOTYPE_BITS = sum(spec.bit_width for spec in GENE_SPECS)
SEARCH_SPACE_SIZE = 100 * 50 * 8 * 4


def _field_layout():
    shift, out = GENOTYPE_BITS, []
    for spec in GENE_SPECS:
        shift -= spec.bit_width
        out.append((shift, spec.max_raw, spec.min_index, spec.max_index))
    return tuple(out)


# (shift, mask, min_index, max_index) per field, MSB-first order
_LAYOUT = _field_layout()


@dataclass(frozen=True)
class Chromosome:
    """One candidate parameter set, as 1-based gene indices."""

    freq: int
    power: int
    ber: int
    modulation: int

    def __post_init__(self):
        for (_, _, lo, hi), spec, value in zip(_LAYOUT, GENE_SPECS, self.genes):
            if type(value) is not int or not lo <= value <= hi:
                spec.check(value)

    @property
    def genes(self) -> tuple[int, int, int, int]:
        return (self.freq, self.power, self.ber, self.modulation)

    @classmethod
    def from_genes(cls, genes) -> "Chromosome":
        genes = tuple(genes)
        if len(genes) != 4:
            raise GeneRangeError(f"expected 4 genes, got {len(genes)}")
        return cls(*genes)

    def __iter__(self):
        return iter(self.genes)

    def __str__(self) -> str:
        return "({},{},{},{})".format(*self.genes)


def gene_to_physical(spec: Union[GeneSpec, Gene], index: int):
    """Map a gene index to its physical value.

    Returns ``(low_mhz, high_mhz)`` for frequency, dBm (int) for power,
    the error probability (float) for BER and the scheme name for
    modulation.
    """
    if isinstance(spec, Gene):
        spec = SPEC_BY_GENE[spec]
    spec.check(index)
    if spec.gene is Gene.FREQUENCY:
        low = FREQ_BASE_MHZ + FREQ_STEP_MHZ * (index - 1)
        return (low, low + FREQ_STEP_MHZ)
    if spec.gene is Gene.POWER:
        return POWER_BASE_DBM + (index - 1)
    if spec.gene is Gene.BER:
        return 10.0 ** -index
    return MODULATION_NAMES[index - 1]


def describe_gene(spec: Union[GeneSpec, Gene], index: int) -> str:
    """Human-readable physical value, e.g. ``'432-440 MHz'`` or ``'1e-3'``."""
    if isinstance(spec, Gene):
        spec = SPEC_BY_GENE[spec]
    value = gene_to_physical(spec, index)
    if spec.gene is Gene.FREQUENCY:
        return f"{value[0]}-{value[1]} MHz"
    if spec.gene is Gene.POWER:
        return f"{value} dBm"
    if spec.gene is Gene.BER:
        return f"1e-{index}"
    return value


def describe(chromosome: Chromosome) -> str:
    names = ("freq", "power", "ber", "mod")
    return ", ".join(
        f"{name}={index} ({describe_gene(spec, index)})"
        for name, spec, index in zip(names, GENE_SPECS, chromosome.genes)
    )


@dataclass(frozen=True)
class Genotype:
    """19-bit string; bit position 0 is the leftmost (MSB of the frequency field)."""

    value: int

    def __post_init__(self):
        if not 0 <= self.value < (1 << GENOTYPE_BITS):
            raise ValueError(f"genotype value {self.value} does not fit in {GENOTYPE_BITS} bits")

    @classmethod
    def from_str(cls, text: str) -> "Genotype":
        bits = text.replace(".", "").replace(" ", "")
        if len(bits) != GENOTYPE_BITS or set(bits) - {"0", "1"}:
            raise ValueError(f"expected {GENOTYPE_BITS} binary digits, got {text!r}")
        return cls(int(bits, 2))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(int(ch) for ch in str(self))

    def flip(self, position: int) -> "Genotype":
        if not 0 <= position < GENOTYPE_BITS:
            raise IndexError(f"bit position {position} outside 0..{GENOTYPE_BITS - 1}")
        return Genotype(self.value ^ (1 << (GENOTYPE_BITS - 1 - position)))

    def fields(self) -> tuple[int, ...]:
        """Raw unsigned field values, before the index offset and repair."""
        v = self.value
        return tuple((v >> shift) & mask for shift, mask, _, _ in _LAYOUT)

    def grouped(self) -> str:
        text = str(self)
        parts, start = [], 0
        for spec in GENE_SPECS:
            parts.append(text[start:start + spec.bit_width])
            start += spec.bit_width
        return ".".join(parts)

    def __str__(self) -> str:
        return format(self.value, f"0{GENOTYPE_BITS}b")


def encode(chromosome: Chromosome) -> Genotype:
    value = 0
    for spec, index in zip(GENE_SPECS, chromosome.genes):
        spec.check(index)
        value = (value << spec.bit_width) | (index - 1)
    return Genotype(value)


def decode(genotype: Union[Genotype, str]) -> Chromosome:
    if isinstance(genotype, str):
        genotype = Genotype.from_str(genotype)
    v = genotype.value
    genes = []
    # out-of-range fields clamp to the nearest bound
    for shift, mask, lo, hi in _LAYOUT:
        index = ((v >> shift) & mask) + 1
        genes.append(lo if index < lo else hi if index > hi else index)
    return Chromosome(*genes)


def needs_repair(genotype: Genotype) -> bool:
    return any(
        not spec.contains(raw + 1) for spec, raw in zip(GENE_SPECS, genotype.fields())
    )


def full_space() -> Iterator[Chromosome]:
    """All 160,000 valid chromosomes in lexicographic gene order."""
    for genes in itertools.product(*(spec.indices() for spec in GENE_SPECS)):
        yield Chromosome(*genes)
