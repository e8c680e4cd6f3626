"""Cache placement: deterministic subfile splitting and random receiver caches.

Centralized placement splits every file into C(K_T,t_T)*C(K_R,t_R) equal
subfiles indexed by (transmitter subset, receiver subset).  Decentralized
placement keeps the deterministic transmitter partitioning but lets every
receiver cache a uniformly random fixed-size subset of each file's bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .model import (
    ConfigurationError,
    NetworkConfig,
    SubfileId,
    binomial,
    fmt_index_set,
    subsets,
)

__all__ = [
    "CentralizedPlacement",
    "DecentralizedPlacement",
    "SubsetProfile",
    "place_centralized",
    "place_decentralized",
    "subset_profile",
    "expected_fraction",
    "subfile_class_count",
    "RNG_ALGORITHM",
]

# Recorded in exports so runs can be reproduced bit-exactly.
RNG_ALGORITHM = "numpy.random.Generator(PCG64)"


@dataclass(frozen=True)
class CentralizedPlacement:
    """Deterministic subfile placement for integral replication factors."""

    cfg: NetworkConfig
    tx_cache: dict[int, frozenset[SubfileId]]
    rx_cache: dict[int, frozenset[SubfileId]]
    subfile_fraction: Fraction

    @property
    def subfiles_per_file(self) -> int:
        return int(1 / self.subfile_fraction)

    def export_text(self) -> str:
        """Per-node listing of cached subfiles (stable order)."""
        lines = [f"# centralized placement kt={self.cfg.k_t} kr={self.cfg.k_r} n={self.cfg.n_files}"]
        for i in sorted(self.tx_cache):
            names = sorted(s.label() for s in self.tx_cache[i])
            lines.append(f"tx {i + 1}: " + " ".join(names))
        for j in sorted(self.rx_cache):
            names = sorted(s.label() for s in self.rx_cache[j])
            lines.append(f"rx {j + 1}: " + " ".join(names))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DecentralizedPlacement:
    """Random receiver caches over a deterministic transmitter partitioning.

    `rx_mask[j, f, b]` is True when receiver j cached bit b of file f.  Bits
    live in [0, file_bits); transmitter partitions are defined over the
    padded range [0, padded_bits) so they come out equal-size, and the
    trailing pad bits belong to no file content.
    """

    cfg: NetworkConfig
    seed: int
    padded_bits: int
    rx_mask: np.ndarray = field(repr=False)

    @property
    def tx_sets(self) -> tuple[tuple[int, ...], ...]:
        return subsets(self.cfg.k_t, int(self.cfg.t_t))

    @property
    def partition_size(self) -> int:
        return self.padded_bits // len(self.tx_sets)

    def partition_of(self, bit: int) -> int:
        return bit // self.partition_size

    def cached_bits(self, rx: int, file: int) -> np.ndarray:
        """Sorted bit indices cached by `rx` for `file`."""
        return np.flatnonzero(self.rx_mask[rx, file])

    def export_text(self, max_ranges: int | None = None) -> str:
        """Per-(receiver, file) listing of cached bit-index ranges."""
        lines = [
            f"# decentralized placement kt={self.cfg.k_t} kr={self.cfg.k_r} "
            f"n={self.cfg.n_files} file_bits={self.cfg.file_bits} seed={self.seed} rng={RNG_ALGORITHM}"
        ]
        for p, ts in enumerate(self.tx_sets):
            lo, hi = p * self.partition_size, (p + 1) * self.partition_size
            lines.append(f"tx-partition {fmt_index_set(ts)}: bits {lo}-{hi - 1}")
        for j in range(self.cfg.k_r):
            for f in range(self.cfg.n_files):
                ranges = _as_ranges(self.cached_bits(j, f))
                if max_ranges is not None and len(ranges) > max_ranges:
                    shown = ",".join(ranges[:max_ranges]) + f",...({len(ranges)} ranges)"
                else:
                    shown = ",".join(ranges)
                lines.append(f"rx {j + 1} file {f + 1}: {shown}")
        return "\n".join(lines) + "\n"


def _as_ranges(indices: np.ndarray) -> list[str]:
    if indices.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(indices) > 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [indices.size - 1]))
    return [
        f"{indices[s]}" if indices[s] == indices[e] else f"{indices[s]}-{indices[e]}"
        for s, e in zip(starts, ends)
    ]


@dataclass(frozen=True)
class SubsetProfile:
    """Bit counts of one file grouped by (tx partition, exact caching receiver set)."""

    file: int
    file_bits: int
    counts: dict[tuple[frozenset[int], frozenset[int]], int]

    def total(self) -> int:
        return sum(self.counts.values())

    def weight_counts(self) -> dict[int, int]:
        """Bit counts grouped by |rx_set| (how many receivers cached the bit)."""
        out: dict[int, int] = {}
        for (_, rx_set), n in self.counts.items():
            out[len(rx_set)] = out.get(len(rx_set), 0) + n
        return out


def place_centralized(cfg: NetworkConfig) -> CentralizedPlacement:
    """Split every file and assign subfiles to the caches that index them.

    Requires integral t_T and t_R; fractional operating points are reached
    by memory-sharing between integral corners instead (see metrics.memory_share).
    """
    if not (cfg.t_t_integral and cfg.t_r_integral):
        raise ConfigurationError(
            f"centralized placement needs integral replication factors, got "
            f"t_T={cfg.t_t}, t_R={cfg.t_r}; use memory-sharing between integral corners"
        )
    t_t, t_r = int(cfg.t_t), int(cfg.t_r)
    tx_sets = subsets(cfg.k_t, t_t)
    rx_sets = subsets(cfg.k_r, t_r)
    tx_cache: dict[int, set[SubfileId]] = {i: set() for i in range(cfg.k_t)}
    rx_cache: dict[int, set[SubfileId]] = {j: set() for j in range(cfg.k_r)}
    for f in range(cfg.n_files):
        for ts in tx_sets:
            for rs in rx_sets:
                sub = SubfileId(f, frozenset(ts), frozenset(rs))
                for i in ts:
                    tx_cache[i].add(sub)
                for j in rs:
                    rx_cache[j].add(sub)
    fraction = Fraction(1, len(tx_sets) * len(rx_sets))
    return CentralizedPlacement(
        cfg=cfg,
        tx_cache={i: frozenset(v) for i, v in tx_cache.items()},
        rx_cache={j: frozenset(v) for j, v in rx_cache.items()},
        subfile_fraction=fraction,
    )


def place_decentralized(cfg: NetworkConfig, seed: int) -> DecentralizedPlacement:
    """Sample receiver caches: floor(M_R*F/N) bits per file, uniform without replacement.

    F is padded up to a multiple of C(K_T,t_T) so transmitter partitions are
    equal-size; pad bits carry no content and are never cached or delivered.
    Deterministic given `seed`.
    """
    if not cfg.t_t_integral:
        raise ConfigurationError(f"decentralized placement needs integral t_T, got {cfg.t_t}")
    if cfg.file_bits is None:
        raise ConfigurationError("decentralized placement needs file_bits set on the config")
    n_parts = binomial(cfg.k_t, int(cfg.t_t))
    padded = -(-cfg.file_bits // n_parts) * n_parts
    per_file = int(cfg.m_r * cfg.file_bits / cfg.n_files)  # floor
    rng = np.random.default_rng(seed)
    mask = np.zeros((cfg.k_r, cfg.n_files, cfg.file_bits), dtype=bool)
    for j in range(cfg.k_r):
        for f in range(cfg.n_files):
            picked = rng.choice(cfg.file_bits, size=per_file, replace=False)
            mask[j, f, picked] = True
    mask.setflags(write=False)
    return DecentralizedPlacement(cfg=cfg, seed=seed, padded_bits=padded, rx_mask=mask)


def subset_profile(placement: DecentralizedPlacement, file: int) -> SubsetProfile:
    """Classify every real bit of `file` by (tx partition, exact caching receiver set)."""
    cfg = placement.cfg
    if not 0 <= file < cfg.n_files:
        raise ValueError(f"file index {file} outside [0, {cfg.n_files})")
    f_bits = cfg.file_bits
    assert f_bits is not None
    codes = np.zeros(f_bits, dtype=np.int64)
    for j in range(cfg.k_r):
        codes |= placement.rx_mask[j, file].astype(np.int64) << j
    counts: dict[tuple[frozenset[int], frozenset[int]], int] = {}
    psize = placement.partition_size
    for p, ts in enumerate(placement.tx_sets):
        lo, hi = p * psize, min((p + 1) * psize, f_bits)
        if lo >= f_bits:
            break
        binc = np.bincount(codes[lo:hi], minlength=2**cfg.k_r)
        for code in range(2**cfg.k_r):
            if binc[code]:
                rx = frozenset(j for j in range(cfg.k_r) if code >> j & 1)
                counts[(frozenset(ts), rx)] = int(binc[code])
    return SubsetProfile(file=file, file_bits=f_bits, counts=counts)


def expected_fraction(cfg: NetworkConfig, t: int) -> Fraction:
    """Asymptotic fraction of a file cached by one particular set of t receivers.

    (M_R/N)^t * (1 - M_R/N)^(K_R - t), exact.  Multiply by C(K_R,t) for the
    total mass at caching weight t, and by 1/C(K_T,t_T) for a single
    transmitter partition.
    """
    if not 0 <= t <= cfg.k_r:
        raise ValueError(f"caching weight {t} outside [0, {cfg.k_r}]")
    q = cfg.m_r / cfg.n_files
    return q**t * (1 - q) ** (cfg.k_r - t)


def subfile_class_count(cfg: NetworkConfig) -> int:
    """Number of subfile classes a file splits into under decentralized placement."""
    if not cfg.t_t_integral:
        raise ConfigurationError(f"needs integral t_T, got {cfg.t_t}")
    return binomial(cfg.k_t, int(cfg.t_t)) * sum(binomial(cfg.k_r, j) for j in range(cfg.k_r + 1))
