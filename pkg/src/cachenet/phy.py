"""Numeric zero-forcing verification on sampled channels.

Checks the linear-algebra claims a delivery plan relies on: precoder
weights really null the equivalent gain at every ZF target, destination
and interference gains stay generic, and two-transmitter gains coincide
with channel-matrix minors.  Interference alignment is *not* constructed
numerically; its feasibility enters only as the dimension counts of the
delivery ledger, and every report says so.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

import numpy as np

from .delivery import DeliveryPlan, ScheduledSubfile
from .model import NetworkConfig

__all__ = [
    "GenericityError",
    "ChannelMatrix",
    "PrecodingVector",
    "PhyReport",
    "sample_channel",
    "zf_weights",
    "equivalent_gains",
    "minor",
    "verify_block_phy",
    "verify_plan_phy",
    "IA_ASSUMPTION_NOTE",
]

IA_ASSUMPTION_NOTE = (
    "interference alignment accepted by dimension count only (not constructed numerically)"
)

GENERICITY_THRESHOLD = 1e-9
MAX_SAMPLE_RETRIES = 100


class GenericityError(RuntimeError):
    """A sampled channel (or submatrix) is too close to degenerate."""


@dataclass(frozen=True)
class ChannelMatrix:
    """K_R x K_T complex channel gains, drawn i.i.d. circularly-symmetric Gaussian."""

    entries: np.ndarray = field(repr=False)
    seed: int

    @property
    def k_r(self) -> int:
        return self.entries.shape[0]

    @property
    def k_t(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class PrecodingVector:
    """ZF weights across one transmitter subset.

    `weights[i]` applies to the i-th transmitter of the sorted `tx_set` and
    the largest weight has magnitude 1; `scale` is the positive divisor that
    restores the raw cofactor weights (weights * scale), whose gains equal
    signed channel minors exactly.
    """

    tx_set: tuple[int, ...]
    weights: np.ndarray = field(repr=False)
    scale: float


def _all_minors_generic(h: np.ndarray, threshold: float) -> bool:
    k_r, k_t = h.shape
    for size in range(1, min(k_r, k_t) + 1):
        for rows in combinations(range(k_r), size):
            sub_rows = h[list(rows), :]
            for cols in combinations(range(k_t), size):
                if abs(np.linalg.det(sub_rows[:, list(cols)])) < threshold:
                    return False
    return True


def sample_channel(
    k_r: int,
    k_t: int,
    seed: int,
    genericity_threshold: float = GENERICITY_THRESHOLD,
) -> ChannelMatrix:
    """Deterministic channel draw; re-samples while any square minor is near zero.

    The exhaustive minor check is intended for desk-scale networks (a few
    nodes per side); it is what guarantees every ZF subsystem and every
    equivalent gain the scheme touches is well-conditioned.
    """
    if k_r < 1 or k_t < 1:
        raise ValueError("channel dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_SAMPLE_RETRIES):
        entries = (rng.standard_normal((k_r, k_t)) + 1j * rng.standard_normal((k_r, k_t))) / np.sqrt(2)
        if _all_minors_generic(entries, genericity_threshold):
            entries.setflags(write=False)
            return ChannelMatrix(entries=entries, seed=seed)
    raise GenericityError(
        f"no generic {k_r}x{k_t} channel found in {MAX_SAMPLE_RETRIES} draws (seed={seed})"
    )


def zf_weights(
    h: ChannelMatrix, tx_set: tuple[int, ...] | frozenset[int], zf_targets: tuple[int, ...] | frozenset[int]
) -> PrecodingVector:
    """Precoder across `tx_set` whose equivalent gain vanishes at `zf_targets`.

    With m targets, the first m+1 transmitters of the subset are active and
    their weights are the alternating-sign maximal minors of the m x (m+1)
    target submatrix (the null vector by Cramer's rule); remaining
    transmitters stay silent.  For one target and two transmitters this is
    the classic (h_t2, -h_t1) swap.
    """
    txs = tuple(sorted(tx_set))
    targets = tuple(sorted(zf_targets))
    if not txs:
        raise ValueError("empty transmitter set")
    if len(targets) >= len(txs):
        raise GenericityError(
            f"{len(txs)} transmitters cannot zero-force at {len(targets)} receivers"
        )
    active = txs[: len(targets) + 1]
    raw = np.zeros(len(txs), dtype=complex)
    if not targets:
        raw[0] = 1.0
    else:
        b = h.entries[np.ix_(targets, active)]
        for i in range(len(active)):
            sub = np.delete(b, i, axis=1)
            raw[i] = (-1) ** i * np.linalg.det(sub)
    scale = float(np.max(np.abs(raw)))
    if scale < GENERICITY_THRESHOLD:
        raise GenericityError(
            f"degenerate ZF subsystem for tx={txs} targets={targets}; re-sample the channel"
        )
    return PrecodingVector(tx_set=txs, weights=raw / scale, scale=scale)


def equivalent_gains(h: ChannelMatrix, p: PrecodingVector) -> np.ndarray:
    """Per-receiver equivalent gain of one precoded transmission."""
    return h.entries[:, list(p.tx_set)] @ p.weights


def minor(h: ChannelMatrix | np.ndarray, rows_removed: Iterable[int], cols_removed: Iterable[int]) -> complex:
    """Determinant of the submatrix left after deleting the given rows and columns.

    No cofactor sign is applied; callers that need the (-1)^(i+j) factor
    account for it themselves.
    """
    entries = h.entries if isinstance(h, ChannelMatrix) else np.asarray(h)
    rows = sorted(rows_removed)
    cols = sorted(cols_removed)
    if any(not 0 <= r < entries.shape[0] for r in rows) or any(
        not 0 <= c < entries.shape[1] for c in cols
    ):
        raise ValueError("row/column index out of range")
    remaining = np.delete(np.delete(entries, rows, axis=0), cols, axis=1)
    if remaining.shape[0] != remaining.shape[1]:
        raise ValueError(
            f"minor needs a square remainder, got {remaining.shape[0]}x{remaining.shape[1]}"
        )
    if remaining.shape[0] == 0:
        return complex(1.0)
    return complex(np.linalg.det(remaining))


@dataclass(frozen=True)
class PhyReport:
    """Outcome of numeric checks for one or more blocks over one channel."""

    seed: int
    checked: int
    violations: tuple[str, ...]
    ic_flagged: int
    alignment_groups: int
    note: str = IA_ASSUMPTION_NOTE

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        status = "ok" if self.ok else f"{len(self.violations)} violation(s)"
        return (
            f"seed={self.seed}: {status}, {self.checked} transmissions checked, "
            f"{self.ic_flagged} cache-cancelled gains flagged, "
            f"{self.alignment_groups} alignment groups ({self.note})"
        )


def verify_block_phy(
    h: ChannelMatrix,
    block: tuple[ScheduledSubfile, ...],
    rel_tol: float = 1e-9,
    genericity_floor: float = 1e-12,
    precoders: list[PrecodingVector] | None = None,
) -> PhyReport:
    """Check every transmission of one block against a sampled channel.

    Asserts: gains vanish (relatively) at ZF targets; gains stay generic at
    the destination and at receivers relying on alignment.  Gains at caching
    receivers are only flagged: those receivers cancel from cache, so their
    gain value is irrelevant.  Precoders are recomputed from the block
    unless supplied, so a plan whose claimed targets disagree with the
    precoders actually in use shows up as ZF leaks.
    """
    if precoders is not None and len(precoders) != len(block):
        raise ValueError("need one precoder per scheduled transmission")
    violations: list[str] = []
    checked = 0
    ic_flagged = 0
    groups: set[tuple[int, int, frozenset[int], frozenset[int]]] = set()
    for idx, e in enumerate(block):
        checked += 1
        p = precoders[idx] if precoders is not None else zf_weights(h, e.subfile.tx_set, e.zf_targets)
        gains = equivalent_gains(h, p)
        gmax = float(np.max(np.abs(gains)))
        issues: list[str] = []
        for z in sorted(e.zf_targets):
            if abs(gains[z]) > rel_tol * gmax:
                issues.append(f"zf-leak at rx {z + 1} (|gain|={abs(gains[z]):.3e}, max {gmax:.3e})")
        if abs(gains[e.dest]) < genericity_floor * gmax:
            issues.append(f"degenerate destination gain at rx {e.dest + 1}")
        for r in range(h.k_r):
            if r == e.dest or r in e.zf_targets:
                continue
            if r in e.subfile.rx_set:
                ic_flagged += 1
                continue
            groups.add((r, e.dest, e.subfile.rx_set, e.zf_targets))
            if abs(gains[r]) < genericity_floor * gmax:
                issues.append(f"degenerate interference gain at rx {r + 1}")
        if issues:
            # one violation per offending transmission, all symptoms attached
            violations.append(
                f"block={e.block + 1} subfile={e.subfile.label()} dest={e.dest + 1}: "
                + "; ".join(issues)
            )
    return PhyReport(
        seed=h.seed,
        checked=checked,
        violations=tuple(violations),
        ic_flagged=ic_flagged,
        alignment_groups=len(groups),
    )


def verify_plan_phy(
    cfg: NetworkConfig,
    plan: DeliveryPlan | list[DeliveryPlan],
    channel_seeds: int | list[int],
    rel_tol: float = 1e-9,
) -> list[PhyReport]:
    """Monte-Carlo ZF verification of a plan over seeded channels, merged by seed order."""
    plans = [plan] if isinstance(plan, DeliveryPlan) else list(plan)
    seeds = list(range(channel_seeds)) if isinstance(channel_seeds, int) else list(channel_seeds)
    reports = []
    for seed in seeds:
        h = sample_channel(cfg.k_r, cfg.k_t, seed)
        checked = 0
        ic = 0
        groups = 0
        violations: list[str] = []
        for p in plans:
            for block in p.blocks:
                r = verify_block_phy(h, block, rel_tol=rel_tol)
                checked += r.checked
                ic += r.ic_flagged
                groups += r.alignment_groups
                violations.extend(r.violations)
        reports.append(
            PhyReport(
                seed=seed,
                checked=checked,
                violations=tuple(violations),
                ic_flagged=ic,
                alignment_groups=groups,
            )
        )
    return reports
