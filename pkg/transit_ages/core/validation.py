"""Structural checks and stability certification on a finite sample grid.

All conditions are pointwise in t, so they are verified at user-supplied sample
times. Refusals are returned as values; only malformed arguments raise.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from transit_ages.config.settings import DELTA_GRANT_FLOOR
from transit_ages.core.errors import ArgumentError
from transit_ages.core.system import CompartmentalSystem, require_samples

log = logging.getLogger(__name__)

# Column sums that cancel exactly on paper (e.g. plant pools in CASA) come out
# as +1e-17 in floating point; sums are compared against this relative slack.
SUM_RTOL = 1e-12

DIAGONAL_NEGATIVE = "diagonal-negative"
OFFDIAGONAL_NONNEGATIVE = "offdiagonal-nonnegative"
COLUMN_SUM = "column-sum-nonpositive"
INPUT_NONNEGATIVE = "input-nonnegative"
BOUNDED = "bounded"
BLOCK_FORM = "block-lower-triangular"
ROW_DOMINANCE = "row-sum-dominance"
COLUMN_DOMINANCE = "column-sum-dominance"
INPUT_FLOOR = "first-block-input-floor"
FEED_FLOOR = "earlier-block-feed-floor"


# ============================================================
# Reports
# ============================================================
@dataclass(frozen=True)
class Violation:
    condition: str
    pools: Tuple[int, ...]
    time: float
    value: float

    def describe(self) -> str:
        pools = ",".join(str(p + 1) for p in self.pools)
        return f"{self.condition} pools=({pools}) t={self.time:.17g} value={self.value:.17g}"


@dataclass(frozen=True)
class ComplianceReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def compliant(self) -> bool:
        return not self.violations

    def conditions(self) -> set:
        return {v.condition for v in self.violations}

    def describe(self) -> str:
        if self.compliant:
            return "compliant=true"
        lines = [f"compliant=false violations={len(self.violations)}"]
        lines += ["  " + v.describe() for v in self.violations]
        return "\n".join(lines)


def _slack(values: np.ndarray) -> float:
    return SUM_RTOL * float(np.sum(np.abs(values)))


def check_compartmental(system: CompartmentalSystem, sample_times: Sequence[float]) -> ComplianceReport:
    """Verify the sign and column-sum conditions plus s(t) >= 0 at every sample."""
    times = require_samples(system, sample_times)
    d = system.dimension
    off = ~np.eye(d, dtype=bool)
    violations: List[Violation] = []

    for t in times:
        t = float(t)
        B, s = system.evaluate(t)
        if not (np.all(np.isfinite(B)) and np.all(np.isfinite(s))):
            violations.append(Violation(BOUNDED, tuple(range(d)), t, float("nan")))
            continue
        for i in np.flatnonzero(np.diag(B) >= 0.0):
            violations.append(Violation(DIAGONAL_NEGATIVE, (int(i),), t, float(B[i, i])))
        for i, j in zip(*np.nonzero((B < 0.0) & off)):
            violations.append(Violation(OFFDIAGONAL_NONNEGATIVE, (int(i), int(j)), t, float(B[i, j])))
        col = B.sum(axis=0)
        for j in range(d):
            if col[j] > _slack(B[:, j]):
                violations.append(Violation(COLUMN_SUM, (j,), t, float(col[j])))
        for i in np.flatnonzero(s < 0.0):
            violations.append(Violation(INPUT_NONNEGATIVE, (int(i),), t, float(s[i])))

    report = ComplianceReport(tuple(violations))
    log.debug("compartmental check over %d samples: %d violations", times.size, len(violations))
    return report


# ============================================================
# Block structure
# ============================================================
@dataclass(frozen=True)
class BlockStructure:
    partition: Tuple[int, ...]

    def __post_init__(self):
        if not self.partition or any(p <= 0 for p in self.partition):
            raise ArgumentError(f"Block sizes must be positive, got {self.partition}")
        object.__setattr__(self, "partition", tuple(int(p) for p in self.partition))

    @property
    def m(self) -> int:
        return len(self.partition)

    @property
    def dimension(self) -> int:
        return sum(self.partition)

    @property
    def offsets(self) -> Tuple[int, ...]:
        return tuple(int(o) for o in np.concatenate([[0], np.cumsum(self.partition)]))

    @property
    def block_of(self) -> Tuple[int, ...]:
        return tuple(n for n, size in enumerate(self.partition) for _ in range(size))

    def block_slice(self, n: int) -> slice:
        off = self.offsets
        return slice(off[n], off[n + 1])

    def upper_mask(self) -> np.ndarray:
        """True strictly above the block diagonal."""
        b = np.array(self.block_of)
        return b[:, None] < b[None, :]


def detect_blocks(system: CompartmentalSystem, sample_times: Sequence[float]) -> BlockStructure:
    """Finest ordered partition making B(t) lower block triangular at every sample."""
    times = require_samples(system, sample_times)
    d = system.dimension
    pattern = np.zeros((d, d), dtype=bool)
    for t in times:
        pattern |= system.matrix_at(float(t)) != 0.0

    cuts = [0]
    for k in range(1, d):
        # a cut after the first k pools needs a zero upper-right block
        if not pattern[:k, k:].any():
            cuts.append(k)
    cuts.append(d)
    return BlockStructure(tuple(b - a for a, b in zip(cuts, cuts[1:])))


# ============================================================
# Stability certificate
# ============================================================
@dataclass(frozen=True)
class FailedCondition:
    condition: str
    block: int
    row: int
    time: float
    value: float

    def describe(self) -> str:
        return (f"{self.condition} block={self.block + 1} index={self.row + 1} "
                f"t={self.time:.17g} value={self.value:.17g}")


@dataclass(frozen=True)
class StabilityCertificate:
    granted: bool
    delta: float
    variant: str = "row"
    gamma: Optional[float] = None
    K: Optional[float] = None
    failed_condition: Optional[FailedCondition] = None
    advisory: Optional["StabilityCertificate"] = field(default=None, compare=False)

    def describe(self) -> str:
        k = "not computed" if self.K is None else f"{self.K:.17g}"
        if self.granted:
            text = f"[{self.variant}] granted delta={self.delta:.17g} gamma={self.gamma:.17g} K={k}"
        else:
            text = f"[{self.variant}] refused {self.failed_condition.describe()}"
        if self.advisory is not None:
            text += "\n  advisory " + self.advisory.describe()
        return text


def _certify(system, blocks, times, variant) -> StabilityCertificate:
    upper = blocks.upper_mask()
    worst = -np.inf
    first_failure = None

    for t in times:
        t = float(t)
        B = system.matrix_at(t)
        if np.any(B[upper] != 0.0) and first_failure is None:
            i, j = np.argwhere((B != 0.0) & upper)[0]
            first_failure = FailedCondition(BLOCK_FORM, blocks.block_of[i], int(i), t, float(B[i, j]))
        for n in range(blocks.m):
            sl = blocks.block_slice(n)
            Bnn = B[sl, sl]
            off = ~np.eye(Bnn.shape[0], dtype=bool)
            sums = Bnn.sum(axis=1) if variant == "row" else Bnn.sum(axis=0)
            worst = max(worst, float(sums.max()))
            if first_failure is not None:
                continue
            diag = np.diag(Bnn)
            bad = np.flatnonzero(diag >= 0.0)
            if bad.size:
                k = int(bad[0])
                first_failure = FailedCondition(DIAGONAL_NEGATIVE, n, sl.start + k, t, float(diag[k]))
                continue
            neg = np.argwhere((Bnn < 0.0) & off)
            if neg.size:
                i, j = neg[0]
                first_failure = FailedCondition(OFFDIAGONAL_NONNEGATIVE, n, sl.start + int(i), t, float(Bnn[i, j]))
                continue
            bad = np.flatnonzero(sums >= -DELTA_GRANT_FLOOR)
            if bad.size:
                k = int(bad[0])
                cond = ROW_DOMINANCE if variant == "row" else COLUMN_DOMINANCE
                first_failure = FailedCondition(cond, n, sl.start + k, t, float(sums[k]))

    delta = -worst
    if first_failure is None and delta > DELTA_GRANT_FLOOR:
        # K = 1 for a scalar equation: |Phi(t, t0)| = exp(int b) <= exp(-delta (t - t0))
        K = 1.0 if system.dimension == 1 else None
        return StabilityCertificate(True, delta, variant, gamma=delta, K=K)
    return StabilityCertificate(False, delta, variant, failed_condition=first_failure)


def certify_stability(system: CompartmentalSystem, blocks: BlockStructure,
                      sample_times: Sequence[float]) -> StabilityCertificate:
    """Strict diagonal dominance of every diagonal block, row-wise.

    The column-wise variant is attached as ``advisory``; it never changes the
    verdict.
    """
    times = require_samples(system, sample_times)
    if blocks.dimension != system.dimension:
        raise ArgumentError(f"Block partition sums to {blocks.dimension}, system has {system.dimension} pools")
    row = _certify(system, blocks, times, "row")
    column = _certify(system, blocks, times, "column")
    cert = StabilityCertificate(row.granted, row.delta, "row", row.gamma, row.K, row.failed_condition,
                                advisory=column)
    log.info("stability certificate: %s", "granted" if cert.granted else "refused")
    return cert


def check_mean_age_stability(system: CompartmentalSystem, blocks: BlockStructure,
                             sample_times: Sequence[float], delta: float) -> ComplianceReport:
    """Conditions under which the mean-age system inherits exponential stability.

    (a) every pool of the first block receives input s_i(t) >= delta;
    (b) every pool of a later block has one pool j in a strictly earlier block
        with b_ij(t) >= delta at every sample (the same j for all samples).
    """
    if not delta > 0:
        raise ArgumentError(f"delta must be positive, got {delta}")
    times = require_samples(system, sample_times)
    if blocks.dimension != system.dimension:
        raise ArgumentError(f"Block partition sums to {blocks.dimension}, system has {system.dimension} pools")

    evaluated = [system.evaluate(float(t)) for t in times]
    mats = np.stack([B for B, _ in evaluated])
    inputs = np.stack([s for _, s in evaluated])
    violations: List[Violation] = []

    first = blocks.block_slice(0)
    for i in range(first.start, first.stop):
        k = int(np.argmin(inputs[:, i]))
        if inputs[k, i] < delta:
            violations.append(Violation(INPUT_FLOOR, (i,), float(times[k]), float(inputs[k, i])))

    off = blocks.offsets
    for n in range(1, blocks.m):
        earlier = off[n]
        for i in range(off[n], off[n + 1]):
            # worst-case feed from each earlier pool, then the best such pool
            floor = mats[:, i, :earlier].min(axis=0)
            j = int(np.argmax(floor))
            if floor[j] < delta:
                k = int(np.argmin(mats[:, i, j]))
                violations.append(Violation(FEED_FLOOR, (i, j), float(times[k]), float(floor[j])))

    return ComplianceReport(tuple(violations))
