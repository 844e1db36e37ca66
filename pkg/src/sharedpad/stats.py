"""Match-outcome statistics: goal differentials, exact Wilcoxon, BH correction.

These are pure functions over paired per-participant results (one value per
condition). The Wilcoxon implementation enumerates the exact sign-flip null
distribution for small samples instead of relying on a normal approximation.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence, Union


@dataclass(frozen=True)
class PairedSamples:
    """Per-label values under two conditions; no missing values allowed."""

    pairs: tuple[tuple[str, float, float], ...]

    def __post_init__(self) -> None:
        cleaned = []
        for item in self.pairs:
            if len(item) != 3:
                raise ValueError(f"pair must be (label, a, b), got {item!r}")
            label, a, b = item
            for value in (a, b):
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ValueError(f"{label!r}: non-numeric value {value!r}")
                if not math.isfinite(value):
                    raise ValueError(f"{label!r}: non-finite value {value!r}")
            cleaned.append((str(label), float(a), float(b)))
        object.__setattr__(self, "pairs", tuple(cleaned))

    @classmethod
    def of(cls, a_values: Sequence[float], b_values: Sequence[float],
           labels: Sequence[str] = ()) -> "PairedSamples":
        if len(a_values) != len(b_values):
            raise ValueError("conditions must have equal length")
        if labels and len(labels) != len(a_values):
            raise ValueError("labels must match the number of pairs")
        labels = labels or [f"s{i + 1}" for i in range(len(a_values))]
        return cls(tuple(zip(labels, a_values, b_values)))

    def __len__(self) -> int:
        return len(self.pairs)

    def differences(self) -> list[float]:
        """Per-pair a − b."""
        return [a - b for _, a, b in self.pairs]


@dataclass(frozen=True)
class ConditionSummary:
    n: int
    mean: float
    std: float             # sample estimator (n−1 denominator)
    std_population: float  # population estimator (n denominator)
    degenerate: bool       # True when the sample std is undefined (n < 2)


@dataclass(frozen=True)
class GoalDifferentialSummary:
    condition_a: ConditionSummary
    condition_b: ConditionSummary


def _summarize(values: Sequence[float]) -> ConditionSummary:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return ConditionSummary(n, mean, 0.0, 0.0, True)
    return ConditionSummary(
        n=n,
        mean=mean,
        std=statistics.stdev(values),
        std_population=statistics.pstdev(values),
        degenerate=False,
    )


def goal_differential(
    pairs: Union[PairedSamples, Iterable[tuple]],
) -> GoalDifferentialSummary:
    """Mean and spread of goal differentials per condition.

    Accepts PairedSamples, (a, b) number pairs, or (result_a, result_b) pairs
    of objects exposing a ``goal_differential`` attribute. Both std estimators
    are reported: ``std`` divides by n−1, ``std_population`` by n. A single
    pair leaves the sample estimator undefined; it is reported as 0 with the
    ``degenerate`` flag set.
    """
    if not isinstance(pairs, PairedSamples):
        unpacked = []
        for item in pairs:
            if len(item) == 3:
                label, a, b = item
            else:
                a, b = item
                label = f"s{len(unpacked) + 1}"
            a = getattr(a, "goal_differential", a)
            b = getattr(b, "goal_differential", b)
            unpacked.append((label, a, b))
        pairs = PairedSamples(tuple(unpacked))
    if len(pairs) == 0:
        raise ValueError("need at least one pair")
    return GoalDifferentialSummary(
        condition_a=_summarize([a for _, a, _ in pairs.pairs]),
        condition_b=_summarize([b for _, _, b in pairs.pairs]),
    )


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float   # W⁺: sum of ranks of positive differences
    p_value: float     # two-tailed
    n: int             # pairs remaining after zero differences are dropped
    exact: bool        # True when p comes from full enumeration
    degenerate: bool   # True when every difference was zero


EXACT_LIMIT = 20


def _midranks(magnitudes: Sequence[float]) -> list[float]:
    order = sorted(range(len(magnitudes)), key=lambda i: magnitudes[i])
    ranks = [0.0] * len(magnitudes)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and magnitudes[order[j + 1]] == magnitudes[order[i]]:
            j += 1
        # tied block shares the average of the ranks it spans
        shared = (i + j + 2) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def _exact_two_tailed(doubled_ranks: Sequence[int], w_doubled: int) -> float:
    """P(|W⁺ − T/2| ≥ |w − T/2|) by enumerating the sign-flip distribution.

    Works in doubled ranks so mid-ranks stay integral. The distribution of
    the doubled W⁺ is the coefficient list of ∏(1 + x^(2r_i)).
    """
    total = sum(doubled_ranks)
    coefs = [0] * (total + 1)
    coefs[0] = 1
    for r in doubled_ranks:
        for s in range(total - r, -1, -1):
            if coefs[s]:
                coefs[s + r] += coefs[s]
    # distance from the distribution centre, in doubled units (×2 again to
    # stay integral: compare |2s − total| against |2w − total|)
    threshold = abs(2 * w_doubled - total)
    favourable = sum(c for s, c in enumerate(coefs) if abs(2 * s - total) >= threshold)
    return min(1.0, favourable / (1 << len(doubled_ranks)))


def wilcoxon_signed_rank(
    samples: Union[PairedSamples, Sequence[float]],
) -> WilcoxonResult:
    """Exact two-tailed Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped (the standard convention for this test, of
    several in the literature); ties among |d| get mid-ranks. With n ≤ 20 the
    p-value enumerates all 2^n sign assignments exactly; larger samples fall
    back to the normal approximation with tie correction. The statistic is
    W⁺, the rank sum of positive differences. If every difference is zero the
    result is degenerate: p = 1 and the flag is set.
    """
    if isinstance(samples, PairedSamples):
        diffs = samples.differences()
    else:
        diffs = [float(d) for d in samples]
    if not diffs:
        raise ValueError("need at least one pair")
    nonzero = [d for d in diffs if d != 0.0]
    if not nonzero:
        return WilcoxonResult(statistic=0.0, p_value=1.0, n=0, exact=True, degenerate=True)

    ranks = _midranks([abs(d) for d in nonzero])
    w_plus = math.fsum(r for d, r in zip(nonzero, ranks) if d > 0)
    n = len(nonzero)

    if n <= EXACT_LIMIT:
        doubled = [int(round(2 * r)) for r in ranks]
        p = _exact_two_tailed(doubled, int(round(2 * w_plus)))
        return WilcoxonResult(w_plus, p, n, exact=True, degenerate=False)

    # normal approximation with tie correction (n > EXACT_LIMIT only)
    mean = n * (n + 1) / 4.0
    tie_term = 0.0
    seen: dict[float, int] = {}
    for r in ranks:
        seen[r] = seen.get(r, 0) + 1
    for count in seen.values():
        if count > 1:
            tie_term += count ** 3 - count
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
    z = (w_plus - mean) / math.sqrt(variance)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return WilcoxonResult(w_plus, min(1.0, p), n, exact=False, degenerate=False)


# ---------------------------------------------------------------------------
# Benjamini-Hochberg
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BhResult:
    rejected: tuple[bool, ...]   # in the input order
    adjusted: tuple[float, ...]  # BH-adjusted p-values, input order
    alpha: float


def bh_adjust(p_values: Sequence[float], alpha: float = 0.05) -> BhResult:
    """Benjamini-Hochberg step-up over a family of p-values.

    Rejects hypotheses 1..k for the largest k with p(k) ≤ kα/m (sorted
    ascending). Adjusted p(i) = min over j ≥ i of m·p(j)/j, clamped to 1.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    for p in p_values:
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise ValueError(f"p-value must be a number, got {p!r}")
        if not (math.isfinite(p) and 0.0 <= p <= 1.0):
            raise ValueError(f"p-value out of [0, 1]: {p!r}")
    m = len(p_values)
    if m == 0:
        return BhResult((), (), alpha)

    order = sorted(range(m), key=lambda i: p_values[i])
    k = 0
    for rank, idx in enumerate(order, start=1):
        if p_values[idx] <= rank * alpha / m:
            k = rank
    rejected = [False] * m
    for rank, idx in enumerate(order, start=1):
        if rank <= k:
            rejected[idx] = True

    adjusted = [0.0] * m
    running = 1.0
    for rank in range(m, 0, -1):
        idx = order[rank - 1]
        running = min(running, m * p_values[idx] / rank)
        adjusted[idx] = running
    return BhResult(tuple(rejected), tuple(adjusted), alpha)
