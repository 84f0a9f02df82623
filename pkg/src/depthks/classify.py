"""Benchmark-relative grouping of players by shot-pattern similarity.

A candidate belongs to the benchmark's group when *neither* the made
patterns nor the missed patterns differ detectably: both two-sample
p-values must strictly exceed the multiplicity-adjusted threshold
(Bonferroni over the two comparisons by default).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .hyptest import run_method
from .shotdata import PlayerShotChart

__all__ = ["PairwiseResult", "GroupResult", "pairwise_pvalues", "group_by_benchmark"]


@dataclass(frozen=True)
class PairwiseResult:
    """Made/missed p-values for one candidate against the benchmark.

    ``in_group`` is only meaningful on results that went through
    `group_by_benchmark`, which applies the adjusted threshold; results
    with ``testable=False`` carry the reason and never join the group.
    """

    benchmark_id: str
    other_id: str
    p_made: float
    p_missed: float
    testable: bool = True
    reason: str = ""
    in_group: bool = False


@dataclass(frozen=True)
class GroupResult:
    benchmark_id: str
    alpha_adj: float
    results: tuple[PairwiseResult, ...]

    @property
    def members(self) -> tuple[str, ...]:
        return tuple(r.other_id for r in self.results if r.in_group)


def pairwise_pvalues(
    benchmark: PlayerShotChart, others, method: str = "M6", alpha: float = 0.05
) -> list[PairwiseResult]:
    """Test every candidate's made and missed patterns against the benchmark.

    Candidates whose patterns are too small for the chosen method are
    returned untestable with the reason rather than raising.
    """
    out: list[PairwiseResult] = []
    for other in others:
        try:
            p_made = run_method(method, benchmark.made, other.made, alpha=alpha).p_value
            p_missed = run_method(method, benchmark.missed, other.missed, alpha=alpha).p_value
        except ValueError as exc:
            out.append(
                PairwiseResult(
                    benchmark_id=benchmark.player_id,
                    other_id=other.player_id,
                    p_made=float("nan"),
                    p_missed=float("nan"),
                    testable=False,
                    reason=str(exc),
                )
            )
            continue
        out.append(
            PairwiseResult(
                benchmark_id=benchmark.player_id,
                other_id=other.player_id,
                p_made=p_made,
                p_missed=p_missed,
            )
        )
    return out


def group_by_benchmark(
    benchmark: PlayerShotChart,
    others,
    method: str = "M6",
    alpha: float = 0.05,
    correction: str = "bonferroni",
) -> GroupResult:
    """Form the benchmark's group at level ``alpha``.

    With ``correction="bonferroni"`` the per-comparison threshold is
    ``alpha / 2`` (two comparisons per candidate: made and missed);
    ``"none"`` uses ``alpha`` as-is.  A candidate is in the group iff
    both p-values strictly exceed the threshold, so a benchmark tested
    against an exact copy of itself (p = 1 on both) is always grouped.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if correction not in ("bonferroni", "none"):
        raise ValueError("correction must be 'bonferroni' or 'none'")
    alpha_adj = alpha / 2.0 if correction == "bonferroni" else alpha
    results = []
    for res in pairwise_pvalues(benchmark, others, method=method, alpha=alpha):
        in_group = res.testable and res.p_made > alpha_adj and res.p_missed > alpha_adj
        results.append(replace(res, in_group=in_group))
    return GroupResult(benchmark.player_id, alpha_adj, tuple(results))
