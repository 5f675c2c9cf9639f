"""Prediction-error measures and competitive-bound checkers.

The two error measures are the l1 loss (sum of |prediction - true arrival|)
and the inversion count: ordered pairs (i, j) whose true arrivals satisfy
y_i < y_j while the predictions order the other way, h_i >= h_j.  The l1 loss
is always at least half the inversion count, which ``check_bounds`` verifies
alongside the cost bounds of the individual policies and combiners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ConfigError
from .trace import Trace


def harmonic(k: int) -> float:
    """k-th harmonic number, 1 + 1/2 + ... + 1/k."""
    return sum(1.0 / i for i in range(1, k + 1))


def ell1_loss(arrivals: Sequence[int], predictions: Sequence[float]) -> float:
    if len(arrivals) != len(predictions):
        raise ValueError("arrivals and predictions must have equal length")
    return sum(abs(h - y) for y, h in zip(arrivals, predictions))


def count_inversions_naive(arrivals: Sequence[int], predictions: Sequence[float]) -> int:
    """Inversion count by direct pair enumeration; the O(n^2) reference."""
    if len(arrivals) != len(predictions):
        raise ValueError("arrivals and predictions must have equal length")
    n = len(arrivals)
    count = 0
    for i in range(n):
        yi, hi = arrivals[i], predictions[i]
        for j in range(i + 1, n):
            yj, hj = arrivals[j], predictions[j]
            if yi < yj:
                if hi >= hj:
                    count += 1
            elif yj < yi and hj >= hi:
                count += 1
    return count


class _Fenwick:
    """Binary indexed tree counting insertions by rank (1-based)."""

    __slots__ = ("size", "tree")

    def __init__(self, size: int):
        self.size = size
        self.tree = [0] * (size + 1)

    def add(self, i: int) -> None:
        while i <= self.size:
            self.tree[i] += 1
            i += i & -i

    def prefix(self, i: int) -> int:
        total = 0
        while i > 0:
            total += self.tree[i]
            i -= i & -i
        return total


def count_inversions_fast(arrivals: Sequence[int], predictions: Sequence[float]) -> int:
    """Inversion count in O(n log n): sweep in arrival order, counting earlier
    elements with prediction rank >= the current one.  Elements sharing an
    arrival value are queried before any of them is inserted, since pairs need
    strictly increasing arrivals."""
    if len(arrivals) != len(predictions):
        raise ValueError("arrivals and predictions must have equal length")
    n = len(arrivals)
    if n < 2:
        return 0
    rank = {h: r for r, h in enumerate(sorted(set(predictions)), start=1)}
    order = sorted(range(n), key=lambda i: arrivals[i])
    bit = _Fenwick(len(rank))
    total = 0
    inserted = 0
    i = 0
    while i < n:
        j = i
        while j < n and arrivals[order[j]] == arrivals[order[i]]:
            j += 1
        group = order[i:j]
        for idx in group:
            total += inserted - bit.prefix(rank[predictions[idx]] - 1)
        for idx in group:
            bit.add(rank[predictions[idx]])
        inserted += len(group)
        i = j
    return total


@dataclass(frozen=True)
class ErrorSummary:
    """Prediction-error measures for one (trace, predictions) pair.

    ``eps_ratio`` is eta / opt_cost, or None when opt_cost is 0 (flagged by
    ``opt_is_zero``).
    """

    eta: float
    inversions: int
    opt_cost: int
    eps_ratio: float | None
    opt_is_zero: bool


def summarize_errors(trace: Trace, opt_cost: int) -> ErrorSummary:
    eta = ell1_loss(trace.arrivals, trace.predictions)
    inversions = count_inversions_fast(trace.arrivals, trace.predictions)
    if opt_cost > 0:
        return ErrorSummary(eta, inversions, opt_cost, eta / opt_cost, False)
    return ErrorSummary(eta, inversions, opt_cost, None, True)


# Identifiers of the checkable bounds, as they appear in reports and CSV output.
BOUND_IDS = (
    "lemma1",
    "thm1_prop1",
    "thm1_prop2",
    "cor1_det",
    "cor2_rand",
    "ftl_thm2",
    "mw_thm3",
    "lru_k",
    "marker_2hk",
    "lower_bound_thm4",
)


@dataclass(frozen=True)
class SlackPolicy:
    """Additive slack budgets for the checkers, in units of k (or k/epsilon).

    These are implementation budgets for the O(1)-style additive terms, kept
    explicit so regressions stay visible; they are not claims about the exact
    constants.
    """

    prop1: float = 0.0
    prop2_k: float = 1.0
    ftl_k: float = 2.0
    mw_k_over_eps: float = 8.0
    lru_k: float = 1.0
    marker_k: float = 1.0


@dataclass(frozen=True)
class BoundRecord:
    bound_id: str
    lhs: float
    rhs: float
    slack_used: float
    passed: bool
    vacuous: bool = False
    note: str = ""


@dataclass(frozen=True)
class BoundReport:
    records: tuple[BoundRecord, ...]

    def __iter__(self):
        return iter(self.records)

    def get(self, bound_id: str) -> BoundRecord | None:
        for record in self.records:
            if record.bound_id == bound_id:
                return record
        return None

    @property
    def passed_ids(self) -> tuple[str, ...]:
        return tuple(r.bound_id for r in self.records if r.passed)

    @property
    def failed_ids(self) -> tuple[str, ...]:
        return tuple(r.bound_id for r in self.records if not r.passed)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.records)

    def csv_block(self) -> str:
        lines = ["bound_id,lhs,rhs,slack_used,pass"]
        for r in self.records:
            lines.append(f"{r.bound_id},{r.lhs!r},{r.rhs!r},{r.slack_used!r},{int(r.passed)}")
        return "\n".join(lines) + "\n"


def _record(bound_id, lhs, rhs, slack, *, vacuous=False, note="") -> BoundRecord:
    return BoundRecord(bound_id, float(lhs), float(rhs), float(slack), lhs <= rhs, vacuous, note)


def check_bounds(
    costs: Mapping[str, float],
    opt: int,
    eta: float,
    inversions: int,
    k: int,
    slack: SlackPolicy = SlackPolicy(),
    epsilon: float | None = None,
) -> BoundReport:
    """Evaluate every bound that the given cost entries make checkable.

    ``costs`` maps policy names (lru, blind_oracle, marker, ftl, mw) to
    measured eviction counts; marker and mw entries may be means over seeds.
    The inequalities, with additive slacks from ``slack``:

      lemma1       inversions / 2 <= eta
      thm1_prop1   blind_oracle <= opt + 2*eta
      thm1_prop2   blind_oracle <= 2*opt + 4*eta/(k-1) + k          (k >= 2)
      lru_k        lru <= k*opt + k
      marker_2hk   marker <= (2*H_k - 1)*opt + k
      ftl_thm2     ftl <= 2*min(blind_oracle, lru) + 2k
      cor1_det     ftl <= 2*min(prop1 rhs, prop2 rhs, lru_k rhs) + 2k
      mw_thm3      mw <= (1+eps)*min(blind_oracle, marker) + 8k/eps
      cor2_rand    mw <= (1+eps)*min(prop1 rhs, prop2 rhs, marker_2hk rhs) + 8k/eps

    Bounds that reference opt are flagged vacuous when opt is 0 (every
    in-contract policy then has zero cost, so they hold trivially).
    """
    records: list[BoundRecord] = []
    opt_zero = opt == 0

    records.append(_record("lemma1", inversions / 2.0, eta, 0.0))

    prop1_rhs = opt + 2.0 * eta + slack.prop1
    prop2_rhs = math.inf
    if k >= 2:
        prop2_rhs = 2.0 * opt + 4.0 * eta / (k - 1) + slack.prop2_k * k
    lru_rhs = k * opt + slack.lru_k * k
    marker_rhs = (2.0 * harmonic(k) - 1.0) * opt + slack.marker_k * k

    if "blind_oracle" in costs:
        bo = costs["blind_oracle"]
        records.append(_record("thm1_prop1", bo, prop1_rhs, slack.prop1, vacuous=opt_zero))
        if k >= 2:
            records.append(
                _record("thm1_prop2", bo, prop2_rhs, slack.prop2_k * k, vacuous=opt_zero)
            )
        else:
            records.append(
                BoundRecord("thm1_prop2", bo, math.inf, 0.0, True, True, "requires k >= 2")
            )

    if "lru" in costs:
        records.append(_record("lru_k", costs["lru"], lru_rhs, slack.lru_k * k, vacuous=opt_zero))

    if "marker" in costs:
        records.append(
            _record("marker_2hk", costs["marker"], marker_rhs, slack.marker_k * k, vacuous=opt_zero)
        )

    if "ftl" in costs:
        if "blind_oracle" not in costs or "lru" not in costs:
            raise ConfigError("ftl bound checks need blind_oracle and lru costs")
        ftl = costs["ftl"]
        ftl_slack = slack.ftl_k * k
        records.append(
            _record(
                "ftl_thm2",
                ftl,
                2.0 * min(costs["blind_oracle"], costs["lru"]) + ftl_slack,
                ftl_slack,
            )
        )
        records.append(
            _record(
                "cor1_det",
                ftl,
                2.0 * min(prop1_rhs, prop2_rhs, lru_rhs) + ftl_slack,
                ftl_slack,
                vacuous=opt_zero,
            )
        )

    if "mw" in costs:
        if epsilon is None:
            raise ConfigError("mw bound checks need epsilon")
        if "blind_oracle" not in costs or "marker" not in costs:
            raise ConfigError("mw bound checks need blind_oracle and marker costs")
        mw = costs["mw"]
        mw_slack = slack.mw_k_over_eps * k / epsilon
        records.append(
            _record(
                "mw_thm3",
                mw,
                (1.0 + epsilon) * min(costs["blind_oracle"], costs["marker"]) + mw_slack,
                mw_slack,
            )
        )
        records.append(
            _record(
                "cor2_rand",
                mw,
                (1.0 + epsilon) * min(prop1_rhs, prop2_rhs, marker_rhs) + mw_slack,
                mw_slack,
                vacuous=opt_zero,
            )
        )

    return BoundReport(tuple(records))
