"""Black-box combiners that merge two eviction policies into one.

Both combiners simulate the two expert policies privately on every request and
keep their own cache.  On a full-cache miss the combiner evicts a page that
the currently tracked expert does not hold, so its cache drifts toward that
expert's cache lazily, one miss at a time.

``FtlCombiner`` deterministically follows whichever expert has evicted less so
far.  ``MwCombiner`` follows expert i with probability proportional to
(1-epsilon)**cost_i, switching via mass coupling so the expected number of
switches is bounded by total probability movement.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ConfigError
from .policies import CacheState, PageId, Policy, RunResult, make_policy
from .trace import Trace

# Below this magnitude both weights are rescaled by a common factor; the
# ratio, and therefore every probability and coupling draw, is unchanged.
_RESCALE_FLOOR = 1e-100


@dataclass
class ExpertPair:
    """Two privately simulated policies with their running eviction counts."""

    expert_a: Policy
    expert_b: Policy
    cost_a: int = 0
    cost_b: int = 0

    def serve(self, t: int, page: PageId, prediction: float) -> tuple[int, int]:
        """Serve both experts; returns this step's (0/1, 0/1) eviction costs."""
        ca = 0 if self.expert_a.serve(t, page, prediction) is None else 1
        cb = 0 if self.expert_b.serve(t, page, prediction) is None else 1
        self.cost_a += ca
        self.cost_b += cb
        return ca, cb

    def cache_of(self, which: str) -> CacheState:
        return self.expert_a.cache if which == "a" else self.expert_b.cache


def _victim_outside(own: CacheState, target: CacheState) -> PageId:
    """Least recently used page of ``own`` absent from ``target``.

    When both caches are full a candidate always exists (the target holds the
    page just requested, which ``own`` missed); the fallback to plain LRU only
    matters if the target cache is still filling.
    """
    outside = [e for e in own.entries() if e.page not in target]
    pool = outside or list(own.entries())
    return min(pool, key=lambda e: e.last_request).page


class FtlCombiner(Policy):
    """Follow the expert with the smaller eviction count.

    The leader is recomputed after both experts serve the current request;
    ties keep the incumbent, and expert A leads initially.
    """

    name = "ftl"

    def __init__(self, expert_a: Policy, expert_b: Policy, k: int):
        super().__init__(k)
        self.experts = ExpertPair(expert_a, expert_b)
        self.leader = "a"

    def _pre_serve(self, t, page, prediction):
        self.experts.serve(t, page, prediction)
        if self.experts.cost_a < self.experts.cost_b:
            self.leader = "a"
        elif self.experts.cost_b < self.experts.cost_a:
            self.leader = "b"

    def _select_victim(self, t, page, prediction):
        return _victim_outside(self.cache, self.experts.cache_of(self.leader))


def mw_update(
    weights: tuple[float, float], epsilon: float, cost_a: int, cost_b: int
) -> tuple[float, float]:
    """One multiplicative-weights step: w_i' = w_i * (1-epsilon)**cost_i."""
    if cost_a not in (0, 1) or cost_b not in (0, 1):
        raise ValueError("per-step expert costs must be 0 or 1")
    wa, wb = weights
    return wa * (1.0 - epsilon) ** cost_a, wb * (1.0 - epsilon) ** cost_b


class MwCombiner(Policy):
    """Randomized combiner driven by multiplicative weights.

    After each request the followed expert is abandoned with probability equal
    to the fraction of probability mass it just lost, which keeps the chance
    of following expert i equal to w_i / (w_a + w_b) at all times.
    """

    name = "mw"
    randomized = True

    def __init__(
        self,
        expert_a: Policy,
        expert_b: Policy,
        k: int,
        epsilon: float,
        rng: random.Random,
    ):
        if not 0.0 < epsilon < 0.25:
            raise ConfigError(f"epsilon must be in (0, 1/4), got {epsilon}")
        super().__init__(k)
        self.experts = ExpertPair(expert_a, expert_b)
        self.epsilon = epsilon
        self.rng = rng
        self.weights = (1.0, 1.0)
        self.followed = "a" if rng.random() < 0.5 else "b"

    def _probability(self, which: str) -> float:
        wa, wb = self.weights
        return wa / (wa + wb) if which == "a" else wb / (wa + wb)

    def _pre_serve(self, t, page, prediction):
        ca, cb = self.experts.serve(t, page, prediction)
        prior = self._probability(self.followed)
        self.weights = mw_update(self.weights, self.epsilon, ca, cb)
        wa, wb = self.weights
        if max(wa, wb) < _RESCALE_FLOOR:
            scale = max(wa, wb)
            self.weights = (wa / scale, wb / scale)
        posterior = self._probability(self.followed)
        if posterior < prior and self.rng.random() < (prior - posterior) / prior:
            self.followed = "b" if self.followed == "a" else "a"

    def _select_victim(self, t, page, prediction):
        return _victim_outside(self.cache, self.experts.cache_of(self.followed))


@dataclass(frozen=True)
class CombinedResult(RunResult):
    """RunResult plus the simulated experts' total costs."""

    cost_a: int = 0
    cost_b: int = 0


def _drive(combiner: Policy, trace: Trace, seed: int) -> CombinedResult:
    evictions = []
    for t, (page, h) in enumerate(zip(trace.requests, trace.predictions), start=1):
        victim = combiner.serve(t, page, h)
        if victim is not None:
            evictions.append((t, victim))
    return CombinedResult(
        cost=len(evictions),
        evictions=tuple(evictions),
        seed=seed,
        cost_a=combiner.experts.cost_a,
        cost_b=combiner.experts.cost_b,
    )


def run_ftl(policy_a: str, policy_b: str, trace: Trace, k: int) -> CombinedResult:
    """Run the follow-the-leader combination of two deterministic policies."""
    expert_a = make_policy(policy_a, k, arrivals=trace.arrivals)
    expert_b = make_policy(policy_b, k, arrivals=trace.arrivals)
    if expert_a.randomized or expert_b.randomized:
        raise ConfigError("ftl requires deterministic experts")
    return _drive(FtlCombiner(expert_a, expert_b, k), trace, seed=0)


def build_mw(
    policy_a: str,
    policy_b: str,
    k: int,
    *,
    epsilon: float,
    seed: int,
    arrivals=None,
) -> MwCombiner:
    """Build the multiplicative-weights combiner with derived child seeds."""
    root = random.Random(seed)
    expert_a = make_policy(policy_a, k, arrivals=arrivals, seed=root.getrandbits(63))
    expert_b = make_policy(policy_b, k, arrivals=arrivals, seed=root.getrandbits(63))
    return MwCombiner(expert_a, expert_b, k, epsilon, random.Random(root.getrandbits(63)))


def run_mw(
    policy_a: str, policy_b: str, trace: Trace, k: int, epsilon: float, seed: int
) -> CombinedResult:
    """Run the multiplicative-weights combination; one seed fixes everything."""
    combiner = build_mw(
        policy_a, policy_b, k, epsilon=epsilon, seed=seed, arrivals=trace.arrivals
    )
    return _drive(combiner, trace, seed)
