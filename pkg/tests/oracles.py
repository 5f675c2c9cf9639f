"""Independent reference implementations used to cross-check the library.

Everything here is deliberately brute force and shares no code with the
package: next arrivals by forward scan, and the offline optimum by exhaustive
enumeration of eviction choices.
"""

from __future__ import annotations

from functools import lru_cache


def scan_next_arrivals(requests: list[str]) -> list[int]:
    """O(n^2) forward scan: the smallest t' > t requesting the same page."""
    n = len(requests)
    out = []
    for i in range(n):
        nxt = n + 1
        for j in range(i + 1, n):
            if requests[j] == requests[i]:
                nxt = j + 1
                break
        out.append(nxt)
    return out


def brute_force_opt(requests: list[str], k: int) -> int:
    """Minimum eviction count over all eviction choices (memoized search).

    Mirrors the serve contract: hits and cold fills are free, a miss with a
    full cache tries every possible victim.
    """
    requests = tuple(requests)

    @lru_cache(maxsize=None)
    def best(i: int, cache: frozenset) -> int:
        if i == len(requests):
            return 0
        page = requests[i]
        if page in cache:
            return best(i + 1, cache)
        if len(cache) < k:
            return best(i + 1, cache | {page})
        return 1 + min(best(i + 1, cache - {victim} | {page}) for victim in cache)

    result = best(0, frozenset())
    best.cache_clear()
    return result
