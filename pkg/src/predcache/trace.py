"""Request traces with next-arrival predictions.

A trace is a sequence of page requests together with, for each request, a
real-valued prediction of when that page will next be requested.  Times are
1-based request indices; a page that never recurs has true next arrival n+1.

All randomness in this package comes from ``random.Random`` (Mersenne Twister)
seeded explicitly, so every generated trace is reproducible from its seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import ConfigError, TraceParseError

PageId = str

TRACE_HEADER = "t,page,h"

# Predictions are clamped into [0, _MAX_PREDICTION] so noise models can never
# emit inf/nan.
_MAX_PREDICTION = 1e30


def next_arrivals(requests: list[PageId]) -> list[int]:
    """True next-arrival index for each request (n+1 if the page never recurs).

    Single backward pass; position t's value is the smallest t' > t with the
    same page, using 1-based indices.
    """
    if not requests:
        raise ValueError("requests must be non-empty")
    n = len(requests)
    seen: dict[PageId, int] = {}
    out = [0] * n
    for i in range(n - 1, -1, -1):
        page = requests[i]
        out[i] = seen.get(page, n + 1)
        seen[page] = i + 1
    return out


@dataclass(frozen=True)
class Trace:
    """Immutable request sequence with predictions and derived true arrivals."""

    requests: tuple[PageId, ...]
    predictions: tuple[float, ...]
    arrivals: tuple[int, ...]

    def __post_init__(self):
        n = len(self.requests)
        if n == 0:
            raise ValueError("empty trace")
        if len(self.predictions) != n or len(self.arrivals) != n:
            raise ValueError("requests, predictions and arrivals must have equal length")
        for h in self.predictions:
            if not math.isfinite(h) or h < 0:
                raise ValueError(f"prediction {h!r} is not a finite non-negative real")

    @classmethod
    def from_requests(cls, requests: list[PageId], predictions: list[float]) -> "Trace":
        """Build a trace, deriving true arrivals from the request sequence."""
        if len(requests) != len(predictions):
            raise ValueError("requests and predictions must have equal length")
        arrivals = next_arrivals(list(requests))
        return cls(tuple(requests), tuple(float(h) for h in predictions), tuple(arrivals))

    @property
    def n(self) -> int:
        return len(self.requests)


@dataclass(frozen=True)
class WorkloadSpec:
    """Synthetic workload description.

    kinds:
      - ``uniform``: each request drawn uniformly from the page universe
      - ``zipf``: rank r requested with probability proportional to r**-alpha
      - ``cyclic``: deterministic round-robin over the first ``cycle`` pages
      - ``phased``: working set of ``cycle`` pages, shifted every ``phase_len``
        requests, sampled uniformly within a phase
    """

    kind: str
    universe: int
    length: int
    alpha: float = 1.0
    cycle: int = 0  # 0 means "use the whole universe"
    phase_len: int = 0

    def validate(self) -> None:
        if self.kind not in ("uniform", "zipf", "cyclic", "phased"):
            raise ConfigError(f"unknown workload kind {self.kind!r}")
        if self.universe < 1:
            raise ConfigError("universe_size must be >= 1")
        if self.length < 1:
            raise ConfigError("length must be >= 1")
        if self.kind == "zipf" and not self.alpha > 0:
            raise ConfigError("zipf requires alpha > 0")
        if self.kind in ("cyclic", "phased"):
            m = self.cycle or self.universe
            if not 1 <= m <= self.universe:
                raise ConfigError("cycle size must be in 1..universe_size")
        if self.kind == "phased" and self.phase_len < 1:
            raise ConfigError("phased requires phase_len >= 1")

    @property
    def label(self) -> str:
        base = f"{self.kind}-u{self.universe}-n{self.length}"
        if self.kind == "zipf":
            base += f"-a{self.alpha:g}"
        if self.kind in ("cyclic", "phased") and self.cycle:
            base += f"-m{self.cycle}"
        if self.kind == "phased":
            base += f"-pl{self.phase_len}"
        return base


@dataclass(frozen=True)
class NoiseSpec:
    """Prediction noise model applied to the true arrival times.

    kinds: ``perfect``, ``additive_uniform`` (width), ``additive_gaussian``
    (sigma), ``lognormal_scale`` (sigma), ``constant_shift`` (shift),
    ``random_replace`` (prob, limit).  Outputs are clamped to finite values >= 0.
    """

    kind: str
    width: float = 0.0
    sigma: float = 0.0
    shift: float = 0.0
    prob: float = 0.0
    limit: float = 0.0

    def validate(self) -> None:
        if self.kind not in (
            "perfect",
            "additive_uniform",
            "additive_gaussian",
            "lognormal_scale",
            "constant_shift",
            "random_replace",
        ):
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if self.kind == "additive_uniform" and self.width < 0:
            raise ConfigError("additive_uniform requires width >= 0")
        if self.kind in ("additive_gaussian", "lognormal_scale") and self.sigma < 0:
            raise ConfigError(f"{self.kind} requires sigma >= 0")
        if self.kind == "random_replace":
            if not 0 <= self.prob <= 1:
                raise ConfigError("random_replace requires prob in [0, 1]")
            if not self.limit > 0:
                raise ConfigError("random_replace requires limit > 0")

    @property
    def label(self) -> str:
        if self.kind == "perfect":
            return "perfect"
        if self.kind == "additive_uniform":
            return f"additive_uniform-w{self.width:g}"
        if self.kind == "additive_gaussian":
            return f"additive_gaussian-s{self.sigma:g}"
        if self.kind == "lognormal_scale":
            return f"lognormal_scale-s{self.sigma:g}"
        if self.kind == "constant_shift":
            return f"constant_shift-c{self.shift:g}"
        return f"random_replace-p{self.prob:g}-r{self.limit:g}"


def _page(index: int) -> PageId:
    return f"p{index + 1}"


def generate_workload(spec: WorkloadSpec, seed: int) -> list[PageId]:
    """Generate a request sequence; deterministic for a fixed (spec, seed)."""
    spec.validate()
    rng = random.Random(seed)
    u, n = spec.universe, spec.length
    if spec.kind == "uniform":
        return [_page(rng.randrange(u)) for _ in range(n)]
    if spec.kind == "zipf":
        pages = [_page(i) for i in range(u)]
        weights = [(r + 1) ** -spec.alpha for r in range(u)]
        return rng.choices(pages, weights=weights, k=n)
    m = spec.cycle or u
    if spec.kind == "cyclic":
        return [_page(i % m) for i in range(n)]
    # phased: a contiguous working set that slides by m pages each phase
    out: list[PageId] = []
    for i in range(n):
        phase = i // spec.phase_len
        start = (phase * m) % u
        out.append(_page((start + rng.randrange(m)) % u))
    return out


def perturb_predictions(arrivals: list[int], noise: NoiseSpec, seed: int) -> list[float]:
    """Derive predictions from true arrivals under a noise model.

    ``perfect`` returns the arrivals exactly; every other kind perturbs them
    with the seeded generator, one draw sequence in request order.
    """
    noise.validate()
    rng = random.Random(seed)
    kind = noise.kind
    out: list[float] = []
    for y in arrivals:
        if kind == "perfect":
            h = float(y)
        elif kind == "additive_uniform":
            h = y + rng.uniform(-noise.width, noise.width)
        elif kind == "additive_gaussian":
            h = y + rng.gauss(0.0, noise.sigma)
        elif kind == "lognormal_scale":
            h = y * rng.lognormvariate(0.0, noise.sigma)
        elif kind == "constant_shift":
            h = y + noise.shift
        else:  # random_replace
            h = rng.uniform(0.0, noise.limit) if rng.random() < noise.prob else float(y)
        if not math.isfinite(h):
            h = _MAX_PREDICTION
        out.append(min(max(h, 0.0), _MAX_PREDICTION))
    return out


def synthesize(workload: WorkloadSpec, noise: NoiseSpec, seed: int) -> Trace:
    """Generate a complete trace: requests plus noisy predictions.

    The workload and noise streams get independent child seeds derived from
    ``seed`` so the same requests can be re-noised consistently.
    """
    root = random.Random(seed)
    wseed = root.getrandbits(63)
    nseed = root.getrandbits(63)
    requests = generate_workload(workload, wseed)
    arrivals = next_arrivals(requests)
    predictions = perturb_predictions(arrivals, noise, nseed)
    return Trace(tuple(requests), tuple(predictions), tuple(arrivals))


def parse_trace(text: str) -> Trace:
    """Parse the CSV trace format (header ``t,page,h``; see ``write_trace``).

    Raises TraceParseError with the 1-based line number on malformed input.
    """
    lines = text.splitlines()
    if not lines or lines[0].strip() != TRACE_HEADER:
        raise TraceParseError(f"expected header {TRACE_HEADER!r}", 1)
    requests: list[PageId] = []
    predictions: list[float] = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise TraceParseError(f"expected 3 comma-separated fields, got {len(parts)}", lineno)
        t_text, page, h_text = parts
        try:
            t = int(t_text)
        except ValueError:
            raise TraceParseError(f"non-integer index {t_text!r}", lineno) from None
        if t != len(requests) + 1:
            raise TraceParseError(f"index {t} out of order (expected {len(requests) + 1})", lineno)
        if not page:
            raise TraceParseError("empty page token", lineno)
        try:
            h = float(h_text)
        except ValueError:
            raise TraceParseError(f"non-numeric prediction {h_text!r}", lineno) from None
        if not math.isfinite(h):
            raise TraceParseError(f"non-finite prediction {h_text!r}", lineno)
        if h < 0:
            raise TraceParseError(f"negative prediction {h_text!r}", lineno)
        requests.append(page)
        predictions.append(h)
    if not requests:
        raise TraceParseError("empty trace (no request rows)", 1 + len(lines))
    return Trace.from_requests(requests, predictions)


def write_trace(trace: Trace) -> str:
    """Render a trace in the CSV format; predictions keep full precision."""
    rows = [TRACE_HEADER]
    for i, (page, h) in enumerate(zip(trace.requests, trace.predictions), start=1):
        if "," in page:
            raise ValueError(f"page token {page!r} contains a comma")
        rows.append(f"{i},{page},{h!r}")
    return "\n".join(rows) + "\n"
