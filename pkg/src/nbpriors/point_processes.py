"""Samplers for the unit-rate Poisson arrival stream, transformed Poisson
random measures, and the negative binomial point sequence.

The negative binomial sequence comes in two equivalent-by-construction
flavors:

* integer order r: transform the arrival ratios Γ_i / Γ_r for i > r,
  which keeps every point inside (0, L^{-1}(1));
* real order r > 0: transform Γ_i / G for a Gamma(r, 1) mixing variable
  G drawn independently of the arrivals (a Poisson random measure with
  gamma-randomized intensity).  Points may then exceed L^{-1}(1),
  mirroring the full jump sequence of the subordinator picture.

r = 0 reduces to the plain Poisson random measure (Γ_0 = 1 convention).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from ._rng import (
    DEFAULT_GENERATOR_ID,
    STREAM_ARRIVALS,
    STREAM_MIXING,
    spawn_generator,
)
from .errors import (
    DegenerateTruncationError,
    DomainError,
    NumericError,
    ResourceLimitError,
)
from .levy_tails import LevyTail, log_tail_inverse

MAX_ARRIVALS = 100_000_000  # ~800 MB of float64, hard memory bound

_CHUNK = 1024  # draw size for the epsilon stopping rule; fixed for determinism


@dataclass(frozen=True)
class TruncationPolicy:
    """How to cut the infinite point series.

    ``fixed_count`` truncates the series at arrival index ``n`` (the sum
    runs i = r+1 .. n, so n - r points are retained on the integer-order
    path and n points when the series starts at i = 1).  ``epsilon_rule``
    stops at the first index whose point, relative to the running sum of
    retained points, drops below ``epsilon``; that index is included.
    ``hard_cap`` bounds the number of retained points in all modes.
    """

    mode: str
    n: int | None = None
    epsilon: float | None = None
    hard_cap: int = 1_000_000

    def __post_init__(self):
        if self.mode not in ("fixed_count", "epsilon_rule"):
            raise DomainError(f"unknown truncation mode {self.mode!r}")
        if int(self.hard_cap) < 1:
            raise DomainError("hard_cap must be positive")
        if self.mode == "fixed_count":
            if self.n is None or int(self.n) < 1:
                raise DomainError(f"fixed_count needs a positive index bound n, got {self.n}")
            if self.epsilon is not None:
                raise DomainError("fixed_count does not take epsilon")
        else:
            if self.epsilon is None or not (0.0 < float(self.epsilon) < 1.0):
                raise DomainError(f"epsilon_rule needs epsilon in (0,1), got {self.epsilon}")
            if self.n is not None:
                raise DomainError("epsilon_rule does not take n")

    @classmethod
    def fixed(cls, n: int, hard_cap: int = 1_000_000) -> "TruncationPolicy":
        return cls(mode="fixed_count", n=int(n), hard_cap=int(hard_cap))

    @classmethod
    def epsilon_rule(cls, epsilon: float, hard_cap: int = 1_000_000) -> "TruncationPolicy":
        return cls(mode="epsilon_rule", epsilon=float(epsilon), hard_cap=int(hard_cap))

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "hard_cap": int(self.hard_cap)}
        if self.n is not None:
            out["n"] = int(self.n)
        if self.epsilon is not None:
            out["epsilon"] = float(self.epsilon)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TruncationPolicy":
        extra = set(data) - {"mode", "n", "epsilon", "hard_cap"}
        if extra:
            raise DomainError(f"unknown truncation fields: {sorted(extra)}")
        return cls(
            mode=data.get("mode", "fixed_count"),
            n=data.get("n"),
            epsilon=data.get("epsilon"),
            hard_cap=data.get("hard_cap", 1_000_000),
        )


@dataclass
class ArrivalStream:
    """Realized Poisson arrivals Γ_1 < Γ_2 < ... (partial sums of Exp(1))."""

    arrivals: np.ndarray
    seed: tuple
    generator_id: str = DEFAULT_GENERATOR_ID

    def __post_init__(self):
        arr = np.asarray(self.arrivals, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise DomainError("arrivals must be a nonempty 1-d array")
        if arr[0] <= 0 or (arr.size > 1 and not np.all(np.diff(arr) > 0)):
            raise DomainError("arrivals must be strictly increasing and positive")
        self.arrivals = arr

    def __len__(self):
        return self.arrivals.size


def gamma_arrivals(seed, count: int, generator_id: str = DEFAULT_GENERATOR_ID) -> ArrivalStream:
    """First ``count`` arrivals of a unit-rate Poisson process.

    Deterministic given (seed, generator_id); the increments are i.i.d.
    unit-mean exponentials.
    """
    count = int(count)
    if count < 1:
        raise DomainError(f"count must be at least 1, got {count}")
    if count > MAX_ARRIVALS:
        raise ResourceLimitError(f"count {count} exceeds the hard bound {MAX_ARRIVALS}")
    rng = spawn_generator(seed, STREAM_ARRIVALS, generator_id)
    arrivals = np.cumsum(rng.standard_exponential(count))
    from ._rng import seed_tuple

    return ArrivalStream(arrivals=arrivals, seed=seed_tuple(seed), generator_id=generator_id)


def sample_prm_points(tail: LevyTail, stream: ArrivalStream) -> np.ndarray:
    """Points L^{-1}(Γ_i) of the Poisson random measure with intensity L.

    Strictly decreasing.  Deep arrivals of a gamma-kind tail may underflow
    to zero in linear domain; use the log-domain machinery downstream when
    that matters.
    """
    return np.exp(log_tail_inverse(tail, stream.arrivals))


@dataclass(frozen=True)
class NbpConfig:
    """Order r, tail measure, and truncation for the negative binomial sampler."""

    r: float
    tail: LevyTail
    truncation: TruncationPolicy

    def __post_init__(self):
        r = float(self.r)
        if not (math.isfinite(r) and r >= 0):
            raise DomainError(f"order r must be a nonnegative real, got {self.r}")


@dataclass
class PointSeries:
    """Truncated decreasing point sequence with its stopping diagnostics.

    ``log_points`` holds ln of the points (kept in log domain so that deep
    gamma-tail points survive underflow); ``first_index`` is the series
    index of the first retained point (r + 1 on the integer-order path,
    1 otherwise).  ``truncation_warning`` is set when the hard cap fired
    before the epsilon rule did.
    """

    log_points: np.ndarray
    first_index: int
    stopped_by: str
    truncation_warning: bool = False

    @property
    def points(self) -> np.ndarray:
        return np.exp(self.log_points)

    def __len__(self):
        return self.log_points.size

    def to_csv(self, file=None) -> str | None:
        return write_points_csv(self.points, first_index=self.first_index, file=file)


def write_points_csv(points, first_index: int = 1, file=None) -> str | None:
    """Write (index, value) rows; returns the text when no file is given."""
    buf = io.StringIO()
    buf.write("index,value\n")
    for j, v in enumerate(np.asarray(points, dtype=float)):
        buf.write(f"{first_index + j},{float(v)!r}\n")
    text = buf.getvalue()
    if file is None:
        return text
    if isinstance(file, (str, bytes)):
        with open(file, "w") as fh:
            fh.write(text)
    else:
        file.write(text)
    return None


def sample_nbp_points(
    cfg: NbpConfig,
    seed,
    generator_id: str = DEFAULT_GENERATOR_ID,
    randomized: bool | None = None,
) -> PointSeries:
    """Sample the truncated negative binomial point sequence.

    ``randomized=None`` picks the integer-order arrival-ratio path when r
    is a nonnegative integer and the gamma-randomized path otherwise;
    pass ``True`` to force the randomized path (any r > 0), ``False`` to
    insist on the integer path.
    """
    r = float(cfg.r)
    is_integer = r == math.floor(r)
    if randomized is None:
        randomized = not is_integer
    if randomized and r == 0.0:
        raise DomainError("the randomized path needs r > 0")
    if not randomized and not is_integer:
        raise DomainError(f"the integer-order path needs integer r, got {r}")

    rng = spawn_generator(seed, STREAM_ARRIVALS, generator_id)
    offset = 0
    if randomized:
        mix_rng = spawn_generator(seed, STREAM_MIXING, generator_id)
        divisor = float(mix_rng.gamma(r, 1.0))
        if not (math.isfinite(divisor) and divisor > 0.0):
            # a tiny order r can underflow the gamma draw to an exact zero
            raise NumericError(f"gamma mixing draw degenerated to {divisor} at r={r}")
        first_index = 1
    elif r == 0.0:
        divisor = 1.0  # Gamma_0 = 1 convention: the plain Poisson random measure
        first_index = 1
    else:
        offset = int(r)
        head = np.cumsum(rng.standard_exponential(offset))
        divisor = float(head[-1])
        first_index = offset + 1

    trunc = cfg.truncation
    if trunc.mode == "fixed_count":
        keep = int(trunc.n) - (first_index - 1)
        if keep < 2:
            raise DegenerateTruncationError(
                f"fixed_count n={trunc.n} retains {max(keep, 0)} points past index {first_index - 1}"
            )
        if keep > trunc.hard_cap:
            raise ResourceLimitError(f"fixed_count would retain {keep} points, above hard_cap={trunc.hard_cap}")
        incr = rng.standard_exponential(keep)
        tail_arrivals = divisor + np.cumsum(incr) if offset else np.cumsum(incr)
        log_pts = log_tail_inverse(cfg.tail, tail_arrivals / divisor)
        return PointSeries(log_pts, first_index, "fixed_count")

    # epsilon rule: grow in fixed-size chunks so the draw sequence is
    # independent of where the rule fires
    eps = float(trunc.epsilon)
    chunks: list[np.ndarray] = []
    running_sum = 0.0
    retained = 0
    last_arrival = divisor if offset else 0.0
    while True:
        incr = rng.standard_exponential(_CHUNK)
        incr[0] += last_arrival
        arrivals = np.cumsum(incr)
        last_arrival = float(arrivals[-1])
        log_pts = log_tail_inverse(cfg.tail, arrivals / divisor)
        pts = np.exp(log_pts)
        ratios = pts / (running_sum + np.cumsum(pts))
        below = np.flatnonzero(ratios < eps)
        if below.size:
            cut = int(below[0]) + 1  # the triggering index is retained
            chunks.append(log_pts[:cut])
            retained += cut
            if retained <= trunc.hard_cap:
                return PointSeries(np.concatenate(chunks), first_index, "epsilon_rule")
        else:
            chunks.append(log_pts)
            retained += _CHUNK
            running_sum += float(np.sum(pts))
        if retained >= trunc.hard_cap:
            total = np.concatenate(chunks)[: trunc.hard_cap]
            return PointSeries(total, first_index, "hard_cap", truncation_warning=True)
