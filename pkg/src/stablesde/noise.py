"""Seeded truncated Poisson event streams and stable path assembly.

Streams hold the jumps above a truncation level, either as (t, z) pairs or as
(t, z, u) triples for the thinning representation.  A root seed expands into
per-stream sub-seeds through a counter-based scheme (Philox keyed by
SeedSequence), so regeneration is bit-exact and independent of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BudgetExceeded, EmptySample, StreamPathMismatch, WrongRegime
from .measure import (
    StableParams,
    split_sign_magnitude,
    tail_mass,
    truncation_drift,
)

DEFAULT_EVENT_CAP = 100_000_000


def seed_tuple(seed) -> tuple:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def substream_seed(root, *indices) -> tuple:
    """Derive a sub-seed; distinct index tuples give independent streams."""
    return seed_tuple(root) + tuple(int(i) for i in indices)


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(seed_tuple(seed)))))


def eps_value(eps) -> float:
    from .measure import TruncationLevel

    return eps.epsilon if isinstance(eps, TruncationLevel) else float(eps)


@dataclass(frozen=True)
class EventStream:
    params: StableParams
    horizon: float
    epsilon: float
    times: np.ndarray           # strictly increasing in (0, horizon]
    sizes: np.ndarray           # all |z| > epsilon
    us: np.ndarray | None       # |u| <= u_bound, present for the thinning form
    u_bound: float | None
    seed: tuple

    @property
    def n_events(self) -> int:
        return len(self.times)

    def with_u_bound(self, new_bound: float) -> "EventStream":
        return replace(self, u_bound=new_bound)


def _arrival_times(rng, rate: float, horizon: float) -> np.ndarray:
    """Cumulative exponential gaps cut at the horizon; zero gaps are redrawn."""
    times = []
    t = 0.0
    expected = rate * horizon
    chunk = max(int(expected + 6.0 * math.sqrt(expected + 1.0)) + 16, 64)
    while t < horizon:
        gaps = rng.exponential(1.0 / rate, chunk)
        while np.any(gaps <= 0.0):
            bad = gaps <= 0.0
            gaps[bad] = rng.exponential(1.0 / rate, int(bad.sum()))
        cum = t + np.cumsum(gaps)
        keep = cum <= horizon
        times.append(cum[keep])
        if not keep.all():
            t = horizon
            break
        t = cum[-1]
        chunk = max(chunk // 2, 64)
    return np.concatenate(times) if times else np.empty(0)


def _draw_us(rng, n: int, u_bound: float) -> np.ndarray:
    us = u_bound * (2.0 * rng.random(n) - 1.0)
    while np.any(us == 0.0):
        bad = us == 0.0
        us[bad] = u_bound * (2.0 * rng.random(int(bad.sum())) - 1.0)
    return us


def generate_event_stream(
    params: StableParams,
    eps: float,
    horizon: float,
    u_bound: float | None = None,
    seed=0,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> EventStream:
    """Jumps of the truncated measure over (0, horizon], time-ordered.

    With ``u_bound`` set, each event also carries u uniform on
    [-u_bound, u_bound] minus zero and the Poisson rate scales by 2*u_bound.
    """
    if horizon <= 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if u_bound is not None and u_bound <= 0.0:
        raise ValueError(f"u_bound must be positive, got {u_bound}")
    rate = tail_mass(params, eps)
    if u_bound is not None:
        rate *= 2.0 * u_bound
    if rate * horizon > event_cap:
        raise BudgetExceeded(
            f"expected event count {rate * horizon:.3g} exceeds cap {event_cap}; "
            "raise epsilon or lower u_bound"
        )
    sd = seed_tuple(seed)
    rng = _rng(sd)
    times = _arrival_times(rng, rate, horizon)
    n = len(times)
    u = 1.0 - rng.random(n)  # in (0, 1]
    signs, residual = split_sign_magnitude(params, u)
    sizes = signs * eps_value(eps) * np.power(residual, -1.0 / params.alpha)
    us = _draw_us(rng, n, u_bound) if u_bound is not None else None
    return EventStream(params, float(horizon), float(eps), times, sizes, us, u_bound, sd)


def generate_band_stream(
    params: StableParams,
    eps_lo: float,
    eps_hi: float,
    horizon: float,
    u_bound: float | None = None,
    seed=0,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> EventStream:
    """Jumps with eps_lo < |z| <= eps_hi, for superposition refinement of a stream."""
    if not (0.0 < eps_lo < eps_hi):
        raise ValueError(f"need 0 < eps_lo < eps_hi, got {eps_lo}, {eps_hi}")
    alpha = params.alpha
    rate = tail_mass(params, eps_lo) - tail_mass(params, eps_hi)
    if u_bound is not None:
        rate *= 2.0 * u_bound
    if rate * horizon > event_cap:
        raise BudgetExceeded(f"expected band event count {rate * horizon:.3g} exceeds cap {event_cap}")
    sd = seed_tuple(seed)
    rng = _rng(sd)
    times = _arrival_times(rng, rate, horizon)
    n = len(times)
    u = 1.0 - rng.random(n)  # in (0, 1]
    signs, residual = split_sign_magnitude(params, u)
    # inverse transform of the band-restricted magnitude law
    ratio = (eps_lo / eps_hi) ** alpha
    mags = eps_lo * (1.0 - (1.0 - residual) * (1.0 - ratio)) ** (-1.0 / alpha)
    sizes = signs * mags
    us = _draw_us(rng, n, u_bound) if u_bound is not None else None
    return EventStream(params, float(horizon), float(eps_lo), times, sizes, us, u_bound, sd)


def generate_u_extension_stream(
    stream: EventStream,
    new_bound: float,
    seed,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> EventStream:
    """Events with |u| in (stream.u_bound, new_bound], for superposition-consistent regrowth."""
    if stream.u_bound is None:
        raise ValueError("stream has no u coordinate")
    old = stream.u_bound
    if new_bound <= old:
        raise ValueError(f"new bound {new_bound} must exceed current {old}")
    params = stream.params
    rate = tail_mass(params, stream.epsilon) * 2.0 * (new_bound - old)
    if rate * stream.horizon > event_cap:
        raise BudgetExceeded(f"expected extension event count {rate * stream.horizon:.3g} exceeds cap")
    sd = seed_tuple(seed)
    rng = _rng(sd)
    times = _arrival_times(rng, rate, stream.horizon)
    n = len(times)
    u = 1.0 - rng.random(n)
    signs, residual = split_sign_magnitude(params, u)
    sizes = signs * stream.epsilon * np.power(residual, -1.0 / params.alpha)
    band = old + (new_bound - old) * (1.0 - rng.random(n))  # in (old, new]
    sign_u = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    us = sign_u * band
    return EventStream(params, stream.horizon, stream.epsilon, times, sizes, us, new_bound, sd)


def merge_streams(a: EventStream, b: EventStream) -> EventStream:
    """Time-ordered superposition of two streams over the same horizon."""
    if a.horizon != b.horizon:
        raise ValueError("streams cover different horizons")
    if (a.us is None) != (b.us is None):
        raise ValueError("cannot merge a plain stream with a thinning stream")
    times = np.concatenate([a.times, b.times])
    order = np.argsort(times, kind="stable")
    sizes = np.concatenate([a.sizes, b.sizes])[order]
    us = np.concatenate([a.us, b.us])[order] if a.us is not None else None
    ub = None if a.u_bound is None else max(a.u_bound, b.u_bound)
    eps = min(a.epsilon, b.epsilon)
    return EventStream(a.params, a.horizon, eps, times[order], sizes, us, ub, a.seed + b.seed)


# ---------------------------------------------------------------------------
# path skeletons
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathSkeleton:
    """Piecewise-linear path: nodes carry post-jump values, segments carry drift rates."""

    times: np.ndarray        # strictly increasing, times[0] = 0
    values: np.ndarray       # state at each node (post-jump at jump nodes)
    jump_flags: np.ndarray   # bool, which nodes are jump instants
    drift_rates: np.ndarray  # len(times)-1, linear rate on each segment

    def __post_init__(self):
        if len(self.times) != len(self.values) or len(self.times) != len(self.jump_flags):
            raise ValueError("times/values/jump_flags lengths disagree")
        if len(self.drift_rates) != max(len(self.times) - 1, 0):
            raise ValueError("drift_rates must have one entry per segment")
        if len(self.times) == 0 or self.times[0] != 0.0:
            raise ValueError("path must start at time 0")

    @property
    def final_value(self) -> float:
        return float(self.values[-1])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def value_at(self, t: float) -> float:
        """Right-continuous evaluation."""
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        if i < 0:
            raise ValueError(f"t={t} precedes the path start")
        if i >= len(self.times) - 1 and t > self.times[-1]:
            raise ValueError(f"t={t} beyond the path horizon {self.horizon}")
        if t == self.times[i]:
            return float(self.values[i])
        return float(self.values[i] + self.drift_rates[i] * (t - self.times[i]))

    def left_limit_at(self, t: float) -> float:
        i = int(np.searchsorted(self.times, t, side="left")) - 1
        if i < 0:
            raise ValueError(f"t={t} has no left limit on this path")
        return float(self.values[i] + self.drift_rates[i] * (t - self.times[i]))

    def jump_times(self) -> np.ndarray:
        return self.times[self.jump_flags]

    def jump_sizes(self) -> np.ndarray:
        idx = np.nonzero(self.jump_flags)[0]
        pre = self.values[idx - 1] + self.drift_rates[idx - 1] * (self.times[idx] - self.times[idx - 1])
        return self.values[idx] - pre

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t,value,is_jump\n")
            for t, v, j in zip(self.times.tolist(), self.values.tolist(), self.jump_flags.tolist()):
                fh.write(f"{t!r},{v!r},{int(j)}\n")


def build_stable_path(stream: EventStream, params: StableParams, compensate: bool) -> PathSkeleton:
    """Assemble the truncated stable path from a stream.

    Compensated form (jumps minus the truncation drift) is mandatory for
    alpha in (1,2) and forbidden below 1.
    """
    if compensate != (params.alpha > 1.0):
        raise WrongRegime(
            f"compensate={compensate} inconsistent with alpha={params.alpha}"
        )
    mu = truncation_drift(params, stream.epsilon) if compensate else 0.0
    n = stream.n_events
    times = np.empty(n + 2)
    values = np.empty(n + 2)
    flags = np.zeros(n + 2, dtype=bool)
    times[0] = 0.0
    values[0] = 0.0
    times[1:n + 1] = stream.times
    jump_cum = np.cumsum(stream.sizes)
    values[1:n + 1] = jump_cum - mu * stream.times
    flags[1:n + 1] = True
    times[n + 1] = stream.horizon
    values[n + 1] = (jump_cum[-1] if n else 0.0) - mu * stream.horizon
    if n and stream.times[-1] == stream.horizon:
        times, values, flags = times[:-1], values[:-1], flags[:-1]
    rates = np.full(len(times) - 1, -mu)
    return PathSkeleton(times, values, flags, rates)


def stable_endpoint_samples(
    params: StableParams,
    eps: float,
    horizon: float,
    n_samples: int,
    seed=0,
    compensate: bool | None = None,
) -> np.ndarray:
    """Vectorized endpoint values of n independent truncated stable paths."""
    if compensate is None:
        compensate = params.alpha > 1.0
    if compensate != (params.alpha > 1.0):
        raise WrongRegime(f"compensate={compensate} inconsistent with alpha={params.alpha}")
    rate = tail_mass(params, eps)
    rng = _rng(seed)
    counts = rng.poisson(rate * horizon, n_samples)
    total = int(counts.sum())
    u = 1.0 - rng.random(total)
    signs, residual = split_sign_magnitude(params, u)
    sizes = signs * eps_value(eps) * np.power(residual, -1.0 / params.alpha)
    sums = np.zeros(n_samples)
    np.add.at(sums, np.repeat(np.arange(n_samples), counts), sizes)
    if compensate:
        sums -= horizon * truncation_drift(params, eps)
    return sums


def self_similarity_distance(samples_a, samples_b) -> float:
    """Sup distance between empirical characteristic functions on a fixed grid."""
    a = np.asarray(samples_a, dtype=float)
    b = np.asarray(samples_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise EmptySample("both sample sets must be non-empty")
    grid = np.linspace(-5.0, 5.0, 64)

    def ecf(x):
        out = np.empty(len(grid), dtype=complex)
        for i, xi in enumerate(grid):
            out[i] = np.exp(1j * xi * x).mean()
        return out

    return float(np.max(np.abs(ecf(a) - ecf(b))))


# ---------------------------------------------------------------------------
# representation conversion
# ---------------------------------------------------------------------------

def reconstruct_Z(stream: EventStream, path: PathSkeleton, coeffs, params: StableParams) -> PathSkeleton:
    """Rebuild the driving stable path from a thinning-form solve.

    Each event contributes z/sigma(Y-) on its accepted band, or z on the unit
    band where sigma vanishes; the per-jump identity
    sigma(Y-) * dZ = z * (band sign) then holds exactly.
    """
    if stream.us is None:
        raise ValueError("reconstruction needs a stream with u coordinates")
    path_jumps = set(path.jump_times().tolist())
    if not path_jumps.issubset(set(stream.times.tolist())):
        raise StreamPathMismatch("path jump times are not a subset of the stream times")
    sigma = coeffs.sigma
    gamma = coeffs.gamma
    times = [0.0]
    values = [0.0]
    flags = [False]
    z_val = 0.0
    for t, z, u in zip(stream.times, stream.sizes, stream.us):
        y_pre = path.left_limit_at(t)
        s = sigma(y_pre)
        if s != 0.0:
            g = gamma(y_pre)
            if 0.0 < u < g:
                dz = z / s
            elif g < u < 0.0:
                dz = -z / s
            else:
                continue
        elif 0.0 < u < 1.0:
            dz = z
        else:
            continue
        z_val += dz
        times.append(t)
        values.append(z_val)
        flags.append(True)
    if times[-1] != stream.horizon:
        times.append(stream.horizon)
        values.append(z_val)
        flags.append(False)
    n = len(times)
    return PathSkeleton(
        np.array(times), np.array(values), np.array(flags, dtype=bool), np.zeros(n - 1)
    )


# ---------------------------------------------------------------------------
# serialization: one event per line, bit-exact round trip
# ---------------------------------------------------------------------------

def save_stream(stream: EventStream, path) -> None:
    with open(path, "w") as fh:
        fh.write(stream_header(stream) + "\n")
        if stream.us is None:
            for t, z in zip(stream.times.tolist(), stream.sizes.tolist()):
                fh.write(f"{t!r}\t{z!r}\n")
        else:
            for t, z, u in zip(stream.times.tolist(), stream.sizes.tolist(), stream.us.tolist()):
                fh.write(f"{t!r}\t{z!r}\t{u!r}\n")


def stream_header(stream: EventStream) -> str:
    p = stream.params
    head = (
        f"#levy-stream v1 alpha={p.alpha!r} a-={p.a_minus!r} a+={p.a_plus!r} "
        f"eps={stream.epsilon!r} T={stream.horizon!r} seed={':'.join(str(s) for s in stream.seed)}"
    )
    if stream.u_bound is not None:
        head += f" u_bound={stream.u_bound!r}"
    return head


def load_stream(path) -> EventStream:
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith("#levy-stream v1 "):
            raise ValueError(f"not a v1 stream file: {header[:40]}")
        fields = dict(item.split("=", 1) for item in header[len("#levy-stream v1 "):].split(" "))
        params = StableParams(float(fields["alpha"]), float(fields["a-"]), float(fields["a+"]))
        seed = tuple(int(s) for s in fields["seed"].split(":"))
        u_bound = float(fields["u_bound"]) if "u_bound" in fields else None
        rows = [line.split("\t") for line in fh if line.strip()]
    times = np.array([float(r[0]) for r in rows])
    sizes = np.array([float(r[1]) for r in rows])
    us = np.array([float(r[2]) for r in rows]) if u_bound is not None else None
    return EventStream(
        params, float(fields["T"]), float(fields["eps"]), times, sizes, us, u_bound, seed
    )
