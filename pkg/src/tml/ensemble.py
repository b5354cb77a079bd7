"""Finite discrete entry laws and symmetric matrix sampling.

A random symmetric matrix M of size n is filled with i.i.d. draws from a
finite discrete law on the upper triangle (diagonal included) and mirrored
below.  The law must be centered and is kept with its full moment sequence
so that exact path-sum computations can ask for any edge multiplicity.
The normalized companion matrix is A = M / sqrt(n).

Randomness: numpy's default PCG64 bit generator.  Every Monte Carlo trial t
derives its own seed as ``seed + t``, so results never depend on execution
order or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MOMENT_CACHE_DEPTH = 64
RNG_ALGORITHM = "numpy-PCG64"

_SUM_TOL = 1e-12
_MEAN_TOL = 1e-12


class DistributionError(ValueError):
    """Raised when a proposed entry law violates the model assumptions."""


@dataclass(frozen=True)
class EntryDistribution:
    """A centered finite discrete law with cached moments.

    ``moment_cache[k]`` holds E[x^k] for k = 0..MOMENT_CACHE_DEPTH.
    ``bound_K`` is max |x| over the support, so |E[x^k]| <= bound_K**k.
    """

    support: tuple[float, ...]
    probabilities: tuple[float, ...]
    moment_cache: tuple[float, ...]
    sigma: float
    mu3: float
    bound_K: float
    name: str = "custom"


@dataclass(frozen=True)
class MatrixSample:
    """One sampled symmetric matrix with its generating seed."""

    n: int
    entries: np.ndarray
    seed: int

    @property
    def normalized_view(self) -> np.ndarray:
        """entries / sqrt(n), the scale on which the spectrum lives on O(1)."""
        return self.entries / np.sqrt(self.n)


def make_distribution(
    support: list[float] | tuple[float, ...],
    probabilities: list[float] | tuple[float, ...],
    name: str = "custom",
) -> EntryDistribution:
    """Validate and freeze a centered finite discrete law.

    Rejects mismatched lengths, probabilities outside (0, 1], probability
    mass not summing to 1 (tolerance 1e-12), a nonzero mean (tolerance
    1e-12), and zero variance.
    """
    xs = tuple(float(x) for x in support)
    ps = tuple(float(p) for p in probabilities)
    if len(xs) != len(ps):
        raise DistributionError("support and probabilities must have equal length")
    if len(xs) < 1:
        raise DistributionError("empty support")
    if len(set(xs)) != len(xs):
        raise DistributionError("support points must be distinct")
    for p in ps:
        if not (0.0 < p <= 1.0):
            raise DistributionError(f"probability {p!r} outside (0, 1]")
    if abs(sum(ps) - 1.0) > _SUM_TOL:
        raise DistributionError(f"probabilities sum to {sum(ps)!r}, not 1")
    mean = sum(p * x for p, x in zip(ps, xs))
    if abs(mean) > _MEAN_TOL:
        raise DistributionError(f"law has mean {mean!r}, must be centered")
    var = sum(p * x * x for p, x in zip(ps, xs))
    if var <= 0.0:
        raise DistributionError("law has zero variance")
    cache = tuple(
        sum(p * x**k for p, x in zip(ps, xs)) for k in range(MOMENT_CACHE_DEPTH + 1)
    )
    mu3 = sum(p * x**3 for p, x in zip(ps, xs))
    bound = max(abs(x) for x in xs)
    return EntryDistribution(
        support=xs,
        probabilities=ps,
        moment_cache=cache,
        sigma=float(np.sqrt(var)),
        mu3=mu3,
        bound_K=bound,
        name=name,
    )


def moment(dist: EntryDistribution, k: int) -> float:
    """E[x^k].  Cached up to order MOMENT_CACHE_DEPTH, exact beyond it."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    if k <= MOMENT_CACHE_DEPTH:
        return dist.moment_cache[k]
    return sum(p * x**k for p, x in zip(dist.probabilities, dist.support))


def rademacher() -> EntryDistribution:
    """Fair signs: support [-1, 1], sigma = 1, all odd moments 0."""
    return make_distribution([-1.0, 1.0], [0.5, 0.5], name="rademacher")


def skew12() -> EntryDistribution:
    """Asymmetric two-point law on [-1, 2]: sigma^2 = 2, third moment 2."""
    return make_distribution([-1.0, 2.0], [2.0 / 3.0, 1.0 / 3.0], name="skew12")


_PRESETS = {"rademacher": rademacher, "skew12": skew12}


def parse_distribution(token: str) -> EntryDistribution:
    """Parse a CLI distribution token.

    Accepts a preset name ("rademacher", "skew12") or an inline form
    "support=-1,2;probs=0.5,0.5".
    """
    token = token.strip()
    if token in _PRESETS:
        return _PRESETS[token]()
    parts = dict(
        chunk.split("=", 1) for chunk in token.split(";") if "=" in chunk
    )
    if "support" not in parts or "probs" not in parts:
        raise DistributionError(
            f"unknown distribution {token!r}: expected a preset name "
            "or 'support=...;probs=...'"
        )
    try:
        xs = [float(v) for v in parts["support"].split(",") if v != ""]
        ps = [float(v) for v in parts["probs"].split(",") if v != ""]
    except ValueError as exc:
        raise DistributionError(f"bad distribution token {token!r}: {exc}") from exc
    return make_distribution(xs, ps)


def sample_symmetric_matrix(dist: EntryDistribution, n: int, seed: int) -> MatrixSample:
    """Draw one symmetric n x n matrix with i.i.d. upper-triangle entries.

    The upper triangle (diagonal included) is filled in row-major order from
    a single PCG64 stream seeded with ``seed``; the lower triangle mirrors it.
    """
    if n < 1:
        raise ValueError("matrix size must be at least 1")
    rng = np.random.default_rng(seed)
    u = rng.random(n * (n + 1) // 2)
    cum = np.cumsum(np.asarray(dist.probabilities))
    cum[-1] = 1.0  # guard the top bin against rounding
    idx = np.searchsorted(cum, u, side="right")
    vals = np.asarray(dist.support)[idx]
    a = np.zeros((n, n))
    iu = np.triu_indices(n)
    a[iu] = vals
    a.T[iu] = vals
    return MatrixSample(n=n, entries=a, seed=seed)
