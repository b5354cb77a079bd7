"""Spectral side of the moment method: eigenvalue extraction, matrix-power
traces, Monte Carlo trace estimation, semicircle-budget predictions, Markov
tail bounds, and the two spectrum experiments (edge exceedance and
concentration of the top eigenvalue).

Determinism contract: every randomized routine takes one integer seed and
derives the trial-i stream as seed + i, so runs are reproducible and
independent of thread count and scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .dyck import catalan
from .ensemble import EntryDistribution, sample_symmetric_matrix

DENSE_EIG_CUTOFF = 64
DEFAULT_TOLERANCE = 1e-10


class EigensolverError(RuntimeError):
    """Iterative eigensolver failed to converge; carries the residual."""

    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual


def _check_symmetric(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(a, a.T, atol=1e-12, rtol=0.0):
        raise ValueError("matrix is not symmetric")
    return a


def largest_eigenvalue(a: np.ndarray, tol: float = DEFAULT_TOLERANCE) -> float:
    """Top eigenvalue of a symmetric matrix.

    Small matrices go through the full dense solver; larger ones use the
    iterative Lanczos solver with a fixed all-ones starting vector so the
    result is bit-reproducible.  Non-convergence raises EigensolverError
    with the residual of the best available pair.
    """
    a = _check_symmetric(a)
    n = a.shape[0]
    if n < DENSE_EIG_CUTOFF:
        return float(np.linalg.eigvalsh(a)[-1])
    v0 = np.full(n, 1.0 / math.sqrt(n))
    try:
        vals = eigsh(a, k=1, which="LA", v0=v0, tol=tol, return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        residual = math.nan
        if len(exc.eigenvalues) and exc.eigenvectors.size:
            lam = float(exc.eigenvalues[-1])
            vec = exc.eigenvectors[:, -1]
            residual = float(np.linalg.norm(a @ vec - lam * vec))
        raise EigensolverError(
            f"Lanczos iteration did not converge at tol={tol}", residual=residual
        ) from exc
    return float(vals[-1])


def spectral_norm(a: np.ndarray, tol: float = DEFAULT_TOLERANCE) -> float:
    """Operator norm of a symmetric matrix as max of the top eigenvalues of
    the matrix and its negation."""
    return max(largest_eigenvalue(a, tol), largest_eigenvalue(-np.asarray(a, dtype=float), tol))


def trace_power(a: np.ndarray, s: int, method: str = "power") -> float:
    """Tr a^(2s) for symmetric a, by repeated squaring ("power") or through
    the full spectrum ("eig").  The two routes agree to rounding and are
    kept separate on purpose as a cross-check."""
    if s < 1:
        raise ValueError("s must be at least 1")
    a = _check_symmetric(a)
    if method == "power":
        return float(np.trace(np.linalg.matrix_power(a, 2 * s)))
    if method == "eig":
        vals = np.linalg.eigvalsh(a)
        return float(np.sum(vals ** (2 * s)))
    raise ValueError(f"unknown trace method {method!r}")


@dataclass(frozen=True)
class TraceEstimate:
    """Monte Carlo estimate of E[Tr A^(2s)] with its standard error."""

    mean: float
    stderr: float
    trials: int
    n: int
    s: int


def _run_trials(worker, trials: int, threads: int) -> list:
    """Evaluate worker(i) for i in range(trials), in trial order.

    The per-trial seeds make results independent of the execution order, so
    a thread pool changes wall time only.
    """
    if threads <= 1:
        return [worker(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(trials)))


def mc_expected_trace(
    dist: EntryDistribution,
    n: int,
    s: int,
    trials: int,
    seed: int,
    normalized: bool = True,
    method: str = "eig",
    threads: int = 1,
) -> TraceEstimate:
    """Estimate E[Tr A^(2s)] (A the 1/sqrt(n)-normalized matrix, or the raw
    matrix when normalized=False) over independent samples."""
    if trials < 1:
        raise ValueError("need at least one trial")

    def worker(i: int) -> float:
        sample = sample_symmetric_matrix(dist, n, seed + i)
        a = sample.normalized_view if normalized else sample.entries
        return trace_power(a, s, method=method)

    values = np.array(_run_trials(worker, trials, threads))
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return TraceEstimate(mean=mean, stderr=stderr, trials=trials, n=n, s=s)


def wigner_trace_prediction(n: int, s: int, sigma: float) -> float:
    """Leading even-walk budget n * catalan(s) * sigma^(2s)."""
    return n * catalan(s) * sigma ** (2 * s)


def wigner_trace_prediction_refined(n: int, s: int, sigma: float) -> float:
    """Stirling-refined budget n * (2 sigma)^(2s) / (sqrt(pi) * s^(3/2)),
    the large-s shape of the leading prediction."""
    return n * (2.0 * sigma) ** (2 * s) / (math.sqrt(math.pi) * s**1.5)


def markov_tail_bound(expected_trace: float, threshold: float, s: int) -> float:
    """P(lambda_max > threshold) <= expected_trace / threshold^(2s), clamped
    to 1.  expected_trace must bound E[Tr A^(2s)] from above."""
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")
    if expected_trace < 0.0:
        raise ValueError("expected trace must be nonnegative")
    return min(1.0, expected_trace / threshold ** (2 * s))


EDGE_EXPONENT = -6.0 / 11.0


@dataclass(frozen=True)
class EdgeExceedanceResult:
    """Fraction of samples whose top normalized eigenvalue clears
    2*sigma + n^(-6/11 + epsilon)."""

    n: int
    trials: int
    epsilon: float
    threshold: float
    exceed_count: int
    exceed_fraction: float
    lambda_max_values: tuple[float, ...]


def edge_exceedance_experiment(
    dist: EntryDistribution,
    n: int,
    trials: int,
    epsilon: float,
    seed: int,
    threads: int = 1,
    tol: float = DEFAULT_TOLERANCE,
) -> EdgeExceedanceResult:
    """Sample matrices and count how often the top eigenvalue of the
    normalized matrix exceeds 2*sigma + n^(-6/11 + epsilon)."""
    if trials < 1:
        raise ValueError("need at least one trial")
    threshold = 2.0 * dist.sigma + float(n) ** (EDGE_EXPONENT + epsilon)

    def worker(i: int) -> float:
        sample = sample_symmetric_matrix(dist, n, seed + i)
        return largest_eigenvalue(sample.normalized_view, tol=tol)

    values = _run_trials(worker, trials, threads)
    count = sum(1 for v in values if v > threshold)
    return EdgeExceedanceResult(
        n=n,
        trials=trials,
        epsilon=epsilon,
        threshold=threshold,
        exceed_count=count,
        exceed_fraction=count / trials,
        lambda_max_values=tuple(values),
    )


@dataclass(frozen=True)
class ConcentrationRow:
    """Empirical tail of |lambda_max - center| at deviation K*t/sqrt(n),
    next to the proved ceiling min(1, 4*exp(-t^2/32))."""

    t: float
    deviation: float
    empirical_fraction: float
    bound: float


def concentration_bound(t: float) -> float:
    """The ceiling min(1, 4*exp(-t^2/32)) for deviations K*t/sqrt(n)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return min(1.0, 4.0 * math.exp(-t * t / 32.0))


def concentration_experiment(
    dist: EntryDistribution,
    n: int,
    trials: int,
    t_values: list[float] | tuple[float, ...],
    seed: int,
    threads: int = 1,
    tol: float = DEFAULT_TOLERANCE,
) -> list[ConcentrationRow]:
    """Tail of the top normalized eigenvalue around its mean.

    The deviation is measured from the sample mean over these trials; the
    proved ceiling concerns the deviation from the expectation, so the
    substitution adds O(stderr) slack, negligible against K*t/sqrt(n) at the
    trial counts used here.
    """
    if trials < 2:
        raise ValueError("need at least two trials")

    def worker(i: int) -> float:
        sample = sample_symmetric_matrix(dist, n, seed + i)
        return largest_eigenvalue(sample.normalized_view, tol=tol)

    values = np.array(_run_trials(worker, trials, threads))
    center = float(values.mean())
    scale = dist.bound_K / math.sqrt(n)
    rows = []
    for t in t_values:
        dev = scale * float(t)
        frac = float(np.mean(np.abs(values - center) >= dev))
        rows.append(
            ConcentrationRow(
                t=float(t),
                deviation=dev,
                empirical_fraction=frac,
                bound=concentration_bound(float(t)),
            )
        )
    return rows
