"""Batch session running with reproducible streams and sound estimators.

Each session draws its randomness from a stream derived from
``(master_seed, session_index)``, so results are bit-identical regardless of
execution order or how sessions are split across worker processes.
Confidence intervals are Wilson score intervals; the estimated probabilities
here sit near 0 or 1, where the plain normal interval degenerates.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from . import bounds
from .bounds import MeritReport
from .optics import ExperimentParams
from .protocol import (
    AliceStrategy,
    BobStrategy,
    Outcome,
    cheat_alice_fixed_plus,
    cheat_bob_fixed_phase,
    run_session,
)

_OUTCOMES = (Outcome.ZERO, Outcome.ONE, Outcome.ABORT)
_INDEX = {outcome: i for i, outcome in enumerate(_OUTCOMES)}

# two-sided 95%
_Z95 = 1.959963984540054


def wilson_interval(successes: int, n: int, z: float = _Z95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return (0.0, 1.0)
    phat = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = phat + z2 / (2.0 * n)
    radius = z * math.sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n))
    return (
        max(0.0, (center - radius) / denom),
        min(1.0, (center + radius) / denom),
    )


@dataclass(frozen=True)
class BatchResult:
    """Counts and the targeted estimate over one batch of sessions.

    ``counts`` maps (alice_output, bob_output) pairs to occurrences.
    ``target`` names the estimated probability: the honest-pair abort rate
    for two honest strategies, otherwise the cheater's success rate (the
    honest party outputs the cheater's target).
    """

    n_sessions: int
    counts: Dict[Tuple[Outcome, Outcome], int]
    target: str
    estimate: float
    std_error: float
    ci95: Tuple[float, float]

    def count(self, alice: Outcome, bob: Outcome) -> int:
        return self.counts.get((alice, bob), 0)


def _count_range(
    alice: AliceStrategy,
    bob: BobStrategy,
    params: ExperimentParams,
    master_seed: int,
    start: int,
    stop: int,
) -> np.ndarray:
    counts = np.zeros((3, 3), dtype=np.int64)
    for index in range(start, stop):
        seed = np.random.SeedSequence([master_seed, index])
        transcript = run_session(alice, bob, params, seed)
        counts[
            _INDEX[transcript.alice_output], _INDEX[transcript.bob_output]
        ] += 1
    return counts


def _success_count(
    counts: np.ndarray, alice: AliceStrategy, bob: BobStrategy
) -> Tuple[str, int]:
    if alice.cheat_target is not None:
        # dishonest sender: did the honest receiver output her target?
        col = _INDEX[alice.cheat_target]
        return f"bob_outputs_{alice.cheat_target.value}", int(counts[:, col].sum())
    if bob.cheat_target is not None:
        row = _INDEX[bob.cheat_target]
        return f"alice_outputs_{bob.cheat_target.value}", int(counts[row, :].sum())
    return "both_abort", int(counts[_INDEX[Outcome.ABORT], _INDEX[Outcome.ABORT]])


def run_batch(
    alice: AliceStrategy,
    bob: BobStrategy,
    params: ExperimentParams,
    n: int,
    master_seed: int,
    workers: int = 1,
) -> BatchResult:
    """Run ``n`` independent sessions and fill the estimators.

    The result depends only on ``(alice, bob, params, n, master_seed)``;
    ``workers`` merely splits the index range across processes.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    if workers == 1 or n < 2 * workers:
        counts = _count_range(alice, bob, params, master_seed, 0, n)
    else:
        edges = np.linspace(0, n, workers + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                _count_range,
                [alice] * workers,
                [bob] * workers,
                [params] * workers,
                [master_seed] * workers,
                edges[:-1],
                edges[1:],
            )
            counts = sum(parts, np.zeros((3, 3), dtype=np.int64))

    target, successes = _success_count(counts, alice, bob)
    estimate = successes / n
    std_error = math.sqrt(estimate * (1.0 - estimate) / n)
    count_map = {
        (a, b): int(counts[_INDEX[a], _INDEX[b]])
        for a in _OUTCOMES
        for b in _OUTCOMES
    }
    return BatchResult(
        n_sessions=n,
        counts=count_map,
        target=target,
        estimate=estimate,
        std_error=std_error,
        ci95=wilson_interval(successes, n),
    )


@dataclass(frozen=True)
class MeritEstimate:
    """Merit report stitched from analytic bounds and Monte Carlo estimates.

    The report's cheat entries are the analytic bounds (conservative
    bookkeeping: a simulated strategy can only do worse); the simulated naive
    strategies ride along for comparison.
    """

    report: MeritReport
    honest: BatchResult
    alice_fixed_plus: BatchResult
    bob_fixed_phase: BatchResult


def estimate_merit(
    params: ExperimentParams,
    n_honest: int,
    n_cheat: int,
    master_seed: int,
    p_abort_override: Optional[float] = None,
    tight: bool = False,
    workers: int = 1,
) -> MeritEstimate:
    """Estimate the merit of a configuration by simulation.

    The honest batch supplies the abort probability (unless overridden by a
    measured value); cheat probabilities come from the analytic bounds.
    Seeds for the three batches derive from ``master_seed``.
    """
    from .protocol import honest_alice, honest_bob

    seeds = [
        int(s.generate_state(1, dtype=np.uint64)[0] >> 1)
        for s in np.random.SeedSequence(master_seed).spawn(3)
    ]
    honest = run_batch(
        honest_alice(), honest_bob(), params, n_honest, seeds[0], workers
    )
    alice_batch = run_batch(
        cheat_alice_fixed_plus(Outcome.ONE),
        honest_bob(),
        params,
        n_cheat,
        seeds[1],
        workers,
    )
    bob_batch = run_batch(
        honest_alice(),
        cheat_bob_fixed_phase(Outcome.ONE),
        params,
        n_cheat,
        seeds[2],
        workers,
    )
    p_abort = honest.estimate if p_abort_override is None else p_abort_override
    report = bounds.merit_from_params(
        params, p_abort_override=p_abort, tight=tight
    )
    return MeritEstimate(
        report=report,
        honest=honest,
        alice_fixed_plus=alice_batch,
        bob_fixed_phase=bob_batch,
    )
