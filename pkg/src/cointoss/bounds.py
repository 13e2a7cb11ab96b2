"""Merit function, analytic cheat-bound reports and the loss-tolerance sweep.

The merit of a coin-tossing configuration is

    M = (1 - p_star_0) * (1 - p_1_star) / 2
      + (1 - p_star_1) * (1 - p_0_star) / 2
      - p_abort_honest

where ``p_star_y`` bounds a dishonest sender forcing output ``y`` and
``p_x_star`` bounds a dishonest receiver forcing output ``x``.  Every correct
classical protocol has M <= 0, so M > 0 certifies an advantage; no
pure-state-pair protocol can exceed (1 - 1/sqrt(2))**2 / 4 and no protocol at
all can exceed (1 - 1/sqrt(2))**2.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from . import optics
from .optics import ExperimentParams


class InvariantViolation(AssertionError):
    """An internal consistency check failed; indicates a bug, not bad input."""


_MERIT_CONSISTENCY_TOL = 1e-12


def merit(
    p_star_0: float,
    p_star_1: float,
    p_0_star: float,
    p_1_star: float,
    p_abort: float,
) -> float:
    """Evaluate the merit function for the five probabilities."""
    for name, value in (
        ("p_star_0", p_star_0),
        ("p_star_1", p_star_1),
        ("p_0_star", p_0_star),
        ("p_1_star", p_1_star),
        ("p_abort", p_abort),
    ):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return (
        (1.0 - p_star_0) * (1.0 - p_1_star) / 2.0
        + (1.0 - p_star_1) * (1.0 - p_0_star) / 2.0
        - p_abort
    )


@dataclass(frozen=True)
class MeritReport:
    """The five probabilities of a configuration plus its merit value.

    ``p_star_0`` / ``p_star_1``: dishonest sender forces output 0 / 1.
    ``p_0_star`` / ``p_1_star``: dishonest receiver forces output 0 / 1.
    ``p_abort_honest``: both-honest abort probability.
    """

    p_star_0: float
    p_star_1: float
    p_0_star: float
    p_1_star: float
    p_abort_honest: float
    merit: float

    def __post_init__(self) -> None:
        expected = merit(
            self.p_star_0,
            self.p_star_1,
            self.p_0_star,
            self.p_1_star,
            self.p_abort_honest,
        )
        if abs(expected - self.merit) > _MERIT_CONSISTENCY_TOL:
            raise InvariantViolation(
                f"merit field {self.merit!r} inconsistent with probabilities "
                f"(recomputed {expected!r})"
            )
        if not -1.0 <= self.merit <= 1.0:
            raise InvariantViolation(f"merit out of [-1, 1]: {self.merit!r}")

    @classmethod
    def from_probabilities(
        cls,
        p_star_0: float,
        p_star_1: float,
        p_0_star: float,
        p_1_star: float,
        p_abort_honest: float,
    ) -> "MeritReport":
        return cls(
            p_star_0=p_star_0,
            p_star_1=p_star_1,
            p_0_star=p_0_star,
            p_1_star=p_1_star,
            p_abort_honest=p_abort_honest,
            merit=merit(p_star_0, p_star_1, p_0_star, p_1_star, p_abort_honest),
        )


@dataclass(frozen=True)
class BiasPair:
    """Cheat biases: best forcing probability minus one half, per party."""

    eps_alice: float
    eps_bob: float


def model_abort_probability(params: ExperimentParams) -> float:
    """Both-honest abort probability predicted by the click model."""
    leak = optics.derive_intensities(params).mu_leak
    return optics.click_probability(leak, params.dark_count_prob)


def merit_from_params(
    params: ExperimentParams,
    p_abort_override: Optional[float] = None,
    tight: bool = False,
) -> MeritReport:
    """Assemble a merit report from analytic bounds and the click model.

    ``p_abort_override`` substitutes a measured abort probability for the
    model prediction.  ``tight`` selects the sender-bound strength, see
    :func:`cointoss.optics.alice_cheat_bound`; the protocol is symmetric in
    the coin value, so both sender (and both receiver) entries coincide.
    """
    if p_abort_override is not None and not 0.0 <= p_abort_override <= 1.0:
        raise ValueError(
            f"p_abort_override must lie in [0, 1], got {p_abort_override}"
        )
    p_alice = optics.alice_cheat_bound(params, tight=tight)
    p_bob = optics.bob_cheat_bound(params.alpha_sq)
    p_abort = (
        model_abort_probability(params)
        if p_abort_override is None
        else p_abort_override
    )
    return MeritReport.from_probabilities(
        p_star_0=p_alice,
        p_star_1=p_alice,
        p_0_star=p_bob,
        p_1_star=p_bob,
        p_abort_honest=p_abort,
    )


def bias_from_report(report: MeritReport) -> BiasPair:
    """Convert a merit report to the bias notation."""
    return BiasPair(
        eps_alice=max(report.p_star_0, report.p_star_1) - 0.5,
        eps_bob=max(report.p_0_star, report.p_1_star) - 0.5,
    )


def reference_values() -> dict[str, float]:
    """Literature reference constants for calibrating merit values.

    * ``quantum_merit_ceiling``: no protocol exceeds (1 - 1/sqrt(2))**2,
      a consequence of the product bound p_star_c * p_c_star >= 1/2.
    * ``ambainis_merit``: the best known three-round protocol scores 1/16.
    * ``pure_pair_ceiling``: protocols built on a pure state pair are capped
      at (1 - 1/sqrt(2))**2 / 4.
    * ``kitaev_bias_bound``: the product bound in bias form, 1/sqrt(2).
    """
    ceiling = (1.0 - 1.0 / math.sqrt(2.0)) ** 2
    return {
        "quantum_merit_ceiling": ceiling,
        "ambainis_merit": 1.0 / 16.0,
        "pure_pair_ceiling": ceiling / 4.0,
        "kitaev_bias_bound": 1.0 / math.sqrt(2.0),
    }


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def optimize_alpha(
    params: ExperimentParams,
    lo: float = 0.01,
    hi: float = 2.0,
    tol: float = 1e-6,
    p_abort_override: Optional[float] = None,
    tight: bool = True,
) -> Tuple[float, float]:
    """Maximize the merit over the signal intensity by golden-section search.

    ``params.alpha_sq`` is ignored; the search replaces it over ``[lo, hi]``
    and converges to absolute tolerance ``tol`` on the intensity.  Defaults to
    the tight sender bound, under which ideal parameters attain the
    pure-state-pair optimum at alpha_sq = ln(2)/4.  Returns
    ``(alpha_sq_opt, merit_opt)``.
    """
    if not (0.0 < lo < hi <= 5.0):
        raise ValueError(
            f"search interval must satisfy 0 < lo < hi <= 5, got [{lo}, {hi}]"
        )

    def objective(alpha_sq: float) -> float:
        trial = dataclasses.replace(params, alpha_sq=alpha_sq)
        return merit_from_params(
            trial, p_abort_override=p_abort_override, tight=tight
        ).merit

    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = objective(d)
    best = 0.5 * (a + b)
    return best, objective(best)


@dataclass(frozen=True)
class LossSweepPoint:
    at_db: float
    report: MeritReport


@dataclass(frozen=True)
class LossSweepResult:
    mode: str
    points: List[LossSweepPoint]
    threshold_db: Optional[float]


ABORT_MODE_FIXED = "fixed-measured"
ABORT_MODE_SCALED = "model-scaled"
_ABORT_MODES = (ABORT_MODE_FIXED, ABORT_MODE_SCALED)


def _abort_at_transmission(
    params: ExperimentParams,
    at_db: float,
    mode: str,
    baseline_abort: float,
) -> float:
    """Abort probability at channel attenuation ``at_db`` under a scaling mode.

    ``fixed-measured`` keeps the baseline value.  ``model-scaled`` splits the
    baseline into a dark-count part (constant) and an optical part
    (proportional to the transmitted intensity) and rescales the optical part
    by the transmittance ratio relative to the baseline channel.
    """
    if mode == ABORT_MODE_FIXED:
        return baseline_abort
    pd = params.dark_count_prob
    if baseline_abort >= 1.0 or baseline_abort < pd:
        raise ValueError(
            f"baseline abort probability {baseline_abort!r} is incompatible "
            f"with dark_count_prob {pd!r} under {ABORT_MODE_SCALED!r} scaling"
        )
    mu_optical = math.log((1.0 - pd) / (1.0 - baseline_abort))
    ratio = optics.db_to_linear(at_db) / optics.db_to_linear(
        params.att_transmission_db
    )
    return optics.click_probability(mu_optical * ratio, pd)


def _merit_at_transmission(
    params: ExperimentParams,
    at_db: float,
    mode: str,
    baseline_abort: float,
    tight: bool,
) -> MeritReport:
    trial = dataclasses.replace(params, att_transmission_db=at_db)
    p_abort = _abort_at_transmission(params, at_db, mode, baseline_abort)
    return merit_from_params(trial, p_abort_override=p_abort, tight=tight)


def loss_sweep(
    params: ExperimentParams,
    at_db_grid: Iterable[float],
    mode: str = ABORT_MODE_SCALED,
    p_abort_override: Optional[float] = None,
    tight: bool = False,
) -> LossSweepResult:
    """Evaluate the merit across channel attenuations and locate its zero.

    The grid replaces ``params.att_transmission_db``; the abort probability
    follows the declared ``mode`` starting from the measured override (or the
    click-model prediction at the baseline channel).  The sign-change
    threshold between bracketing grid points is refined by bisection to
    0.01 dB; ``threshold_db`` is None when the grid does not bracket one.
    """
    if mode not in _ABORT_MODES:
        raise ValueError(f"abort mode must be one of {_ABORT_MODES}, got {mode!r}")
    grid = sorted(float(v) for v in at_db_grid)
    if not grid:
        raise ValueError("attenuation grid must not be empty")
    if grid[0] < 0:
        raise ValueError(f"attenuations must be >= 0 dB, got {grid[0]}")

    baseline_abort = (
        model_abort_probability(params)
        if p_abort_override is None
        else p_abort_override
    )
    points = [
        LossSweepPoint(
            at_db=db,
            report=_merit_at_transmission(params, db, mode, baseline_abort, tight),
        )
        for db in grid
    ]

    threshold = None
    for left, right in zip(points, points[1:]):
        if left.report.merit > 0.0 >= right.report.merit:
            threshold = _bisect_zero(
                params, left.at_db, right.at_db, mode, baseline_abort, tight
            )
            break
    return LossSweepResult(mode=mode, points=points, threshold_db=threshold)


def _bisect_zero(
    params: ExperimentParams,
    lo_db: float,
    hi_db: float,
    mode: str,
    baseline_abort: float,
    tight: bool,
    tol_db: float = 0.01,
) -> float:
    def value(db: float) -> float:
        return _merit_at_transmission(params, db, mode, baseline_abort, tight).merit

    lo, hi = lo_db, hi_db
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if value(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
