"""Coherent-state math, the imperfection model and the photodetection click model.

This is the numerical kernel shared by every other module.  All functions are
pure and operate on plain floats; nothing here touches a random number
generator.

Model summary
-------------
The honest signal is a coherent state of mean photon number ``alpha_sq`` with
one of two opposite phases.  Between preparation and detection it passes a
transmission line (``att_transmission_db``), the receiver's internal optics
(``att_bob_db``) and a detector of efficiency ``detector_efficiency``; the
product of the three linear transmittances scales the mean photon number seen
by the detector.  Imperfect interference leaves a residual mean photon number
of ``qber_per_photon`` times the attenuated intensity even when the signal is
displaced perfectly.  Detection is threshold detection on Poissonian photon
statistics with an independent dark-count probability per gate:

    P(click) = 1 - (1 - p_dark) * exp(-mu)

Cheat bounds come in two strengths (see :func:`alice_cheat_bound`): the
conservative form uses ``exp(-nu)`` with ``nu`` the effective attenuated
intensity, the tight form uses ``exp(-2*nu)``, the exact two-state overlap at
that intensity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ExperimentParams:
    """Physical-layer parameters of one experimental configuration.

    Attributes
    ----------
    alpha_sq : float
        Mean photon number of the signal at the sender's output, >= 0.
    att_transmission_db : float
        Channel attenuation between the parties in dB, >= 0 (0 dB = lossless).
    att_bob_db : float
        Attenuation inside the receiver's apparatus in dB, >= 0.
    detector_efficiency : float
        Detector quantum efficiency, in [0, 1].
    qber_per_photon : float
        Per-photon error rate q of the interferometric displacement, in [0, 1].
        Related to the interference visibility V by q = (1 - V) / 2.
    dark_count_prob : float
        Dark-count probability per detection gate, in [0, 1).
    """

    alpha_sq: float
    att_transmission_db: float
    att_bob_db: float
    detector_efficiency: float
    qber_per_photon: float
    dark_count_prob: float

    def __post_init__(self) -> None:
        if not self.alpha_sq >= 0:
            raise ValueError(f"alpha_sq must be >= 0, got {self.alpha_sq}")
        if not self.att_transmission_db >= 0:
            raise ValueError(
                f"att_transmission_db must be >= 0 (losses are stored as "
                f"positive dB), got {self.att_transmission_db}"
            )
        if not self.att_bob_db >= 0:
            raise ValueError(
                f"att_bob_db must be >= 0, got {self.att_bob_db}"
            )
        if not 0 <= self.detector_efficiency <= 1:
            raise ValueError(
                f"detector_efficiency must lie in [0, 1], got "
                f"{self.detector_efficiency}"
            )
        if not 0 <= self.qber_per_photon <= 1:
            raise ValueError(
                f"qber_per_photon must lie in [0, 1], got {self.qber_per_photon}"
            )
        if not 0 <= self.dark_count_prob < 1:
            raise ValueError(
                f"dark_count_prob must lie in [0, 1), got {self.dark_count_prob}"
            )

    @property
    def visibility(self) -> float:
        """Interference visibility V = 1 - 2q, in [-1, 1]."""
        return 1.0 - 2.0 * self.qber_per_photon

    @property
    def transmittance(self) -> float:
        """Combined linear intensity transmittance, channel x receiver x detector."""
        return (
            db_to_linear(self.att_transmission_db)
            * db_to_linear(self.att_bob_db)
            * self.detector_efficiency
        )


@dataclass(frozen=True)
class DerivedIntensities:
    """Mean photon numbers derived from :class:`ExperimentParams`.

    ``mu_at_detector`` is the honest signal intensity referred through all
    losses to the detector; ``mu_leak`` is the honest-case residual after a
    perfect displacement (imperfect interference only); ``effective_intensity``
    is the dishonest-sender exponent nu = A_B * A_T * eta * (1 - 2*sqrt(q)) * alpha_sq.
    """

    mu_at_detector: float
    mu_leak: float
    effective_intensity: float


def db_to_linear(db: float) -> float:
    """Convert an attenuation in positive dB to a linear transmittance in (0, 1].

    10 dB is one decade; 0 dB is lossless.
    """
    if db < 0:
        raise ValueError(f"attenuation must be >= 0 dB, got {db}")
    return 10.0 ** (-db / 10.0)


def linear_to_db(transmittance: float) -> float:
    """Inverse of :func:`db_to_linear` for transmittances in (0, 1]."""
    if not 0 < transmittance <= 1:
        raise ValueError(
            f"transmittance must lie in (0, 1], got {transmittance}"
        )
    return -10.0 * math.log10(transmittance)


def overlap_sq(alpha_sq: float) -> float:
    """Squared overlap of the two opposite-phase signal states: exp(-4 alpha_sq)."""
    if alpha_sq < 0:
        raise ValueError(f"alpha_sq must be >= 0, got {alpha_sq}")
    return math.exp(-4.0 * alpha_sq)


def helstrom_success(overlap_squared: float) -> float:
    """Best possible probability of discriminating two pure states.

    Takes the squared overlap of the state pair, returns
    1/2 + sqrt(1 - overlap_squared) / 2, in [1/2, 1].
    """
    if not 0 <= overlap_squared <= 1:
        raise ValueError(
            f"overlap_squared must lie in [0, 1], got {overlap_squared}"
        )
    return 0.5 + 0.5 * math.sqrt(1.0 - overlap_squared)


def fixed_state_cheat_success(overlap: float) -> float:
    """Success probability of the optimal fixed-state sender cheat.

    A dishonest sender transmits the symmetric superposition of the two honest
    states and later claims whichever bit wins; against an ideal verifier her
    success is 1/2 + overlap / 2, where ``overlap`` is the (amplitude-level)
    scalar product of the honest state pair.
    """
    if not 0 <= overlap <= 1:
        raise ValueError(f"overlap must lie in [0, 1], got {overlap}")
    return 0.5 + 0.5 * overlap


def derive_intensities(params: ExperimentParams) -> DerivedIntensities:
    """Compute the three derived mean photon numbers for a configuration."""
    mu_at_detector = params.alpha_sq * params.transmittance
    mu_leak = params.qber_per_photon * mu_at_detector
    effective_intensity = (
        params.transmittance
        * (1.0 - 2.0 * math.sqrt(params.qber_per_photon))
        * params.alpha_sq
    )
    return DerivedIntensities(
        mu_at_detector=mu_at_detector,
        mu_leak=mu_leak,
        effective_intensity=effective_intensity,
    )


def alice_cheat_bound(params: ExperimentParams, tight: bool = False) -> float:
    """Upper bound on a dishonest sender forcing the receiver's output.

    All receiver-side losses are conceded to the cheater (a lossless verifier
    measuring states of effective intensity nu = A_B * A_T * eta *
    (1 - 2*sqrt(q)) * alpha_sq; this replacement can only help her).  Two
    strengths are provided:

    * ``tight=False`` (default): 1/2 + exp(-nu) / 2.  Conservative; one e-fold
      of distinguishability per effective photon.  This is the variant behind
      the headline imperfect-case numbers (0.9971 at the reference operating
      point) and the loss-tolerance analysis.
    * ``tight=True``: 1/2 + exp(-2 nu) / 2.  Uses the exact overlap
      exp(-2 nu) of two opposite-phase coherent states of intensity nu, i.e.
      the distance bound carried through without slack.  At ideal parameters
      this reduces to :func:`fixed_state_cheat_success` of the honest pair and
      is the variant behind the ideal-case optimum (merit 0.0214 at
      alpha_sq = ln(2)/4).

    Both are valid upper bounds (tight <= conservative); they are exposed
    separately because each reproduces a different published reference figure.
    Returns a probability clamped to [1/2, 1].
    """
    nu = derive_intensities(params).effective_intensity
    exponent = 2.0 * nu if tight else nu
    return min(1.0, 0.5 + 0.5 * math.exp(-exponent))


def bob_cheat_bound(alpha_sq: float) -> float:
    """Upper bound on a dishonest receiver forcing the sender's output.

    The receiver intercepts the signal before any of his own losses, so the
    bound is the Helstrom value for the full-intensity state pair and is
    independent of channel and detector parameters.
    """
    return helstrom_success(overlap_sq(alpha_sq))


def click_probability(mean_photons: float, dark_count_prob: float) -> float:
    """Threshold-detector click probability for a coherent state.

    Poissonian photon statistics with independent dark counts:
    1 - (1 - p_dark) * exp(-mu).
    """
    if mean_photons < 0:
        raise ValueError(f"mean_photons must be >= 0, got {mean_photons}")
    if not 0 <= dark_count_prob < 1:
        raise ValueError(
            f"dark_count_prob must lie in [0, 1), got {dark_count_prob}"
        )
    # expm1 keeps the small-mu regime exact: p = p_dark + (1 - p_dark)(1 - e^-mu)
    return dark_count_prob - (1.0 - dark_count_prob) * math.expm1(-mean_photons)


def homodyne_success(alpha_sq: float) -> float:
    """Success of sign-of-quadrature discrimination of the signal pair.

    Convention: the measured quadrature of a coherent state of amplitude
    +/- a is Gaussian with mean +/- 2a and unit variance (vacuum quadrature
    variance 1).  Guessing by sign then succeeds with probability
    Phi(2 * sqrt(alpha_sq)), always below :func:`helstrom_success`.
    """
    if alpha_sq < 0:
        raise ValueError(f"alpha_sq must be >= 0, got {alpha_sq}")
    return _std_normal_cdf(2.0 * math.sqrt(alpha_sq))


def _std_normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
