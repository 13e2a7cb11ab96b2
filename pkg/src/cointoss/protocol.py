"""Four-step coin-tossing session engine with pluggable party strategies.

Message order is fixed and enforced:

1. Alice sends a signal amplitude (honest: one of two opposite phases chosen
   by her private coin).
2. Bob sends his bit ``b``.  Before committing he may measure the in-flight
   signal through a :class:`SignalProbe`; the probe only ever hands him click
   booleans or quadrature samples, never the raw amplitude.
3. Alice announces her bit ``a``.
4. The physical layer interferes the (possibly dishonest) signal with the
   displacement for the announced bit and samples the detector; an honest Bob
   aborts on a click, otherwise the outcome is ``a XOR b``.  Bob's verdict is
   the final message; an honest Alice adopts an announced abort.

The signal on the wire is a single real amplitude: exact for coherent inputs
on a threshold detector.  The residual mean photon number behind Bob's
displacement for bit ``g`` is

    mu = (t*s - t*m(g))**2 + mu_leak

with ``s`` the sent amplitude, ``m(g)`` the honest amplitude for ``g``,
``t`` the amplitude transmittance through all losses and ``mu_leak`` the
imperfect-interference residual.  A dishonest sender may pick any real
amplitude with intensity at most ``alpha_sq``; a dishonest receiver never
aborts (aborting cannot raise his success here) and intercepts at the
sender's output, before channel losses.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from .optics import ExperimentParams, click_probability, derive_intensities


class ProtocolOrderError(RuntimeError):
    """A strategy acted outside its protocol step or sent malformed data."""


class Outcome(Enum):
    ZERO = "0"
    ONE = "1"
    ABORT = "abort"

    @staticmethod
    def from_bit(bit: int) -> "Outcome":
        return Outcome.ONE if bit else Outcome.ZERO


def _check_bit(value: int, label: str) -> int:
    if value not in (0, 1):
        raise ProtocolOrderError(f"{label} must be 0 or 1, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class Transcript:
    """Omniscient record of one session, in message order."""

    signal_amplitude: float
    bob_bit: int
    alice_bit: int
    detector_clicked: bool
    alice_output: Outcome
    bob_output: Outcome


@dataclass(frozen=True)
class SignalChoice:
    """Alice's step-1 move: the wire amplitude plus her private bit."""

    amplitude: float
    private_bit: int


class SignalProbe:
    """One-shot measurement access to the in-flight signal during step 2.

    A strategy may perform at most one measurement (the signal is consumed)
    and only while step 2 is in progress.  The amplitude itself is private to
    the physical layer.
    """

    def __init__(
        self,
        amplitude: float,
        params: ExperimentParams,
        rng: np.random.Generator,
    ) -> None:
        self._amplitude = amplitude
        self._params = params
        self._rng = rng
        self._consumed = False
        self._sealed = False

    @property
    def consumed(self) -> bool:
        return self._consumed

    def _take(self) -> None:
        if self._sealed:
            raise ProtocolOrderError(
                "signal probe used outside step 2 of the protocol"
            )
        if self._consumed:
            raise ProtocolOrderError(
                "signal already measured; only one measurement per session"
            )
        self._consumed = True

    def measure_displaced(self, bit_guess: int) -> bool:
        """Interfere with the displacement for ``bit_guess`` and report a click.

        Uses the honest apparatus, i.e. the signal referred through all
        losses plus the interference leak, exactly as in step 4.
        """
        _check_bit(bit_guess, "bit_guess")
        mu = _residual_mean_photons(self._amplitude, bit_guess, self._params)
        self._take()
        p = click_probability(mu, self._params.dark_count_prob)
        return bool(self._rng.random() < p)

    def measure_homodyne(self) -> float:
        """Sample the signal quadrature with an ideal homodyne detector.

        Interception happens at the sender's output (full intensity, no
        losses); the sample is Gaussian with mean twice the signed amplitude
        and unit variance.
        """
        self._take()
        return float(self._rng.normal(2.0 * self._amplitude, 1.0))

    def _seal(self) -> None:
        self._sealed = True


def _honest_amplitude(bit: int, alpha_sq: float) -> float:
    # bit 0 -> +sqrt(alpha_sq), bit 1 -> -sqrt(alpha_sq)
    root = math.sqrt(alpha_sq)
    return root if bit == 0 else -root


def _residual_mean_photons(
    amplitude: float, displaced_for: int, params: ExperimentParams
) -> float:
    t = math.sqrt(params.transmittance)
    mismatch = t * amplitude - t * _honest_amplitude(displaced_for, params.alpha_sq)
    return mismatch * mismatch + derive_intensities(params).mu_leak


class AliceStrategy(ABC):
    """Sender-side policy. ``cheat_target`` is None for honest play."""

    cheat_target: Optional[Outcome] = None

    @abstractmethod
    def signal(
        self, params: ExperimentParams, rng: np.random.Generator
    ) -> SignalChoice:
        """Step 1: pick the wire amplitude (and a private bit, if any)."""

    @abstractmethod
    def announce(
        self, choice: SignalChoice, bob_bit: int, rng: np.random.Generator
    ) -> int:
        """Step 3: the bit to announce after seeing ``b``."""

    @abstractmethod
    def finish(
        self,
        choice: SignalChoice,
        announced: int,
        bob_bit: int,
        bob_aborted: bool,
        rng: np.random.Generator,
    ) -> Outcome:
        """Final output after Bob's verdict message."""


class BobStrategy(ABC):
    """Receiver-side policy. ``cheat_target`` is None for honest play."""

    cheat_target: Optional[Outcome] = None

    @abstractmethod
    def choose_bit(self, probe: SignalProbe, rng: np.random.Generator) -> int:
        """Step 2: the bit to send, optionally after probing the signal."""

    @abstractmethod
    def finish(
        self,
        bob_bit: int,
        announced: int,
        clicked: bool,
        rng: np.random.Generator,
    ) -> Outcome:
        """Step 4: verdict after the verification measurement."""


class HonestAlice(AliceStrategy):
    def signal(
        self, params: ExperimentParams, rng: np.random.Generator
    ) -> SignalChoice:
        bit = int(rng.integers(2))
        return SignalChoice(_honest_amplitude(bit, params.alpha_sq), bit)

    def announce(
        self, choice: SignalChoice, bob_bit: int, rng: np.random.Generator
    ) -> int:
        return choice.private_bit

    def finish(
        self,
        choice: SignalChoice,
        announced: int,
        bob_bit: int,
        bob_aborted: bool,
        rng: np.random.Generator,
    ) -> Outcome:
        if bob_aborted:
            return Outcome.ABORT
        return Outcome.from_bit(choice.private_bit ^ bob_bit)


class HonestBob(BobStrategy):
    def choose_bit(self, probe: SignalProbe, rng: np.random.Generator) -> int:
        return int(rng.integers(2))

    def finish(
        self,
        bob_bit: int,
        announced: int,
        clicked: bool,
        rng: np.random.Generator,
    ) -> Outcome:
        if clicked:
            return Outcome.ABORT
        return Outcome.from_bit(announced ^ bob_bit)


class FixedPlusAlice(AliceStrategy):
    """Always send the bit-0 amplitude, then announce whatever wins.

    After learning ``b`` she announces ``target XOR b`` so the nominal outcome
    equals her target; she wins unless the verifier clicks.
    """

    def __init__(self, target: Outcome) -> None:
        if target not in (Outcome.ZERO, Outcome.ONE):
            raise ValueError("cheat target must be ZERO or ONE")
        self.cheat_target = target
        self._target_bit = 1 if target is Outcome.ONE else 0

    def signal(
        self, params: ExperimentParams, rng: np.random.Generator
    ) -> SignalChoice:
        return SignalChoice(_honest_amplitude(0, params.alpha_sq), 0)

    def announce(
        self, choice: SignalChoice, bob_bit: int, rng: np.random.Generator
    ) -> int:
        return self._target_bit ^ bob_bit

    def finish(
        self,
        choice: SignalChoice,
        announced: int,
        bob_bit: int,
        bob_aborted: bool,
        rng: np.random.Generator,
    ) -> Outcome:
        return self.cheat_target


class FixedPhaseBob(BobStrategy):
    """Measure with the bit-0 displacement before committing to ``b``.

    A click means the signal was probably the bit-1 state.  Bob sets
    ``b = guess XOR target`` and accepts unconditionally at step 4.
    """

    def __init__(self, target: Outcome = Outcome.ONE) -> None:
        if target not in (Outcome.ZERO, Outcome.ONE):
            raise ValueError("cheat target must be ZERO or ONE")
        self.cheat_target = target
        self._target_bit = 1 if target is Outcome.ONE else 0

    def choose_bit(self, probe: SignalProbe, rng: np.random.Generator) -> int:
        guess = 1 if probe.measure_displaced(0) else 0
        return guess ^ self._target_bit

    def finish(
        self,
        bob_bit: int,
        announced: int,
        clicked: bool,
        rng: np.random.Generator,
    ) -> Outcome:
        return Outcome.from_bit(announced ^ bob_bit)


class HomodyneBob(BobStrategy):
    """Guess the sender's bit from the sign of an ideal quadrature sample."""

    def __init__(self, target: Outcome = Outcome.ONE) -> None:
        if target not in (Outcome.ZERO, Outcome.ONE):
            raise ValueError("cheat target must be ZERO or ONE")
        self.cheat_target = target
        self._target_bit = 1 if target is Outcome.ONE else 0

    def choose_bit(self, probe: SignalProbe, rng: np.random.Generator) -> int:
        quadrature = probe.measure_homodyne()
        guess = 0 if quadrature >= 0 else 1
        return guess ^ self._target_bit

    def finish(
        self,
        bob_bit: int,
        announced: int,
        clicked: bool,
        rng: np.random.Generator,
    ) -> Outcome:
        return Outcome.from_bit(announced ^ bob_bit)


def honest_alice() -> AliceStrategy:
    return HonestAlice()


def honest_bob() -> BobStrategy:
    return HonestBob()


def cheat_alice_fixed_plus(target: Outcome) -> AliceStrategy:
    return FixedPlusAlice(target)


def cheat_bob_fixed_phase(target: Outcome = Outcome.ONE) -> BobStrategy:
    return FixedPhaseBob(target)


def cheat_bob_homodyne(target: Outcome = Outcome.ONE) -> BobStrategy:
    return HomodyneBob(target)


SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def session_rng(seed: SeedLike) -> np.random.Generator:
    """Build the session randomness stream from a seed or pass one through."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def run_session(
    alice: AliceStrategy,
    bob: BobStrategy,
    params: ExperimentParams,
    seed: SeedLike,
) -> Transcript:
    """Execute the four protocol steps and return the full transcript.

    Strategies see only what their step allows; order violations raise
    :class:`ProtocolOrderError`.  Identical ``(alice, bob, params, seed)``
    replay to identical transcripts.
    """
    rng = session_rng(seed)

    # Step 1: Alice commits an amplitude to the wire.
    choice = alice.signal(params, rng)
    amplitude = float(choice.amplitude)
    if amplitude * amplitude > params.alpha_sq * (1.0 + 1e-12) + 1e-300:
        raise ProtocolOrderError(
            f"sent intensity {amplitude * amplitude!r} exceeds the declared "
            f"signal intensity {params.alpha_sq!r}"
        )

    # Step 2: Bob commits b, optionally probing the signal first.
    probe = SignalProbe(amplitude, params, rng)
    bob_bit = _check_bit(bob.choose_bit(probe, rng), "bob bit")
    probe._seal()

    # Step 3: Alice announces a.
    announced = _check_bit(alice.announce(choice, bob_bit, rng), "announced bit")

    # Step 4: verification measurement (skipped if the probe consumed the
    # signal) and the exchange of verdicts.
    if probe.consumed:
        clicked = False
    else:
        mu = _residual_mean_photons(amplitude, announced, params)
        clicked = bool(
            rng.random() < click_probability(mu, params.dark_count_prob)
        )
    bob_output = bob.finish(bob_bit, announced, clicked, rng)
    alice_output = alice.finish(
        choice, announced, bob_bit, bob_output is Outcome.ABORT, rng
    )

    return Transcript(
        signal_amplitude=amplitude,
        bob_bit=bob_bit,
        alice_bit=announced,
        detector_clicked=clicked,
        alice_output=alice_output,
        bob_output=bob_output,
    )
