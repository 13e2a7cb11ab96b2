import math

import pytest

from cointoss import ExperimentParams

# Operating point of the reference experiment: alpha_sq = 0.27, lossless
# channel, 6 dB receiver optics, 10% detector, q = 0.005, dark counts 4.7e-5.
PAPER_ALPHA_SQ = 0.27
IDEAL_ALPHA_SQ = math.log(2.0) / 4.0


@pytest.fixture
def paper_params() -> ExperimentParams:
    return ExperimentParams(
        alpha_sq=PAPER_ALPHA_SQ,
        att_transmission_db=0.0,
        att_bob_db=6.0,
        detector_efficiency=0.1,
        qber_per_photon=0.005,
        dark_count_prob=4.7e-5,
    )


@pytest.fixture
def ideal_params() -> ExperimentParams:
    return ExperimentParams(
        alpha_sq=IDEAL_ALPHA_SQ,
        att_transmission_db=0.0,
        att_bob_db=0.0,
        detector_efficiency=1.0,
        qber_per_photon=0.0,
        dark_count_prob=0.0,
    )
