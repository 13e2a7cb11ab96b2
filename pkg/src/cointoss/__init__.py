"""Adversarial simulator and analysis toolkit for coherent-state coin tossing.

The package splits into a pure numerical kernel (:mod:`cointoss.optics`), a
four-step session engine with pluggable party strategies
(:mod:`cointoss.protocol`), analytic bounds and the merit function
(:mod:`cointoss.bounds`), classical-protocol impossibility audits
(:mod:`cointoss.classical`), reproducible Monte Carlo batches
(:mod:`cointoss.montecarlo`) and a config-driven CLI (:mod:`cointoss.cli`).
"""

from .bounds import (
    BiasPair,
    InvariantViolation,
    LossSweepResult,
    MeritReport,
    bias_from_report,
    loss_sweep,
    merit,
    merit_from_params,
    model_abort_probability,
    optimize_alpha,
    reference_values,
)
from .classical import (
    ClassicalProtocolSpec,
    ClassicalReport,
    Leaf,
    Player,
    ProtocolTree,
    TreeNode,
    eval_lemma2,
    eval_tree,
    make_correct_spec,
    mirror_spec,
    random_correct_tree,
    saturating_spec,
    spec_to_tree,
    verify_tj_monotone,
)
from .montecarlo import BatchResult, MeritEstimate, estimate_merit, run_batch
from .optics import (
    DerivedIntensities,
    ExperimentParams,
    alice_cheat_bound,
    bob_cheat_bound,
    click_probability,
    db_to_linear,
    derive_intensities,
    fixed_state_cheat_success,
    helstrom_success,
    homodyne_success,
    linear_to_db,
    overlap_sq,
)
from .protocol import (
    AliceStrategy,
    BobStrategy,
    Outcome,
    ProtocolOrderError,
    SignalProbe,
    Transcript,
    cheat_alice_fixed_plus,
    cheat_bob_fixed_phase,
    cheat_bob_homodyne,
    honest_alice,
    honest_bob,
    run_session,
)

__version__ = "0.1.0"

__all__ = [
    "AliceStrategy",
    "BatchResult",
    "BiasPair",
    "BobStrategy",
    "ClassicalProtocolSpec",
    "ClassicalReport",
    "DerivedIntensities",
    "ExperimentParams",
    "InvariantViolation",
    "Leaf",
    "LossSweepResult",
    "MeritEstimate",
    "MeritReport",
    "Outcome",
    "Player",
    "ProtocolOrderError",
    "ProtocolTree",
    "SignalProbe",
    "Transcript",
    "TreeNode",
    "alice_cheat_bound",
    "bias_from_report",
    "bob_cheat_bound",
    "cheat_alice_fixed_plus",
    "cheat_bob_fixed_phase",
    "cheat_bob_homodyne",
    "click_probability",
    "db_to_linear",
    "derive_intensities",
    "estimate_merit",
    "eval_lemma2",
    "eval_tree",
    "fixed_state_cheat_success",
    "helstrom_success",
    "homodyne_success",
    "honest_alice",
    "honest_bob",
    "linear_to_db",
    "loss_sweep",
    "make_correct_spec",
    "merit",
    "merit_from_params",
    "mirror_spec",
    "model_abort_probability",
    "optimize_alpha",
    "overlap_sq",
    "random_correct_tree",
    "reference_values",
    "run_batch",
    "run_session",
    "saturating_spec",
    "spec_to_tree",
    "verify_tj_monotone",
]
