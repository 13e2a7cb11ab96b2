"""Command-line front end.

Commands: ``bounds``, ``simulate``, ``sweep-loss``, ``classical`` and
``optimize-alpha``; every command reads a config file (see ``configs/`` for
one canonical example each) and emits either a human table or machine
records.  Exit codes: 0 on success, 2 for configuration or usage errors,
3 for an internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional

import numpy as np

from . import bounds, classical, montecarlo, optics
from .bounds import InvariantViolation
from .config import (
    ConfigError,
    RunConfig,
    classical_spec,
    experiment_params,
    load_config,
    protocol_tree,
)
from .protocol import (
    Outcome,
    ProtocolOrderError,
    cheat_alice_fixed_plus,
    cheat_bob_fixed_phase,
    cheat_bob_homodyne,
    honest_alice,
    honest_bob,
)
from .records import Record, render_records, render_table

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _params_record(params: optics.ExperimentParams) -> Record:
    return (
        "experiment_params",
        {
            "alpha_sq": params.alpha_sq,
            "att_transmission_db": params.att_transmission_db,
            "att_bob_db": params.att_bob_db,
            "detector_efficiency": params.detector_efficiency,
            "qber_per_photon": params.qber_per_photon,
            "dark_count_prob": params.dark_count_prob,
            "visibility": params.visibility,
        },
    )


def _merit_record(report: bounds.MeritReport, model: str) -> Record:
    return (
        "merit_report",
        {
            "alice_bound": model,
            "p_star_0": report.p_star_0,
            "p_star_1": report.p_star_1,
            "p_0_star": report.p_0_star,
            "p_1_star": report.p_1_star,
            "p_abort_honest": report.p_abort_honest,
            "merit": report.merit,
        },
    )


def cmd_bounds(config: RunConfig) -> List[Record]:
    params = experiment_params(config)
    tight = config.bound_model("bounds", default="conservative")
    model = "tight" if tight else "conservative"
    override = config.optional_float("bounds", "p_abort_override")

    derived = optics.derive_intensities(params)
    report = bounds.merit_from_params(params, p_abort_override=override, tight=tight)
    bias = bounds.bias_from_report(report)
    degenerate = params.alpha_sq == 0.0

    records: List[Record] = [
        _params_record(params),
        (
            "derived_intensities",
            {
                "mu_at_detector": derived.mu_at_detector,
                "mu_leak": derived.mu_leak,
                "effective_intensity": derived.effective_intensity,
            },
        ),
        (
            "bounds",
            {
                "overlap_sq": optics.overlap_sq(params.alpha_sq),
                "alice_cheat_bound_conservative": optics.alice_cheat_bound(params),
                "alice_cheat_bound_tight": optics.alice_cheat_bound(
                    params, tight=True
                ),
                "bob_cheat_bound": optics.bob_cheat_bound(params.alpha_sq),
                "homodyne_success": optics.homodyne_success(params.alpha_sq),
                "p_abort_model": bounds.model_abort_probability(params),
                "degenerate": degenerate,
            },
        ),
        _merit_record(report, model),
        ("bias", {"eps_alice": bias.eps_alice, "eps_bob": bias.eps_bob}),
        ("reference_values", dict(bounds.reference_values())),
    ]
    if degenerate:
        records.append(
            (
                "warning",
                {
                    "message": "degenerate configuration: alpha_sq = 0 carries "
                    "no information, a dishonest sender always wins"
                },
            )
        )
    return records


_ALICE_STRATEGIES = ("honest", "fixed-plus")
_BOB_STRATEGIES = ("honest", "fixed-phase", "homodyne")


def _target_outcome(config: RunConfig, key: str) -> Outcome:
    if config.has("simulate", key):
        return (
            Outcome.ONE
            if config.get_choice("simulate", key, ("0", "1")) == "1"
            else Outcome.ZERO
        )
    return Outcome.ONE


def cmd_simulate(config: RunConfig, seed: int, workers: int) -> List[Record]:
    params = experiment_params(config)
    config.require_section("simulate")
    alice_name = config.get_choice("simulate", "alice", _ALICE_STRATEGIES)
    bob_name = config.get_choice("simulate", "bob", _BOB_STRATEGIES)
    sessions = config.get_int("simulate", "sessions")
    if sessions < 1:
        raise ConfigError(
            f"{config.path}: [simulate] sessions must be >= 1, got {sessions}"
        )

    if alice_name == "honest":
        alice = honest_alice()
    else:
        alice = cheat_alice_fixed_plus(_target_outcome(config, "alice_target"))
    if bob_name == "honest":
        bob = honest_bob()
    elif bob_name == "fixed-phase":
        bob = cheat_bob_fixed_phase(_target_outcome(config, "bob_target"))
    else:
        bob = cheat_bob_homodyne(_target_outcome(config, "bob_target"))

    batch = montecarlo.run_batch(alice, bob, params, sessions, seed, workers)

    records: List[Record] = [
        _params_record(params),
        (
            "simulate",
            {
                "alice": alice_name,
                "bob": bob_name,
                "sessions": sessions,
                "seed": seed,
            },
        ),
        (
            "batch_counts",
            {
                f"count_{a.value}_{b.value}": batch.count(a, b)
                for a in (Outcome.ZERO, Outcome.ONE, Outcome.ABORT)
                for b in (Outcome.ZERO, Outcome.ONE, Outcome.ABORT)
            },
        ),
        (
            "batch_estimate",
            {
                "target": batch.target,
                "estimate": batch.estimate,
                "std_error": batch.std_error,
                "ci95_lo": batch.ci95[0],
                "ci95_hi": batch.ci95[1],
            },
        ),
    ]
    if alice.cheat_target is not None or bob.cheat_target is not None:
        if alice.cheat_target is not None:
            bound = optics.alice_cheat_bound(params)
        else:
            bound = optics.bob_cheat_bound(params.alpha_sq)
        records.append(
            (
                "bound_check",
                {
                    "analytic_bound": bound,
                    "estimate": batch.estimate,
                    "margin": bound - batch.estimate,
                    "within_4_sigma": batch.estimate
                    <= bound + 4.0 * batch.std_error,
                },
            )
        )
    return records


def cmd_sweep_loss(config: RunConfig) -> List[Record]:
    params = experiment_params(config)
    config.require_section("sweep")
    start = config.get_float("sweep", "at_db_start")
    stop = config.get_float("sweep", "at_db_stop")
    step = config.get_float("sweep", "at_db_step")
    if step <= 0:
        raise ConfigError(
            f"{config.path}: [sweep] at_db_step must be > 0, got {step}"
        )
    if stop < start:
        raise ConfigError(
            f"{config.path}: [sweep] at_db_stop must be >= at_db_start"
        )
    count = int(round((stop - start) / step)) + 1
    grid = [start + i * step for i in range(count) if start + i * step <= stop + 1e-9]
    mode = config.get_choice(
        "sweep", "abort_mode", (bounds.ABORT_MODE_FIXED, bounds.ABORT_MODE_SCALED)
    )
    override = config.optional_float("sweep", "p_abort_override")
    tight = config.bound_model("sweep", default="conservative")

    result = bounds.loss_sweep(
        params, grid, mode=mode, p_abort_override=override, tight=tight
    )
    records: List[Record] = [
        _params_record(params),
        (
            "sweep",
            {
                "abort_mode": result.mode,
                "alice_bound": "tight" if tight else "conservative",
                "points": len(result.points),
            },
        ),
    ]
    for point in result.points:
        records.append(
            (
                "sweep_point",
                {
                    "at_db": point.at_db,
                    "merit": point.report.merit,
                    "p_star_0": point.report.p_star_0,
                    "p_0_star": point.report.p_0_star,
                    "p_abort_honest": point.report.p_abort_honest,
                },
            )
        )
    records.append(("sweep_threshold", {"threshold_db": result.threshold_db}))
    return records


def _classical_records(
    report: classical.ClassicalReport, tj: List[float]
) -> List[Record]:
    merit_value = bounds.merit(
        report.p_star_0,
        report.p_star_1,
        report.p_0_star,
        report.p_1_star,
        report.p_perp_perp,
    )
    return [
        (
            "classical_report",
            {
                "p00": report.p00,
                "p11": report.p11,
                "p_perp_perp": report.p_perp_perp,
                "p_star_0": report.p_star_0,
                "p_star_1": report.p_star_1,
                "p_0_star": report.p_0_star,
                "p_1_star": report.p_1_star,
                "lemma1_lhs_a": report.lemma1_lhs_a,
                "lemma1_lhs_b": report.lemma1_lhs_b,
                "merit": merit_value,
            },
        ),
        (
            "lemma1_margins",
            {
                "margin_a": report.p_perp_perp - report.lemma1_lhs_a,
                "margin_b": report.p_perp_perp - report.lemma1_lhs_b,
            },
        ),
        (
            "tj_sequence",
            {
                "x": Outcome.ZERO.value,
                "y": Outcome.ONE.value,
                "values": ",".join(format(v, ".17g") for v in tj),
            },
        ),
    ]


def cmd_classical(config: RunConfig, seed: int) -> List[Record]:
    section = config.require_section("classical")
    mode = config.get_choice("classical", "mode", ("spec", "tree", "audit"))

    if mode == "spec":
        spec = classical_spec(config)
        tree = classical.spec_to_tree(spec)
        report = classical.eval_lemma2(spec)
        tj = classical.verify_tj_monotone(tree, Outcome.ZERO, Outcome.ONE)
        return _classical_records(report, tj)

    if mode == "tree":
        tree = protocol_tree(config)
        report = classical.eval_tree(tree)
        tj = classical.verify_tj_monotone(tree, Outcome.ZERO, Outcome.ONE)
        return _classical_records(report, tj)

    n_trees = config.get_int("classical", "trees") if "trees" in section else 100
    max_depth = (
        config.get_int("classical", "max_depth") if "max_depth" in section else 5
    )
    max_children = (
        config.get_int("classical", "max_children")
        if "max_children" in section
        else 3
    )
    if n_trees < 1:
        raise ConfigError(f"{config.path}: [classical] trees must be >= 1")

    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(n_trees):
        tree = classical.random_correct_tree(rng, max_depth, max_children)
        report = classical.eval_tree(tree)
        tj = classical.verify_tj_monotone(tree, Outcome.ZERO, Outcome.ONE)
        ok = (
            report.lemma1_lhs_a <= report.p_perp_perp + 1e-12
            and report.lemma1_lhs_b <= report.p_perp_perp + 1e-12
            and abs(tj[0] - report.lemma1_lhs_a) <= 1e-12
            and abs(tj[-1] - report.p_perp_perp) <= 1e-12
            and bounds.merit(
                report.p_star_0,
                report.p_star_1,
                report.p_0_star,
                report.p_1_star,
                report.p_perp_perp,
            )
            <= 1e-12
        )
        if not ok:
            violations += 1
    return [
        (
            "audit",
            {
                "trees": n_trees,
                "max_depth": max_depth,
                "max_children": max_children,
                "seed": seed,
                "violations": violations,
            },
        )
    ]


def cmd_optimize_alpha(config: RunConfig) -> List[Record]:
    params = experiment_params(config)
    lo = (
        config.get_float("optimize", "alpha_lo")
        if config.has("optimize", "alpha_lo")
        else 0.01
    )
    hi = (
        config.get_float("optimize", "alpha_hi")
        if config.has("optimize", "alpha_hi")
        else 2.0
    )
    tight = config.bound_model("optimize", default="tight")
    override = config.optional_float("optimize", "p_abort_override")
    try:
        alpha_opt, merit_opt = bounds.optimize_alpha(
            params, lo=lo, hi=hi, p_abort_override=override, tight=tight
        )
    except ValueError as exc:
        raise ConfigError(f"{config.path}: [optimize] {exc}") from exc
    return [
        _params_record(params),
        (
            "alpha_optimum",
            {
                "alpha_sq": alpha_opt,
                "merit": merit_opt,
                "alice_bound": "tight" if tight else "conservative",
                "alpha_lo": lo,
                "alpha_hi": hi,
            },
        ),
    ]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cointoss",
        description="Coherent-state coin-tossing simulator and analysis toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("bounds", "analytic cheat bounds, merit and reference values"),
        ("simulate", "run a batch of sessions for a strategy pair"),
        ("sweep-loss", "merit versus channel attenuation, with threshold"),
        ("classical", "audit classical protocols against the impossibility bounds"),
        ("optimize-alpha", "maximize the merit over the signal intensity"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the config file")
        cmd.add_argument(
            "--seed", type=int, default=0, help="master seed (default 0)"
        )
        cmd.add_argument("--out", default=None, help="write output to this file")
        cmd.add_argument(
            "--format",
            choices=("table", "records"),
            default="table",
            help="human table or machine records (default table)",
        )
        if name == "simulate":
            cmd.add_argument(
                "--workers",
                type=int,
                default=1,
                help="worker processes for the batch (default 1)",
            )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        if args.command == "bounds":
            records = cmd_bounds(config)
        elif args.command == "simulate":
            records = cmd_simulate(config, args.seed, args.workers)
        elif args.command == "sweep-loss":
            records = cmd_sweep_loss(config)
        elif args.command == "classical":
            records = cmd_classical(config, args.seed)
        else:
            records = cmd_optimize_alpha(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvariantViolation, ProtocolOrderError) as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    rendered = (
        render_records(records) if args.format == "records" else render_table(records)
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(rendered)
    else:
        sys.stdout.write(rendered)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
