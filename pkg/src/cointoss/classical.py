"""Classical coin-tossing protocols: impossibility audit machinery.

Two representations are provided and must agree wherever both apply:

* :class:`ClassicalProtocolSpec` -- the two-round trit protocol in which the
  sender first excludes one of the outcomes {0, 1, abort} and the receiver
  then picks one of the remaining two.  Honest and optimal-cheat
  probabilities have closed forms.
* :class:`TreeNode` -- an arbitrary finite game tree with per-node honest
  move distributions.  Honest probabilities follow by forward propagation,
  optimal cheating by backward induction (the dishonest party maximizes over
  children at her own nodes, honest nodes average).

For every *correct* protocol (honest parties agree and the two coin values
are equally likely) the impossibility inequalities

    (1 - p_0_star) * (1 - p_star_1) <= p_perp_perp
    (1 - p_1_star) * (1 - p_star_0) <= p_perp_perp

hold, which forces the merit of any classical protocol to be <= 0.  The proof
tracks a per-round quantity (see :func:`verify_tj_monotone`) that never
decreases and connects the left-hand side (its value at the root) to the
honest abort probability (its value at the final round).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from .bounds import InvariantViolation
from .protocol import Outcome

_DIST_TOL = 1e-12
_LEMMA_TOL = 1e-12


class Player(Enum):
    ALICE = "alice"
    BOB = "bob"


@dataclass(frozen=True)
class Leaf:
    """Terminal protocol state labelled with both parties' outputs."""

    alice_output: Outcome
    bob_output: Outcome


@dataclass(frozen=True)
class TreeNode:
    """Internal state: the acting party and her honest move distribution.

    ``children`` pairs a probability with a subtree; zero-probability moves
    are legal (they are never taken honestly but remain available to a
    cheater).
    """

    player: Player
    children: Tuple[Tuple[float, "ProtocolTree"], ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise ValueError("internal node must have at least one child")
        total = 0.0
        for prob, _ in self.children:
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"move probability out of [0, 1]: {prob}")
            total += prob
        if abs(total - 1.0) > _DIST_TOL:
            raise ValueError(
                f"move probabilities must sum to 1 within {_DIST_TOL}, "
                f"got {total!r}"
            )


ProtocolTree = Union[TreeNode, Leaf]


@dataclass(frozen=True)
class ClassicalProtocolSpec:
    """Parameters of the two-round trit protocol.

    Round 1 (sender): exclude one outcome, honestly with probabilities
    ``q01`` (exclude abort), ``q0perp`` (exclude 1), ``q1perp`` (exclude 0).
    Round 2 (receiver): pick one of the two remaining outcomes; only the
    probability of the first-listed outcome is stored, the complement is
    implied (e.g. ``q0_given_0perp`` picks 0, so abort has probability
    ``1 - q0_given_0perp``).
    """

    q01: float
    q0perp: float
    q1perp: float
    q0_given_01: float
    q0_given_0perp: float
    q1_given_1perp: float

    def __post_init__(self) -> None:
        for name in (
            "q01",
            "q0perp",
            "q1perp",
            "q0_given_01",
            "q0_given_0perp",
            "q1_given_1perp",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        total = self.q01 + self.q0perp + self.q1perp
        if abs(total - 1.0) > _DIST_TOL:
            raise ValueError(
                f"q01 + q0perp + q1perp must sum to 1 within {_DIST_TOL}, "
                f"got {total!r}"
            )


@dataclass(frozen=True)
class ClassicalReport:
    """Honest probabilities, optimal cheat values and the two lemma products."""

    p00: float
    p11: float
    p_perp_perp: float
    p_star_0: float
    p_star_1: float
    p_0_star: float
    p_1_star: float
    lemma1_lhs_a: float  # (1 - p_0_star) * (1 - p_star_1)
    lemma1_lhs_b: float  # (1 - p_1_star) * (1 - p_star_0)


def eval_lemma2(spec: ClassicalProtocolSpec) -> ClassicalReport:
    """Closed-form evaluation of the two-round trit protocol."""
    q1_given_01 = 1.0 - spec.q0_given_01
    qperp_given_0perp = 1.0 - spec.q0_given_0perp
    qperp_given_1perp = 1.0 - spec.q1_given_1perp

    p00 = spec.q0_given_01 * spec.q01 + spec.q0_given_0perp * spec.q0perp
    p11 = q1_given_01 * spec.q01 + spec.q1_given_1perp * spec.q1perp
    p_perp_perp = (
        qperp_given_0perp * spec.q0perp + qperp_given_1perp * spec.q1perp
    )

    # Dishonest sender picks the round-1 message maximizing the receiver's
    # chance of the target; dishonest receiver picks the target whenever the
    # sender's honest message leaves it available.
    p_star_0 = max(spec.q0_given_01, spec.q0_given_0perp)
    p_star_1 = max(q1_given_01, spec.q1_given_1perp)
    p_0_star = spec.q01 + spec.q0perp
    p_1_star = spec.q01 + spec.q1perp

    return _finish_report(
        p00, p11, p_perp_perp, p_star_0, p_star_1, p_0_star, p_1_star
    )


def spec_to_tree(spec: ClassicalProtocolSpec) -> TreeNode:
    """Encode the two-round trit protocol as a depth-2 game tree."""
    leaf_00 = Leaf(Outcome.ZERO, Outcome.ZERO)
    leaf_11 = Leaf(Outcome.ONE, Outcome.ONE)
    leaf_pp = Leaf(Outcome.ABORT, Outcome.ABORT)
    branch_01 = TreeNode(
        Player.BOB,
        ((spec.q0_given_01, leaf_00), (1.0 - spec.q0_given_01, leaf_11)),
    )
    branch_0p = TreeNode(
        Player.BOB,
        ((spec.q0_given_0perp, leaf_00), (1.0 - spec.q0_given_0perp, leaf_pp)),
    )
    branch_1p = TreeNode(
        Player.BOB,
        ((spec.q1_given_1perp, leaf_11), (1.0 - spec.q1_given_1perp, leaf_pp)),
    )
    return TreeNode(
        Player.ALICE,
        (
            (spec.q01, branch_01),
            (spec.q0perp, branch_0p),
            (spec.q1perp, branch_1p),
        ),
    )


def _honest_distribution(tree: ProtocolTree) -> Dict[Tuple[Outcome, Outcome], float]:
    dist: Dict[Tuple[Outcome, Outcome], float] = {}

    def walk(node: ProtocolTree, weight: float) -> None:
        if isinstance(node, Leaf):
            key = (node.alice_output, node.bob_output)
            dist[key] = dist.get(key, 0.0) + weight
            return
        for prob, child in node.children:
            if prob:
                walk(child, weight * prob)

    walk(tree, 1.0)
    return dist


def _cheat_value(
    tree: ProtocolTree, dishonest: Player, target: Outcome
) -> float:
    """Backward-induction optimum for ``dishonest`` forcing the honest
    party's output to equal ``target``."""
    memo: Dict[int, float] = {}

    def value(node: ProtocolTree) -> float:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Leaf):
            honest_out = (
                node.bob_output if dishonest is Player.ALICE else node.alice_output
            )
            result = 1.0 if honest_out is target else 0.0
        elif node.player is dishonest:
            result = max(value(child) for _, child in node.children)
        else:
            result = sum(prob * value(child) for prob, child in node.children)
        memo[key] = result
        return result

    return value(tree)


def _finish_report(
    p00: float,
    p11: float,
    p_perp_perp: float,
    p_star_0: float,
    p_star_1: float,
    p_0_star: float,
    p_1_star: float,
) -> ClassicalReport:
    return ClassicalReport(
        p00=p00,
        p11=p11,
        p_perp_perp=p_perp_perp,
        p_star_0=p_star_0,
        p_star_1=p_star_1,
        p_0_star=p_0_star,
        p_1_star=p_1_star,
        lemma1_lhs_a=(1.0 - p_0_star) * (1.0 - p_star_1),
        lemma1_lhs_b=(1.0 - p_1_star) * (1.0 - p_star_0),
    )


def is_correct(report: ClassicalReport) -> bool:
    """Honest parties agree and the two coin values are equally likely."""
    agreeing = report.p00 + report.p11 + report.p_perp_perp
    return (
        abs(agreeing - 1.0) <= 1e-9 and abs(report.p00 - report.p11) <= 1e-9
    )


def eval_tree(tree: ProtocolTree) -> ClassicalReport:
    """Evaluate an arbitrary protocol tree.

    Honest probabilities by forward propagation, cheat values by backward
    induction.  For correct protocols the impossibility inequalities are
    checked as a postcondition; a violation indicates an evaluator bug and
    raises :class:`InvariantViolation`.
    """
    dist = _honest_distribution(tree)
    p00 = dist.get((Outcome.ZERO, Outcome.ZERO), 0.0)
    p11 = dist.get((Outcome.ONE, Outcome.ONE), 0.0)
    p_perp_perp = dist.get((Outcome.ABORT, Outcome.ABORT), 0.0)

    report = _finish_report(
        p00,
        p11,
        p_perp_perp,
        p_star_0=_cheat_value(tree, Player.ALICE, Outcome.ZERO),
        p_star_1=_cheat_value(tree, Player.ALICE, Outcome.ONE),
        p_0_star=_cheat_value(tree, Player.BOB, Outcome.ZERO),
        p_1_star=_cheat_value(tree, Player.BOB, Outcome.ONE),
    )
    if is_correct(report):
        if (
            report.lemma1_lhs_a > report.p_perp_perp + _LEMMA_TOL
            or report.lemma1_lhs_b > report.p_perp_perp + _LEMMA_TOL
        ):
            raise InvariantViolation(
                "impossibility inequality violated on a correct protocol; "
                f"report={report!r}"
            )
    return report


def verify_tj_monotone(
    tree: ProtocolTree, x: Outcome, y: Outcome
) -> List[float]:
    """Per-round values of the proof's monotone quantity.

    Round ``j`` sums, over the states reachable honestly at that round,
    ``w(u) * (1 - p_x_star(u)) * (1 - p_star_y(u))`` where the two factors are
    the backward-induction cheat values from state ``u`` (for a leaf, output
    indicators).  Protocol states that terminated early persist through later
    rounds.  The sequence starts at ``(1 - p_x_star) * (1 - p_star_y)`` for
    the whole protocol and, on a correct protocol with (x, y) = (0, 1), ends
    at the honest abort probability.  It must never decrease; a decrease
    raises :class:`InvariantViolation`.
    """
    memo_x: Dict[int, float] = {}
    memo_y: Dict[int, float] = {}

    def cheat(node: ProtocolTree, dishonest: Player, target: Outcome,
              memo: Dict[int, float]) -> float:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Leaf):
            honest_out = (
                node.bob_output if dishonest is Player.ALICE else node.alice_output
            )
            result = 1.0 if honest_out is target else 0.0
        elif node.player is dishonest:
            result = max(cheat(c, dishonest, target, memo) for _, c in node.children)
        else:
            result = sum(
                p * cheat(c, dishonest, target, memo) for p, c in node.children
            )
        memo[key] = result
        return result

    def term(node: ProtocolTree, weight: float) -> float:
        not_x = 1.0 - cheat(node, Player.BOB, x, memo_x)
        not_y = 1.0 - cheat(node, Player.ALICE, y, memo_y)
        return weight * not_x * not_y

    values: List[float] = []
    level: List[Tuple[float, ProtocolTree]] = [(1.0, tree)]
    while True:
        values.append(sum(term(node, w) for w, node in level))
        if all(isinstance(node, Leaf) for _, node in level):
            break
        nxt: List[Tuple[float, ProtocolTree]] = []
        for w, node in level:
            if isinstance(node, Leaf):
                nxt.append((w, node))
            else:
                nxt.extend((w * p, c) for p, c in node.children)
        level = nxt

    for earlier, later in zip(values, values[1:]):
        if later < earlier - _LEMMA_TOL:
            raise InvariantViolation(
                f"round quantity decreased: {earlier!r} -> {later!r}"
            )
    return values


def make_correct_spec(t: float, s: float) -> ClassicalProtocolSpec:
    """The symmetric correct family: both lemma products equal half the
    abort probability.

    ``t`` is the weight of each single-coin-value-or-abort message,
    ``s`` the receiver's conditional preference for the coin value there.
    """
    if not 0.0 <= t <= 0.5:
        raise ValueError(f"t must lie in [0, 1/2], got {t}")
    if not 0.5 <= s <= 1.0:
        raise ValueError(f"s must lie in [1/2, 1], got {s}")
    return ClassicalProtocolSpec(
        q01=1.0 - 2.0 * t,
        q0perp=t,
        q1perp=t,
        q0_given_01=0.5,
        q0_given_0perp=s,
        q1_given_1perp=s,
    )


def saturating_spec(q01: float, q1_given_1perp: float) -> ClassicalProtocolSpec:
    """A correct protocol saturating the first impossibility inequality.

    The sender never excludes the coin value 1 (``q0perp = 0``); the
    remaining receiver preference in the {0, 1} branch is fixed in closed
    form so the two coin values stay equally likely.
    """
    if not 0.0 < q01 <= 1.0:
        raise ValueError(f"q01 must lie in (0, 1], got {q01}")
    if not 0.5 <= q1_given_1perp <= 1.0:
        raise ValueError(
            f"q1_given_1perp must lie in [1/2, 1], got {q1_given_1perp}"
        )
    q1perp = 1.0 - q01
    q0_given_01 = 0.5 + q1_given_1perp * q1perp / (2.0 * q01)
    if q0_given_01 > 1.0 + _DIST_TOL:
        raise ValueError(
            f"infeasible: balancing the coin needs q0_given_01 = "
            f"{q0_given_01!r} > 1; increase q01 or decrease q1_given_1perp"
        )
    return ClassicalProtocolSpec(
        q01=q01,
        q0perp=0.0,
        q1perp=q1perp,
        q0_given_01=min(q0_given_01, 1.0),
        q0_given_0perp=0.5,
        q1_given_1perp=q1_given_1perp,
    )


def mirror_spec(spec: ClassicalProtocolSpec) -> ClassicalProtocolSpec:
    """Relabel the coin values 0 <-> 1 (saturates the other inequality)."""
    return ClassicalProtocolSpec(
        q01=spec.q01,
        q0perp=spec.q1perp,
        q1perp=spec.q0perp,
        q0_given_01=1.0 - spec.q0_given_01,
        q0_given_0perp=spec.q1_given_1perp,
        q1_given_1perp=spec.q0_given_0perp,
    )


_MIRROR_OUTCOME = {
    Outcome.ZERO: Outcome.ONE,
    Outcome.ONE: Outcome.ZERO,
    Outcome.ABORT: Outcome.ABORT,
}


def mirror_tree(tree: ProtocolTree) -> ProtocolTree:
    """Swap the coin values 0 <-> 1 in every leaf label."""
    if isinstance(tree, Leaf):
        return Leaf(
            _MIRROR_OUTCOME[tree.alice_output], _MIRROR_OUTCOME[tree.bob_output]
        )
    return TreeNode(
        tree.player,
        tuple((p, mirror_tree(c)) for p, c in tree.children),
    )


_AGREEING_LEAVES = (
    Leaf(Outcome.ZERO, Outcome.ZERO),
    Leaf(Outcome.ONE, Outcome.ONE),
    Leaf(Outcome.ABORT, Outcome.ABORT),
)


def random_correct_tree(
    rng: np.random.Generator,
    max_depth: int = 5,
    max_children: int = 3,
) -> TreeNode:
    """Generate a random correct protocol tree.

    Leaves carry agreeing labels; the root mixes a random subtree with its
    coin-value mirror at equal weight, which balances the two coin values
    exactly.  ``max_depth`` counts edges from the root, so subtrees get one
    level less.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")

    def subtree(depth: int) -> ProtocolTree:
        if depth <= 0 or rng.random() < 0.3:
            return _AGREEING_LEAVES[int(rng.integers(3))]
        n = int(rng.integers(2, max_children + 1))
        raw = rng.random(n) + 1e-3
        if n > 2 and rng.random() < 0.2:
            raw[int(rng.integers(n))] = 0.0  # keep a never-played move around
        probs = raw / raw.sum()
        probs[-1] = 1.0 - float(probs[:-1].sum())
        player = Player.ALICE if rng.random() < 0.5 else Player.BOB
        return TreeNode(
            player,
            tuple((float(p), subtree(depth - 1)) for p in probs),
        )

    base = subtree(max_depth - 1)
    return TreeNode(Player.ALICE, ((0.5, base), (0.5, mirror_tree(base))))


def enumerate_deterministic_cheat(
    tree: ProtocolTree,
    dishonest: Player,
    target: Outcome,
    limit: int = 200_000,
) -> float:
    """Brute-force optimum over all deterministic strategies of the cheater.

    Enumerates every assignment of a fixed child choice to each of the
    dishonest party's nodes and evaluates the forced game by forward
    propagation.  Exists as an independent cross-check of the backward
    induction; refuses trees with more than ``limit`` assignments.
    """
    nodes: List[TreeNode] = []

    def collect(node: ProtocolTree) -> None:
        if isinstance(node, Leaf):
            return
        if node.player is dishonest:
            nodes.append(node)
        for _, child in node.children:
            collect(child)

    collect(tree)
    total = 1
    for node in nodes:
        total *= len(node.children)
        if total > limit:
            raise ValueError(
                f"too many deterministic strategies to enumerate (> {limit})"
            )

    def forced_value(node: ProtocolTree, choice: Dict[int, int]) -> float:
        if isinstance(node, Leaf):
            honest_out = (
                node.bob_output if dishonest is Player.ALICE else node.alice_output
            )
            return 1.0 if honest_out is target else 0.0
        if node.player is dishonest:
            _, child = node.children[choice[id(node)]]
            return forced_value(child, choice)
        return sum(p * forced_value(c, choice) for p, c in node.children)

    best = 0.0
    for assignment in itertools.product(
        *[range(len(node.children)) for node in nodes]
    ):
        choice = {id(node): k for node, k in zip(nodes, assignment)}
        best = max(best, forced_value(tree, choice))
    return best
