"""Strict flat key-value configuration files for the command-line front end.

The format is INI-style: section headers in brackets, one ``key = value``
pair per line.  Unknown sections or keys are errors, not warnings, so a
config cannot silently drift from what a command actually consumes.  One
canonical example per command ships in the repository's ``configs/``
directory.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .classical import ClassicalProtocolSpec, Leaf, Player, ProtocolTree, TreeNode
from .optics import ExperimentParams
from .protocol import Outcome


class ConfigError(ValueError):
    """Configuration file is missing, malformed or inconsistent."""


_EXPERIMENT_KEYS = (
    "alpha_sq",
    "att_transmission_db",
    "att_bob_db",
    "detector_efficiency",
    "qber_per_photon",
    "dark_count_prob",
)

_BOUND_MODELS = ("conservative", "tight")

_SECTION_KEYS: Dict[str, Tuple[str, ...]] = {
    "experiment": _EXPERIMENT_KEYS,
    "bounds": ("p_abort_override", "alice_bound"),
    "simulate": ("alice", "bob", "alice_target", "bob_target", "sessions"),
    "sweep": (
        "at_db_start",
        "at_db_stop",
        "at_db_step",
        "abort_mode",
        "p_abort_override",
        "alice_bound",
    ),
    "classical": (
        "mode",
        "q01",
        "q0perp",
        "q1perp",
        "q0_given_01",
        "q0_given_0perp",
        "q1_given_1perp",
        "trees",
        "max_depth",
        "max_children",
    ),
    "tree": (),  # free-form node names, validated structurally
    "optimize": ("alpha_lo", "alpha_hi", "alice_bound", "p_abort_override"),
}


@dataclass
class RunConfig:
    """Parsed and key-validated configuration, prior to per-command checks."""

    path: str
    sections: Dict[str, Dict[str, str]]

    def has(self, section: str, key: str) -> bool:
        return key in self.sections.get(section, {})

    def require_section(self, section: str) -> Dict[str, str]:
        if section not in self.sections:
            raise ConfigError(f"{self.path}: missing required section [{section}]")
        return self.sections[section]

    def _raw(self, section: str, key: str) -> str:
        values = self.require_section(section)
        if key not in values:
            raise ConfigError(
                f"{self.path}: missing required key {key!r} in section [{section}]"
            )
        return values[key]

    def get_float(self, section: str, key: str) -> float:
        raw = self._raw(section, key)
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(
                f"{self.path}: [{section}] {key} = {raw!r} is not a number"
            ) from None

    def get_int(self, section: str, key: str) -> int:
        raw = self._raw(section, key)
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(
                f"{self.path}: [{section}] {key} = {raw!r} is not an integer"
            ) from None

    def get_str(self, section: str, key: str) -> str:
        return self._raw(section, key).strip()

    def get_choice(self, section: str, key: str, choices: Tuple[str, ...]) -> str:
        value = self.get_str(section, key)
        if value not in choices:
            raise ConfigError(
                f"{self.path}: [{section}] {key} = {value!r}; "
                f"expected one of {', '.join(choices)}"
            )
        return value

    def optional_float(self, section: str, key: str) -> Optional[float]:
        if self.has(section, key):
            return self.get_float(section, key)
        return None

    def bound_model(self, section: str, default: str = "conservative") -> bool:
        """Resolve the alice_bound key to the ``tight`` flag."""
        if self.has(section, "alice_bound"):
            return self.get_choice(section, "alice_bound", _BOUND_MODELS) == "tight"
        return default == "tight"


def load_config(path: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    sections: Dict[str, Dict[str, str]] = {}
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(
                f"{path}: unknown section [{section}]; known sections: "
                f"{', '.join(sorted(_SECTION_KEYS))}"
            )
        values = dict(parser.items(section))
        allowed = _SECTION_KEYS[section]
        if allowed:
            for key in values:
                if key not in allowed:
                    raise ConfigError(
                        f"{path}: unknown key {key!r} in section [{section}]; "
                        f"allowed: {', '.join(allowed)}"
                    )
        sections[section] = values
    return RunConfig(path=path, sections=sections)


def experiment_params(config: RunConfig) -> ExperimentParams:
    config.require_section("experiment")
    try:
        return ExperimentParams(
            **{key: config.get_float("experiment", key) for key in _EXPERIMENT_KEYS}
        )
    except ValueError as exc:
        raise ConfigError(f"{config.path}: [experiment] {exc}") from exc


def classical_spec(config: RunConfig) -> ClassicalProtocolSpec:
    keys = (
        "q01",
        "q0perp",
        "q1perp",
        "q0_given_01",
        "q0_given_0perp",
        "q1_given_1perp",
    )
    try:
        return ClassicalProtocolSpec(
            **{key: config.get_float("classical", key) for key in keys}
        )
    except ValueError as exc:
        raise ConfigError(f"{config.path}: [classical] {exc}") from exc


_OUTCOME_TOKENS = {"0": Outcome.ZERO, "1": Outcome.ONE, "abort": Outcome.ABORT}
_PLAYER_TOKENS = {"alice": Player.ALICE, "bob": Player.BOB}


def protocol_tree(config: RunConfig) -> ProtocolTree:
    """Parse a [tree] section into a protocol tree.

    Node lines are ``name = alice|bob child:prob child:prob ...``; leaf lines
    are ``name = leaf <alice output> <bob output>`` with outputs in
    {0, 1, abort}.  The ``root`` key names the entry node.
    """
    entries = dict(config.require_section("tree"))
    if "root" not in entries:
        raise ConfigError(f"{config.path}: [tree] missing the 'root' key")
    root_name = entries.pop("root").strip()

    building: set = set()
    built: Dict[str, ProtocolTree] = {}

    def build(name: str) -> ProtocolTree:
        if name in built:
            return built[name]
        if name in building:
            raise ConfigError(f"{config.path}: [tree] cycle through node {name!r}")
        if name not in entries:
            raise ConfigError(f"{config.path}: [tree] undefined node {name!r}")
        building.add(name)
        tokens = entries[name].split()
        if not tokens:
            raise ConfigError(f"{config.path}: [tree] empty definition for {name!r}")
        kind = tokens[0].lower()
        node: ProtocolTree
        if kind == "leaf":
            if len(tokens) != 3:
                raise ConfigError(
                    f"{config.path}: [tree] {name}: expected 'leaf <x> <y>'"
                )
            try:
                node = Leaf(_OUTCOME_TOKENS[tokens[1]], _OUTCOME_TOKENS[tokens[2]])
            except KeyError as exc:
                raise ConfigError(
                    f"{config.path}: [tree] {name}: outputs must be 0, 1 or "
                    f"abort, got {exc.args[0]!r}"
                ) from None
        elif kind in _PLAYER_TOKENS:
            children: List[Tuple[float, ProtocolTree]] = []
            for token in tokens[1:]:
                child_name, _, prob_text = token.partition(":")
                if not prob_text:
                    raise ConfigError(
                        f"{config.path}: [tree] {name}: move {token!r} must be "
                        f"child:probability"
                    )
                try:
                    prob = float(prob_text)
                except ValueError:
                    raise ConfigError(
                        f"{config.path}: [tree] {name}: {prob_text!r} is not "
                        f"a number"
                    ) from None
                children.append((prob, build(child_name)))
            try:
                node = TreeNode(_PLAYER_TOKENS[kind], tuple(children))
            except ValueError as exc:
                raise ConfigError(f"{config.path}: [tree] {name}: {exc}") from exc
        else:
            raise ConfigError(
                f"{config.path}: [tree] {name}: first token must be alice, "
                f"bob or leaf, got {tokens[0]!r}"
            )
        building.discard(name)
        built[name] = node
        return node

    root = build(root_name)
    unused = set(entries) - set(built)
    if unused:
        raise ConfigError(
            f"{config.path}: [tree] unreachable nodes: {', '.join(sorted(unused))}"
        )
    return root
