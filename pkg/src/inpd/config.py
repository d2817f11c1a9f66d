"""Experiment configuration: JSON parsing with located errors and resolved
defaults."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .agents import AgentConfig, AgentFamily
from .engine import NAMED_MATRICES, RewardMatrix
from .network import NetworkSpec

logger = logging.getLogger(__name__)

DEFAULT_ROUNDS = 60
DEFAULT_SIMS_PER_CELL = 20


class ConfigError(ValueError):
    """Invalid experiment configuration; the message carries the JSON location."""


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int
    agents: tuple[AgentConfig, ...]
    networks: tuple[NetworkSpec, ...]
    matrices: tuple[RewardMatrix, ...]
    rounds: int = DEFAULT_ROUNDS
    sims_per_cell: int = DEFAULT_SIMS_PER_CELL
    output_dir: str = "out"
    parallelism: int | str = "auto"

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed: must be a 64-bit non-negative integer")
        if not self.agents:
            raise ConfigError("agents: at least one agent setting required")
        if not self.networks:
            raise ConfigError("networks: at least one network required")
        if not self.matrices:
            raise ConfigError("matrices: at least one reward matrix required")
        if self.rounds < 1:
            raise ConfigError("rounds: must be >= 1")
        if self.sims_per_cell < 1:
            raise ConfigError("sims_per_cell: must be >= 1")
        if self.parallelism != "auto" and (
            not isinstance(self.parallelism, int) or self.parallelism < 1
        ):
            raise ConfigError("parallelism: must be 'auto' or a positive integer")

    @property
    def cell_count(self) -> int:
        return len(self.agents) * len(self.networks) * len(self.matrices)

    @property
    def run_count(self) -> int:
        return self.cell_count * self.sims_per_cell

    def echo(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "agents": [a.shorthand() for a in self.agents],
            "networks": [n.text for n in self.networks],
            "matrices": [
                {"label": m.label, **m.value_strings(), "non_strict": m.non_strict}
                for m in self.matrices
            ],
            "rounds": self.rounds,
            "sims_per_cell": self.sims_per_cell,
            "output_dir": self.output_dir,
            "parallelism": self.parallelism,
        }


_AGENT_KEYS = {
    "family", "semantics", "planning_budget", "q", "particle_count",
    "likelihood_sigma", "drift_rate", "rollout_depth", "planning_prior_strength",
}
_MATRIX_KEYS = {"label", "t", "r", "p", "s"}
_TOP_KEYS = {
    "master_seed", "agents", "networks", "matrices", "rounds",
    "sims_per_cell", "output_dir", "parallelism",
}


def _parse_agent(entry, where: str) -> AgentConfig:
    if isinstance(entry, str):
        try:
            return AgentConfig.from_shorthand(entry)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    if not isinstance(entry, dict):
        raise ConfigError(f"{where}: agent must be a shorthand string or an object")
    unknown = set(entry) - _AGENT_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    if "family" not in entry:
        raise ConfigError(f"{where}: 'family' is required")
    try:
        family = AgentFamily(entry["family"])
    except ValueError as exc:
        raise ConfigError(f"{where}.family: unknown family {entry['family']!r}") from exc
    kwargs = {}
    if "semantics" in entry:
        kwargs["semantics_label"] = entry["semantics"]
    for key in ("planning_budget", "particle_count", "rollout_depth"):
        if key in entry:
            kwargs[key] = int(entry[key])
    for key in ("q", "likelihood_sigma", "drift_rate", "planning_prior_strength"):
        if key in entry:
            kwargs[key] = float(entry[key])
    try:
        return AgentConfig(family=family, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_matrix(entry, where: str) -> RewardMatrix:
    if isinstance(entry, str):
        if entry in NAMED_MATRICES:
            return NAMED_MATRICES[entry]
        raise ConfigError(f"{where}: unknown matrix {entry!r} (expected M1, M2, M3 or an object)")
    if not isinstance(entry, dict):
        raise ConfigError(f"{where}: matrix must be a name or an object")
    unknown = set(entry) - _MATRIX_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = {"t", "r", "p", "s"} - set(entry)
    if missing:
        raise ConfigError(f"{where}: missing payoff values {sorted(missing)}")
    label = entry.get("label", "custom")
    try:
        matrix = RewardMatrix.from_values(entry["t"], entry["r"], entry["p"], entry["s"], label)
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    if matrix.non_strict:
        logger.warning(
            "matrix %s does not satisfy the strict dilemma ordering "
            "temptation > reward > punishment > sucker; flagged non_strict",
            label,
        )
    return matrix


def parse_config(path: str | Path) -> ExperimentConfig:
    """Load, validate, and resolve an experiment configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: no such config file")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("master_seed", "agents", "networks", "matrices"):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")

    if not isinstance(raw["master_seed"], int):
        raise ConfigError("master_seed: must be an integer")
    if not isinstance(raw["agents"], list):
        raise ConfigError("agents: must be a list")
    if not isinstance(raw["networks"], list):
        raise ConfigError("networks: must be a list")
    if not isinstance(raw["matrices"], list):
        raise ConfigError("matrices: must be a list")

    agents = tuple(_parse_agent(a, f"agents[{i}]") for i, a in enumerate(raw["agents"]))
    networks = []
    for i, n in enumerate(raw["networks"]):
        if not isinstance(n, str):
            raise ConfigError(f"networks[{i}]: must be a string")
        try:
            networks.append(NetworkSpec(n))
        except ValueError as exc:
            raise ConfigError(f"networks[{i}]: {exc}") from exc
    matrices = tuple(_parse_matrix(m, f"matrices[{i}]") for i, m in enumerate(raw["matrices"]))

    return ExperimentConfig(
        master_seed=raw["master_seed"],
        agents=agents,
        networks=tuple(networks),
        matrices=matrices,
        rounds=int(raw.get("rounds", DEFAULT_ROUNDS)),
        sims_per_cell=int(raw.get("sims_per_cell", DEFAULT_SIMS_PER_CELL)),
        output_dir=str(raw.get("output_dir", "out")),
        parallelism=raw.get("parallelism", "auto"),
    )
