"""Broadcast-model iterated game: synchronous rounds, pairwise scoring summed
over neighbors, and complete per-round logging.

Payoffs are held as scaled integers (a per-matrix power-of-ten scale) so that
score comparisons and log round-trips stay exact even for decimal-valued
matrices; CSV output renders them back as decimals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .act import Action, default_impression_model
from .agents import Agent, AgentConfig, AgentView
from .network import Graph, NetworkSpec

_MAX_DECIMALS = 6


class BatchRunError(RuntimeError):
    """A simulation inside a batch failed; the message names the run.

    Single-argument construction keeps the exception picklable across
    worker-pool boundaries.
    """

    @classmethod
    def for_run(cls, run_id: str, cause: Exception) -> "BatchRunError":
        err = cls(f"simulation {run_id} failed: {cause}")
        err.run_id = run_id
        return err


def _decimal_places(value) -> int:
    d = Decimal(str(value)).normalize()
    return max(0, -d.as_tuple().exponent)


@dataclass(frozen=True)
class RewardMatrix:
    """Prisoner's dilemma payoffs (temptation, reward, punishment, sucker),
    stored in integer units of 1 / scale."""

    temptation: int
    reward: int
    punishment: int
    sucker: int
    scale: int
    label: str

    @classmethod
    def from_values(cls, t, r, p, s, label: str) -> "RewardMatrix":
        places = max(_decimal_places(v) for v in (t, r, p, s))
        if places > _MAX_DECIMALS:
            raise ValueError(f"matrix {label!r}: more than {_MAX_DECIMALS} decimal places")
        scale = 10**places
        vals = []
        for v in (t, r, p, s):
            d = Decimal(str(v)) * scale
            if d != d.to_integral_value():
                raise ValueError(f"matrix {label!r}: value {v!r} not exact at scale {scale}")
            vals.append(int(d))
        return cls(vals[0], vals[1], vals[2], vals[3], scale, label)

    @property
    def strict(self) -> bool:
        return self.temptation > self.reward > self.punishment > self.sucker

    @property
    def non_strict(self) -> bool:
        return not self.strict

    def cell(self, mine: Action, other: Action) -> int:
        return int(self.payoff_table()[int(mine), int(other)])

    @lru_cache(maxsize=None)
    def payoff_table(self) -> np.ndarray:
        """Payoff to me, indexed [my action, other action] with defect = 0."""
        table = np.empty((2, 2), dtype=np.int64)
        table[1, 1] = self.reward
        table[1, 0] = self.sucker
        table[0, 1] = self.temptation
        table[0, 0] = self.punishment
        table.setflags(write=False)
        return table

    def format_payoff(self, scaled: int) -> str:
        if self.scale == 1:
            return str(int(scaled))
        txt = str(Decimal(int(scaled)) / self.scale)
        return txt

    def value_strings(self) -> dict[str, str]:
        return {
            "t": self.format_payoff(self.temptation),
            "r": self.format_payoff(self.reward),
            "p": self.format_payoff(self.punishment),
            "s": self.format_payoff(self.sucker),
        }


M1 = RewardMatrix.from_values(3, 2, 1, 0, "M1")
M2 = RewardMatrix.from_values("1.4", 1, 0, 0, "M2")
M3 = RewardMatrix.from_values(11, 10, 1, 0, "M3")
NAMED_MATRICES = {"M1": M1, "M2": M2, "M3": M3}


@lru_cache(maxsize=32)
def _neighbor_csr(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    indptr = np.zeros(graph.n + 1, dtype=np.int64)
    for u, nbrs in enumerate(graph.adjacency):
        indptr[u + 1] = indptr[u] + len(nbrs)
    indices = np.fromiter(
        (v for nbrs in graph.adjacency for v in nbrs), dtype=np.int64, count=indptr[-1]
    )
    return indptr, indices


def cooperating_neighbor_counts(actions: np.ndarray, graph: Graph) -> np.ndarray:
    indptr, indices = _neighbor_csr(graph)
    cs = np.concatenate([[0], np.cumsum(actions.astype(np.int64)[indices])])
    return cs[indptr[1:]] - cs[indptr[:-1]]


def score_round(actions: Sequence[int] | np.ndarray, graph: Graph, matrix: RewardMatrix) -> np.ndarray:
    """Broadcast payoffs: each node's action plays every neighbor pairwise and
    the rewards sum. Returns scaled integer payoffs per node."""
    acts = np.asarray(actions, dtype=np.int64)
    if acts.shape != (graph.n,):
        raise ValueError(f"need {graph.n} actions, got shape {acts.shape}")
    nc = cooperating_neighbor_counts(acts, graph)
    deg = graph.degrees
    nd = deg - nc
    coop_pay = matrix.reward * nc + matrix.sucker * nd
    defect_pay = matrix.temptation * nc + matrix.punishment * nd
    return np.where(acts == 1, coop_pay, defect_pay)


@dataclass
class SimulationLog:
    """Complete record of one simulation: per-round, per-agent action,
    broadcast payoff (scaled integer units), cooperating-neighbor count and
    degree, plus enough configuration echo to re-derive every number."""

    actions: np.ndarray
    payoffs: np.ndarray
    coop_neighbors: np.ndarray
    degrees: np.ndarray
    payoff_scale: int
    setting: str
    network: str
    matrix: str
    sim_id: int
    seed_key: tuple[int, ...]
    agent_config: dict | None = None
    matrix_values: dict | None = None

    @property
    def rounds(self) -> int:
        return int(self.actions.shape[0])

    @property
    def n_agents(self) -> int:
        return int(self.actions.shape[1])

    @property
    def run_id(self) -> str:
        return f"{self.setting}__{self.network}__{self.matrix}__sim{self.sim_id:03d}"

    def cooperation_rates(self) -> np.ndarray:
        return self.actions.mean(axis=1)

    def config_echo(self) -> dict:
        return {
            "run_id": self.run_id,
            "setting": self.setting,
            "network": self.network,
            "matrix": self.matrix,
            "matrix_values": self.matrix_values,
            "payoff_scale": self.payoff_scale,
            "rounds": self.rounds,
            "agents": self.n_agents,
            "sim_id": self.sim_id,
            "seed_key": list(self.seed_key),
            "agent_config": self.agent_config,
        }

    def write_csv(self, path: str | Path) -> None:
        """Raw log CSV plus a JSON config-echo sidecar next to it."""
        path = Path(path)
        scale = self.payoff_scale
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("sim_id,round,agent_id,action,payoff,coop_neighbors,degree\n")
            for t in range(self.rounds):
                for i in range(self.n_agents):
                    act = "C" if self.actions[t, i] else "D"
                    pay = _format_scaled(int(self.payoffs[t, i]), scale)
                    fh.write(
                        f"{self.sim_id},{t},{i},{act},{pay},"
                        f"{int(self.coop_neighbors[t, i])},{int(self.degrees[i])}\n"
                    )
        sidecar = path.with_suffix(".json")
        with open(sidecar, "w", encoding="utf-8") as fh:
            json.dump(self.config_echo(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    @classmethod
    def read_csv(cls, path: str | Path) -> "SimulationLog":
        path = Path(path)
        sidecar = path.with_suffix(".json")
        if not sidecar.exists():
            raise FileNotFoundError(f"{path}: missing config sidecar {sidecar.name}")
        with open(sidecar, encoding="utf-8") as fh:
            echo = json.load(fh)
        scale = int(echo["payoff_scale"])
        rounds, agents = int(echo["rounds"]), int(echo["agents"])
        actions = np.zeros((rounds, agents), dtype=np.uint8)
        payoffs = np.zeros((rounds, agents), dtype=np.int64)
        coopn = np.zeros((rounds, agents), dtype=np.int32)
        degrees = np.zeros(agents, dtype=np.int64)
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "sim_id,round,agent_id,action,payoff,coop_neighbors,degree":
                raise ValueError(f"{path}:1: unexpected log header {header!r}")
            for lineno, line in enumerate(fh, start=2):
                cells = line.strip().split(",")
                if len(cells) != 7:
                    raise ValueError(f"{path}:{lineno}: expected 7 cells")
                _, t, i, act, pay, nc, deg = cells
                t, i = int(t), int(i)
                if not (0 <= t < rounds and 0 <= i < agents):
                    raise ValueError(f"{path}:{lineno}: round/agent out of range")
                actions[t, i] = 1 if act == "C" else 0
                payoffs[t, i] = int(Decimal(pay) * scale)
                coopn[t, i] = int(nc)
                degrees[i] = int(deg)
        return cls(
            actions=actions,
            payoffs=payoffs,
            coop_neighbors=coopn,
            degrees=degrees,
            payoff_scale=scale,
            setting=echo["setting"],
            network=echo["network"],
            matrix=echo["matrix"],
            sim_id=int(echo["sim_id"]),
            seed_key=tuple(echo["seed_key"]),
            agent_config=echo.get("agent_config"),
            matrix_values=echo.get("matrix_values"),
        )


def _format_scaled(scaled: int, scale: int) -> str:
    if scale == 1:
        return str(scaled)
    return str(Decimal(scaled) / scale)


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to reproduce one simulation."""

    agent: AgentConfig
    network: NetworkSpec
    matrix: RewardMatrix
    rounds: int
    sim_id: int
    seed_key: tuple[int, ...]

    @property
    def setting(self) -> str:
        return self.agent.shorthand()

    @property
    def run_id(self) -> str:
        return f"{self.setting}__{self.network.label}__{self.matrix.label}__sim{self.sim_id:03d}"


def run_simulation(spec: RunSpec) -> SimulationLog:
    """One deterministic simulation: build the graph, initialize agents, and
    play synchronous rounds where every round-t choice reads only the
    round-(t-1) snapshot."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed_key))
    graph = spec.network.build(rng)
    n = graph.n
    model = default_impression_model()
    agents = [Agent(spec.agent, model, rng) for _ in range(n)]

    actions = np.zeros((spec.rounds, n), dtype=np.uint8)
    payoffs = np.zeros((spec.rounds, n), dtype=np.int64)
    coopn = np.zeros((spec.rounds, n), dtype=np.int32)

    empty_view = AgentView(own_last_payoff=0, neighbor_summaries=(), round_index=0)
    for t in range(spec.rounds):
        if t == 0:
            views = [empty_view] * n
        else:
            prev_a, prev_p = actions[t - 1], payoffs[t - 1]
            views = [
                AgentView(
                    own_last_payoff=int(prev_p[i]),
                    neighbor_summaries=tuple(
                        (Action(int(prev_a[v])), int(prev_p[v])) for v in graph.adjacency[i]
                    ),
                    round_index=t,
                )
                for i in range(n)
            ]
        actions[t] = [int(agents[i].act(views[i], spec.matrix, rng)) for i in range(n)]
        payoffs[t] = score_round(actions[t], graph, spec.matrix)
        coopn[t] = cooperating_neighbor_counts(actions[t], graph)

    return SimulationLog(
        actions=actions,
        payoffs=payoffs,
        coop_neighbors=coopn,
        degrees=graph.degrees,
        payoff_scale=spec.matrix.scale,
        setting=spec.setting,
        network=spec.network.label,
        matrix=spec.matrix.label,
        sim_id=spec.sim_id,
        seed_key=spec.seed_key,
        agent_config=_agent_config_echo(spec.agent),
        matrix_values=spec.matrix.value_strings(),
    )


def _agent_config_echo(cfg: AgentConfig) -> dict:
    return {
        "family": cfg.family.value,
        "shorthand": cfg.shorthand(),
        "semantics": cfg.semantics_label,
        "planning_budget": cfg.planning_budget,
        "q": cfg.q,
        "particle_count": cfg.particle_count,
        "likelihood_sigma": cfg.likelihood_sigma,
        "drift_rate": cfg.drift_rate,
        "rollout_depth": cfg.rollout_depth,
        "planning_prior_strength": cfg.planning_prior_strength,
    }


def make_run_specs(experiment) -> list[RunSpec]:
    """Cartesian grid of (agent setting, network, matrix, simulation index).

    Per-run seed keys compose the master seed with the grid indices through
    the generator's seed-sequence mixing, so any run is reproducible in
    isolation and independent of scheduling.
    """
    specs = []
    for si, agent in enumerate(experiment.agents):
        for ni, network in enumerate(experiment.networks):
            for mi, matrix in enumerate(experiment.matrices):
                for k in range(experiment.sims_per_cell):
                    specs.append(
                        RunSpec(
                            agent=agent,
                            network=network,
                            matrix=matrix,
                            rounds=experiment.rounds,
                            sim_id=k,
                            seed_key=(experiment.master_seed, si, ni, mi, k),
                        )
                    )
    return specs


def run_batch(experiment) -> list[SimulationLog]:
    """Run every cell of the experiment grid sequentially. Any failing run
    aborts the batch naming the run."""
    logs = []
    for spec in make_run_specs(experiment):
        try:
            logs.append(run_simulation(spec))
        except Exception as exc:
            raise BatchRunError.for_run(spec.run_id, exc) from exc
    return logs
