"""Decision strategies for the networked game.

The affect-driven agent keeps a particle belief over (self, opponent)
identity sentiment, updates it from the aggregate behavior of its neighbors,
and either acts directly on the deflection-minimizing behavior of a sampled
particle (budget 0) or runs a sampled lookahead whose expansion follows the
deflection prior and whose values are game payoffs.

Also implements the two-mode imitation strategy (random neighbor with
probability q, otherwise copy the best scorer including self) and the
constant/random/aggregate-tit-for-tat baselines.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace

import numpy as np

from .act import (
    Action,
    ActionSemantics,
    Epa,
    FRIEND,
    ImpressionModel,
    SCROOGE,
    SEMANTICS_BY_LABEL,
    EPA_MAX,
    EPA_MIN,
    nearest_action,
    optimal_behavior,
    optimal_behavior_batch,
)

logger = logging.getLogger(__name__)

#: Standard deviation of the identity clusters drawn at initialization.
INIT_IDENTITY_SD = 0.5

#: Search-budget ladder standing in for the wall-clock planning limits:
#: label "0" plans without search, "1" and "10" map to fixed iteration
#: counts so runs stay bit-reproducible while preserving the ordering.
BUDGET_BY_TIMEOUT_LABEL = {"0": 0, "1": 300, "10": 3000}
TIMEOUT_LABEL_BY_BUDGET = {v: k for k, v in BUDGET_BY_TIMEOUT_LABEL.items()}


class AgentFamily(enum.Enum):
    BAYES_ACT_LITE = "BayesActLite"
    IMITATION = "Imitation"
    ALL_C = "AllC"
    ALL_D = "AllD"
    RANDOM_COIN = "RandomCoin"
    TIT_FOR_TAT_AGGREGATE = "TitForTatAggregate"


@dataclass(frozen=True)
class AgentConfig:
    """Family selector plus tuning parameters.

    The affective defaults are calibrated as a set: a 30-particle belief
    leaves a realistic share of agents with single-cluster identity views,
    the broad likelihood keeps identity revision slower than the 60-round
    horizon, and the planning prior strength puts the budget-300 search
    indifference point near an even identity mixture. All overridable per
    experiment.
    """

    family: AgentFamily
    semantics_label: str = "default"
    planning_budget: int = 0
    q: float = 0.0
    particle_count: int = 30
    likelihood_sigma: float = 150.0
    drift_rate: float = 0.05
    rollout_depth: int = 3
    planning_prior_strength: float = 800.0

    def __post_init__(self) -> None:
        if self.semantics_label not in SEMANTICS_BY_LABEL:
            raise ValueError(f"unknown action semantics {self.semantics_label!r}")
        if self.planning_budget < 0:
            raise ValueError("planning_budget must be >= 0")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must lie in [0, 1]")
        if self.particle_count <= 0:
            raise ValueError("particle_count must be positive")
        if self.likelihood_sigma <= 0.0:
            raise ValueError("likelihood_sigma must be positive")
        if self.drift_rate < 0.0:
            raise ValueError("drift_rate must be non-negative")
        if self.rollout_depth < 1:
            raise ValueError("rollout_depth must be >= 1")
        if self.planning_prior_strength < 0.0:
            raise ValueError("planning_prior_strength must be non-negative")

    @property
    def semantics(self) -> ActionSemantics:
        return SEMANTICS_BY_LABEL[self.semantics_label]

    @classmethod
    def from_shorthand(cls, name: str) -> "AgentConfig":
        """Build a config from its compact name.

        ``BACT[D|S][0|1|10]`` selects the affective agent with default or
        study action semantics and one of the three search budgets; ``IM[X]``
        selects imitation with q = X / 100. The baseline families go by
        their family name.
        """
        s = name.strip()
        if s.startswith("BACT"):
            rest = s[4:]
            if rest[:1] in ("D", "S") and rest[1:] in BUDGET_BY_TIMEOUT_LABEL:
                return cls(
                    family=AgentFamily.BAYES_ACT_LITE,
                    semantics_label="default" if rest[0] == "D" else "study",
                    planning_budget=BUDGET_BY_TIMEOUT_LABEL[rest[1:]],
                )
            raise ValueError(f"unknown agent shorthand {name!r}")
        if s.startswith("IM"):
            rest = s[2:]
            if rest.isdigit() and 0 <= int(rest) <= 100:
                return cls(family=AgentFamily.IMITATION, q=int(rest) / 100.0)
            raise ValueError(f"unknown agent shorthand {name!r}")
        for fam in AgentFamily:
            if s == fam.value:
                return cls(family=fam)
        raise ValueError(f"unknown agent shorthand {name!r}")

    def shorthand(self) -> str:
        """Compact name; round-trips with ``from_shorthand`` for the standard grid."""
        if self.family is AgentFamily.BAYES_ACT_LITE:
            letter = "D" if self.semantics_label == "default" else "S"
            label = TIMEOUT_LABEL_BY_BUDGET.get(self.planning_budget)
            if label is not None:
                return f"BACT{letter}{label}"
            return f"BACT{letter}b{self.planning_budget}"
        if self.family is AgentFamily.IMITATION:
            pct = self.q * 100.0
            if abs(pct - round(pct)) < 1e-9:
                return f"IM{int(round(pct))}"
            return f"IMq{self.q:g}"
        return self.family.value


@dataclass(frozen=True)
class BeliefState:
    """Particle belief over joint (self identity, opponent identity).

    Stored as parallel arrays; ``particles`` exposes the tuple view. Weights
    are non-negative and sum to one, and the particle count never changes
    across updates.
    """

    self_identities: np.ndarray
    opponent_identities: np.ndarray
    weights: np.ndarray
    last_action: Action | None = None

    def __post_init__(self) -> None:
        n = self.weights.shape[0]
        if self.self_identities.shape != (n, 3) or self.opponent_identities.shape != (n, 3):
            raise ValueError("belief arrays must have matching particle counts")
        if (self.weights < 0).any():
            raise ValueError("belief weights must be non-negative")
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise ValueError("belief weights must sum to 1")

    @property
    def particle_count(self) -> int:
        return int(self.weights.shape[0])

    @property
    def particles(self) -> list[tuple[Epa, Epa, float]]:
        return [
            (Epa.from_array(s), Epa.from_array(o), float(w))
            for s, o, w in zip(self.self_identities, self.opponent_identities, self.weights)
        ]


@dataclass(frozen=True)
class AgentView:
    """What one agent sees of the previous round: its own broadcast payoff
    plus each neighbor's last action and payoff. Payoffs are in the reward
    matrix's scaled integer units."""

    own_last_payoff: int
    neighbor_summaries: tuple[tuple[Action, int], ...]
    round_index: int

    @property
    def neighbor_actions(self) -> list[Action]:
        return [a for a, _ in self.neighbor_summaries]


@dataclass
class AgentState:
    """Engine-side container for one agent's evolving decision state."""

    belief: BeliefState | None = None
    last_observed: Epa | None = None
    last_action: Action | None = None
    degenerate_updates: int = 0


def init_agent(config: AgentConfig, rng: np.random.Generator) -> AgentState:
    """Draw the initial state for one agent.

    Affective agents draw a mixture weight uniformly, then sample each
    particle's self identity from the friend cluster with that probability
    (the scrooge cluster otherwise), both clusters Gaussian with sd 0.5 and
    clamped to the affective scale; opponent identities use an independent
    mixture weight. Every other family starts empty.
    """
    if config.family is not AgentFamily.BAYES_ACT_LITE:
        return AgentState()

    n = config.particle_count
    means = np.stack([SCROOGE.as_array(), FRIEND.as_array()])

    def draw_cluster() -> np.ndarray:
        w = rng.random()
        friendish = (rng.random(n) < w).astype(int)
        pts = means[friendish] + rng.normal(0.0, INIT_IDENTITY_SD, size=(n, 3))
        return np.clip(pts, EPA_MIN, EPA_MAX)

    self_ids = draw_cluster()
    opp_ids = draw_cluster()
    weights = np.full(n, 1.0 / n)
    return AgentState(belief=BeliefState(self_ids, opp_ids, weights))


def aggregate_opponent_epa(neighbor_actions: list[Action], semantics: ActionSemantics) -> Epa:
    """Componentwise mean of the neighbors' action sentiment."""
    if not neighbor_actions:
        raise ValueError("aggregate opponent undefined for an isolated node")
    coop = semantics.cooperate_epa.as_array()
    defect = semantics.defect_epa.as_array()
    k = sum(1 for a in neighbor_actions if a is Action.COOPERATE)
    n = len(neighbor_actions)
    return Epa.from_array((k * coop + (n - k) * defect) / n)


def _predict_opponent_behavior(
    belief: BeliefState, model: ImpressionModel, prior: Epa
) -> np.ndarray:
    """Per-particle behavior the opponent identity would choose toward us."""
    return optimal_behavior_batch(
        belief.opponent_identities, belief.self_identities, model, prior=prior.as_array()
    )


def _systematic_resample(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = weights.shape[0]
    positions = (rng.random() + np.arange(n)) / n
    return np.searchsorted(np.cumsum(weights), positions).clip(0, n - 1)


def update_belief(
    state: BeliefState,
    observed: Epa,
    model: ImpressionModel,
    config: AgentConfig,
    rng: np.random.Generator,
) -> BeliefState:
    """Reweight particles by how well each explains the observed opponent
    behavior, resampling and roughening when the weights degenerate.

    Each particle predicts the opponent's behavior toward the agent; its
    weight is multiplied by a Gaussian likelihood of the observation around
    that prediction. Systematic resampling triggers when the effective
    sample size falls below half the particle count, followed by Gaussian
    roughening (sd = drift rate) of every identity component. A full weight
    underflow resets to uniform and is logged.
    """
    preds = _predict_opponent_behavior(state, model, prior=observed)
    err = preds - observed.as_array()
    sq = np.einsum("ij,ij->i", err, err)
    logw = -sq / (2.0 * config.likelihood_sigma**2)
    new_w = state.weights * np.exp(logw)
    total = float(new_w.sum())
    if total <= 0.0 or not np.isfinite(total):
        logger.warning("degenerate belief update: all weights underflowed, resetting to uniform")
        new_w = np.full_like(state.weights, 1.0 / state.particle_count)
    else:
        new_w = new_w / total

    self_ids, opp_ids = state.self_identities, state.opponent_identities
    ess = 1.0 / float((new_w**2).sum())
    if ess < state.particle_count / 2.0:
        idx = _systematic_resample(new_w, rng)
        self_ids = self_ids[idx]
        opp_ids = opp_ids[idx]
        new_w = np.full_like(new_w, 1.0 / state.particle_count)
        if config.drift_rate > 0.0:
            self_ids = self_ids + rng.normal(0.0, config.drift_rate, self_ids.shape)
            opp_ids = opp_ids + rng.normal(0.0, config.drift_rate, opp_ids.shape)
        self_ids = np.clip(self_ids, EPA_MIN, EPA_MAX)
        opp_ids = np.clip(opp_ids, EPA_MIN, EPA_MAX)

    return BeliefState(self_ids, opp_ids, new_w, last_action=state.last_action)


def _sample_particle_index(weights: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    return int(np.searchsorted(np.cumsum(weights), u).clip(0, weights.shape[0] - 1))


def _event_deflections(
    selfs: np.ndarray, behavior: np.ndarray, opps: np.ndarray, model: ImpressionModel
) -> np.ndarray:
    n = selfs.shape[0]
    F = np.concatenate([selfs, np.broadcast_to(behavior, (n, 3)), opps], axis=1)
    d = F - model.transients(F)
    return np.einsum("ij,ij->i", d, d)


def plan_action(
    state: BeliefState,
    view: AgentView,
    model: ImpressionModel,
    semantics: ActionSemantics,
    matrix,
    config: AgentConfig,
    rng: np.random.Generator,
    last_observed: Epa | None = None,
) -> Action:
    """Choose an action from the current belief.

    With no search budget: sample one particle by weight and discretize the
    deflection-minimizing behavior of its identity pair. With a budget:
    run that many sampled-lookahead iterations. Each iteration draws a
    particle, picks a root action with probability proportional to the
    inverse-deflection prior of that action under the particle, and rolls
    out ``rollout_depth`` rounds of play against the particle's predicted
    opponent (root action first, prior-sampled own moves after), scoring
    range-normalized matrix payoffs. Root values are prior-smoothed mean
    returns; the higher value wins, ties going to the higher prior and then
    to cooperation.
    """
    prior_epa = last_observed if last_observed is not None else semantics.cooperate_epa

    if config.planning_budget == 0:
        j = _sample_particle_index(state.weights, rng)
        b = optimal_behavior(
            Epa.from_array(state.self_identities[j]),
            Epa.from_array(state.opponent_identities[j]),
            model,
            prior=prior_epa,
        )
        return nearest_action(b, semantics)

    budget = config.planning_budget
    selfs, opps = state.self_identities, state.opponent_identities

    # Per-particle quantities shared by every iteration that samples it.
    d_coop = _event_deflections(selfs, semantics.cooperate_epa.as_array(), opps, model)
    d_defect = _event_deflections(selfs, semantics.defect_epa.as_array(), opps, model)
    inv_c, inv_d = 1.0 / (1.0 + d_coop), 1.0 / (1.0 + d_defect)
    prior_c = inv_c / (inv_c + inv_d)

    preds = _predict_opponent_behavior(state, model, prior=prior_epa)
    dc = preds - semantics.cooperate_epa.as_array()
    dd = preds - semantics.defect_epa.as_array()
    opp_coop = np.einsum("ij,ij->i", dc, dc) <= np.einsum("ij,ij->i", dd, dd)

    cells = matrix.payoff_table().astype(float)
    lo, hi = cells.min(), cells.max()
    norm = (cells - lo) / (hi - lo) if hi > lo else np.full_like(cells, 0.5)

    idx = np.searchsorted(np.cumsum(state.weights), rng.random(budget)).clip(
        0, state.particle_count - 1
    )
    pc = prior_c[idx]
    root_coop = rng.random(budget) < pc
    opp = opp_coop[idx].astype(int)
    returns = norm[root_coop.astype(int), opp]
    if config.rollout_depth > 1:
        tails = rng.random((budget, config.rollout_depth - 1)) < pc[:, None]
        returns = returns + norm[tails.astype(int), opp[:, None]].sum(axis=1)
    returns = returns / config.rollout_depth

    kappa = config.planning_prior_strength
    q0_c = float(pc.mean())
    n_c = int(root_coop.sum())
    n_d = budget - n_c
    sum_c = float(returns[root_coop].sum())
    sum_d = float(returns[~root_coop].sum())
    value_c = (kappa * q0_c + sum_c) / (kappa + n_c) if kappa + n_c > 0 else -np.inf
    value_d = (kappa * (1.0 - q0_c) + sum_d) / (kappa + n_d) if kappa + n_d > 0 else -np.inf

    if value_c > value_d:
        return Action.COOPERATE
    if value_d > value_c:
        return Action.DEFECT
    return Action.COOPERATE if q0_c >= 0.5 else Action.DEFECT


def imitation_choose(
    view: AgentView, own_last_action: Action, q: float, rng: np.random.Generator
) -> Action:
    """Random-neighbor imitation with probability q, otherwise copy the
    single best scorer of the last round among self and neighbors (ties
    broken uniformly)."""
    if rng.random() < q:
        j = int(rng.integers(len(view.neighbor_summaries)))
        return view.neighbor_summaries[j][0]
    best = view.own_last_payoff
    tied = [own_last_action]
    for action, payoff in view.neighbor_summaries:
        if payoff > best:
            best = payoff
            tied = [action]
        elif payoff == best:
            tied.append(action)
    if len(tied) == 1:
        return tied[0]
    return tied[int(rng.integers(len(tied)))]


class Agent:
    """Drives one node: applies the round-0 rule of its family, then folds
    each round's observations into state before choosing."""

    def __init__(self, config: AgentConfig, model: ImpressionModel, rng: np.random.Generator):
        self.config = config
        self.model = model
        self.state = init_agent(config, rng)

    def act(self, view: AgentView, matrix, rng: np.random.Generator) -> Action:
        cfg = self.config
        fam = cfg.family
        if fam is AgentFamily.ALL_C:
            action = Action.COOPERATE
        elif fam is AgentFamily.ALL_D:
            action = Action.DEFECT
        elif fam is AgentFamily.RANDOM_COIN:
            action = Action.COOPERATE if rng.random() < 0.5 else Action.DEFECT
        elif fam is AgentFamily.TIT_FOR_TAT_AGGREGATE:
            action = self._act_tit_for_tat(view)
        elif fam is AgentFamily.IMITATION:
            action = self._act_imitation(view, rng)
        else:
            action = self._act_affective(view, matrix, rng)
        self.state.last_action = action
        return action

    def _act_tit_for_tat(self, view: AgentView) -> Action:
        if view.round_index == 0:
            return Action.COOPERATE
        coop = sum(1 for a in view.neighbor_actions if a is Action.COOPERATE)
        return Action.COOPERATE if 2 * coop > len(view.neighbor_summaries) else Action.DEFECT

    def _act_imitation(self, view: AgentView, rng: np.random.Generator) -> Action:
        if view.round_index == 0:
            return Action.COOPERATE if rng.random() < 0.5 else Action.DEFECT
        if not view.neighbor_summaries:
            return self.state.last_action
        return imitation_choose(view, self.state.last_action, self.config.q, rng)

    def _act_affective(self, view: AgentView, matrix, rng: np.random.Generator) -> Action:
        cfg = self.config
        if view.round_index > 0 and view.neighbor_summaries:
            observed = aggregate_opponent_epa(view.neighbor_actions, cfg.semantics)
            self.state.belief = update_belief(self.state.belief, observed, self.model, cfg, rng)
            self.state.last_observed = observed
        if view.round_index == 0 or cfg.planning_budget == 0:
            budget0 = replace(cfg, planning_budget=0)
            return plan_action(
                self.state.belief, view, self.model, cfg.semantics, matrix, budget0, rng,
                last_observed=self.state.last_observed,
            )
        return plan_action(
            self.state.belief, view, self.model, cfg.semantics, matrix, cfg, rng,
            last_observed=self.state.last_observed,
        )
