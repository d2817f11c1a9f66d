"""Statistical battery over simulation logs.

Likelihood-ratio G-test, one-way ANOVA, and Pearson correlation, each with
p-values, plus the five property reports (network invariance, cooperation
over time, payoff anti-correlation, moody conditional cooperation, player
stratification) computed purely from raw logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import special

from .engine import SimulationLog

SIGNIFICANCE = 0.05


class DegenerateStatisticsError(ValueError):
    """The requested test is undefined on this input (zero marginal or
    zero variance)."""


@dataclass(frozen=True)
class Contingency:
    """2 x k table of non-negative counts; rows are cooperate/defect, columns
    are the compared groups."""

    observed: np.ndarray

    def __post_init__(self) -> None:
        obs = np.asarray(self.observed, dtype=float)
        if obs.ndim != 2 or obs.shape[0] != 2 or obs.shape[1] < 2:
            raise ValueError(f"contingency table must be 2 x k with k >= 2, got {obs.shape}")
        if not np.isfinite(obs).all() or (obs < 0).any():
            raise ValueError("contingency counts must be finite and non-negative")
        if (obs.sum(axis=0) == 0).any():
            raise ValueError("contingency table has an all-zero column")
        object.__setattr__(self, "observed", obs)


def chi2_sf(x: float, df: int) -> float:
    """Chi-square survival function via the regularized upper incomplete gamma."""
    if x < 0:
        raise ValueError("chi-square statistic must be non-negative")
    if df < 1:
        raise ValueError("degrees of freedom must be a positive integer")
    return float(special.gammaincc(df / 2.0, x / 2.0))


def g_test(c: Contingency) -> tuple[float, float, int]:
    """Likelihood-ratio independence test: G = 2 sum O log(O / E) with the
    expectations from row/column marginals and 0 log 0 taken as 0.

    Returns (G, p, df). A zero row marginal makes the test undefined.
    """
    obs = c.observed
    row = obs.sum(axis=1, keepdims=True)
    col = obs.sum(axis=0, keepdims=True)
    if (row == 0).any():
        raise DegenerateStatisticsError("zero row marginal: G-test undefined")
    expected = row * col / obs.sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(obs > 0, obs * np.log(obs / expected), 0.0)
    g = float(2.0 * terms.sum())
    g = max(g, 0.0)
    df = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    return g, chi2_sf(g, df), df


def one_way_anova(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Standard between/within mean-square F ratio with its p-value.

    Requires at least two groups of at least two values each and non-zero
    variance both overall and within groups.
    """
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if len(arrays) < 2 or any(a.size < 2 for a in arrays):
        raise ValueError("ANOVA needs >= 2 groups with >= 2 values each")
    all_values = np.concatenate(arrays)
    grand = all_values.mean()
    if float(((all_values - grand) ** 2).sum()) == 0.0:
        raise DegenerateStatisticsError("zero total variance: ANOVA undefined")
    n_total = all_values.size
    k = len(arrays)
    ss_between = sum(a.size * (a.mean() - grand) ** 2 for a in arrays)
    ss_within = sum(float(((a - a.mean()) ** 2).sum()) for a in arrays)
    if ss_within == 0.0:
        raise DegenerateStatisticsError("zero within-group variance: F is unbounded")
    df_between = k - 1
    df_within = n_total - k
    f_stat = (ss_between / df_between) / (ss_within / df_within)
    p = float(special.fdtrc(df_between, df_within, f_stat))
    return float(f_stat), p


def pearson(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Pearson correlation with a two-sided p-value from the t statistic."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape or xv.ndim != 1 or xv.size < 3:
        raise ValueError("pearson needs two equal-length samples of size >= 3")
    xd = xv - xv.mean()
    yd = yv - yv.mean()
    sx = float(xd @ xd)
    sy = float(yd @ yd)
    if sx == 0.0 or sy == 0.0:
        raise DegenerateStatisticsError("zero variance: correlation undefined")
    r = float((xd @ yd) / math.sqrt(sx * sy))
    r = max(-1.0, min(1.0, r))
    n = xv.size
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(special.stdtr(n - 2, -abs(t)))
    return r, p


# ---------------------------------------------------------------------------
# Property reports
# ---------------------------------------------------------------------------


@dataclass
class PropertyReport:
    """Tabular report with one satisfied flag per row, recomputable from the
    emitted statistics and the documented 0.05 threshold."""

    name: str
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def satisfied_fraction(self) -> float:
        flags = [bool(r["satisfied"]) for r in self.rows if r.get("satisfied") is not None]
        return float(np.mean(flags)) if flags else float("nan")

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(_cell(row.get(c)) for c in self.columns) + "\n")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _included(log: SimulationLog) -> np.ndarray:
    """Mask of agents that actually play games (degree > 0)."""
    return log.degrees > 0


def network_invariance_report(
    logs_by_network: Mapping[str, Sequence[SimulationLog]],
    significance: float = SIGNIFICANCE,
) -> PropertyReport:
    """Per-round G-test of cooperation counts across network types.

    A round is satisfied when the networks are statistically
    indistinguishable (p above the threshold). Rounds where the test is
    undefined (no cooperators or no defectors anywhere) count as not
    satisfied and carry NaN statistics.
    """
    networks = list(logs_by_network.keys())
    if not networks:
        raise ValueError("invariance report needs at least one network")
    rounds = {log.rounds for logs in logs_by_network.values() for log in logs}
    if len(rounds) != 1:
        raise ValueError("all logs must share a round count")
    n_rounds = rounds.pop()

    coop = {}
    totals = {}
    for net in networks:
        logs = logs_by_network[net]
        if not logs:
            raise ValueError(f"no logs for network {net!r}")
        coop[net] = np.sum([log.actions.sum(axis=1) for log in logs], axis=0)
        totals[net] = sum(log.n_agents for log in logs)

    cols = ("round",) + tuple(f"rate_{net}" for net in networks) + ("g", "p", "satisfied")
    report = PropertyReport("network_invariance", cols)
    for t in range(n_rounds):
        c = np.array([coop[net][t] for net in networks], dtype=float)
        n = np.array([totals[net] for net in networks], dtype=float)
        row: dict = {"round": t}
        for net, ci, ni in zip(networks, c, n):
            row[f"rate_{net}"] = 100.0 * ci / ni
        if len(networks) < 2:
            # Nothing to compare: rates only, no test.
            row.update(g=float("nan"), p=float("nan"), satisfied=None)
        else:
            try:
                g, p, _ = g_test(Contingency(np.stack([c, n - c])))
                row.update(g=g, p=p, satisfied=p > significance)
            except (DegenerateStatisticsError, ValueError):
                row.update(g=float("nan"), p=float("nan"), satisfied=False)
        report.rows.append(row)
    report.summary = {
        "rounds": n_rounds,
        "satisfied_fraction": report.satisfied_fraction(),
    }
    return report


def anticorrelation_report(
    logs: Sequence[SimulationLog],
    setting: str | None = None,
    significance: float = SIGNIFICANCE,
) -> PropertyReport:
    """Do defectors out-earn cooperators?

    Compares per-round payoffs grouped by that round's action with one-way
    ANOVA, and correlates per-agent whole-game cooperation rate against
    cumulative score normalized by the simulation's mean cumulative score.
    Satisfied when defectors earn significantly more and the correlation is
    significantly negative. Isolated agents play no games and are excluded.
    """
    if not logs:
        raise ValueError("no logs")
    setting = setting if setting is not None else logs[0].setting

    coop_pay: list[np.ndarray] = []
    defect_pay: list[np.ndarray] = []
    rates: list[np.ndarray] = []
    norm_scores: list[np.ndarray] = []
    for log in logs:
        inc = _included(log)
        if not inc.any():
            continue
        pay = log.payoffs[:, inc] / log.payoff_scale
        act = log.actions[:, inc].astype(bool)
        coop_pay.append(pay[act])
        defect_pay.append(pay[~act])
        cum = pay.sum(axis=0)
        mean_cum = cum.mean()
        if mean_cum != 0.0:
            norm_scores.append(cum / mean_cum)
        else:
            norm_scores.append(cum)
        rates.append(act.mean(axis=0))

    coop_all = np.concatenate(coop_pay) if coop_pay else np.array([])
    defect_all = np.concatenate(defect_pay) if defect_pay else np.array([])
    if coop_all.size < 2 or defect_all.size < 2:
        raise DegenerateStatisticsError("a payoff group is empty: population never mixes actions")
    mean_c = float(coop_all.mean())
    mean_d = float(defect_all.mean())
    f_stat, p_anova = one_way_anova([coop_all, defect_all])
    r, p_r = pearson(np.concatenate(rates), np.concatenate(norm_scores))

    satisfied_scores = mean_d > mean_c and p_anova < significance
    satisfied_corr = r < 0 and p_r < significance
    report = PropertyReport(
        "anticorrelation",
        ("setting", "mean_c", "mean_d", "f", "p", "r", "r_p", "satisfied"),
    )
    report.rows.append(
        {
            "setting": setting,
            "mean_c": mean_c,
            "mean_d": mean_d,
            "f": f_stat,
            "p": p_anova,
            "r": r,
            "r_p": p_r,
            "satisfied": satisfied_scores and satisfied_corr,
        }
    )
    report.summary = {
        "satisfied_scores": satisfied_scores,
        "satisfied_correlation": satisfied_corr,
    }
    return report


def _hysteresis_counts(logs: Sequence[SimulationLog]) -> np.ndarray:
    """2x2 counts of action_t (rows: C, D) by action_{t-1} (cols: C, D)."""
    counts = np.zeros((2, 2), dtype=np.int64)
    for log in logs:
        prev = log.actions[:-1].astype(bool)
        curr = log.actions[1:].astype(bool)
        counts[0, 0] += int((curr & prev).sum())
        counts[0, 1] += int((curr & ~prev).sum())
        counts[1, 0] += int((~curr & prev).sum())
        counts[1, 1] += int((~curr & ~prev).sum())
    return counts


def _conditionality_counts(logs: Sequence[SimulationLog]) -> np.ndarray:
    """2x2 counts of action_t (rows: C, D) by the strict-majority neighbor
    composition at t-1 (cols: mostly C, mostly D); ties and isolated nodes
    drop out."""
    counts = np.zeros((2, 2), dtype=np.int64)
    for log in logs:
        deg = log.degrees[None, :]
        prev_coop = log.coop_neighbors[:-1]
        maj_c = 2 * prev_coop > deg
        maj_d = 2 * prev_coop < deg
        maj_d &= deg > 0
        curr = log.actions[1:].astype(bool)
        counts[0, 0] += int((curr & maj_c).sum())
        counts[0, 1] += int((curr & maj_d).sum())
        counts[1, 0] += int((~curr & maj_c).sum())
        counts[1, 1] += int((~curr & maj_d).sum())
    return counts


def mcc_report(
    logs: Sequence[SimulationLog],
    setting: str | None = None,
    significance: float = SIGNIFICANCE,
) -> PropertyReport:
    """Moody conditional cooperation: hysteresis (more likely to cooperate
    after cooperating) and conditionality (more likely to cooperate after a
    cooperating-majority neighborhood), each G-tested."""
    if not logs:
        raise ValueError("no logs")
    setting = setting if setting is not None else logs[0].setting

    hyst = _hysteresis_counts(logs)
    cond = _conditionality_counts(logs)

    def rates_and_test(counts: np.ndarray) -> tuple[float, float, float, float, bool]:
        col = counts.sum(axis=0)
        if (col == 0).any():
            raise DegenerateStatisticsError("empty column in 2x2 table")
        rate_after_c = 100.0 * counts[0, 0] / col[0]
        rate_after_d = 100.0 * counts[0, 1] / col[1]
        g, p, _ = g_test(Contingency(counts.astype(float)))
        return rate_after_c, rate_after_d, g, p, (rate_after_c > rate_after_d and p < significance)

    c_after_c, c_after_d, g_h, p_h, sat_h = rates_and_test(hyst)
    c_near_c, c_near_d, g_c, p_c, sat_c = rates_and_test(cond)

    report = PropertyReport(
        "mcc",
        (
            "setting",
            "c_after_c_pct", "c_after_d_pct", "hysteresis_g", "hysteresis_p", "hysteresis_satisfied",
            "c_near_c_pct", "c_near_d_pct", "conditionality_g", "conditionality_p",
            "conditionality_satisfied", "satisfied",
        ),
    )
    report.rows.append(
        {
            "setting": setting,
            "c_after_c_pct": c_after_c,
            "c_after_d_pct": c_after_d,
            "hysteresis_g": g_h,
            "hysteresis_p": p_h,
            "hysteresis_satisfied": sat_h,
            "c_near_c_pct": c_near_c,
            "c_near_d_pct": c_near_d,
            "conditionality_g": g_c,
            "conditionality_p": p_c,
            "conditionality_satisfied": sat_c,
            "satisfied": sat_h and sat_c,
        }
    )
    return report


STRATA = ("pure_d", "mostly_d", "mixed", "mostly_c", "pure_c")


def stratify_agent(coop_rounds: int, rounds: int) -> str:
    """Class of a whole-game cooperation count, with exact 1/3 and 2/3 cuts:
    the boundaries fall to the 'mostly' classes."""
    if coop_rounds == 0:
        return "pure_d"
    if coop_rounds == rounds:
        return "pure_c"
    if 3 * coop_rounds <= rounds:
        return "mostly_d"
    if 3 * coop_rounds >= 2 * rounds:
        return "mostly_c"
    return "mixed"


def stratification_report(
    logs: Sequence[SimulationLog], setting: str | None = None
) -> PropertyReport:
    """Population shares of the five cooperation-rate classes and the
    stratified-population condition: the mixed class strictly dominates each
    'mostly' class, which strictly dominates its non-empty 'pure' class."""
    if not logs:
        raise ValueError("no logs")
    setting = setting if setting is not None else logs[0].setting

    tallies = {s: 0 for s in STRATA}
    total = 0
    for log in logs:
        counts = log.actions.sum(axis=0)
        for c in counts:
            tallies[stratify_agent(int(c), log.rounds)] += 1
            total += 1
    pct = {s: 100.0 * tallies[s] / total for s in STRATA}
    satisfied = (
        pct["mixed"] > pct["mostly_d"] > pct["pure_d"] > 0.0
        and pct["mixed"] > pct["mostly_c"] > pct["pure_c"] > 0.0
    )
    report = PropertyReport(
        "stratification",
        ("setting", "pure_d_pct", "mostly_d_pct", "mixed_pct", "mostly_c_pct", "pure_c_pct", "satisfied"),
    )
    report.rows.append(
        {
            "setting": setting,
            "pure_d_pct": pct["pure_d"],
            "mostly_d_pct": pct["mostly_d"],
            "mixed_pct": pct["mixed"],
            "mostly_c_pct": pct["mostly_c"],
            "pure_c_pct": pct["pure_c"],
            "satisfied": satisfied,
        }
    )
    return report


def cooperation_timeseries(logs: Sequence[SimulationLog]) -> np.ndarray:
    """Mean cooperation rate per round across simulations."""
    if not logs:
        raise ValueError("no logs")
    return np.mean([log.cooperation_rates() for log in logs], axis=0)


HISTOGRAM_ROUND_LABELS = (0, 10, 30, 60)
HISTOGRAM_BIN_WIDTH = 0.05


def cooperation_histogram(
    logs: Sequence[SimulationLog], round_labels: Sequence[int] = HISTOGRAM_ROUND_LABELS
) -> dict[int, np.ndarray]:
    """Counts of simulations per cooperation-rate bin (width 0.05) at the
    checkpoint rounds. Labels past the last round clamp to it."""
    if not logs:
        raise ValueError("no logs")
    edges = np.linspace(0.0, 1.0, int(round(1.0 / HISTOGRAM_BIN_WIDTH)) + 1)
    out = {}
    for label in round_labels:
        t = min(label, logs[0].rounds - 1)
        rates = np.array([log.actions[t].mean() for log in logs])
        counts, _ = np.histogram(rates, bins=edges)
        out[label] = counts
    return out


def cooperation_report(logs: Sequence[SimulationLog], setting: str | None = None) -> PropertyReport:
    """Cooperation-over-time report: the per-round mean rate plus the
    per-checkpoint histograms, in long form."""
    if not logs:
        raise ValueError("no logs")
    setting = setting if setting is not None else logs[0].setting
    report = PropertyReport("cooperation", ("setting", "kind", "round", "bin_low", "value"))
    for t, rate in enumerate(cooperation_timeseries(logs)):
        report.rows.append(
            {"setting": setting, "kind": "rate", "round": t, "bin_low": None, "value": float(rate)}
        )
    for label, counts in cooperation_histogram(logs).items():
        for b, count in enumerate(counts):
            report.rows.append(
                {
                    "setting": setting,
                    "kind": "histogram",
                    "round": label,
                    "bin_low": round(b * HISTOGRAM_BIN_WIDTH, 2),
                    "value": int(count),
                }
            )
    return report
