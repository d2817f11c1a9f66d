import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from inpd.engine import SimulationLog, score_round
from inpd.network import Graph


def make_log(
    actions,
    graph: Graph | None = None,
    matrix=None,
    payoffs=None,
    setting="test",
    network="netA",
    matrix_label=None,
    sim_id=0,
    payoff_scale=1,
) -> SimulationLog:
    """Assemble a SimulationLog from an action matrix, scoring it on the
    given graph/matrix unless explicit payoffs are supplied."""
    actions = np.asarray(actions, dtype=np.uint8)
    rounds, n = actions.shape
    if graph is not None:
        degrees = graph.degrees
        coopn = np.zeros((rounds, n), dtype=np.int32)
        pay = np.zeros((rounds, n), dtype=np.int64)
        for t in range(rounds):
            counts = [int(actions[t, list(graph.adjacency[i])].sum()) if graph.adjacency[i] else 0 for i in range(n)]
            coopn[t] = counts
            if matrix is not None:
                pay[t] = score_round(actions[t], graph, matrix)
        scale = matrix.scale if matrix is not None else payoff_scale
    else:
        degrees = np.full(n, 1, dtype=np.int64)
        coopn = np.zeros((rounds, n), dtype=np.int32)
        pay = np.zeros((rounds, n), dtype=np.int64)
        scale = payoff_scale
    if payoffs is not None:
        pay = np.asarray(payoffs, dtype=np.int64)
    return SimulationLog(
        actions=actions,
        payoffs=pay,
        coop_neighbors=coopn,
        degrees=np.asarray(degrees, dtype=np.int64),
        payoff_scale=scale,
        setting=setting,
        network=network,
        matrix=matrix_label or (matrix.label if matrix is not None else "M1"),
        sim_id=sim_id,
        seed_key=(0, 0, 0, 0, sim_id),
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
