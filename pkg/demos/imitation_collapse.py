"""Imitators race to extinction.

With q = 0.5, half the time an agent copies a random neighbor and half the
time the best scorer in its neighborhood. Under a strongly tempting payoff
matrix this collapses to full defection within a dozen rounds on the torus,
while sparse random graphs keep tiny frozen pockets alive (isolated nodes
imitate only themselves).
"""

import numpy as np

from inpd import M1, RunSpec, run_simulation
from inpd.agents import AgentConfig
from inpd.network import NetworkSpec

for net in ("grid8_torus_13x13", "er(169,434)"):
    rates = []
    for k in range(5):
        spec = RunSpec(
            agent=AgentConfig.from_shorthand("IM50"),
            network=NetworkSpec(net),
            matrix=M1,
            rounds=60,
            sim_id=k,
            seed_key=(2026, 0, 0, 0, k),
        )
        rates.append(run_simulation(spec).cooperation_rates())
    mean = np.mean(rates, axis=0)
    picks = [0, 1, 2, 4, 8, 16, 32, 59]
    print(f"{net}: cooperation % by round")
    print("  rounds", picks)
    print("  rates ", [f"{100 * mean[t]:.2f}" for t in picks])
