"""Launching the complete experiment grid.

The shipped full-grid configuration runs 17 agent settings (six affective,
eleven imitation) on three networks and three reward matrices, 20
simulations of 60 rounds each: 3060 runs in total. On a small machine this
is an overnight job; this script just validates the configuration and
prints the plan. Launch it for real with:

    inpd simulate configs/full_grid.json --workers 8
"""

from pathlib import Path

from inpd import parse_config
from inpd.engine import make_run_specs

config = parse_config(Path(__file__).resolve().parent.parent / "configs" / "full_grid.json")
specs = make_run_specs(config)
print(f"master seed : {config.master_seed}")
print(f"settings    : {', '.join(a.shorthand() for a in config.agents)}")
print(f"networks    : {', '.join(n.text for n in config.networks)}")
print(f"matrices    : {', '.join(m.label for m in config.matrices)}")
print(f"grid        : {len(config.agents)} x {len(config.networks)} x {len(config.matrices)} "
      f"x {config.sims_per_cell} sims = {len(specs)} runs of {config.rounds} rounds")
print(f"first run   : {specs[0].run_id} (seed key {specs[0].seed_key})")
print(f"last run    : {specs[-1].run_id}")
