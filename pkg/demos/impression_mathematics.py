"""A walk through the affective mathematics.

Sentiments are points in a three-dimensional evaluation/potency/activity
space. An actor-behavior-object event shifts them; the squared distance
between the culture's baseline sentiment and the shifted impression is the
deflection, and behavior is chosen to keep that small.
"""

import numpy as np

from inpd import (
    DEFAULT_SEMANTICS,
    Epa,
    FRIEND,
    FundamentalSentiment,
    SCROOGE,
    default_impression_model,
    deflection,
    form_impression,
    nearest_action,
    optimal_behavior,
)

model = default_impression_model()

# A warm identity directing a warm act at a warm identity barely moves.
friendly_event = FundamentalSentiment(FRIEND, DEFAULT_SEMANTICS.cooperate_epa, FRIEND)
tau = form_impression(friendly_event, model)
print("friend flatters friend:")
print("  fundamentals:", np.round(friendly_event.as_array(), 2))
print("  transients:  ", np.round(tau.as_array(), 2))
print("  deflection:  ", round(deflection(friendly_event, tau), 3))

# The same identity abandoning a friend creates a large deflection.
harsh_event = FundamentalSentiment(FRIEND, DEFAULT_SEMANTICS.defect_epa, FRIEND)
tau = form_impression(harsh_event, model)
print("friend abandons friend -> deflection", round(deflection(harsh_event, tau), 3))

# Minimizing deflection over all possible behaviors recovers the classic
# identity-driven action matrix: who you are matters more than whom you face.
print("\ndeflection-minimizing behavior, discretized to the game actions:")
for actor, a_name in ((FRIEND, "friend"), (SCROOGE, "scrooge")):
    for obj, o_name in ((FRIEND, "friend"), (SCROOGE, "scrooge")):
        best = optimal_behavior(actor, obj, model, prior=Epa(0, 0, 0))
        action = nearest_action(best, DEFAULT_SEMANTICS)
        print(
            f"  {a_name:8s} toward {o_name:8s}: b* = {np.round(best.as_array(), 2)}"
            f" -> {action.letter}"
        )
