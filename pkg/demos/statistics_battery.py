"""The three significance tests on worked examples."""

import numpy as np

from inpd import Contingency, chi2_sf, g_test, one_way_anova, pearson

# Three networks of 3380 agents each with nearly identical cooperation
# counts: the likelihood-ratio test finds no evidence of a difference.
counts = np.array([[1109, 1117, 1131], [2271, 2263, 2249]], dtype=float)
g, p, df = g_test(Contingency(counts))
print(f"similar counts:  G={g:.3f} df={df} p={p:.3f} (indistinguishable)")

# The same test one round later, when the networks have diverged.
c = np.array([850, 1042, 882], dtype=float)
g, p, df = g_test(Contingency(np.stack([c, 3380 - c])))
print(f"diverged counts: G={g:.2f} df={df} p={p:.2e} (clearly different)")

# With two degrees of freedom the chi-square tail is a pure exponential.
print(f"chi2_sf(13.51, 2) = {chi2_sf(13.51, 2):.6f} = exp(-6.755) = {np.exp(-6.755):.6f}")

rng = np.random.default_rng(0)
low = rng.normal(25.7, 8, 400)
high = rng.normal(30.5, 8, 400)
f, p = one_way_anova([low, high])
print(f"two payoff groups: F={f:.1f} p={p:.2e}")

x = rng.uniform(0, 1, 200)
y = 1.2 - 0.4 * x + rng.normal(0, 0.3, 200)
r, p = pearson(x, y)
print(f"cooperation vs score: r={r:.3f} p={p:.2e}")
