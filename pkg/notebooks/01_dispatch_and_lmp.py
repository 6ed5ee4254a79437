# %% [markdown]
# # Dispatch cost and locational prices
#
# `J(x)` is the cheapest way to serve a demand profile `x` given line limits.
# It is convex and piecewise linear in `x`, and the dispatch LP's multipliers
# give the LMP vector, one subgradient of `J`.

# %%
import matplotlib.pyplot as plt
import numpy as np

from gridprice import DispatchModel, build_ptdf, load_case

case = load_case("cases/two_bus.json")
ptdf = build_ptdf(case)
model = DispatchModel(case, ptdf)
ptdf

# %% [markdown]
# Cheap generation sits at bus 0 and the single line carries at most 1 MW.
# Once the line fills, bus 1 has to buy from its own expensive unit and the
# two LMPs split.

# %%
res = model.evaluate([9.5, 4.0])
print(res.to_json())

# %% [markdown]
# Sweep the demand at bus 1 and watch `J` bend where the line saturates.

# %%
x1 = np.linspace(0.0, 12.0, 241)
J = np.array([model.cost([9.5, v]) for v in x1])
lmp1 = np.array([model.evaluate([9.5, v]).lmp[1] for v in x1])

fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.5))
ax0.plot(x1, J)
ax0.set_xlabel("demand at bus 1 (MW)")
ax0.set_ylabel("J ($/h)")
ax1.step(x1, lmp1, where="post")
ax1.set_xlabel("demand at bus 1 (MW)")
ax1.set_ylabel("LMP at bus 1 ($/MWh)")
fig.tight_layout()
plt.show()

# %% [markdown]
# The subgradient inequality `J(y) >= J(x) + lmp(x) . (y - x)` should hold for
# any pair of servable profiles.

# %%
rng = np.random.default_rng(0)
worst = np.inf
for _ in range(200):
    x, y = rng.uniform(0, 12, 2), rng.uniform(0, 12, 2)
    r = model.evaluate(x)
    worst = min(worst, model.cost(y) - r.value - r.lmp @ (y - x))
print(f"smallest slack over 200 pairs: {worst:.2e}")
