# %% [markdown]
# # Price iteration on the 14-bus network
#
# Starting from random prices, the operator repeatedly nudges each price
# toward the LMP seen after users respond: `p <- p + alpha (lmp - p)`.
# Line 7-8 is the only limited line, so once it congests the terminal prices
# settle into two groups.

# %%
import matplotlib.pyplot as plt
import numpy as np

from gridprice import UserSet, build_ptdf, load_case
from gridprice.dcopf import DispatchModel
from gridprice.dynamics import RunConfig, lyapunov_series, run
from gridprice.experiment import cluster_values, initial_prices

case = load_case("cases/ieee14.json")
ptdf = build_ptdf(case)
users = UserSet.from_case(case)
model = DispatchModel(case, ptdf)
traj = run(case, ptdf, users, initial_prices(14, seed=7), RunConfig(alpha=0.05), model=model)
print(traj.status.value, traj.iterations, "steps")

# %%
fig, axes = plt.subplots(1, 3, figsize=(13, 3.5))
axes[0].plot(traj.prices)
axes[0].set_title("prices p_i")
axes[1].plot(traj.demands)
axes[1].set_title("demands x_i")
axes[2].semilogy(np.maximum(lyapunov_series(traj), 1e-16))
axes[2].set_title("C_k - C_terminal")
for ax in axes:
    ax.set_xlabel("step")
fig.tight_layout()
plt.show()

# %%
terminal = traj.terminal
print("LMP clusters:", np.round(cluster_values(terminal.lmp), 4))
print("binding:", model.evaluate(terminal.x).binding)

# %% [markdown]
# Different starting points end at the same prices.

# %%
ends = [run(case, ptdf, users, initial_prices(14, seed=s), model=model).terminal.p for s in range(5)]
print("spread:", np.max(np.ptp(np.array(ends), axis=0)))
