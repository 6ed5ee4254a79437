# %% [markdown]
# # Checking the equilibrium against a brute-force planner
#
# On tiny networks we can grid-search the planner's problem
# `min_x sum_i f_i(x_i) + J(x)` directly using only dispatch costs, then
# compare with where the price iteration ends up.

# %%
import numpy as np

from gridprice import UserSet, build_ptdf, load_case
from gridprice.dynamics import run
from gridprice.oracle import grid_search, joint_lp_kkt_check

for name in ("one_bus", "two_bus"):
    case = load_case(f"cases/{name}.json")
    ptdf = build_ptdf(case)
    users = UserSet.from_case(case)
    traj = run(case, ptdf, users, np.full(len(users), 10.0))
    sol = grid_search(case, ptdf, users, pitch=1e-3)
    print(f"{name}: dynamics x={np.round(traj.terminal.x, 6)}, grid x={np.round(sol.x, 6)}, "
          f"C gap {abs(traj.terminal.C - sol.C):.1e}")

# %% [markdown]
# The grid is exponential in the number of users, so larger cases use the
# stationarity residual and small coordinate probes instead.

# %%
case = load_case("cases/ieee14.json")
ptdf = build_ptdf(case)
users = UserSet.from_case(case)
traj = run(case, ptdf, users, np.full(14, 10.0))
rep = joint_lp_kkt_check(case, ptdf, users, traj.terminal.x)
print(f"residual {rep.residual:.1e}, probes pass: {rep.probes_pass}")
print("smallest probe change:", rep.probes.min())
