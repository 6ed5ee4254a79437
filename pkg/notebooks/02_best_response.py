# %% [markdown]
# # How a user responds to price
#
# A user with quadratic disutility `a (x - xbar)^2` facing price `p` picks the
# demand that balances discomfort against the bill: `x = xbar - p / (2a)`.

# %%
from fractions import Fraction

import matplotlib.pyplot as plt
import numpy as np

from gridprice import QuadraticDisutility, best_response

prices = np.linspace(0, 30, 61)
fig, ax = plt.subplots(figsize=(5, 3.5))
for a in (0.5, 1.0, 2.0):
    f = QuadraticDisutility(8.0, a)
    ax.plot(prices, [best_response(f, p) for p in prices], label=f"a = {a}")
ax.set_xlabel("price p")
ax.set_ylabel("demand x*(p)")
ax.legend()
plt.show()

# %% [markdown]
# Stiffer users (larger `a`) react less. With rational inputs the first-order
# condition holds exactly.

# %%
f = QuadraticDisutility(Fraction(8), Fraction(3, 2))
x = best_response(f, Fraction(7))
x, f.grad(x) + 7
