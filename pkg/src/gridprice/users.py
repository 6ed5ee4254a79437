"""Price-taking users and their best responses.

A user facing price ``p`` consumes the unique minimiser of
``f(x) + p * x``, i.e. the solution of ``f'(x) = -p``. With a strictly
convex ``f`` that response is a strictly decreasing bijection of ``p``.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Disutility",
    "QuadraticDisutility",
    "UserSet",
    "grad_disutility",
    "best_response",
    "best_response_profile",
]


class Disutility(abc.ABC):
    """Strictly convex, twice differentiable cost of consuming ``x`` MW."""

    @abc.abstractmethod
    def value(self, x):
        ...

    @abc.abstractmethod
    def grad(self, x):
        ...

    @abc.abstractmethod
    def inverse_grad(self, g):
        """The unique ``x`` with ``grad(x) == g``."""

    @abc.abstractmethod
    def curvature(self, x):
        ...

    def best_response(self, p):
        return self.inverse_grad(-p)

    def response_slope(self, p):
        """Derivative of the best response with respect to the price."""
        return -1.0 / self.curvature(self.best_response(p))


@dataclass(frozen=True)
class QuadraticDisutility(Disutility):
    """``f(x) = a * (x - xbar)**2`` with ``a > 0``.

    Works on plain floats, numpy arrays and ``fractions.Fraction`` alike.
    """

    xbar: float
    a: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"curvature a must be positive, got {self.a}")

    def value(self, x):
        return self.a * (x - self.xbar) ** 2

    def grad(self, x):
        return 2 * self.a * (x - self.xbar)

    def inverse_grad(self, g):
        return self.xbar + g / (2 * self.a)

    def curvature(self, x):
        return 2 * self.a

    def best_response(self, p):
        return self.xbar - p / (2 * self.a)


def grad_disutility(u: Disutility, x):
    return u.grad(x)


def best_response(u: Disutility, p):
    return u.best_response(p)


class UserSet:
    """Ordered users aligned with the demand/price vector index.

    Quadratic sets are evaluated vectorised; anything else falls back to a
    per-user loop.
    """

    def __init__(self, users: Sequence[Disutility]):
        users = tuple(users)
        if not users:
            raise ValueError("a UserSet needs at least one user")
        self.users = users
        self._quadratic = all(isinstance(u, QuadraticDisutility) for u in users)
        if self._quadratic:
            self.xbar = np.array([u.xbar for u in users], dtype=float)
            self.a = np.array([u.a for u in users], dtype=float)

    @classmethod
    def from_case(cls, case) -> "UserSet":
        return cls([QuadraticDisutility(u.xbar, u.a) for u in case.users])

    def __len__(self) -> int:
        return len(self.users)

    def __iter__(self):
        return iter(self.users)

    def _check(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (len(self.users),):
            raise ValueError(f"expected a vector of length {len(self.users)}, got shape {v.shape}")
        return v

    def best_response(self, p) -> np.ndarray:
        p = self._check(p)
        if self._quadratic:
            return self.xbar - p / (2 * self.a)
        return np.array([u.best_response(pi) for u, pi in zip(self.users, p)])

    def grad(self, x) -> np.ndarray:
        x = self._check(x)
        if self._quadratic:
            return 2 * self.a * (x - self.xbar)
        return np.array([u.grad(xi) for u, xi in zip(self.users, x)])

    def disutility(self, x) -> np.ndarray:
        x = self._check(x)
        if self._quadratic:
            return self.a * (x - self.xbar) ** 2
        return np.array([u.value(xi) for u, xi in zip(self.users, x)])

    def total(self, x) -> float:
        return float(np.sum(self.disutility(x)))


def best_response_profile(users: UserSet, p) -> np.ndarray:
    return users.best_response(p)
